#include "ovt/errors.hpp"

namespace ovt {

const char* to_string(Errc code) {
    switch (code) {
    case Errc::malformed_row: return "MalformedRow";
    case Errc::non_uniform_rate: return "NonUniformRate";
    case Errc::unknown_label: return "UnknownLabel";
    case Errc::insufficient_context: return "InsufficientContext";
    case Errc::missing_trigger: return "MissingTrigger";
    case Errc::no_trigger_found: return "NoTriggerFound";
    case Errc::already_annotated: return "AlreadyAnnotated";
    case Errc::too_short: return "TooShort";
    case Errc::unknown_moment: return "UnknownMoment";
    case Errc::empty_class: return "EmptyClass";
    case Errc::missing_file_windows: return "MissingFileWindows";
    case Errc::single_class: return "SingleClass";
    case Errc::non_finite: return "NonFinite";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::empty_moment: return "EmptyMoment";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::bad_format: return "BadFormat";
    case Errc::io_error: return "IoError";
    }
    return "UnknownError";
}

} // namespace ovt
