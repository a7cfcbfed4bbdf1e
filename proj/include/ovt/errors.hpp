#pragma once

#include <stdexcept>
#include <string>

namespace ovt {

// Every failure mode the library reports. Codes are stable; messages are
// diagnostic text only.
enum class Errc {
    malformed_row,
    non_uniform_rate,
    unknown_label,
    insufficient_context,
    missing_trigger,
    no_trigger_found,
    already_annotated,
    too_short,
    unknown_moment,
    empty_class,
    missing_file_windows,
    single_class,
    non_finite,
    length_mismatch,
    empty_moment,
    invalid_config,
    invalid_argument,
    bad_format,
    io_error,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace ovt
