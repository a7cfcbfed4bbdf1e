#include "ovt/trigger.hpp"

#include "ovt/errors.hpp"

namespace ovt {

std::optional<std::size_t> detect_trigger(const Recording& rec, const TriggerRule& rule) {
    for (std::size_t i = 0; i < rec.frames.size(); ++i) {
        if (rule.matches(rec.frames[i]))
            return i;
    }
    return std::nullopt;
}

Recording annotate_trigger(const Recording& rec, const TriggerRule& rule) {
    if (rec.trigger_index.has_value())
        throw Error(Errc::already_annotated,
                    "recording '" + rec.file_id + "' already has a trigger index");
    const auto index = detect_trigger(rec, rule);
    if (!index.has_value())
        throw Error(Errc::no_trigger_found, "recording '" + rec.file_id + "'");
    Recording annotated = rec;
    annotated.trigger_index = index;
    return annotated;
}

} // namespace ovt
