#include "ovt/signal_model.hpp"

#include "ovt/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <json.hpp>

namespace ovt {

namespace {

constexpr double kSpacingTolS = 1e-6;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view field, std::size_t row, int column) {
    field = trim(field);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw Error(Errc::malformed_row,
                    "row " + std::to_string(row) + " column " + std::to_string(column) +
                        ": cannot parse '" + std::string(field) + "'");
    if (!std::isfinite(value))
        throw Error(Errc::malformed_row,
                    "row " + std::to_string(row) + " column " + std::to_string(column) +
                        ": non-finite value");
    return value;
}

int parse_flag(std::string_view field, std::size_t row, int column) {
    const double value = parse_double(field, row, column);
    if (value == 0.0)
        return 0;
    if (value == 1.0)
        return 1;
    throw Error(Errc::malformed_row,
                "row " + std::to_string(row) + " column " + std::to_string(column) +
                    ": categorical signal must be 0 or 1, got " + std::string(trim(field)));
}

void check_range(bool ok, std::size_t row, const char* what) {
    if (!ok)
        throw Error(Errc::malformed_row, "row " + std::to_string(row) + ": " + what);
}

// Shortest representation that parses back to the same double.
void append_double(std::string& out, double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    out.append(buf, ptr);
}

} // namespace

double SignalFrame::signal(int index) const {
    switch (index) {
    case 0: return accel_pedal_pos;
    case 1: return dist_ahead;
    case 2: return speed_ahead;
    case 3: return rel_speed_left_wheel;
    case 4: return vehicle_speed;
    case 5: return lat_accel;
    case 6: return lon_accel;
    case 7: return lane_change_status;
    case 8: return left_indicator;
    case 9: return right_indicator;
    default:
        throw Error(Errc::invalid_argument, "signal index out of range: " + std::to_string(index));
    }
}

ClassLabel parse_label(std::string_view text) {
    if (text == "overtake")
        return ClassLabel::overtake;
    if (text == "no_overtake")
        return ClassLabel::no_overtake;
    throw Error(Errc::unknown_label, "'" + std::string(text) + "'");
}

std::string_view label_name(ClassLabel label) {
    return label == ClassLabel::overtake ? "overtake" : "no_overtake";
}

Recording parse_recording(std::string_view csv_text, const ManifestEntry& entry) {
    Recording rec;
    rec.file_id = entry.file;
    rec.truck_id = entry.truck_id;
    rec.label = entry.label;

    std::size_t pos = 0;
    std::size_t row = 0;
    bool have_prev_t = false;
    double prev_t = 0.0;
    while (pos < csv_text.size()) {
        std::size_t eol = csv_text.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = csv_text.size();
        const std::string_view line = trim(csv_text.substr(pos, eol - pos));
        pos = eol + 1;
        if (line.empty())
            continue;

        if (row == 0) {
            if (line != "t,s1,s2,s3,s4,s5,s6,s7,s8,s9,s10")
                throw Error(Errc::bad_format, "bad header: '" + std::string(line) + "'");
            ++row;
            continue;
        }

        std::array<std::string_view, 11> fields;
        std::size_t count = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string_view field =
                comma == std::string_view::npos ? line.substr(start) : line.substr(start, comma - start);
            if (count < fields.size())
                fields[count] = field;
            ++count;
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        if (count != 11)
            throw Error(Errc::malformed_row,
                        "row " + std::to_string(row) + ": expected 11 columns, got " +
                            std::to_string(count));

        const double t = parse_double(fields[0], row, 0);
        if (have_prev_t) {
            const double dt = t - prev_t;
            if (std::abs(dt - kFramePeriodS) > kSpacingTolS)
                throw Error(Errc::non_uniform_rate,
                            "row " + std::to_string(row) + ": spacing " + std::to_string(dt) +
                                " s, expected 0.1 s");
        }
        prev_t = t;
        have_prev_t = true;

        SignalFrame frame;
        frame.accel_pedal_pos = parse_double(fields[1], row, 1);
        frame.dist_ahead = parse_double(fields[2], row, 2);
        frame.speed_ahead = parse_double(fields[3], row, 3);
        frame.rel_speed_left_wheel = parse_double(fields[4], row, 4);
        frame.vehicle_speed = parse_double(fields[5], row, 5);
        frame.lat_accel = parse_double(fields[6], row, 6);
        frame.lon_accel = parse_double(fields[7], row, 7);
        frame.lane_change_status = parse_flag(fields[8], row, 8);
        frame.left_indicator = parse_flag(fields[9], row, 9);
        frame.right_indicator = parse_flag(fields[10], row, 10);

        check_range(frame.accel_pedal_pos >= 0.0 && frame.accel_pedal_pos <= 1.0, row,
                    "accelerator position outside [0,1]");
        check_range(frame.dist_ahead >= 0.0, row, "negative distance ahead");
        check_range(frame.speed_ahead >= 0.0, row, "negative speed ahead");
        check_range(frame.vehicle_speed >= 0.0, row, "negative vehicle speed");

        rec.frames.push_back(frame);
        ++row;
    }
    if (row == 0)
        throw Error(Errc::bad_format, "empty recording file");
    return rec;
}

Recording parse_recording(std::string_view csv_text, std::string_view manifest_entry_json) {
    ManifestEntry entry;
    try {
        const auto parsed = nlohmann::json::parse(manifest_entry_json);
        entry.file = parsed.at("file").get<std::string>();
        entry.truck_id = parsed.at("truck_id").get<std::string>();
        entry.label = parse_label(parsed.at("label").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::bad_format, std::string("manifest entry: ") + e.what());
    }
    return parse_recording(csv_text, entry);
}

std::string serialize_recording(const Recording& rec) {
    std::string out = "t,s1,s2,s3,s4,s5,s6,s7,s8,s9,s10\n";
    out.reserve(out.size() + rec.frames.size() * 96);
    char tbuf[32];
    for (std::size_t i = 0; i < rec.frames.size(); ++i) {
        const SignalFrame& f = rec.frames[i];
        std::snprintf(tbuf, sizeof tbuf, "%.6f", static_cast<double>(i) * kFramePeriodS);
        out += tbuf;
        for (int s = 0; s < SignalFrame::kContinuousCount; ++s) {
            out += ',';
            append_double(out, f.signal(s));
        }
        out += ',';
        out += char('0' + f.lane_change_status);
        out += ',';
        out += char('0' + f.left_indicator);
        out += ',';
        out += char('0' + f.right_indicator);
        out += '\n';
    }
    return out;
}

std::vector<ManifestEntry> parse_manifest(std::string_view json_text) {
    std::vector<ManifestEntry> entries;
    try {
        const auto parsed = nlohmann::json::parse(json_text);
        if (!parsed.is_array())
            throw Error(Errc::bad_format, "manifest must be a JSON array");
        for (const auto& item : parsed) {
            ManifestEntry entry;
            entry.file = item.at("file").get<std::string>();
            entry.truck_id = item.at("truck_id").get<std::string>();
            entry.label = parse_label(item.at("label").get<std::string>());
            entries.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::bad_format, std::string("manifest: ") + e.what());
    }
    return entries;
}

std::string serialize_manifest(const std::vector<ManifestEntry>& entries) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& entry : entries) {
        arr.push_back({{"file", entry.file},
                       {"truck_id", entry.truck_id},
                       {"label", std::string(label_name(entry.label))}});
    }
    return arr.dump(2) + "\n";
}

CroppedRecording crop_around_trigger(const Recording& rec) {
    if (!rec.trigger_index.has_value())
        throw Error(Errc::missing_trigger, "recording '" + rec.file_id + "' has no trigger index");
    const std::size_t trigger = *rec.trigger_index;
    if (trigger < kCropPreFrames)
        throw Error(Errc::insufficient_context,
                    "recording '" + rec.file_id + "': only " + std::to_string(trigger) +
                        " frames before trigger, need " + std::to_string(kCropPreFrames));
    if (trigger + kCropPostFrames > rec.frames.size())
        throw Error(Errc::insufficient_context,
                    "recording '" + rec.file_id + "': only " +
                        std::to_string(rec.frames.size() - trigger) +
                        " frames at/after trigger, need " + std::to_string(kCropPostFrames));
    if (!rec.label.has_value())
        throw Error(Errc::unknown_label, "recording '" + rec.file_id + "' has no class label");

    CroppedRecording crop;
    crop.source_file_id = rec.file_id;
    crop.truck_id = rec.truck_id;
    crop.label = *rec.label;
    crop.frames.assign(rec.frames.begin() + static_cast<std::ptrdiff_t>(trigger - kCropPreFrames),
                       rec.frames.begin() + static_cast<std::ptrdiff_t>(trigger + kCropPostFrames));
    return crop;
}

} // namespace ovt
