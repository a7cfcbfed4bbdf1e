#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ovt {

// Sampling and cropping geometry shared by the whole pipeline. Traces are
// logged at 10 Hz; an event crop spans [-10 s, +1 s) around the trigger
// frame, i.e. 100 frames before it plus the trigger frame and 9 after.
inline constexpr double kSampleRateHz = 10.0;
inline constexpr double kFramePeriodS = 0.1;
inline constexpr std::size_t kCropPreFrames = 100;
inline constexpr std::size_t kCropPostFrames = 10;
inline constexpr std::size_t kCropFrames = kCropPreFrames + kCropPostFrames;

enum class ClassLabel : int {
    no_overtake = 0,
    overtake = 1,
};

// One 10-signal sample. Signals 1-7 are continuous, 8-10 are binary flags.
struct SignalFrame {
    double accel_pedal_pos = 0.0;      // s1, fraction of full travel [0,1]
    double dist_ahead = 0.0;           // s2, metres to the vehicle ahead
    double speed_ahead = 0.0;          // s3, km/h
    double rel_speed_left_wheel = 0.0; // s4, km/h
    double vehicle_speed = 0.0;        // s5, km/h
    double lat_accel = 0.0;            // s6, m/s^2
    double lon_accel = 0.0;            // s7, m/s^2
    int lane_change_status = 0;        // s8, {0,1}
    int left_indicator = 0;            // s9, {0,1}
    int right_indicator = 0;           // s10, {0,1}

    static constexpr int kSignalCount = 10;
    static constexpr int kContinuousCount = 7;
    static constexpr int kCategoricalCount = 3;

    // Signal value by zero-based index (0 = s1 ... 9 = s10).
    double signal(int index) const;

    bool operator==(const SignalFrame&) const = default;
};

// A labelled 10 Hz trace from one truck. Frames are uniformly spaced;
// trigger_index, when set, marks the event frame used as the time origin.
struct Recording {
    std::string file_id;
    std::string truck_id;
    std::vector<SignalFrame> frames;
    std::optional<ClassLabel> label;
    std::optional<std::size_t> trigger_index;

    bool operator==(const Recording&) const = default;
};

// Exactly kCropFrames frames around the trigger; frame i sits at
// (-10.0 + 0.1 * i) seconds relative to the trigger frame.
struct CroppedRecording {
    std::string source_file_id;
    std::string truck_id;
    ClassLabel label = ClassLabel::no_overtake;
    std::vector<SignalFrame> frames;

    bool operator==(const CroppedRecording&) const = default;
};

struct ManifestEntry {
    std::string file;
    std::string truck_id;
    ClassLabel label = ClassLabel::no_overtake;

    bool operator==(const ManifestEntry&) const = default;
};

ClassLabel parse_label(std::string_view text);   // "overtake" / "no_overtake"
std::string_view label_name(ClassLabel label);

// Recording CSV: header `t,s1,...,s10`, t in seconds with 6 decimals, rows
// 0.1 s apart. Continuous signals round-trip exactly; s8-s10 must be 0 or 1.
Recording parse_recording(std::string_view csv_text, std::string_view manifest_entry_json);
Recording parse_recording(std::string_view csv_text, const ManifestEntry& entry);
std::string serialize_recording(const Recording& rec);

// Fleet manifest: JSON array of {file, truck_id, label}.
std::vector<ManifestEntry> parse_manifest(std::string_view json_text);
std::string serialize_manifest(const std::vector<ManifestEntry>& entries);

CroppedRecording crop_around_trigger(const Recording& rec);

} // namespace ovt
