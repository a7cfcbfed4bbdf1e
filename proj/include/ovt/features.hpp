#pragma once

#include "ovt/signal_model.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ovt {

// 17 features per window: mean and sample std of each continuous signal,
// interleaved (mean1, std1, ..., mean7, std7), then the majority value of
// the three flag signals (maj8, maj9, maj10).
inline constexpr std::size_t kFeatureCount = 17;
using FeatureVec = std::array<double, kFeatureCount>;

struct WindowingConfig {
    std::size_t window_len_frames = 10; // 1 s at 10 Hz
    std::size_t hop_frames = 5;         // 50% overlap
};

struct WindowSample {
    FeatureVec features{};
    double center_offset_s = 0.0; // window midpoint relative to the trigger
    std::string file_id;
    std::string truck_id;
    ClassLabel label = ClassLabel::no_overtake;
};

// Evaluation slices: the window centred on the trigger and the ones 1-3
// seconds earlier, or every window of the crop.
enum class Moment {
    t,
    t_minus_1,
    t_minus_2,
    t_minus_3,
    all,
};

inline constexpr std::array<Moment, 5> kAllMoments = {
    Moment::t, Moment::t_minus_1, Moment::t_minus_2, Moment::t_minus_3, Moment::all};

Moment parse_moment(std::string_view text); // "t", "t-1", "t-2", "t-3", "all"
std::string_view moment_name(Moment moment);
double moment_center_offset(Moment moment); // not defined for Moment::all

// Most frequent value; ties go to the value of the latest frame.
int majority(std::span<const int> values);

// Feature vector of one window of frames (mean/std per continuous signal,
// majority per flag). Sample std uses divisor n-1; a single frame yields 0.
FeatureVec window_features(std::span<const SignalFrame> frames);

// Sliding windows over a crop: window k covers frames [k*hop, k*hop+len),
// giving floor((N-len)/hop)+1 windows. Every sample inherits the file label.
std::vector<WindowSample> extract_windows(const CroppedRecording& crop,
                                          const WindowingConfig& cfg = {});

// Windows whose centre matches the moment (all 21 for Moment::all).
std::vector<WindowSample> moment_windows(std::span<const WindowSample> samples, Moment moment);
std::vector<std::size_t> moment_indices(std::span<const WindowSample> samples, Moment moment);

// CSV export: file_id,truck_id,label,center_offset_s,f1..f17
std::string feature_matrix_csv(std::span<const WindowSample> samples);

} // namespace ovt
