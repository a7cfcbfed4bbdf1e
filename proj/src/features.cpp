#include "ovt/features.hpp"

#include "ovt/errors.hpp"

#include <charconv>
#include <cmath>

namespace ovt {

namespace {

void validate(const WindowingConfig& cfg) {
    if (cfg.window_len_frames < 1)
        throw Error(Errc::invalid_config, "window length must be >= 1 frame");
    if (cfg.hop_frames < 1 || cfg.hop_frames > cfg.window_len_frames)
        throw Error(Errc::invalid_config, "hop must be in [1, window length]");
}

void append_double(std::string& out, double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    out.append(buf, ptr);
}

} // namespace

Moment parse_moment(std::string_view text) {
    if (text == "t")
        return Moment::t;
    if (text == "t-1")
        return Moment::t_minus_1;
    if (text == "t-2")
        return Moment::t_minus_2;
    if (text == "t-3")
        return Moment::t_minus_3;
    if (text == "all")
        return Moment::all;
    throw Error(Errc::unknown_moment, "'" + std::string(text) + "'");
}

std::string_view moment_name(Moment moment) {
    switch (moment) {
    case Moment::t: return "t";
    case Moment::t_minus_1: return "t-1";
    case Moment::t_minus_2: return "t-2";
    case Moment::t_minus_3: return "t-3";
    case Moment::all: return "all";
    }
    throw Error(Errc::unknown_moment, "invalid moment value");
}

double moment_center_offset(Moment moment) {
    switch (moment) {
    case Moment::t: return 0.0;
    case Moment::t_minus_1: return -1.0;
    case Moment::t_minus_2: return -2.0;
    case Moment::t_minus_3: return -3.0;
    case Moment::all: break;
    }
    throw Error(Errc::unknown_moment, "'all' has no single centre offset");
}

int majority(std::span<const int> values) {
    if (values.empty())
        throw Error(Errc::invalid_argument, "majority of empty window");
    std::size_t ones = 0;
    for (int v : values)
        ones += v != 0;
    const std::size_t zeros = values.size() - ones;
    if (ones > zeros)
        return 1;
    if (zeros > ones)
        return 0;
    return values.back() != 0 ? 1 : 0;
}

FeatureVec window_features(std::span<const SignalFrame> frames) {
    if (frames.empty())
        throw Error(Errc::invalid_argument, "window_features on empty window");
    const double n = static_cast<double>(frames.size());

    FeatureVec features{};
    for (int s = 0; s < SignalFrame::kContinuousCount; ++s) {
        double sum = 0.0;
        for (const SignalFrame& f : frames)
            sum += f.signal(s);
        const double mean = sum / n;

        double sq = 0.0;
        for (const SignalFrame& f : frames) {
            const double d = f.signal(s) - mean;
            sq += d * d;
        }
        const double std_dev = frames.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;

        features[static_cast<std::size_t>(2 * s)] = mean;
        features[static_cast<std::size_t>(2 * s + 1)] = std_dev;
    }

    std::vector<int> flags(frames.size());
    for (int s = 0; s < SignalFrame::kCategoricalCount; ++s) {
        for (std::size_t i = 0; i < frames.size(); ++i)
            flags[i] = static_cast<int>(frames[i].signal(SignalFrame::kContinuousCount + s));
        features[static_cast<std::size_t>(2 * SignalFrame::kContinuousCount + s)] =
            majority(flags);
    }
    return features;
}

std::vector<WindowSample> extract_windows(const CroppedRecording& crop,
                                          const WindowingConfig& cfg) {
    validate(cfg);
    const std::size_t n = crop.frames.size();
    const std::size_t len = cfg.window_len_frames;
    const std::size_t hop = cfg.hop_frames;
    if (n < len)
        throw Error(Errc::too_short, "crop has " + std::to_string(n) + " frames, window needs " +
                                         std::to_string(len));

    const std::size_t count = (n - len) / hop + 1;
    std::vector<WindowSample> samples;
    samples.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t start = k * hop;
        WindowSample sample;
        sample.features = window_features({crop.frames.data() + start, len});
        // Midpoint of the window's time span; exact halves for the default
        // 1 s / 0.5 s grid. Frame i of the crop sits at (-10.0 + 0.1*i) s.
        sample.center_offset_s =
            (static_cast<double>(2 * start + len) - 2.0 * static_cast<double>(kCropPreFrames)) /
            (2.0 * kSampleRateHz);
        sample.file_id = crop.source_file_id;
        sample.truck_id = crop.truck_id;
        sample.label = crop.label;
        samples.push_back(std::move(sample));
    }
    return samples;
}

std::vector<std::size_t> moment_indices(std::span<const WindowSample> samples, Moment moment) {
    std::vector<std::size_t> indices;
    if (moment == Moment::all) {
        indices.resize(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i)
            indices[i] = i;
        return indices;
    }
    const double target = moment_center_offset(moment);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (std::abs(samples[i].center_offset_s - target) < 1e-9)
            indices.push_back(i);
    }
    return indices;
}

std::vector<WindowSample> moment_windows(std::span<const WindowSample> samples, Moment moment) {
    std::vector<WindowSample> subset;
    for (std::size_t i : moment_indices(samples, moment))
        subset.push_back(samples[i]);
    return subset;
}

std::string feature_matrix_csv(std::span<const WindowSample> samples) {
    std::string out = "file_id,truck_id,label,center_offset_s";
    for (std::size_t i = 1; i <= kFeatureCount; ++i)
        out += ",f" + std::to_string(i);
    out += '\n';
    for (const WindowSample& s : samples) {
        out += s.file_id;
        out += ',';
        out += s.truck_id;
        out += ',';
        out += label_name(s.label);
        out += ',';
        append_double(out, s.center_offset_s);
        for (double f : s.features) {
            out += ',';
            append_double(out, f);
        }
        out += '\n';
    }
    return out;
}

} // namespace ovt
