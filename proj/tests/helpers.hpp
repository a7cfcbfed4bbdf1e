#pragma once

#include "ovt/rng.hpp"
#include "ovt/signal_model.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <unistd.h>

namespace helpers {

// Scratch directory under the system temp root, removed on scope exit.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const char* tag) {
        path = std::filesystem::temp_directory_path() /
               (std::string("ovt_") + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline ovt::SignalFrame random_frame(ovt::Rng& rng) {
    ovt::SignalFrame f;
    f.accel_pedal_pos = rng.uniform();
    f.dist_ahead = rng.uniform(0.0, 300.0);
    f.speed_ahead = rng.uniform(0.0, 120.0);
    f.rel_speed_left_wheel = rng.uniform(-5.0, 5.0);
    f.vehicle_speed = rng.uniform(0.0, 120.0);
    f.lat_accel = rng.uniform(-3.0, 3.0);
    f.lon_accel = rng.uniform(-3.0, 3.0);
    f.lane_change_status = rng.bernoulli(0.2) ? 1 : 0;
    f.left_indicator = rng.bernoulli(0.2) ? 1 : 0;
    f.right_indicator = rng.bernoulli(0.2) ? 1 : 0;
    return f;
}

inline ovt::Recording random_recording(ovt::Rng& rng, std::size_t n,
                                       const std::string& file_id = "f.csv",
                                       const std::string& truck_id = "t") {
    ovt::Recording rec;
    rec.file_id = file_id;
    rec.truck_id = truck_id;
    rec.label = rng.bernoulli(0.5) ? ovt::ClassLabel::overtake : ovt::ClassLabel::no_overtake;
    for (std::size_t i = 0; i < n; ++i) rec.frames.push_back(random_frame(rng));
    return rec;
}

} // namespace helpers
