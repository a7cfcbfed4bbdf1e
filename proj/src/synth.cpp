#include "ovt/synth.hpp"

#include "ovt/errors.hpp"
#include "ovt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace ovt {
namespace {

// Per-truck operating points, drawn once per truck so all its files share
// the same baselines.
struct TruckBaselines {
    double accel;
    double dist;
    double speed;
    double speed_ahead;
    double rel;
};

TruckBaselines draw_baselines(std::uint64_t fleet_seed, const std::string& truck_id) {
    Rng rng(derive_seed(fleet_seed, "truck/" + truck_id));
    TruckBaselines b;
    b.accel = rng.uniform(0.35, 0.55);
    b.dist = rng.uniform(90.0, 150.0);
    b.speed = rng.uniform(70.0, 88.0);
    b.speed_ahead = b.speed - rng.uniform(4.0, 10.0);
    b.rel = rng.uniform(0.3, 0.7);
    return b;
}

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

// One mean-reverting noise step per frame.
double ou_step(double x, double mu, double theta, double sigma, Rng& rng) {
    return x + theta * (mu - x) + sigma * rng.normal();
}

constexpr std::size_t kRampFrames = 50;   // ramp covers the 5 s before the trigger
constexpr std::size_t kDecayFrames = 15;  // and fades out over 1.5 s after it

Recording generate_trace(const TruckSpec& truck, const TruckBaselines& base, ClassLabel label,
                         std::string file_id, const FleetConfig& cfg, std::uint64_t file_seed,
                         std::size_t* planted_out) {
    Rng rng(file_seed);
    const std::size_t n = static_cast<std::size_t>(std::lround(cfg.trace_len_s * kSampleRateHz));
    if (n < kCropFrames + kCropPostFrames)
        throw Error(Errc::invalid_config, "trace_len_s too short for an event crop");

    // Trigger frame placed so the full crop fits inside the trace.
    const std::size_t planted = rng.uniform_index(kCropPreFrames, n - kCropPostFrames);
    const std::size_t hold = 10 + rng.uniform_index(0, 10);
    const double ns = cfg.noise_scale;
    const double drift = label == ClassLabel::overtake ? cfg.drift_strength : 0.0;

    double accel = base.accel;
    double dist = base.dist;
    double speed_ahead = base.speed_ahead;
    double rel = base.rel;
    double speed = base.speed;
    double lat = 0.0;
    double lon = 0.0;
    std::size_t burst_left = 0;
    std::size_t burst_right = 0;

    Recording rec;
    rec.file_id = std::move(file_id);
    rec.truck_id = truck.truck_id;
    rec.label = label;
    rec.frames.reserve(n);

    for (std::size_t k = 0; k < n; ++k) {
        accel = clamp(ou_step(accel, base.accel, 0.08, 0.05 * ns, rng), 0.0, 1.0);
        dist = clamp(ou_step(dist, base.dist, 0.04, 2.5 * ns, rng), 2.0, 400.0);
        speed_ahead = std::max(0.0, ou_step(speed_ahead, base.speed_ahead, 0.05, 1.2 * ns, rng));
        rel = ou_step(rel, base.rel, 0.10, 0.25 * ns, rng);
        speed = std::max(0.0, ou_step(speed, base.speed, 0.05, 0.8 * ns, rng));
        lat = ou_step(lat, 0.0, 0.20, 0.35 * ns, rng);
        lon = ou_step(lon, 0.0, 0.20, 0.30 * ns, rng);

        if (burst_left == 0 && rng.uniform() < 0.008)
            burst_left = 3 + rng.uniform_index(0, 5);
        if (burst_right == 0 && rng.uniform() < 0.008)
            burst_right = 3 + rng.uniform_index(0, 5);
        int left = burst_left > 0 ? 1 : 0;
        int right = burst_right > 0 ? 1 : 0;
        if (burst_left > 0) --burst_left;
        if (burst_right > 0) --burst_right;

        // Overtake build-up: gradual throttle, lateral motion, gap closing
        // and speed gain ahead of the lane change, all proportional to
        // drift_strength so drift 0 reduces to the no-overtake process.
        double s = 0.0;
        if (k + kRampFrames >= planted && k < planted)
            s = static_cast<double>(k - (planted - kRampFrames) + 1) / kRampFrames;
        else if (k >= planted && k < planted + kDecayFrames)
            s = 1.0 - static_cast<double>(k - planted + 1) / kDecayFrames;
        if (drift > 0.0 && s > 0.0) {
            if (rng.uniform() < clamp(1.4 * drift * s, 0.0, 0.95)) left = 1;
        }

        SignalFrame f;
        f.accel_pedal_pos = clamp(accel + 0.35 * drift * s, 0.0, 1.0);
        f.dist_ahead = clamp(dist * (1.0 - clamp(0.55 * drift * s, 0.0, 0.95)), 2.0, 400.0);
        f.speed_ahead = std::max(0.0, speed_ahead - 4.0 * drift * s);
        f.rel_speed_left_wheel = rel + 3.0 * drift * s;
        f.vehicle_speed = speed + 5.0 * drift * s;
        f.lat_accel = lat + 1.2 * drift * s;
        f.lon_accel = lon + 0.4 * drift * s;
        f.lane_change_status = (k >= planted && k < planted + hold) ? 1 : 0;
        f.left_indicator = left;
        f.right_indicator = right;

        // The planted frame must satisfy the default trigger rule; it is the
        // first frame with lane_change_status set, so it is also the first
        // qualifying one.
        if (k == planted) {
            f.vehicle_speed = std::max(f.vehicle_speed, 56.0);
            f.dist_ahead = std::min(f.dist_ahead, 180.0);
            f.rel_speed_left_wheel = std::max(f.rel_speed_left_wheel, 0.6);
        }
        rec.frames.push_back(f);
    }

    *planted_out = planted;
    return rec;
}

} // namespace

Fleet generate_fleet(const FleetConfig& cfg) {
    if (cfg.trucks.empty()) throw Error(Errc::invalid_config, "fleet has no trucks");
    if (cfg.noise_scale <= 0.0) throw Error(Errc::invalid_config, "noise_scale must be positive");
    if (cfg.drift_strength < 0.0)
        throw Error(Errc::invalid_config, "drift_strength must be non-negative");

    Fleet fleet;
    std::uint64_t file_index = 0;
    for (const TruckSpec& truck : cfg.trucks) {
        if (truck.truck_id.empty()) throw Error(Errc::invalid_config, "empty truck_id");
        const TruckBaselines base = draw_baselines(cfg.seed, truck.truck_id);
        for (int cls = 0; cls <= 1; ++cls) {
            const ClassLabel label = cls == 0 ? ClassLabel::no_overtake : ClassLabel::overtake;
            const std::size_t count = cls == 0 ? truck.n_class0 : truck.n_class1;
            for (std::size_t i = 0; i < count; ++i) {
                char name[64];
                std::snprintf(name, sizeof name, "%s_c%d_%04zu.csv", truck.truck_id.c_str(), cls, i);
                std::size_t planted = 0;
                Recording rec =
                    generate_trace(truck, base, label, name, cfg,
                                   derive_seed(cfg.seed, "file", file_index), &planted);
                fleet.manifest.push_back({rec.file_id, rec.truck_id, label});
                fleet.recordings.push_back(std::move(rec));
                fleet.planted_triggers.push_back(planted);
                ++file_index;
            }
        }
    }
    return fleet;
}

FleetConfig reference_inventory(std::uint64_t seed) {
    FleetConfig cfg;
    cfg.trucks = {{"t1", 107, 386}, {"t2", 151, 55}, {"t3", 6, 7}};
    cfg.seed = seed;
    return cfg;
}

void write_fleet(const Fleet& fleet, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(Errc::io_error, "cannot create " + dir + ": " + ec.message());
    for (const Recording& rec : fleet.recordings) {
        std::ofstream out(fs::path(dir) / rec.file_id, std::ios::binary);
        if (!out) throw Error(Errc::io_error, "cannot write " + rec.file_id);
        out << serialize_recording(rec);
    }
    std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write manifest.json");
    out << serialize_manifest(fleet.manifest);
}

} // namespace ovt
