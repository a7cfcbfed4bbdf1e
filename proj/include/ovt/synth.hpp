#pragma once

#include "ovt/signal_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ovt {

// Seeded generator of class-conditional CAN traces. Signals follow
// mean-reverting noise around per-truck baselines; every file carries one
// planted frame where the default trigger rule first fires. Overtake files
// additionally ramp accelerator, lateral acceleration, closing gap,
// relative speed and left-indicator activity over the 5 s before that
// frame, scaled by drift_strength.
struct TruckSpec {
    std::string truck_id;
    std::size_t n_class0 = 0;
    std::size_t n_class1 = 0;
};

struct FleetConfig {
    std::vector<TruckSpec> trucks;
    std::uint64_t seed = 0;
    double noise_scale = 1.0;
    double drift_strength = 1.0;
    double trace_len_s = 65.0;
};

struct Fleet {
    std::vector<Recording> recordings;         // trigger_index left unset
    std::vector<ManifestEntry> manifest;       // aligned with recordings
    std::vector<std::size_t> planted_triggers; // aligned with recordings
};

Fleet generate_fleet(const FleetConfig& cfg);

// Built-in three-truck inventory (107/386, 151/55, 6/7 files per class)
// sized so the default split fraction gives 74/38/4 training files per
// class and truck.
FleetConfig reference_inventory(std::uint64_t seed);

// Writes one CSV per recording plus manifest.json into dir.
void write_fleet(const Fleet& fleet, const std::string& dir);

} // namespace ovt
