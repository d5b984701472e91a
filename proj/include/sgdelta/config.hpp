#pragma once

// Run configuration: a JSON document with documented defaults.
//
//   {
//     "scenario": "kink",            zero | kink | ground_state | boosted_kink | scatter
//     "q": -1.0,
//     "delta_mode": "sharp",         sharp | mollified
//     "epsilon": 0.1,                mollifier half-width (mollified only)
//     "coupling": "paired",          paired | pointwise
//     "grid": {"L": 20, "N": 4001},
//     "dt": dx / 2,
//     "horizon": 10,
//     "wave": {"center": 0, "speed": 0.5},
//     "speeds": [0.05, 0.1, 0.3, 0.5, 0.8],
//     "amplitudes": [0.001, 0.01],
//     "seed_amplitude": 0.0001,
//     "eigen_count": 4,
//     "output": {"dir": "out", "stride": 100},
//     "seed": 0,
//     "threads": 1
//   }

#include <cstdint>
#include <string>
#include <vector>

#include "sgdelta/core.hpp"

namespace sgd {

enum class Scenario { Zero, Kink, GroundState, BoostedKink, Scatter };

std::string to_string(Scenario s);

struct RunConfig {
    Scenario scenario = Scenario::Kink;
    double q = -1.0;
    DeltaMode delta_mode = DeltaMode::Sharp;
    double epsilon = 0.1;
    MollifiedCoupling coupling = MollifiedCoupling::Paired;
    double half_width = 20.0;
    std::size_t nodes = 4001;
    double dt = 0.005;  // always expanded; dx / 2 when absent from the document
    double horizon = 10.0;
    double center = 0.0;
    double speed = 0.5;
    std::vector<double> speeds = {0.05, 0.1, 0.3, 0.5, 0.8};
    std::vector<double> amplitudes = {1e-3, 1e-2};
    double seed_amplitude = 1e-4;
    std::size_t eigen_count = 4;
    std::string out_dir = "out";
    std::size_t output_stride = 100;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    Grid1D grid() const { return Grid1D::make(half_width, nodes); }
    ImpurityParams impurity() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline constexpr const char* kArtifactVersion = "sgdelta 1.0.0";

/// Parses and validates. Throws ConfigError for malformed documents, unknown
/// keys or wrong types (the message names the field), and the matching
/// physics error (NoH1Wave, SuperluminalSpeed, CflViolation, ...) for values
/// that violate a precondition.
RunConfig parse_config(const std::string& text);

/// Re-checks every field; parse_config calls this after default expansion.
void validate_config(const RunConfig& config);

/// Canonical JSON with every field present (sorted keys, 2-space indent).
std::string serialize_config(const RunConfig& config);

/// FNV-1a 64 of the canonical JSON without the execution-only fields
/// (threads, output dir), as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace sgd
