#pragma once

/**
 * @file config.hpp
 * @brief Declarative experiment configuration (JSON), overrides and hashing.
 */

#include "bdex/lattice.hpp"
#include "bdex/simulate.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace bdex {

/// Invalid configuration: unknown keys, wrong types, out-of-range values.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"hydrostatics", "ficks-law", "hydrodynamics", "rate-eval",
                                                "tilted",       "oracle-check", "local-eq"};
    return names;
}

struct GridSpec {
    int M1 = 0;           // 0 selects the lattice-matched grid (2N-1)
    int Mp = 0;           // 0 selects N
    double dt = 0.0;      // 0 selects half the stability limit
    std::size_t stride = 1;
};

struct RunSpec {
    double T = 1.0;                  // total horizon
    double burn_in = 0.0;            // accumulation starts here
    int replicas = 4;
    int batches = 1;                 // batch means per replica for stationary runs
    std::uint64_t seed = 1;
    EngineKind engine = EngineKind::Thinning;
    std::vector<double> probe_times;
};

struct InitialSpec {
    std::string kind = "hydrostatic";  // hydrostatic | step | constant | smooth
    double left = 0.8;                 // step: value for u_1 <= position; constant: the value
    double right = 0.2;
    double position = 0.0;
};

/// H(u) = amplitude * sin(pi (u_1 + 1) / 2) * cos(2 pi wave u_2) (d >= 2) or without the cosine (d = 1).
struct TiltSpec {
    double amplitude = 0.0;
    int wave = 1;
    double window = 0.0;
};

struct RateSpec {
    std::string path = "hydrodynamic";  // hydrodynamic | controlled | perturbed | file
    std::string trajectory_dir;
    double perturbation = 0.05;
};

struct OracleSpec {
    std::vector<std::string> fixtures;
};

struct LocalEqSpec {
    double eps = 0.125;
    std::string function = "h";  // density | h | g
    int dir = 0;
};

struct CheckSpec {
    int smoothing_l = 0;               // smoothing radius eps = (l + 1/2) / N
    double l1_tolerance = 0.05;
    double current_tolerance = 0.10;   // relative
    double z_tolerance = 3.0;
    double rate_tolerance = 1e-2;
    double control_tolerance = 0.05;   // relative
    double perturb_factor = 10.0;
};

struct ExperimentConfig {
    std::string experiment = "hydrostatics";
    int d = 2;
    int N = 16;
    std::vector<int> N_list;  // hydrostatics sweeps these when non-empty
    ModelParams params;
    GridSpec grid;
    RunSpec run;
    InitialSpec initial;
    TiltSpec tilt;
    RateSpec rate;
    OracleSpec oracle;
    LocalEqSpec local_eq;
    CheckSpec checks;
    std::string output = "out";

    /// Re-checks every numeric constraint; throws ConfigError.
    void validate() const;
};

[[nodiscard]] nlohmann::json to_json(const ExperimentConfig& c);
/// Parses and validates; unknown keys are rejected.
[[nodiscard]] ExperimentConfig config_from_json(const nlohmann::json& j);
[[nodiscard]] ExperimentConfig load_config(const std::string& path);

/// Applies "dotted.key=value" (value parsed as JSON, else as a string) and re-validates.
[[nodiscard]] ExperimentConfig apply_overrides(const ExperimentConfig& c, const std::vector<std::string>& overrides);

/// 64-bit FNV-1a over the canonical JSON serialisation.
[[nodiscard]] std::uint64_t fnv1a64(const std::string& bytes) noexcept;
[[nodiscard]] std::string config_hash(const ExperimentConfig& c);

}  // namespace bdex
