#pragma once

/**
 * @file experiments.hpp
 * @brief The seven experiments, their building blocks and report emission.
 */

#include "bdex/config.hpp"
#include "bdex/pde.hpp"
#include "bdex/simulate.hpp"

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace bdex {

struct Check {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct Table {
    std::string name;  // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentResult {
    std::string experiment;
    std::vector<Check> checks;
    std::vector<Table> tables;
    nlohmann::json extra = nlohmann::json::object();

    [[nodiscard]] bool all_passed() const noexcept;
};

/// Version string baked in at build time (git describe).
[[nodiscard]] std::string version_string();

/// Dispatches on config.experiment.
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes <table>.csv, summary.json and manifest.json into `directory`; returns the file names written.
std::vector<std::string> emit_report(const ExperimentConfig& config, const ExperimentResult& result,
                                     const std::string& directory);

/// CSV text: a '#'-prefixed JSON header line, the column line, then rows (%.10g).
[[nodiscard]] std::string format_csv(const Table& table, const nlohmann::json& header);
[[nodiscard]] nlohmann::json summary_json(const ExperimentConfig& config, const ExperimentResult& result);

// ---------------------------------------------------------------------------
// Building blocks, shared with the acceptance suite.

/// Grid from config.grid with 0 entries resolved against N (lattice-matched).
[[nodiscard]] Grid experiment_grid(const ExperimentConfig& config, int N);
/// Initial density field on `grid` (walls carry b).
[[nodiscard]] ScalarField initial_profile(const ExperimentConfig& config, const Grid& grid);
/// Field values at every lattice position x/N.
[[nodiscard]] std::vector<double> on_lattice(const ScalarField& field, const LatticeGeometry& geo);
/// Static tilt H(u) of config.tilt.
[[nodiscard]] SpaceTimeFunction tilt_function(const TiltSpec& tilt, int d);
/// int over the torus of phi(b_-(v)) - phi(b_+(v)).
[[nodiscard]] double fick_target(const ModelParams& params, int d);

/// N^{-d} sum_x |f(x) - g(x)| and max_x |f(x) - g(x)|.
[[nodiscard]] double lattice_l1(const LatticeGeometry& geo, const std::vector<double>& f, const std::vector<double>& g);
[[nodiscard]] double lattice_linf(const std::vector<double>& f, const std::vector<double>& g);

struct StationaryStats {
    LatticeGeometry geometry;
    ObservableAccumulators merged;
    std::vector<ObservableAccumulators> batches;  // replica-major
};

/// Replicas of length run.T with accumulation split into run.batches equal batches after burn-in.
[[nodiscard]] StationaryStats stationary_statistics(const ExperimentConfig& config, int N);

struct SliceCurrent {
    int slice;
    double value;
    double error_bar;  // two standard errors of the batch means
};

/// Estimates for every slice with |slice| <= N-3.
[[nodiscard]] std::vector<SliceCurrent> fick_estimates(const StationaryStats& stats);

/// Hydrostatics evaluation over precomputed runs (one per entry of N_list, or N).
[[nodiscard]] ExperimentResult evaluate_hydrostatics(const ExperimentConfig& config,
                                                     const std::vector<StationaryStats>& runs);
/// Fick's-law evaluation over a precomputed run.
[[nodiscard]] ExperimentResult evaluate_ficks(const ExperimentConfig& config, const StationaryStats& run);

/// Replica mean of the smoothed empirical density at each probe time (per lattice site).
[[nodiscard]] std::vector<std::vector<double>> mean_smoothed_profiles(const ExperimentConfig& config,
                                                                      const std::vector<double>& initial_per_site,
                                                                      const std::vector<double>& probe_times,
                                                                      const std::optional<TiltField>& tilt);

}  // namespace bdex
