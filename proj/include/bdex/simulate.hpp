#pragma once

/**
 * @file simulate.hpp
 * @brief Continuous-time simulation of the diffusively speeded chain.
 *
 * Two exact-in-law engines are provided:
 *  - Gillespie: direct method over a sum tree holding every transition rate
 *    (including exchanges of equal occupancies), so the cached total rate is
 *    always N^2 times the sum over ExclusionModel::enumerate_transitions.
 *  - Thinning: proposals at the constant bound rate, accepted with
 *    probability rate/bound. Much cheaper per event on large lattices.
 *
 * An optional tilt H(t,u) multiplies the exchange rate of a particle jumping
 * x -> y by exp{H(t,y/N) - H(t,x/N)}. H is frozen on windows of fixed length
 * and must vanish at u_1 = +-1.
 */

#include "bdex/lattice.hpp"
#include "bdex/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace bdex {

struct TiltField {
    std::function<double(double t, std::span<const double> u)> H;
    /// Length of the windows on which H is held constant; 0 means static.
    double window = 0.0;

    static TiltField zero() {
        return {[](double, std::span<const double>) { return 0.0; }, 0.0};
    }
};

/// Throws std::invalid_argument if H does not vanish on the two faces.
void check_tilt_vanishes_on_boundary(const TiltField& tilt, const LatticeGeometry& geo, double T);

struct ObservableAccumulators {
    std::vector<double> occupancy_time;         // per site, time integral of eta(x)
    std::vector<std::int64_t> bond_crossings;   // per bond, +1 for a jump x -> x+e_i
    double duration = 0.0;
    std::int64_t events = 0;                    // state-changing transitions
    std::int64_t flips_in = 0;
    std::int64_t flips_out = 0;

    void resize(const LatticeGeometry& geo);
    /// Associative merge of two independent accumulations.
    void merge(const ObservableAccumulators& other);
    [[nodiscard]] std::vector<double> time_average_density() const;
};

/// Net crossings of the direction-0 slice between x1 and x1+1, summed over the torus.
[[nodiscard]] std::int64_t slice_crossings(const LatticeGeometry& geo, const ObservableAccumulators& acc, int x1);

enum class EngineKind { Gillespie, Thinning };

class CtmcEngine {
public:
    CtmcEngine(ExclusionModel model, Configuration initial, std::uint64_t seed,
               EngineKind kind = EngineKind::Gillespie, std::optional<TiltField> tilt = std::nullopt);

    /// Run the chain forward to macroscopic time t (no-op if t <= time()).
    void advance_to(double t);

    [[nodiscard]] double time() const noexcept { return t_; }
    [[nodiscard]] const Configuration& state() const noexcept { return eta_; }
    [[nodiscard]] const ExclusionModel& model() const noexcept { return model_; }
    [[nodiscard]] EngineKind kind() const noexcept { return kind_; }

    /// Accumulated observables since construction or the last reset.
    [[nodiscard]] const ObservableAccumulators& accumulators();
    void reset_accumulators();

    /// Running particle count: initial count plus signed boundary flips.
    [[nodiscard]] std::int64_t particle_ledger() const noexcept { return ledger_; }

    /// Gillespie engine: N^2 times the cached sum of current rates.
    [[nodiscard]] double cached_total_rate() const;
    /// N^2 times the freshly recomputed sum of current (tilted) rates.
    [[nodiscard]] double recomputed_total_rate() const;

    /// Proposals drawn so far (equals events for the Gillespie engine).
    [[nodiscard]] std::int64_t proposals() const noexcept { return proposals_; }

private:
    [[nodiscard]] double event_rate(std::size_t k) const noexcept;
    void refresh_window(double t);
    void rebuild_tree();
    void update_leaf(std::size_t k);
    void draw_pending();
    void execute(std::size_t k);
    void touch_site(std::size_t s);
    void flush_occupancy();
    bool step_gillespie();
    bool step_thinning();

    ExclusionModel model_;
    Configuration eta_;
    Rng rng_;
    EngineKind kind_;
    std::optional<TiltField> tilt_;
    double speed_;       // N^2
    double t_ = 0.0;
    double pending_ = 0.0;
    double next_window_ = 0.0;
    std::int64_t ledger_ = 0;
    std::int64_t proposals_ = 0;

    std::size_t n_bonds_;
    std::size_t n_events_;
    std::vector<double> bond_up_;     // exp{H(y)-H(x)} per bond for the current window
    std::vector<double> bond_down_;   // exp{H(x)-H(y)}
    double tilt_bound_ = 1.0;         // max over bonds of the two factors
    double bond_bound_ = 1.0;         // max bulk rate times tilt_bound_
    double proposal_total_ = 0.0;     // thinning bound, unspeeded

    std::size_t tree_leaves_ = 1;
    std::vector<double> tree_;
    std::vector<std::vector<std::size_t>> affected_;  // events to refresh when a site changes

    ObservableAccumulators acc_;
    std::vector<double> last_touch_;
    double acc_start_ = 0.0;
};

struct RunOptions {
    double T = 1.0;
    double burn_in = 0.0;          // accumulation starts at this time
    std::uint64_t seed = 1;
    EngineKind engine = EngineKind::Gillespie;
    std::optional<TiltField> tilt;
    std::vector<double> probe_times;
};

struct RunResult {
    Configuration final_state;
    ObservableAccumulators accumulators;
    std::vector<std::pair<double, Configuration>> snapshots;
};

/// One run of the speeded chain on [0,T].
RunResult run_ctmc(const ExclusionModel& model, const Configuration& initial, const RunOptions& options);

/// Thread count from BDEX_THREADS, defaulting to the hardware concurrency.
unsigned worker_threads();

/// Calls fn(r) for r in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace bdex
