#include "bdex/experiments.hpp"

#include "bdex/ldp.hpp"
#include "bdex/observables.hpp"
#include "bdex/oracle.hpp"
#include "bdex/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>

#ifndef BDEX_GIT_DESCRIBE
#define BDEX_GIT_DESCRIBE "unknown"
#endif

namespace bdex {

using nlohmann::json;

bool ExperimentResult::all_passed() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::string version_string() { return BDEX_GIT_DESCRIBE; }

// ---------------------------------------------------------------------------
// Building blocks

Grid experiment_grid(const ExperimentConfig& config, int N) {
    const int M1 = config.grid.M1 > 0 ? config.grid.M1 : 2 * N - 1;
    const int Mp = config.grid.Mp > 0 ? config.grid.Mp : N;
    return Grid(config.d, M1, Mp);
}

ScalarField initial_profile(const ExperimentConfig& config, const Grid& grid) {
    const auto& in = config.initial;
    if (in.kind == "hydrostatic") return solve_hydrostatic(config.params, grid);
    SpaceFunction f;
    if (in.kind == "step") {
        f = [in](std::span<const double> u) { return u[0] <= in.position ? in.left : in.right; };
    } else if (in.kind == "constant") {
        f = [in](std::span<const double> u) {
            (void)u;
            return in.left;
        };
    } else {
        f = [in](std::span<const double> u) {
            const double pi = std::numbers::pi;
            double v = 0.5 * (in.left + in.right) + 0.5 * (in.right - in.left) * std::sin(0.5 * pi * u[0]);
            if (u.size() > 1) v += 0.1 * std::cos(0.5 * pi * u[0]) * std::cos(2.0 * pi * u[1]);
            return std::clamp(v, 0.0, 1.0);
        };
    }
    ScalarField rho(grid, FieldKind::Density, f);
    impose_dirichlet(rho, config.params);
    return rho;
}

std::vector<double> on_lattice(const ScalarField& field, const LatticeGeometry& geo) {
    std::vector<double> out(geo.num_sites());
    for (std::size_t s = 0; s < geo.num_sites(); ++s) out[s] = field.sample(geo.position(s));
    return out;
}

SpaceTimeFunction tilt_function(const TiltSpec& tilt, int d) {
    const double A = tilt.amplitude;
    const int k = tilt.wave;
    return [A, k, d](double, std::span<const double> u) {
        const double pi = std::numbers::pi;
        double v = A * std::sin(0.5 * pi * (u[0] + 1.0));
        if (d > 1) v *= std::cos(2.0 * pi * k * u[1]);
        // sin(pi) is not exactly zero in floating point.
        if (std::abs(u[0]) == 1.0) v = 0.0;
        return v;
    };
}

double fick_target(const ModelParams& params, int d) {
    const TransportCoefficients tc{params.a};
    const int M = d == 1 ? 1 : 64;
    const int points = d == 1 ? 1 : static_cast<int>(std::pow(M, d - 1));
    double total = 0.0;
    std::vector<double> v(static_cast<std::size_t>(d - 1));
    for (int p = 0; p < points; ++p) {
        int rest = p;
        for (int k = d - 2; k >= 0; --k) {
            v[static_cast<std::size_t>(k)] = static_cast<double>(rest % M) / M;
            rest /= M;
        }
        total += tc.phi(params.b(-1, v)) - tc.phi(params.b(1, v));
    }
    return total / points;
}

double lattice_l1(const LatticeGeometry& geo, const std::vector<double>& f, const std::vector<double>& g) {
    if (f.size() != geo.num_sites() || g.size() != geo.num_sites())
        throw std::invalid_argument("lattice_l1: size mismatch");
    double total = 0.0;
    for (std::size_t s = 0; s < f.size(); ++s) total += std::abs(f[s] - g[s]);
    return total * std::pow(static_cast<double>(geo.half_width()), -geo.dim());
}

double lattice_linf(const std::vector<double>& f, const std::vector<double>& g) {
    double worst = 0.0;
    for (std::size_t s = 0; s < f.size(); ++s) worst = std::max(worst, std::abs(f[s] - g[s]));
    return worst;
}

namespace {

ExclusionModel make_model(const ExperimentConfig& config, int N) {
    return ExclusionModel(LatticeGeometry(config.d, N), config.params);
}

std::uint64_t sample_seed(std::uint64_t seed, std::size_t r) { return replica_seed(seed, 2 * r); }
std::uint64_t dynamics_seed(std::uint64_t seed, std::size_t r) { return replica_seed(seed, 2 * r + 1); }

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
    if (v.size() < 2) return std::numeric_limits<double>::infinity();
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

std::vector<double> transverse_average(const LatticeGeometry& geo, const std::vector<double>& per_site) {
    const int N = geo.half_width();
    std::vector<double> out(static_cast<std::size_t>(2 * N - 1), 0.0);
    for (std::size_t s = 0; s < per_site.size(); ++s)
        out[static_cast<std::size_t>(geo.x1(s) + N - 1)] += per_site[s];
    for (double& v : out) v /= static_cast<double>(geo.transverse_count());
    return out;
}

}  // namespace

StationaryStats stationary_statistics(const ExperimentConfig& config, int N) {
    const ExclusionModel model = make_model(config, N);
    const auto& geo = model.geometry();
    const Grid grid = experiment_grid(config, N);
    const auto initial = on_lattice(initial_profile(config, grid), geo);
    const auto R = static_cast<std::size_t>(config.run.replicas);
    const auto B = static_cast<std::size_t>(config.run.batches);
    std::vector<std::vector<ObservableAccumulators>> per_replica(R);
    parallel_for(R, worker_threads(), [&](std::size_t r) {
        CtmcEngine engine(model, sample_bernoulli_profile(initial, sample_seed(config.run.seed, r)),
                          dynamics_seed(config.run.seed, r), config.run.engine);
        engine.advance_to(config.run.burn_in);
        engine.reset_accumulators();
        const double len = (config.run.T - config.run.burn_in) / static_cast<double>(B);
        for (std::size_t b = 0; b < B; ++b) {
            engine.advance_to(config.run.burn_in + len * static_cast<double>(b + 1));
            per_replica[r].push_back(engine.accumulators());
            engine.reset_accumulators();
        }
    });
    StationaryStats stats{geo, {}, {}};
    stats.merged.resize(geo);
    for (auto& batches : per_replica) {
        for (auto& acc : batches) {
            stats.merged.merge(acc);
            stats.batches.push_back(std::move(acc));
        }
    }
    return stats;
}

std::vector<SliceCurrent> fick_estimates(const StationaryStats& stats) {
    const auto& geo = stats.geometry;
    const int N = geo.half_width();
    std::vector<SliceCurrent> out;
    for (int s = -(N - 3); s <= N - 3; ++s) {
        std::vector<double> per_batch;
        for (const auto& b : stats.batches) per_batch.push_back(slice_current(geo, b, s));
        const double eb = stats.batches.size() > 1 ? 2.0 * standard_error(per_batch) : 0.0;
        out.push_back({s, slice_current(geo, stats.merged, s), eb});
    }
    return out;
}

std::vector<std::vector<double>> mean_smoothed_profiles(const ExperimentConfig& config,
                                                        const std::vector<double>& initial_per_site,
                                                        const std::vector<double>& probe_times,
                                                        const std::optional<TiltField>& tilt) {
    const ExclusionModel model = make_model(config, config.N);
    const auto& geo = model.geometry();
    const double eps = (config.checks.smoothing_l + 0.5) / config.N;
    const auto R = static_cast<std::size_t>(config.run.replicas);
    const double horizon = *std::max_element(probe_times.begin(), probe_times.end());
    std::vector<std::vector<std::vector<double>>> per_replica(R);
    parallel_for(R, worker_threads(), [&](std::size_t r) {
        RunOptions opt;
        opt.T = horizon;
        opt.seed = dynamics_seed(config.run.seed, r);
        opt.engine = config.run.engine;
        opt.tilt = tilt;
        opt.probe_times = probe_times;
        const auto res = run_ctmc(model, sample_bernoulli_profile(initial_per_site, sample_seed(config.run.seed, r)), opt);
        // Snapshots come back sorted by time; map them onto the requested order.
        for (double t : probe_times) {
            const auto it = std::find_if(res.snapshots.begin(), res.snapshots.end(),
                                         [t](const auto& p) { return p.first == t; });
            per_replica[r].push_back(SmoothedMeasure(EmpiricalMeasure(geo, it->second), eps).on_sites());
        }
    });
    std::vector<std::vector<double>> out(probe_times.size(), std::vector<double>(geo.num_sites(), 0.0));
    for (const auto& rep : per_replica)
        for (std::size_t p = 0; p < probe_times.size(); ++p)
            for (std::size_t s = 0; s < geo.num_sites(); ++s) out[p][s] += rep[p][s];
    for (auto& v : out)
        for (double& x : v) x /= static_cast<double>(R);
    return out;
}

// ---------------------------------------------------------------------------
// Experiments

ExperimentResult evaluate_hydrostatics(const ExperimentConfig& config, const std::vector<StationaryStats>& runs) {
    ExperimentResult res;
    res.experiment = "hydrostatics";
    Table errors{"hydrostatics", {"N", "l1", "linf", "duration"}, {}};
    Table profiles{"profiles", {"N", "u1", "simulated", "hydrostatic"}, {}};
    std::vector<double> l1s;
    for (const auto& run : runs) {
        const auto& geo = run.geometry;
        const int N = geo.half_width();
        const auto sim = run.merged.time_average_density();
        const auto pde = on_lattice(solve_hydrostatic(config.params, experiment_grid(config, N)), geo);
        const double l1 = lattice_l1(geo, sim, pde);
        l1s.push_back(l1);
        errors.rows.push_back({static_cast<double>(N), l1, lattice_linf(sim, pde), run.merged.duration});
        const auto ts = transverse_average(geo, sim);
        const auto tp = transverse_average(geo, pde);
        for (std::size_t i = 0; i < ts.size(); ++i)
            profiles.rows.push_back({static_cast<double>(N), (static_cast<double>(i) - (N - 1)) / N, ts[i], tp[i]});
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < l1s.size(); ++i) decreasing = decreasing && l1s[i] < l1s[i - 1];
    res.checks.push_back({"l1_at_largest_N", l1s.back() < config.checks.l1_tolerance, l1s.back(),
                          config.checks.l1_tolerance, "L1 distance at the largest N"});
    res.checks.push_back({"l1_decreasing_in_N", decreasing, static_cast<double>(l1s.size()), 0.0,
                          "L1 strictly decreasing along the N list"});
    res.tables = {errors, profiles};
    return res;
}

ExperimentResult evaluate_ficks(const ExperimentConfig& config, const StationaryStats& run) {
    ExperimentResult res;
    res.experiment = "ficks-law";
    const double target = fick_target(config.params, config.d);
    const auto est = fick_estimates(run);
    const int N = run.geometry.half_width();
    Table t{"ficks_law", {"slice", "u", "estimate", "error_bar", "target"}, {}};
    double worst = 0.0;
    for (const auto& e : est) {
        worst = std::max(worst, std::abs(e.value - target) / std::abs(target));
        t.rows.push_back({static_cast<double>(e.slice), static_cast<double>(e.slice) / N, e.value, e.error_bar, target});
    }
    res.checks.push_back({"slices_within_tolerance", worst <= config.checks.current_tolerance, worst,
                          config.checks.current_tolerance, "max relative deviation from phi(b-) - phi(b+)"});
    const auto pick = [&](int s) {
        return *std::find_if(est.begin(), est.end(), [s](const SliceCurrent& e) { return e.slice == s; });
    };
    const int s1 = -std::max(1, (N - 3) / 2);
    const int s2 = std::max(1, (N - 3) / 2);
    if (s1 != s2 && std::abs(s1) <= N - 3) {
        const auto a = pick(s1);
        const auto b = pick(s2);
        const double gap = std::abs(a.value - b.value);
        const double bar = std::hypot(a.error_bar, b.error_bar);
        res.checks.push_back({"two_slices_agree", gap <= bar, gap, bar,
                              "slices " + std::to_string(s1) + " and " + std::to_string(s2)});
    }
    res.extra["target"] = target;
    res.tables = {t};
    return res;
}

namespace {

ExperimentResult run_hydrostatics(const ExperimentConfig& config) {
    std::vector<int> Ns = config.N_list.empty() ? std::vector<int>{config.N} : config.N_list;
    std::vector<StationaryStats> runs;
    for (int N : Ns) runs.push_back(stationary_statistics(config, N));
    return evaluate_hydrostatics(config, runs);
}

ExperimentResult run_ficks(const ExperimentConfig& config) {
    if (config.N < 4) throw ConfigError("ficks-law needs N >= 4 so that an interior slice exists");
    return evaluate_ficks(config, stationary_statistics(config, config.N));
}

std::vector<double> probe_times_or_T(const ExperimentConfig& config) {
    return config.run.probe_times.empty() ? std::vector<double>{config.run.T} : config.run.probe_times;
}

ExperimentResult compare_profiles(const ExperimentConfig& config, bool tilted) {
    ExperimentResult res;
    res.experiment = tilted ? "tilted" : "hydrodynamics";
    const ExclusionModel model = make_model(config, config.N);
    const auto& geo = model.geometry();
    const Grid grid = experiment_grid(config, config.N);
    const ScalarField gamma = initial_profile(config, grid);
    const auto probes = probe_times_or_T(config);
    std::optional<TiltField> tilt;
    const SpaceTimeFunction H = tilt_function(config.tilt, config.d);
    if (tilted) tilt = TiltField{H, config.tilt.window};
    const auto sim = mean_smoothed_profiles(config, on_lattice(gamma, geo), probes, tilt);

    Table t{tilted ? "tilted" : "hydrodynamics", {"t", "l1", "linf", "clamp_events"}, {}};
    Table prof{"profiles", {"t", "u1", "simulated", "pde"}, {}};
    for (std::size_t p = 0; p < probes.size(); ++p) {
        SolverOptions so;
        so.dt = config.grid.dt;
        std::vector<double> pde;
        std::size_t clamps = 0;
        if (probes[p] == 0.0) {
            pde = on_lattice(gamma, geo);
        } else {
            const Trajectory path = tilted ? solve_controlled(gamma, config.params, H, probes[p], so)
                                           : solve_parabolic(gamma, config.params, probes[p], so);
            pde = on_lattice(path.slice(path.steps()), geo);
            clamps = path.clamp_events;
        }
        const double l1 = lattice_l1(geo, sim[p], pde);
        t.rows.push_back({probes[p], l1, lattice_linf(sim[p], pde), static_cast<double>(clamps)});
        res.checks.push_back({"l1_at_t=" + json(probes[p]).dump(), l1 <= config.checks.l1_tolerance, l1,
                              config.checks.l1_tolerance, "L1 between smoothed simulation and PDE"});
        const auto ts = transverse_average(geo, sim[p]);
        const auto tp = transverse_average(geo, pde);
        for (std::size_t i = 0; i < ts.size(); ++i)
            prof.rows.push_back({probes[p], (static_cast<double>(i) - (config.N - 1)) / config.N, ts[i], tp[i]});
    }
    res.tables = {t, prof};
    return res;
}

ExperimentResult run_rate_eval(const ExperimentConfig& config) {
    ExperimentResult res;
    res.experiment = "rate-eval";
    const Grid grid = experiment_grid(config, config.N);
    SolverOptions so;
    so.dt = config.grid.dt;
    so.stride = config.grid.stride;
    const SpaceTimeFunction H = tilt_function(config.tilt, config.d);

    std::optional<Trajectory> path;
    std::optional<ScalarField> gamma;
    if (config.rate.path == "file") {
        path = read_trajectory(config.rate.trajectory_dir, grid);
        gamma = path->slice(0);
    } else {
        gamma = initial_profile(config, grid);
        if (config.rate.path == "controlled") path = solve_controlled(*gamma, config.params, H, config.run.T, so);
        else path = solve_parabolic(*gamma, config.params, config.run.T, so);
    }
    const RateResult hydro = rate_I(*path, *gamma, config.params);
    const RateResult* reported = &hydro;
    std::optional<RateResult> perturbed;

    if (config.rate.path == "hydrodynamic") {
        res.checks.push_back({"hydrodynamic_path_rate", hydro.finite() && hydro.value <= config.checks.rate_tolerance,
                              hydro.value, config.checks.rate_tolerance, "I_T of the solver output"});
    } else if (config.rate.path == "controlled") {
        const auto Hs = sample_test_field(*path, H);
        const double expected = 0.5 * sigma_inner(*path, config.params.a, Hs, Hs);
        const double rel = std::abs(hydro.value - expected) / expected;
        res.checks.push_back({"controlled_round_trip", hydro.finite() && rel <= config.checks.control_tolerance, rel,
                              config.checks.control_tolerance, "relative error against 1/2 ||H*||^2_sigma"});
        res.extra["expected"] = expected;
    } else if (config.rate.path == "perturbed") {
        Trajectory bumped = *path;
        const std::size_t k = bumped.slices.size() / 2;
        for (std::size_t n = 0; n < grid.num_nodes(); ++n)
            if (!grid.is_wall(n)) bumped.slices[k][n] = std::clamp(bumped.slices[k][n] + config.rate.perturbation, 0.0, 1.0);
        perturbed = rate_I(bumped, *gamma, config.params);
        reported = &*perturbed;
        const double ratio = perturbed->value / std::max(hydro.value, std::numeric_limits<double>::min());
        res.checks.push_back({"perturbed_exceeds_solution", perturbed->value > config.checks.perturb_factor * hydro.value,
                              ratio, config.checks.perturb_factor, "I_T(perturbed) / I_T(solution)"});
        res.extra["solution_rate"] = hydro.value;
    } else {
        res.checks.push_back({"rate_is_finite", hydro.finite(), hydro.finite() ? hydro.value : -1.0, 0.0,
                              std::string("reason: ") + to_string(hydro.reason)});
    }
    res.extra["report"] = rate_report(*reported);
    Table t{"rate_slices", {"k", "t", "norm2"}, {}};
    for (std::size_t k = 0; k < reported->control.slice_norm2.size(); ++k)
        t.rows.push_back({static_cast<double>(k), path->time(k), reported->control.slice_norm2[k]});
    res.tables = {t};
    return res;
}

ExperimentResult run_oracle_check(const ExperimentConfig& config) {
    ExperimentResult res;
    res.experiment = "oracle-check";
    if (config.oracle.fixtures.empty()) throw ConfigError("oracle.fixtures must list at least one fixture");
    Table t{"oracle", {"fixture", "kind", "index", "exact", "simulated", "std_error", "z"}, {}};
    for (std::size_t fi = 0; fi < config.oracle.fixtures.size(); ++fi) {
        const OracleFixture fx = read_fixture(config.oracle.fixtures[fi]);
        const ExclusionModel model = fx.model();
        const auto& geo = model.geometry();
        const double speed = static_cast<double>(fx.N) * fx.N;

        const OracleFixture fresh = compute_fixture(fx.d, fx.N, fx.a, fx.b_minus, fx.b_plus);
        double drift = 0.0;
        for (std::size_t i = 0; i < fx.density.size(); ++i) drift = std::max(drift, std::abs(fx.density[i] - fresh.density[i]));
        for (std::size_t i = 0; i < fx.bond_current.size(); ++i)
            drift = std::max(drift, std::abs(fx.bond_current[i] - fresh.bond_current[i]));
        const std::string tag = "fixture" + std::to_string(fi);
        res.checks.push_back({tag + "_matches_exact", drift <= 1e-10, drift, 1e-10, config.oracle.fixtures[fi]});

        const auto R = static_cast<std::size_t>(config.run.replicas);
        const std::size_t S = geo.num_sites();
        const std::size_t B = geo.bonds().size();
        std::vector<std::vector<double>> samples(S + B, std::vector<double>(R));
        parallel_for(R, worker_threads(), [&](std::size_t r) {
            RunOptions opt;
            opt.T = config.run.T;
            opt.burn_in = config.run.burn_in;
            opt.seed = dynamics_seed(config.run.seed + fi, r);
            opt.engine = config.run.engine;
            const auto out = run_ctmc(model, sample_bernoulli_profile(fx.density, sample_seed(config.run.seed + fi, r)), opt);
            const auto dens = out.accumulators.time_average_density();
            for (std::size_t s = 0; s < S; ++s) samples[s][r] = dens[s];
            for (std::size_t b = 0; b < B; ++b)
                samples[S + b][r] = static_cast<double>(out.accumulators.bond_crossings[b]) / (speed * out.accumulators.duration);
        });
        double worst = 0.0;
        for (std::size_t i = 0; i < S + B; ++i) {
            const double exact = i < S ? fx.density[i] : fx.bond_current[i - S];
            const double m = mean(samples[i]);
            const double se = standard_error(samples[i]);
            const double z = (m - exact) / se;
            worst = std::max(worst, std::abs(z));
            t.rows.push_back({static_cast<double>(fi), i < S ? 0.0 : 1.0, static_cast<double>(i < S ? i : i - S), exact, m, se, z});
        }
        res.checks.push_back({tag + "_within_z", worst <= config.checks.z_tolerance, worst, config.checks.z_tolerance,
                              "max |simulated - exact| / standard error"});

        ModelParams eq;
        eq.a = fx.a;
        eq.b_minus = BoundaryProfile(fx.b_minus);
        eq.b_plus = BoundaryProfile(fx.b_minus);
        const auto gen = build_generator(ExclusionModel(geo, eq));
        const auto nu = product_bernoulli(gen.sites, fx.b_minus);
        const double db = check_detailed_balance(gen, nu);
        const double st = stationarity_residual(gen, nu);
        res.checks.push_back({tag + "_equilibrium_detailed_balance", db <= 1e-12, db, 1e-12, "b == c, mu = nu_c"});
        res.checks.push_back({tag + "_equilibrium_stationarity", st <= 1e-12, st, 1e-12, "|nu_c Q|_inf"});
    }
    res.tables = {t};
    return res;
}

CylinderFunction cylinder_from_name(const std::string& name) {
    if (name == "density") return CylinderFunction::Density;
    if (name == "h") return CylinderFunction::H;
    return CylinderFunction::G;
}

ExperimentResult run_local_eq(const ExperimentConfig& config) {
    ExperimentResult res;
    res.experiment = "local-eq";
    const ExclusionModel model = make_model(config, config.N);
    const auto& geo = model.geometry();
    const Grid grid = experiment_grid(config, config.N);
    const auto initial = on_lattice(initial_profile(config, grid), geo);
    auto probes = config.run.probe_times;
    if (probes.size() < 2) {
        probes.clear();
        for (int k = 0; k <= 8; ++k) probes.push_back(config.run.T * k / 8.0);
    }
    std::sort(probes.begin(), probes.end());
    const SpaceTimeFunction G = [](double, std::span<const double> u) {
        const double pi = std::numbers::pi;
        double v = std::sin(0.5 * pi * (u[0] + 1.0));
        if (u.size() > 1) v *= 1.0 + 0.5 * std::cos(2.0 * pi * u[1]);
        return v;
    };
    const auto psi = cylinder_from_name(config.local_eq.function);
    const auto R = static_cast<std::size_t>(config.run.replicas);
    std::vector<double> residual(R);
    parallel_for(R, worker_threads(), [&](std::size_t r) {
        RunOptions opt;
        opt.T = probes.back();
        opt.seed = dynamics_seed(config.run.seed, r);
        opt.engine = config.run.engine;
        opt.probe_times = probes;
        const auto out = run_ctmc(model, sample_bernoulli_profile(initial, sample_seed(config.run.seed, r)), opt);
        residual[r] = local_equilibrium_residual(model, out.snapshots, G, psi, config.local_eq.dir, config.local_eq.eps);
    });
    Table t{"local_eq", {"replica", "residual"}, {}};
    for (std::size_t r = 0; r < R; ++r) t.rows.push_back({static_cast<double>(r), residual[r]});
    const double m = mean(residual);
    double mean_abs = 0.0;
    for (double v : residual) mean_abs += std::abs(v) / static_cast<double>(R);
    Table s{"local_eq_summary", {"N", "eps", "mean", "mean_abs", "std_error"}, {}};
    s.rows.push_back({static_cast<double>(config.N), config.local_eq.eps, m, mean_abs, standard_error(residual)});
    res.checks.push_back({"residuals_finite", std::isfinite(mean_abs), mean_abs, 0.0, "mean |residual| over replicas"});
    res.tables = {t, s};
    return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto& e = config.experiment;
    if (e == "hydrostatics") return run_hydrostatics(config);
    if (e == "ficks-law") return run_ficks(config);
    if (e == "hydrodynamics") return compare_profiles(config, false);
    if (e == "tilted") return compare_profiles(config, true);
    if (e == "rate-eval") return run_rate_eval(config);
    if (e == "oracle-check") return run_oracle_check(config);
    return run_local_eq(config);
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

}  // namespace

std::string format_csv(const Table& table, const json& header) {
    std::string out = "# " + header.dump() + "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) out += (c ? "," : "") + table.columns[c];
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + format_number(row[c]);
        out += '\n';
    }
    return out;
}

json summary_json(const ExperimentConfig& config, const ExperimentResult& result) {
    json checks = json::array();
    for (const auto& c : result.checks) {
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"value", finite_or_null(c.value)},
                          {"threshold", finite_or_null(c.threshold)},
                          {"detail", c.detail}});
    }
    return {{"experiment", result.experiment},
            {"config_hash", config_hash(config)},
            {"seed", config.run.seed},
            {"version", version_string()},
            {"passed", result.all_passed()},
            {"checks", checks},
            {"extra", result.extra}};
}

std::vector<std::string> emit_report(const ExperimentConfig& config, const ExperimentResult& result,
                                     const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    const json header{{"experiment", result.experiment},
                      {"seed", config.run.seed},
                      {"config_hash", config_hash(config)},
                      {"version", version_string()},
                      {"params", to_json(config)["params"]}};
    std::vector<std::string> files;
    const auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream os(fs::path(directory) / name, std::ios::binary);
        if (!os) throw std::runtime_error("emit_report: cannot write " + name);
        os << text;
        files.push_back(name);
    };
    for (const auto& t : result.tables) write(t.name + ".csv", format_csv(t, header));
    write("summary.json", summary_json(config, result).dump(2) + "\n");

    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    const json manifest{{"config", to_json(config)},
                        {"config_hash", config_hash(config)},
                        {"seed", config.run.seed},
                        {"version", version_string()},
                        {"threads", worker_threads()},
                        {"timestamp", stamp},
                        {"files", files}};
    write("manifest.json", manifest.dump(2) + "\n");
    return files;
}

}  // namespace bdex
