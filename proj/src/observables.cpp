#include "bdex/observables.hpp"

#include "bdex/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bdex {

namespace {

/// Transverse coordinates within periodic distance `radius` (lattice units) of c.
std::vector<int> periodic_window(int c, int radius, int N) {
    std::vector<int> out;
    if (2 * radius + 1 >= N) {
        for (int j = 0; j < N; ++j) out.push_back(j);
        return out;
    }
    for (int o = -radius; o <= radius; ++o) out.push_back(((c + o) % N + N) % N);
    return out;
}

double periodic_distance(double p, double q) {
    double dlt = std::abs(p - q);
    dlt -= std::floor(dlt);
    return std::min(dlt, 1.0 - dlt);
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(const LatticeGeometry& geo, const Configuration& eta)
    : geo_(geo), eta_(eta), weight_(std::pow(static_cast<double>(geo.half_width()), -geo.dim())) {
    if (eta.size() != geo.num_sites()) throw std::invalid_argument("EmpiricalMeasure: configuration size mismatch");
}

double EmpiricalMeasure::mass() const noexcept {
    return weight_ * static_cast<double>(eta_.particle_count());
}

double EmpiricalMeasure::integrate(const std::function<double(std::span<const double>)>& G) const {
    double total = 0.0;
    for (std::size_t s = 0; s < geo_.num_sites(); ++s) {
        if (eta_[s]) total += G(geo_.position(s));
    }
    return weight_ * total;
}

double block_average(const LatticeGeometry& geo, const Configuration& eta, std::size_t x, int l) {
    if (l < 0) throw std::invalid_argument("block_average: l must be >= 0");
    const int N = geo.half_width();
    const auto c = geo.coords(x);
    std::vector<std::vector<int>> windows(geo.dim());
    for (int o = -l; o <= l; ++o) {
        const int y1 = c[0] + o;
        if (y1 >= -N + 1 && y1 <= N - 1) windows[0].push_back(y1);
    }
    for (int k = 1; k < geo.dim(); ++k) windows[k] = periodic_window(c[k], l, N);

    std::size_t count = 0;
    std::size_t occupied = 0;
    std::vector<int> y(geo.dim());
    std::vector<std::size_t> it(geo.dim(), 0);
    while (true) {
        for (int k = 0; k < geo.dim(); ++k) y[k] = windows[k][it[k]];
        occupied += static_cast<std::size_t>(eta[geo.index(y)]);
        ++count;
        int k = geo.dim() - 1;
        for (; k >= 0; --k) {
            if (++it[k] < windows[k].size()) break;
            it[k] = 0;
        }
        if (k < 0) break;
    }
    return static_cast<double>(occupied) / static_cast<double>(count);
}

// ---------------------------------------------------------------------------

SmoothedMeasure::SmoothedMeasure(EmpiricalMeasure pi, double eps) : pi_(std::move(pi)), eps_(eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("smooth_measure: eps must be > 0");
}

double SmoothedMeasure::density(std::span<const double> u) const {
    const auto& geo = pi_.geometry();
    const int N = geo.half_width();
    const int d = geo.dim();
    if (static_cast<int>(u.size()) != d) throw std::invalid_argument("SmoothedMeasure::density: wrong arity");
    constexpr double slack = 1e-12;

    std::vector<std::vector<int>> windows(d);
    const int lo = std::max(-N + 1, static_cast<int>(std::ceil(N * (u[0] - eps_) - slack)));
    const int hi = std::min(N - 1, static_cast<int>(std::floor(N * (u[0] + eps_) + slack)));
    for (int y1 = lo; y1 <= hi; ++y1) windows[0].push_back(y1);
    for (int k = 1; k < d; ++k) {
        for (int j = 0; j < N; ++j) {
            if (periodic_distance(static_cast<double>(j) / N, u[k]) <= eps_ + slack) windows[k].push_back(j);
        }
    }
    double volume = std::min(u[0] + eps_, 1.0) - std::max(u[0] - eps_, -1.0);
    for (int k = 1; k < d; ++k) volume *= std::min(2.0 * eps_, 1.0);
    if (!(volume > 0.0)) return 0.0;

    std::size_t occupied = 0;
    bool empty = false;
    for (const auto& w : windows) empty = empty || w.empty();
    if (!empty) {
        const auto& eta = pi_.configuration();
        std::vector<int> y(d);
        std::vector<std::size_t> it(d, 0);
        while (true) {
            for (int k = 0; k < d; ++k) y[k] = windows[k][it[k]];
            occupied += static_cast<std::size_t>(eta[geo.index(y)]);
            int k = d - 1;
            for (; k >= 0; --k) {
                if (++it[k] < windows[k].size()) break;
                it[k] = 0;
            }
            if (k < 0) break;
        }
    }
    return pi_.atom_weight() * static_cast<double>(occupied) / (smoothing_normaliser(eps_) * volume);
}

std::vector<double> SmoothedMeasure::on_sites() const {
    const auto& geo = pi_.geometry();
    std::vector<double> out(geo.num_sites());
    for (std::size_t s = 0; s < geo.num_sites(); ++s) out[s] = density(geo.position(s));
    return out;
}

SmoothedMeasure smooth_measure(const EmpiricalMeasure& pi, double eps) {
    return SmoothedMeasure(pi, eps);
}

// ---------------------------------------------------------------------------

double slice_current(const LatticeGeometry& geo, const ObservableAccumulators& acc, int slice) {
    const int N = geo.half_width();
    if (std::abs(slice) > N - 3) throw std::invalid_argument("slice_current: slice must satisfy |[uN]| <= N-3");
    if (!(acc.duration > 0.0)) throw std::invalid_argument("slice_current: zero duration");
    const double crossings = static_cast<double>(slice_crossings(geo, acc, slice));
    const double Nd = static_cast<double>(N);
    return (2.0 * Nd / static_cast<double>(geo.transverse_count())) * crossings / (Nd * Nd * acc.duration);
}

CurrentEstimate slice_current_estimator(const LatticeGeometry& geo, const ObservableAccumulators& acc, double u) {
    if (!(u > -1.0 && u < 1.0)) throw std::invalid_argument("slice_current_estimator: u must lie in (-1,1)");
    const int slice = static_cast<int>(std::floor(u * geo.half_width()));
    return {slice, slice_current(geo, acc, slice)};
}

// ---------------------------------------------------------------------------

std::pair<int, int> cylinder_support(CylinderFunction psi) {
    switch (psi) {
        case CylinderFunction::Density: return {0, 0};
        case CylinderFunction::H: return {-1, 1};
        case CylinderFunction::G: return {-1, 2};
    }
    return {0, 0};
}

double cylinder_value(CylinderFunction psi, const ExclusionModel& model, const Configuration& eta, std::size_t x,
                      int dir) {
    const auto& geo = model.geometry();
    const auto at = [&](int step) {
        const long s = geo.neighbor(x, dir, step);
        if (s < 0) throw std::invalid_argument("cylinder_value: support leaves the cylinder");
        return static_cast<double>(eta[static_cast<std::size_t>(s)]);
    };
    const double a = model.a();
    switch (psi) {
        case CylinderFunction::Density: return eta[x];
        case CylinderFunction::H: {
            const double e0 = eta[x];
            const double em = at(-1);
            const double ep = at(1);
            return e0 + a * (e0 * (em + ep) - em * ep);
        }
        case CylinderFunction::G: {
            const double r = 1.0 + a * (at(-1) + at(2));
            const double diff = at(1) - static_cast<double>(eta[x]);
            return r * diff * diff;
        }
    }
    return 0.0;
}

double cylinder_expectation(CylinderFunction psi, double a, double alpha) {
    switch (psi) {
        case CylinderFunction::Density: return alpha;
        case CylinderFunction::H: return alpha + a * alpha * alpha;
        case CylinderFunction::G: return 2.0 * alpha * (1.0 - alpha) * (1.0 + 2.0 * a * alpha);
    }
    return 0.0;
}

double local_equilibrium_residual(const ExclusionModel& model,
                                  const std::vector<std::pair<double, Configuration>>& probes,
                                  const std::function<double(double, std::span<const double>)>& G,
                                  CylinderFunction psi, int dir, double eps) {
    const auto& geo = model.geometry();
    const int N = geo.half_width();
    const int l = static_cast<int>(std::floor(eps * N + 1e-12));
    if (l < 1) throw std::invalid_argument("local_equilibrium_residual: eps * N must be >= 1");
    if (dir < 0 || dir >= geo.dim()) throw std::invalid_argument("local_equilibrium_residual: bad direction");
    const auto [lo, hi] = cylinder_support(psi);
    const double weight = std::pow(static_cast<double>(N), -geo.dim());

    std::vector<double> values;
    values.reserve(probes.size());
    for (const auto& [t, eta] : probes) {
        double v = 0.0;
        for (std::size_t s = 0; s < geo.num_sites(); ++s) {
            if (dir == 0) {
                const int x1 = geo.x1(s);
                if (x1 + lo < -N + 1 || x1 + hi > N - 1) continue;
            }
            const double local = cylinder_value(psi, model, eta, s, dir);
            const double replaced = cylinder_expectation(psi, model.a(), block_average(geo, eta, s, l));
            v += G(t, geo.position(s)) * (local - replaced);
        }
        values.push_back(weight * v);
    }
    if (values.size() < 2) return 0.0;
    double integral = 0.0;
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        integral += 0.5 * (probes[k + 1].first - probes[k].first) * (values[k] + values[k + 1]);
    }
    return integral;
}

// ---------------------------------------------------------------------------

Configuration sample_bernoulli_profile(std::span<const double> per_site, std::uint64_t seed) {
    Rng rng(seed);
    Configuration eta(per_site.size());
    for (std::size_t s = 0; s < per_site.size(); ++s) {
        const double p = per_site[s];
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_bernoulli_profile: density outside [0,1]");
        eta.set(s, rng.uniform() < p);
    }
    return eta;
}

Configuration sample_bernoulli_profile(const LatticeGeometry& geo,
                                       const std::function<double(std::span<const double>)>& rho,
                                       std::uint64_t seed) {
    std::vector<double> p(geo.num_sites());
    for (std::size_t s = 0; s < geo.num_sites(); ++s) p[s] = rho(geo.position(s));
    return sample_bernoulli_profile(p, seed);
}

}  // namespace bdex
