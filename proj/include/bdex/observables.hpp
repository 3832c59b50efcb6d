#pragma once

/**
 * @file observables.hpp
 * @brief Empirical measures, block averages, smoothing and the current and
 *        local-equilibrium statistics computed from simulation output.
 */

#include "bdex/lattice.hpp"
#include "bdex/simulate.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace bdex {

/// Mass N^{-d} at x/N for every occupied site.
class EmpiricalMeasure {
public:
    EmpiricalMeasure(const LatticeGeometry& geo, const Configuration& eta);

    [[nodiscard]] const LatticeGeometry& geometry() const noexcept { return geo_; }
    [[nodiscard]] const Configuration& configuration() const noexcept { return eta_; }
    [[nodiscard]] double atom_weight() const noexcept { return weight_; }
    [[nodiscard]] double mass() const noexcept;
    /// <pi, G>.
    [[nodiscard]] double integrate(const std::function<double(std::span<const double>)>& G) const;

private:
    LatticeGeometry geo_;
    Configuration eta_;
    double weight_;
};

/// eta^l(x): mean occupancy over {y in the cylinder : |y - x|_inf <= l}.
[[nodiscard]] double block_average(const LatticeGeometry& geo, const Configuration& eta, std::size_t x, int l);

/// Normaliser U_eps of the smoothing operator, 1 + eps.
[[nodiscard]] inline double smoothing_normaliser(double eps) noexcept { return 1.0 + eps; }

/**
 * Absolutely continuous smoothing of an empirical measure: density at u is
 * pi(B_eps(u)) / (U_eps |B_eps(u)|) with B_eps(u) the sup-norm ball clipped
 * to [-1,1] x T^{d-1}.
 */
class SmoothedMeasure {
public:
    SmoothedMeasure(EmpiricalMeasure pi, double eps);

    [[nodiscard]] double eps() const noexcept { return eps_; }
    [[nodiscard]] double density(std::span<const double> u) const;
    /// Density evaluated at every lattice position x/N.
    [[nodiscard]] std::vector<double> on_sites() const;

private:
    EmpiricalMeasure pi_;
    double eps_;
};

[[nodiscard]] SmoothedMeasure smooth_measure(const EmpiricalMeasure& pi, double eps);

struct CurrentEstimate {
    int slice;      // [uN]
    double value;   // (2N / N^{d-1}) * crossings / (N^2 duration)
};

/// Scaled stationary current across the slice ([uN], [uN]+1) from jump counts.
[[nodiscard]] CurrentEstimate slice_current_estimator(const LatticeGeometry& geo, const ObservableAccumulators& acc,
                                                      double u);
/// Same estimator addressed by slice index; requires |slice| <= N-3.
[[nodiscard]] double slice_current(const LatticeGeometry& geo, const ObservableAccumulators& acc, int slice);

/// Cylinder functions entering the local-equilibrium replacement.
enum class CylinderFunction { Density, H, G };

/// tau_x Psi(eta) for direction `dir`; support must fit in the cylinder.
[[nodiscard]] double cylinder_value(CylinderFunction psi, const ExclusionModel& model, const Configuration& eta,
                                    std::size_t x, int dir);
/// Expectation of Psi under product Bernoulli(alpha).
[[nodiscard]] double cylinder_expectation(CylinderFunction psi, double a, double alpha);
/// Offsets along e_dir spanned by Psi's support: [lo, hi].
[[nodiscard]] std::pair<int, int> cylinder_support(CylinderFunction psi);

/**
 * Time integral over the probes of
 *   N^{-d} sum_x G(s, x/N) [tau_x Psi(eta_s) - Psi~(eta_s^{eps N}(x))],
 * summed over x whose translated support fits in the cylinder. Probes are
 * integrated with the trapezoidal rule.
 */
[[nodiscard]] double local_equilibrium_residual(
    const ExclusionModel& model, const std::vector<std::pair<double, Configuration>>& probes,
    const std::function<double(double, std::span<const double>)>& G, CylinderFunction psi, int dir, double eps);

/// Independent occupancies with P[eta(x) = 1] = rho(x/N).
[[nodiscard]] Configuration sample_bernoulli_profile(const LatticeGeometry& geo,
                                                     const std::function<double(std::span<const double>)>& rho,
                                                     std::uint64_t seed);
[[nodiscard]] Configuration sample_bernoulli_profile(std::span<const double> per_site, std::uint64_t seed);

}  // namespace bdex
