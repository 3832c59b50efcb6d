#pragma once

/**
 * @file ldp.hpp
 * @brief Dynamical rate functional on discrete density paths: energy,
 *        J_G, control recovery, I_T and H^{-1} norms.
 *
 * Inner products are volume-weighted sums over interior nodes; face sums run
 * over every face touching an interior node (wall faces included), so
 * gradients at the walls are one-sided. Time sums use the left point of each
 * slice interval.
 */

#include "bdex/pde.hpp"

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

namespace bdex {

/// Per-slice fields G_k, k = 0..K, on the path grid (wall values must be 0).
using SliceFields = std::vector<std::vector<double>>;

/// Discrete int_0^T int |grad rho|^2.
[[nodiscard]] double energy_Q(const Trajectory& path);

/// Evaluates G at the slice times of `path`.
[[nodiscard]] SliceFields sample_test_field(const Trajectory& path, const SpaceTimeFunction& G);

struct JTerms {
    double final_term = 0.0;      // <rho_T, G_T>
    double initial_term = 0.0;    // -<gamma, G_0>
    double time_term = 0.0;       // -int <rho, d_t G>
    double bulk_term = 0.0;       // -int <phi(rho), Lap G>
    double right_wall = 0.0;      // +int_{Gamma+} phi(b) d_1 G
    double left_wall = 0.0;       // -int_{Gamma-} phi(b) d_1 G
    double quadratic = 0.0;       // -1/2 int <sigma(rho), |grad G|^2>
    [[nodiscard]] double linear() const noexcept {
        return final_term + initial_term + time_term + bulk_term + right_wall + left_wall;
    }
    [[nodiscard]] double total() const noexcept { return linear() + quadratic; }
};

[[nodiscard]] JTerms J_G_terms(const Trajectory& path, const ScalarField& gamma, const ModelParams& params,
                               const SliceFields& G);
[[nodiscard]] double J_G(const Trajectory& path, const ScalarField& gamma, const ModelParams& params,
                         const SpaceTimeFunction& G);
[[nodiscard]] double J_G(const Trajectory& path, const ScalarField& gamma, const ModelParams& params,
                         const SliceFields& G);

/// sum_k dt <G1_k, G2_k>_{sigma(rho_k)} with face-averaged sigma.
[[nodiscard]] double sigma_inner(const Trajectory& path, double a, const SliceFields& G1, const SliceFields& G2);

inline constexpr double kSigmaFloor = 1e-10;

struct ControlField {
    Grid grid;
    double dt = 0.0;
    SliceFields H;                      // H_k, k = 0..K-1
    std::vector<double> slice_norm2;    // ||H_k||^2_{sigma(rho_k)}
    std::size_t sigma_floor_hits = 0;
    double min_sigma = 0.0;

    explicit ControlField(Grid g) : grid(std::move(g)) {}
    /// sum_k dt ||H_k||^2_sigma.
    [[nodiscard]] double norm2() const;
};

/// Solves div_h(sigma(rho_k) grad_h H_k) = -r_k with r_k the scheme residual of slice k.
[[nodiscard]] ControlField recover_control(const Trajectory& path, const ModelParams& params);

enum class InfiniteReason { None, BadInitialSlice, InfiniteEnergy, AbsoluteContinuity, BoundaryTrace };
[[nodiscard]] const char* to_string(InfiniteReason r) noexcept;

struct RateResult {
    double value = std::numeric_limits<double>::infinity();
    InfiniteReason reason = InfiniteReason::None;
    double Q = 0.0;
    ControlField control;

    explicit RateResult(Grid g) : control(std::move(g)) {}
    [[nodiscard]] bool finite() const noexcept { return reason == InfiniteReason::None; }
};

/// I_T(path | gamma) = 1/2 ||H||^2_sigma, or +inf with a reason code.
[[nodiscard]] RateResult rate_I(const Trajectory& path, const ScalarField& gamma, const ModelParams& params);

/// JSON report {I_T, Q, slice_norm2, sigma_floor_hits, min_sigma, reason}.
[[nodiscard]] nlohmann::json rate_report(const RateResult& r);

/// Squared H^{-1} norm: sum over faces of |grad_h U|^2 h^d where -Lap_h U = v, U = 0 on the walls.
[[nodiscard]] double h_minus1_norm(const ScalarField& v);

/// sum_k dt ||(rho_{k+1} - rho_k) / dt||^2_{-1}.
[[nodiscard]] double time_derivative_norm(const Trajectory& path);

/// sum_k dt sum_faces |grad rho|^2 / chi(face mean) h^d.
[[nodiscard]] double entropy_energy(const Trajectory& path);
/// sum_k dt sum_faces phi'(mean) |grad rho|^2 / chi(mean) h^d.
[[nodiscard]] double relaxation_energy(const Trajectory& path, double a);

/// Sup of J_G over the linear span of a dictionary, 1/2 L^T B^{-1} L.
[[nodiscard]] double dictionary_sup(const Trajectory& path, const ScalarField& gamma, const ModelParams& params,
                                    const std::vector<SliceFields>& dictionary);

/// (1 - eps) rho + eps lambda slice by slice.
[[nodiscard]] Trajectory mix_paths(const Trajectory& rho, const Trajectory& lambda, double eps);

}  // namespace bdex
