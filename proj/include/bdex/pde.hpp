#pragma once

/**
 * @file pde.hpp
 * @brief Transport coefficients and finite-difference solvers on
 *        [-1,1] x T^{d-1}: hydrodynamic, controlled and hydrostatic problems.
 *
 * Grid nodes along u_1 are u_1 = -1 + i h_1, i = 0..M1+1, h_1 = 2/(M1+1);
 * nodes i = 0 and i = M1+1 are Dirichlet walls. Transverse nodes are
 * j/Mp, wrapping periodically. Node index = i * Mp^{d-1} + transverse index.
 */

#include "bdex/lattice.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bdex {

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using SpaceFunction = std::function<double(std::span<const double>)>;
using SpaceTimeFunction = std::function<double(double, std::span<const double>)>;

struct TransportCoefficients {
    double a = 0.0;

    [[nodiscard]] double phi(double r) const noexcept { return r * (1.0 + a * r); }
    [[nodiscard]] double phi_prime(double r) const noexcept { return 1.0 + 2.0 * a * r; }
    [[nodiscard]] double chi(double r) const noexcept { return r * (1.0 - r); }
    [[nodiscard]] double sigma(double r) const noexcept { return 2.0 * r * (1.0 - r) * (1.0 + 2.0 * a * r); }
    [[nodiscard]] double sigma_prime(double r) const noexcept {
        return 2.0 * ((1.0 - 2.0 * r) * (1.0 + 2.0 * a * r) + 2.0 * a * r * (1.0 - r));
    }
    /// Root in [0,1] of a r^2 + r - psi = 0; throws outside [0, phi(1)].
    [[nodiscard]] double phi_inverse(double psi) const;
    /// max(1, 1 + 2a), the largest diffusivity on [0,1].
    [[nodiscard]] double max_phi_prime() const noexcept { return a > 0.0 ? 1.0 + 2.0 * a : 1.0; }
    [[nodiscard]] double max_sigma() const noexcept;
    [[nodiscard]] double max_abs_sigma_prime() const noexcept;
};

class Grid {
public:
    Grid(int d, int M1, int Mp);
    /// Grid whose interior nodes coincide with the lattice positions x/N.
    static Grid matching(const LatticeGeometry& geo);

    [[nodiscard]] int dim() const noexcept { return d_; }
    [[nodiscard]] int M1() const noexcept { return M1_; }
    [[nodiscard]] int Mp() const noexcept { return Mp_; }
    [[nodiscard]] std::size_t plane() const noexcept { return plane_; }
    [[nodiscard]] std::size_t num_nodes() const noexcept { return plane_ * static_cast<std::size_t>(M1_ + 2); }
    [[nodiscard]] double h1() const noexcept { return 2.0 / (M1_ + 1); }
    [[nodiscard]] double hp() const noexcept { return 1.0 / Mp_; }
    [[nodiscard]] double h(int dir) const noexcept { return dir == 0 ? h1() : hp(); }
    [[nodiscard]] double h_min() const noexcept;
    /// Volume of the cell attached to one node.
    [[nodiscard]] double cell_volume() const noexcept;

    [[nodiscard]] std::size_t node(int i1, std::size_t transverse) const noexcept {
        return static_cast<std::size_t>(i1) * plane_ + transverse;
    }
    [[nodiscard]] int i1(std::size_t node) const noexcept { return static_cast<int>(node / plane_); }
    [[nodiscard]] std::size_t transverse(std::size_t node) const noexcept { return node % plane_; }
    [[nodiscard]] bool is_wall(std::size_t node) const noexcept {
        const int i = i1(node);
        return i == 0 || i == M1_ + 1;
    }
    [[nodiscard]] std::vector<double> position(std::size_t node) const;
    [[nodiscard]] std::vector<double> transverse_position(std::size_t transverse) const;
    /// Neighbour node, or -1 past the walls in direction 0.
    [[nodiscard]] long neighbor(std::size_t node, int dir, int step) const noexcept;

    bool operator==(const Grid& o) const noexcept { return d_ == o.d_ && M1_ == o.M1_ && Mp_ == o.Mp_; }

private:
    int d_;
    int M1_;
    int Mp_;
    std::size_t plane_;
};

enum class FieldKind { Density, FluxPotential, Control };

struct ScalarField {
    Grid grid;
    FieldKind kind = FieldKind::Density;
    std::vector<double> values;

    ScalarField(Grid g, FieldKind k = FieldKind::Density);
    ScalarField(Grid g, FieldKind k, const SpaceFunction& f);

    double& operator[](std::size_t i) noexcept { return values[i]; }
    double operator[](std::size_t i) const noexcept { return values[i]; }
    /// Multilinear interpolation at u (periodic transversally).
    [[nodiscard]] double sample(std::span<const double> u) const;
};

/// Reservoir density at each wall node (NaN elsewhere).
[[nodiscard]] std::vector<double> wall_values(const Grid& grid, const ModelParams& params);
/// Overwrite wall nodes with b.
void impose_dirichlet(ScalarField& rho, const ModelParams& params);

struct Trajectory {
    Grid grid;
    double dt = 0.0;                          // spacing of stored slices
    std::vector<std::vector<double>> slices;  // rho_{t_k}, k = 0..K
    std::size_t clamp_events = 0;             // post-step clamps to [0,1]

    explicit Trajectory(Grid g) : grid(std::move(g)) {}
    [[nodiscard]] std::size_t steps() const noexcept { return slices.empty() ? 0 : slices.size() - 1; }
    [[nodiscard]] double time(std::size_t k) const noexcept { return dt * static_cast<double>(k); }
    [[nodiscard]] ScalarField slice(std::size_t k) const;
};

struct SolverOptions {
    double dt = 0.0;         // 0 picks half the stability limit
    std::size_t stride = 1;  // store every stride-th step
};

/// h_min^2 / (2 d max(1, 1+2a)).
[[nodiscard]] double cfl_limit(const Grid& grid, double a);
/// Limit for the controlled scheme given max |grad_h H|.
[[nodiscard]] double controlled_cfl_limit(const Grid& grid, double a, double max_grad_H);

/// Discrete Laplacian of psi at an interior node (walls supply Dirichlet data).
[[nodiscard]] double laplacian_at(const Grid& grid, std::span<const double> psi, std::size_t node);

/// Explicit conservative scheme for d_t rho = Lap phi(rho), rho = b on the walls.
[[nodiscard]] Trajectory solve_parabolic(const ScalarField& gamma, const ModelParams& params, double T,
                                         const SolverOptions& options = {});

/// d_t l = Lap phi(l) - div(sigma(l) grad H) with face-averaged sigma; H = 0 on the walls.
[[nodiscard]] Trajectory solve_controlled(const ScalarField& gamma, const ModelParams& params,
                                          const SpaceTimeFunction& H, double T, const SolverOptions& options = {},
                                          bool static_H = true);

/// Lap_h psi = 0 with psi = phi(b) on the walls, returned as rho = phi^{-1}(psi).
[[nodiscard]] ScalarField solve_hydrostatic(const ModelParams& params, const Grid& grid);

/// Net mass flux entering through the two walls for the scheme's face fluxes.
[[nodiscard]] double boundary_flux(const Grid& grid, std::span<const double> rho, const ModelParams& params,
                                   std::span<const double> H = {});
[[nodiscard]] double total_mass(const Grid& grid, std::span<const double> values);
/// Volume-weighted L1 distance over interior nodes.
[[nodiscard]] double l1_distance(const Grid& grid, std::span<const double> f, std::span<const double> g);

// Field I/O: CSV "u1,...,ud,value"; trajectories as one CSV per slice plus index.csv with (k, t_k).
void write_field_csv(std::ostream& os, const ScalarField& field);
[[nodiscard]] ScalarField read_field_csv(std::istream& is, const Grid& grid, FieldKind kind = FieldKind::Density);
void write_trajectory(const std::string& directory, const Trajectory& path);
[[nodiscard]] Trajectory read_trajectory(const std::string& directory, const Grid& grid);

}  // namespace bdex
