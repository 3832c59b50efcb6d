#pragma once

/**
 * @file elliptic.hpp
 * @brief Variable-coefficient Dirichlet problems on the PDE grid.
 *
 * Faces are addressed as face_index(node, dir): the face between node and
 * its +e_dir neighbour. Along u_1 the faces run from the left wall node
 * (i = 0) to node i = M1, so wall faces are included.
 */

#include "bdex/pde.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace bdex {

[[nodiscard]] inline std::size_t face_index(const Grid& grid, std::size_t node, int dir) noexcept {
    return node * static_cast<std::size_t>(grid.dim()) + static_cast<std::size_t>(dir);
}

/// True if the face (node, dir) joins two nodes and touches at least one interior node.
[[nodiscard]] bool is_active_face(const Grid& grid, std::size_t node, int dir) noexcept;

/// Arithmetic face means of sigma(rho), floored at `floor`. `floor_hits` counts floored faces.
[[nodiscard]] std::vector<double> face_sigma(const Grid& grid, std::span<const double> rho, double a,
                                             double floor = 0.0, std::size_t* floor_hits = nullptr);

/// Operator (A U)_i = sum over faces at i of c_f (U_i - U_nb) / h_dir^2, i.e. -div_h(c grad_h U).
/// Solves A U = f at interior nodes with U = wall on the walls (wall may be empty for zero data).
[[nodiscard]] std::vector<double> solve_dirichlet(const Grid& grid, std::span<const double> face_coeff,
                                                  std::span<const double> rhs, std::span<const double> wall = {});

/// sum over active faces of c_f |grad_h U|^2 * cell volume.
[[nodiscard]] double face_energy(const Grid& grid, std::span<const double> face_coeff, std::span<const double> U);

/// sum over active faces of c_f grad_h U . grad_h V * cell volume.
[[nodiscard]] double face_inner(const Grid& grid, std::span<const double> face_coeff, std::span<const double> U,
                                std::span<const double> V);

/// -div_h(c grad_h U) at each interior node (0 on the walls).
[[nodiscard]] std::vector<double> apply_operator(const Grid& grid, std::span<const double> face_coeff,
                                                 std::span<const double> U);

}  // namespace bdex
