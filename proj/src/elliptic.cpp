#include "bdex/elliptic.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <stdexcept>

namespace bdex {

bool is_active_face(const Grid& grid, std::size_t node, int dir) noexcept {
    const long nb = grid.neighbor(node, dir, 1);
    if (nb < 0) return false;
    return !(grid.is_wall(node) && grid.is_wall(static_cast<std::size_t>(nb)));
}

std::vector<double> face_sigma(const Grid& grid, std::span<const double> rho, double a, double floor,
                               std::size_t* floor_hits) {
    const TransportCoefficients tc{a};
    std::vector<double> out(grid.num_nodes() * grid.dim(), 0.0);
    std::size_t hits = 0;
    for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
        for (int dir = 0; dir < grid.dim(); ++dir) {
            if (!is_active_face(grid, n, dir)) continue;
            const auto m = static_cast<std::size_t>(grid.neighbor(n, dir, 1));
            double s = 0.5 * (tc.sigma(rho[n]) + tc.sigma(rho[m]));
            if (s < floor) {
                s = floor;
                ++hits;
            }
            out[face_index(grid, n, dir)] = s;
        }
    }
    if (floor_hits) *floor_hits = hits;
    return out;
}

std::vector<double> solve_dirichlet(const Grid& grid, std::span<const double> face_coeff,
                                    std::span<const double> rhs, std::span<const double> wall) {
    const std::size_t plane = grid.plane();
    const std::size_t unknowns = plane * static_cast<std::size_t>(grid.M1());
    if (face_coeff.size() != grid.num_nodes() * grid.dim() || rhs.size() != grid.num_nodes())
        throw std::invalid_argument("solve_dirichlet: size mismatch");
    if (!wall.empty() && wall.size() != grid.num_nodes())
        throw std::invalid_argument("solve_dirichlet: wall data size mismatch");

    const auto unknown = [&](std::size_t n) { return static_cast<Eigen::Index>(n - plane); };
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(unknowns * (1 + 4 * grid.dim()));
    Eigen::VectorXd b(static_cast<Eigen::Index>(unknowns));
    for (std::size_t n = plane; n < plane + unknowns; ++n) b[unknown(n)] = rhs[n];

    for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
        for (int dir = 0; dir < grid.dim(); ++dir) {
            if (!is_active_face(grid, n, dir)) continue;
            const auto m = static_cast<std::size_t>(grid.neighbor(n, dir, 1));
            const double h = grid.h(dir);
            const double w = face_coeff[face_index(grid, n, dir)] / (h * h);
            const bool n_in = !grid.is_wall(n);
            const bool m_in = !grid.is_wall(m);
            if (n_in) {
                trip.emplace_back(unknown(n), unknown(n), w);
                if (m_in) trip.emplace_back(unknown(n), unknown(m), -w);
                else if (!wall.empty()) b[unknown(n)] += w * wall[m];
            }
            if (m_in) {
                trip.emplace_back(unknown(m), unknown(m), w);
                if (n_in) trip.emplace_back(unknown(m), unknown(n), -w);
                else if (!wall.empty()) b[unknown(m)] += w * wall[n];
            }
        }
    }
    Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(unknowns), static_cast<Eigen::Index>(unknowns));
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
    if (solver.info() != Eigen::Success) throw NumericalError("solve_dirichlet: factorisation failed");
    const Eigen::VectorXd x = solver.solve(b);
    if (solver.info() != Eigen::Success) throw NumericalError("solve_dirichlet: solve failed");

    std::vector<double> out(grid.num_nodes(), 0.0);
    if (!wall.empty()) {
        for (std::size_t j = 0; j < plane; ++j) {
            out[grid.node(0, j)] = wall[grid.node(0, j)];
            out[grid.node(grid.M1() + 1, j)] = wall[grid.node(grid.M1() + 1, j)];
        }
    }
    for (std::size_t n = plane; n < plane + unknowns; ++n) out[n] = x[unknown(n)];
    return out;
}

double face_inner(const Grid& grid, std::span<const double> face_coeff, std::span<const double> U,
                  std::span<const double> V) {
    double total = 0.0;
    for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
        for (int dir = 0; dir < grid.dim(); ++dir) {
            if (!is_active_face(grid, n, dir)) continue;
            const auto m = static_cast<std::size_t>(grid.neighbor(n, dir, 1));
            const double h = grid.h(dir);
            total += face_coeff[face_index(grid, n, dir)] * ((U[m] - U[n]) / h) * ((V[m] - V[n]) / h);
        }
    }
    return total * grid.cell_volume();
}

double face_energy(const Grid& grid, std::span<const double> face_coeff, std::span<const double> U) {
    return face_inner(grid, face_coeff, U, U);
}

std::vector<double> apply_operator(const Grid& grid, std::span<const double> face_coeff,
                                   std::span<const double> U) {
    std::vector<double> out(grid.num_nodes(), 0.0);
    for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
        for (int dir = 0; dir < grid.dim(); ++dir) {
            if (!is_active_face(grid, n, dir)) continue;
            const auto m = static_cast<std::size_t>(grid.neighbor(n, dir, 1));
            const double h = grid.h(dir);
            const double flux = face_coeff[face_index(grid, n, dir)] * (U[n] - U[m]) / (h * h);
            out[n] += flux;
            out[m] -= flux;
        }
    }
    for (std::size_t n = 0; n < grid.num_nodes(); ++n)
        if (grid.is_wall(n)) out[n] = 0.0;
    return out;
}

}  // namespace bdex
