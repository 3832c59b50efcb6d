#include "bdex/ldp.hpp"

#include "bdex/elliptic.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bdex {

namespace {

double interior_inner(const Grid& grid, const std::vector<double>& f, const std::vector<double>& g) {
    double total = 0.0;
    for (std::size_t n = 0; n < grid.num_nodes(); ++n)
        if (!grid.is_wall(n)) total += f[n] * g[n];
    return total * grid.cell_volume();
}

void require_path(const Trajectory& path) {
    if (path.slices.size() < 2) throw std::invalid_argument("path needs at least two slices");
    if (!(path.dt > 0.0)) throw std::invalid_argument("path dt must be > 0");
    for (const auto& s : path.slices)
        if (s.size() != path.grid.num_nodes()) throw std::invalid_argument("path slice size mismatch");
}

void require_vanishing(const Grid& grid, const SliceFields& G, std::size_t slices) {
    if (G.size() != slices) throw std::invalid_argument("J_G: need one test field per slice");
    for (const auto& g : G) {
        if (g.size() != grid.num_nodes()) throw std::invalid_argument("J_G: test field size mismatch");
        for (std::size_t n = 0; n < grid.num_nodes(); ++n)
            if (grid.is_wall(n) && std::abs(g[n]) > 1e-12)
                throw std::invalid_argument("J_G: G must vanish at u_1 = +-1");
    }
}

std::vector<double> unit_faces(const Grid& grid) {
    std::vector<double> c(grid.num_nodes() * grid.dim(), 0.0);
    for (std::size_t n = 0; n < grid.num_nodes(); ++n)
        for (int dir = 0; dir < grid.dim(); ++dir)
            if (is_active_face(grid, n, dir)) c[face_index(grid, n, dir)] = 1.0;
    return c;
}

/// Face sum of w(mean rho) |grad rho|^2 h^d.
template <class Weight>
double weighted_gradient(const Grid& grid, const std::vector<double>& rho, Weight w) {
    double total = 0.0;
    for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
        for (int dir = 0; dir < grid.dim(); ++dir) {
            if (!is_active_face(grid, n, dir)) continue;
            const auto m = static_cast<std::size_t>(grid.neighbor(n, dir, 1));
            const double g = (rho[m] - rho[n]) / grid.h(dir);
            total += w(0.5 * (rho[n] + rho[m]), rho[n], rho[m]) * g * g;
        }
    }
    return total * grid.cell_volume();
}

}  // namespace

double energy_Q(const Trajectory& path) {
    require_path(path);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < path.slices.size(); ++k)
        total += path.dt * weighted_gradient(path.grid, path.slices[k], [](double, double, double) { return 1.0; });
    return total;
}

SliceFields sample_test_field(const Trajectory& path, const SpaceTimeFunction& G) {
    SliceFields out(path.slices.size(), std::vector<double>(path.grid.num_nodes()));
    for (std::size_t k = 0; k < path.slices.size(); ++k)
        for (std::size_t n = 0; n < path.grid.num_nodes(); ++n) out[k][n] = G(path.time(k), path.grid.position(n));
    return out;
}

double sigma_inner(const Trajectory& path, double a, const SliceFields& G1, const SliceFields& G2) {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < path.slices.size(); ++k) {
        const auto s = face_sigma(path.grid, path.slices[k], a);
        total += path.dt * face_inner(path.grid, s, G1[k], G2[k]);
    }
    return total;
}

JTerms J_G_terms(const Trajectory& path, const ScalarField& gamma, const ModelParams& params, const SliceFields& G) {
    require_path(path);
    const Grid& grid = path.grid;
    if (!(gamma.grid == grid)) throw std::invalid_argument("J_G: gamma lives on a different grid");
    require_vanishing(grid, G, path.slices.size());
    const TransportCoefficients tc{params.a};
    const std::size_t K = path.steps();
    const double vol = grid.cell_volume();
    const double h1 = grid.h1();
    const auto walls = wall_values(grid, params);
    const auto unit = unit_faces(grid);

    JTerms t;
    t.final_term = interior_inner(grid, path.slices[K], G[K]);
    t.initial_term = -interior_inner(grid, gamma.values, G[0]);
    std::vector<double> diff(grid.num_nodes());
    std::vector<double> phi(grid.num_nodes());
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t n = 0; n < grid.num_nodes(); ++n) diff[n] = G[k + 1][n] - G[k][n];
        t.time_term -= interior_inner(grid, path.slices[k + 1], diff);

        const auto& rho = path.slices[k];
        for (std::size_t n = 0; n < grid.num_nodes(); ++n) phi[n] = tc.phi(rho[n]);
        // apply_operator gives -Lap_h G.
        const auto minus_lap = apply_operator(grid, unit, G[k]);
        t.bulk_term += path.dt * interior_inner(grid, phi, minus_lap);

        for (std::size_t j = 0; j < grid.plane(); ++j) {
            const std::size_t left = grid.node(0, j);
            const std::size_t right = grid.node(grid.M1() + 1, j);
            const double g_first = G[k][grid.node(1, j)];
            const double g_last = G[k][grid.node(grid.M1(), j)];
            t.right_wall += path.dt * tc.phi(walls[right]) * (-g_last / h1) * vol / h1;
            t.left_wall -= path.dt * tc.phi(walls[left]) * (g_first / h1) * vol / h1;
        }
        const auto s = face_sigma(grid, rho, params.a);
        t.quadratic -= 0.5 * path.dt * face_energy(grid, s, G[k]);
    }
    return t;
}

double J_G(const Trajectory& path, const ScalarField& gamma, const ModelParams& params, const SliceFields& G) {
    return J_G_terms(path, gamma, params, G).total();
}

double J_G(const Trajectory& path, const ScalarField& gamma, const ModelParams& params, const SpaceTimeFunction& G) {
    return J_G(path, gamma, params, sample_test_field(path, G));
}

// ---------------------------------------------------------------------------

double ControlField::norm2() const {
    double total = 0.0;
    for (double v : slice_norm2) total += dt * v;
    return total;
}

ControlField recover_control(const Trajectory& path, const ModelParams& params) {
    require_path(path);
    const Grid& grid = path.grid;
    const TransportCoefficients tc{params.a};
    ControlField out(grid);
    out.dt = path.dt;
    out.min_sigma = std::numeric_limits<double>::infinity();
    std::vector<double> phi(grid.num_nodes());
    std::vector<double> residual(grid.num_nodes());
    for (std::size_t k = 0; k + 1 < path.slices.size(); ++k) {
        const auto& rho = path.slices[k];
        const auto& next = path.slices[k + 1];
        for (std::size_t n = 0; n < grid.num_nodes(); ++n) phi[n] = tc.phi(rho[n]);
        for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
            residual[n] = grid.is_wall(n) ? 0.0 : (next[n] - rho[n]) / path.dt - laplacian_at(grid, phi, n);
        }
        std::size_t hits = 0;
        const auto s = face_sigma(grid, rho, params.a, kSigmaFloor, &hits);
        for (std::size_t n = 0; n < grid.num_nodes(); ++n)
            for (int dir = 0; dir < grid.dim(); ++dir)
                if (is_active_face(grid, n, dir)) out.min_sigma = std::min(out.min_sigma, s[face_index(grid, n, dir)]);
        out.sigma_floor_hits += hits;
        // -div(sigma grad H) = r.
        auto H = solve_dirichlet(grid, s, residual);
        out.slice_norm2.push_back(face_energy(grid, s, H));
        out.H.push_back(std::move(H));
    }
    return out;
}

const char* to_string(InfiniteReason r) noexcept {
    switch (r) {
        case InfiniteReason::None: return "none";
        case InfiniteReason::BadInitialSlice: return "bad_initial_slice";
        case InfiniteReason::InfiniteEnergy: return "infinite_energy";
        case InfiniteReason::AbsoluteContinuity: return "absolute_continuity";
        case InfiniteReason::BoundaryTrace: return "boundary_trace";
    }
    return "unknown";
}

RateResult rate_I(const Trajectory& path, const ScalarField& gamma, const ModelParams& params) {
    require_path(path);
    const Grid& grid = path.grid;
    if (!(gamma.grid == grid)) throw std::invalid_argument("rate_I: gamma lives on a different grid");
    RateResult r(grid);
    for (const auto& s : path.slices) {
        for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
            if (!(s[n] >= 0.0 && s[n] <= 1.0)) {
                r.reason = InfiniteReason::AbsoluteContinuity;
                return r;
            }
        }
    }
    for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
        if (!grid.is_wall(n) && std::abs(path.slices[0][n] - gamma.values[n]) > 1e-9) {
            r.reason = InfiniteReason::BadInitialSlice;
            return r;
        }
    }
    const auto walls = wall_values(grid, params);
    for (const auto& s : path.slices) {
        for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
            if (grid.is_wall(n) && std::abs(s[n] - walls[n]) > 1e-9) {
                r.reason = InfiniteReason::BoundaryTrace;
                return r;
            }
        }
    }
    r.Q = energy_Q(path);
    if (!std::isfinite(r.Q)) {
        r.reason = InfiniteReason::InfiniteEnergy;
        return r;
    }
    r.control = recover_control(path, params);
    r.value = 0.5 * r.control.norm2();
    if (!std::isfinite(r.value)) {
        r.reason = InfiniteReason::InfiniteEnergy;
        r.value = std::numeric_limits<double>::infinity();
    }
    return r;
}

nlohmann::json rate_report(const RateResult& r) {
    nlohmann::json j;
    j["I_T"] = r.finite() ? nlohmann::json(r.value) : nlohmann::json("inf");
    j["Q"] = r.Q;
    j["slice_norm2"] = r.control.slice_norm2;
    j["sigma_floor_hits"] = r.control.sigma_floor_hits;
    j["min_sigma"] = std::isfinite(r.control.min_sigma) ? nlohmann::json(r.control.min_sigma) : nlohmann::json();
    j["reason"] = to_string(r.reason);
    return j;
}

// ---------------------------------------------------------------------------

double h_minus1_norm(const ScalarField& v) {
    const Grid& grid = v.grid;
    const auto unit = unit_faces(grid);
    std::vector<double> rhs = v.values;
    for (std::size_t n = 0; n < grid.num_nodes(); ++n)
        if (grid.is_wall(n)) rhs[n] = 0.0;
    const auto U = solve_dirichlet(grid, unit, rhs);
    return face_energy(grid, unit, U);
}

double time_derivative_norm(const Trajectory& path) {
    require_path(path);
    double total = 0.0;
    ScalarField v(path.grid, FieldKind::Density);
    for (std::size_t k = 0; k + 1 < path.slices.size(); ++k) {
        for (std::size_t n = 0; n < path.grid.num_nodes(); ++n)
            v.values[n] = (path.slices[k + 1][n] - path.slices[k][n]) / path.dt;
        total += path.dt * h_minus1_norm(v);
    }
    return total;
}

double entropy_energy(const Trajectory& path) {
    require_path(path);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < path.slices.size(); ++k) {
        total += path.dt * weighted_gradient(path.grid, path.slices[k], [](double m, double, double) {
                     return 1.0 / std::max(m * (1.0 - m), kSigmaFloor);
                 });
    }
    return total;
}

double relaxation_energy(const Trajectory& path, double a) {
    require_path(path);
    const TransportCoefficients tc{a};
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < path.slices.size(); ++k) {
        total += path.dt * weighted_gradient(path.grid, path.slices[k], [&](double m, double, double) {
                     return tc.phi_prime(m) / std::max(tc.chi(m), kSigmaFloor);
                 });
    }
    return total;
}

double dictionary_sup(const Trajectory& path, const ScalarField& gamma, const ModelParams& params,
                      const std::vector<SliceFields>& dictionary) {
    const auto m = static_cast<Eigen::Index>(dictionary.size());
    if (m == 0) return 0.0;
    Eigen::VectorXd L(m);
    Eigen::MatrixXd B(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        L[i] = J_G_terms(path, gamma, params, dictionary[static_cast<std::size_t>(i)]).linear();
        for (Eigen::Index j = 0; j <= i; ++j) {
            B(i, j) = sigma_inner(path, params.a, dictionary[static_cast<std::size_t>(i)],
                                  dictionary[static_cast<std::size_t>(j)]);
            B(j, i) = B(i, j);
        }
    }
    const Eigen::VectorXd c = B.completeOrthogonalDecomposition().solve(L);
    return 0.5 * L.dot(c);
}

Trajectory mix_paths(const Trajectory& rho, const Trajectory& lambda, double eps) {
    if (!(rho.grid == lambda.grid) || rho.slices.size() != lambda.slices.size() || rho.dt != lambda.dt)
        throw std::invalid_argument("mix_paths: paths are not on the same grid and time steps");
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("mix_paths: eps outside [0,1]");
    Trajectory out(rho.grid);
    out.dt = rho.dt;
    out.slices.resize(rho.slices.size());
    for (std::size_t k = 0; k < rho.slices.size(); ++k) {
        out.slices[k].resize(rho.slices[k].size());
        for (std::size_t n = 0; n < rho.slices[k].size(); ++n)
            out.slices[k][n] = (1.0 - eps) * rho.slices[k][n] + eps * lambda.slices[k][n];
    }
    return out;
}

}  // namespace bdex
