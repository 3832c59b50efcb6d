#include "bdex/pde.hpp"

#include "bdex/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace bdex {

double TransportCoefficients::phi_inverse(double psi) const {
    constexpr double tol = 1e-12;
    const double top = phi(1.0);
    if (!(psi >= -tol && psi <= top + tol)) throw std::invalid_argument("phi_inverse: value outside [0, phi(1)]");
    psi = std::clamp(psi, 0.0, top);
    if (a == 0.0) return psi;
    const double disc = 1.0 + 4.0 * a * psi;
    // Rationalised root of a r^2 + r - psi, stable for small a.
    return std::clamp(2.0 * psi / (1.0 + std::sqrt(std::max(disc, 0.0))), 0.0, 1.0);
}

double TransportCoefficients::max_sigma() const noexcept {
    // sigma' = 2 (1 + (4a - 2) r - 6 a r^2); candidates are the roots in [0,1].
    double best = 0.0;
    const auto consider = [&](double r) {
        if (r >= 0.0 && r <= 1.0) best = std::max(best, sigma(r));
    };
    if (a == 0.0) {
        consider(0.5);
    } else {
        const double A = -6.0 * a;
        const double B = 4.0 * a - 2.0;
        const double disc = B * B - 4.0 * A;
        if (disc >= 0.0) {
            consider((-B + std::sqrt(disc)) / (2.0 * A));
            consider((-B - std::sqrt(disc)) / (2.0 * A));
        }
    }
    return best;
}

double TransportCoefficients::max_abs_sigma_prime() const noexcept {
    double best = std::max(std::abs(sigma_prime(0.0)), std::abs(sigma_prime(1.0)));
    if (a != 0.0) {
        const double r = (4.0 * a - 2.0) / (12.0 * a);
        if (r >= 0.0 && r <= 1.0) best = std::max(best, std::abs(sigma_prime(r)));
    }
    return best;
}

// ---------------------------------------------------------------------------

Grid::Grid(int d, int M1, int Mp) : d_(d), M1_(M1), Mp_(Mp), plane_(1) {
    if (d < 1) throw std::invalid_argument("Grid: d must be >= 1");
    if (M1 < 1) throw std::invalid_argument("Grid: M1 must be >= 1");
    if (d > 1 && Mp < 1) throw std::invalid_argument("Grid: Mp must be >= 1");
    if (d == 1) Mp_ = std::max(Mp, 1);
    for (int k = 1; k < d; ++k) plane_ *= static_cast<std::size_t>(Mp_);
}

Grid Grid::matching(const LatticeGeometry& geo) {
    return Grid(geo.dim(), 2 * geo.half_width() - 1, geo.half_width());
}

double Grid::h_min() const noexcept {
    return d_ == 1 ? h1() : std::min(h1(), hp());
}

double Grid::cell_volume() const noexcept {
    return h1() * std::pow(hp(), d_ - 1);
}

std::vector<double> Grid::transverse_position(std::size_t transverse) const {
    std::vector<double> out(static_cast<std::size_t>(d_ - 1));
    for (int k = d_ - 1; k >= 1; --k) {
        out[static_cast<std::size_t>(k - 1)] = static_cast<double>(transverse % Mp_) / Mp_;
        transverse /= Mp_;
    }
    return out;
}

std::vector<double> Grid::position(std::size_t node) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(d_));
    out.push_back(-1.0 + i1(node) * h1());
    for (double v : transverse_position(transverse(node))) out.push_back(v);
    return out;
}

long Grid::neighbor(std::size_t node, int dir, int step) const noexcept {
    if (dir == 0) {
        const int i = i1(node) + step;
        if (i < 0 || i > M1_ + 1) return -1;
        return static_cast<long>(this->node(i, transverse(node)));
    }
    // Stride of transverse coordinate `dir` inside the plane (last coordinate fastest).
    std::size_t stride = 1;
    for (int k = d_ - 1; k > dir; --k) stride *= static_cast<std::size_t>(Mp_);
    const std::size_t tr = transverse(node);
    const long c = static_cast<long>((tr / stride) % static_cast<std::size_t>(Mp_));
    const long nc = ((c + step) % Mp_ + Mp_) % Mp_;
    const std::size_t moved = tr + static_cast<std::size_t>(nc - c) * stride;
    return static_cast<long>(this->node(i1(node), moved));
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(Grid g, FieldKind k) : grid(std::move(g)), kind(k), values(grid.num_nodes(), 0.0) {}

ScalarField::ScalarField(Grid g, FieldKind k, const SpaceFunction& f) : ScalarField(std::move(g), k) {
    for (std::size_t n = 0; n < grid.num_nodes(); ++n) values[n] = f(grid.position(n));
}

double ScalarField::sample(std::span<const double> u) const {
    const int d = grid.dim();
    if (static_cast<int>(u.size()) != d) throw std::invalid_argument("ScalarField::sample: wrong arity");
    if (!(u[0] >= -1.0 && u[0] <= 1.0)) throw std::invalid_argument("ScalarField::sample: u_1 outside [-1,1]");
    std::vector<int> base(static_cast<std::size_t>(d));
    std::vector<double> frac(static_cast<std::size_t>(d));
    const double s = (u[0] + 1.0) / grid.h1();
    base[0] = std::clamp(static_cast<int>(std::floor(s)), 0, grid.M1());
    frac[0] = s - base[0];
    for (int k = 1; k < d; ++k) {
        double t = u[static_cast<std::size_t>(k)] * grid.Mp();
        t -= std::floor(t / grid.Mp()) * grid.Mp();
        base[static_cast<std::size_t>(k)] = static_cast<int>(std::floor(t)) % grid.Mp();
        frac[static_cast<std::size_t>(k)] = t - std::floor(t);
    }
    double total = 0.0;
    for (unsigned corner = 0; corner < (1u << d); ++corner) {
        double w = 1.0;
        std::size_t tr = 0;
        int i = base[0] + static_cast<int>(corner & 1u);
        w *= (corner & 1u) ? frac[0] : 1.0 - frac[0];
        for (int k = 1; k < d; ++k) {
            const bool up = (corner >> k) & 1u;
            const int j = (base[static_cast<std::size_t>(k)] + (up ? 1 : 0)) % grid.Mp();
            w *= up ? frac[static_cast<std::size_t>(k)] : 1.0 - frac[static_cast<std::size_t>(k)];
            tr = tr * static_cast<std::size_t>(grid.Mp()) + static_cast<std::size_t>(j);
        }
        if (w == 0.0) continue;
        i = std::min(i, grid.M1() + 1);
        total += w * values[grid.node(i, tr)];
    }
    return total;
}

std::vector<double> wall_values(const Grid& grid, const ModelParams& params) {
    std::vector<double> out(grid.num_nodes(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t j = 0; j < grid.plane(); ++j) {
        const auto v = grid.transverse_position(j);
        out[grid.node(0, j)] = params.b(-1, v);
        out[grid.node(grid.M1() + 1, j)] = params.b(1, v);
    }
    return out;
}

void impose_dirichlet(ScalarField& rho, const ModelParams& params) {
    const auto w = wall_values(rho.grid, params);
    for (std::size_t n = 0; n < rho.grid.num_nodes(); ++n)
        if (rho.grid.is_wall(n)) rho.values[n] = w[n];
}

ScalarField Trajectory::slice(std::size_t k) const {
    ScalarField f(grid, FieldKind::Density);
    f.values = slices.at(k);
    return f;
}

// ---------------------------------------------------------------------------

double cfl_limit(const Grid& grid, double a) {
    const double h = grid.h_min();
    return h * h / (2.0 * grid.dim() * TransportCoefficients{a}.max_phi_prime());
}

double controlled_cfl_limit(const Grid& grid, double a, double max_grad_H) {
    const TransportCoefficients tc{a};
    const double h = grid.h_min();
    const double diffusive = 2.0 * grid.dim() * tc.max_phi_prime() / (h * h);
    const double drift = grid.dim() * tc.max_abs_sigma_prime() * std::abs(max_grad_H) / h;
    if (drift == 0.0) return cfl_limit(grid, a);
    return 1.0 / (diffusive + drift);
}

double laplacian_at(const Grid& grid, std::span<const double> psi, std::size_t node) {
    if (grid.is_wall(node)) throw std::invalid_argument("laplacian_at: wall node");
    double total = 0.0;
    for (int dir = 0; dir < grid.dim(); ++dir) {
        const double h = grid.h(dir);
        const auto up = static_cast<std::size_t>(grid.neighbor(node, dir, 1));
        const auto dn = static_cast<std::size_t>(grid.neighbor(node, dir, -1));
        total += (psi[up] - 2.0 * psi[node] + psi[dn]) / (h * h);
    }
    return total;
}

namespace {

void validate_initial(const ScalarField& gamma, const ModelParams& params, double T) {
    params.validate(gamma.grid.dim(), true);
    if (!(T > 0.0)) throw std::invalid_argument("solver: T must be > 0");
    for (std::size_t n = 0; n < gamma.grid.num_nodes(); ++n) {
        if (gamma.grid.is_wall(n)) continue;
        const double v = gamma.values[n];
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("solver: initial density outside [0,1]");
    }
}

double max_gradient(const Grid& grid, std::span<const double> H) {
    double best = 0.0;
    for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
        for (int dir = 0; dir < grid.dim(); ++dir) {
            if (!is_active_face(grid, n, dir)) continue;
            const auto m = static_cast<std::size_t>(grid.neighbor(n, dir, 1));
            best = std::max(best, std::abs(H[m] - H[n]) / grid.h(dir));
        }
    }
    return best;
}

std::vector<double> evaluate_control(const Grid& grid, const SpaceTimeFunction& H, double t) {
    std::vector<double> out(grid.num_nodes());
    for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
        out[n] = H(t, grid.position(n));
        if (grid.is_wall(n) && std::abs(out[n]) > 1e-12)
            throw std::invalid_argument("solve_controlled: H must vanish at u_1 = +-1");
        if (!std::isfinite(out[n])) throw NumericalError("solve_controlled: non-finite control");
    }
    return out;
}

/// One explicit step through conservative face fluxes. Returns the clamp count.
std::size_t explicit_step(const Grid& grid, const TransportCoefficients& tc, std::vector<double>& rho,
                          std::span<const double> H, double dt, std::vector<double>& scratch) {
    const std::size_t nodes = grid.num_nodes();
    scratch.assign(nodes, 0.0);
    std::vector<double>& rate = scratch;
    for (std::size_t n = 0; n < nodes; ++n) {
        for (int dir = 0; dir < grid.dim(); ++dir) {
            if (!is_active_face(grid, n, dir)) continue;
            const auto m = static_cast<std::size_t>(grid.neighbor(n, dir, 1));
            const double h = grid.h(dir);
            double flux = -(tc.phi(rho[m]) - tc.phi(rho[n])) / h;
            if (!H.empty()) {
                const double s = 0.5 * (tc.sigma(rho[n]) + tc.sigma(rho[m]));
                flux += s * (H[m] - H[n]) / h;
            }
            rate[n] -= flux / h;
            rate[m] += flux / h;
        }
    }
    std::size_t clamps = 0;
    for (std::size_t n = 0; n < nodes; ++n) {
        if (grid.is_wall(n)) continue;
        double v = rho[n] + dt * rate[n];
        if (!std::isfinite(v)) throw NumericalError("explicit scheme produced a non-finite value");
        if (v < 0.0 || v > 1.0) {
            v = std::clamp(v, 0.0, 1.0);
            ++clamps;
        }
        rho[n] = v;
    }
    return clamps;
}

struct StepPlan {
    double dt;
    std::size_t steps;
};

StepPlan plan_steps(double T, double limit, const SolverOptions& options) {
    if (options.stride == 0) throw std::invalid_argument("solver: stride must be >= 1");
    double dt = options.dt;
    if (dt < 0.0) throw std::invalid_argument("solver: dt must be >= 0");
    if (dt == 0.0) dt = 0.5 * limit;
    if (dt > limit * (1.0 + 1e-12)) throw std::invalid_argument("solver: dt exceeds the stability limit");
    auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
    steps = std::max<std::size_t>(steps, 1);
    if (steps % options.stride) steps += options.stride - steps % options.stride;
    return {T / static_cast<double>(steps), steps};
}

Trajectory integrate(const ScalarField& gamma, const ModelParams& params, double T, const SolverOptions& options,
                     const SpaceTimeFunction* H, bool static_H) {
    validate_initial(gamma, params, T);
    const Grid& grid = gamma.grid;
    const TransportCoefficients tc{params.a};

    std::vector<double> H_now;
    double grad = 0.0;
    if (H) {
        H_now = evaluate_control(grid, *H, 0.0);
        grad = max_gradient(grid, H_now);
        if (!static_H) {
            for (int s = 1; s <= 32; ++s) grad = std::max(grad, max_gradient(grid, evaluate_control(grid, *H, T * s / 32.0)));
            grad *= 1.25;
        }
    }
    const double limit = H ? controlled_cfl_limit(grid, params.a, grad) : cfl_limit(grid, params.a);
    const StepPlan plan = plan_steps(T, limit, options);

    Trajectory path(grid);
    path.dt = plan.dt * static_cast<double>(options.stride);
    std::vector<double> rho = gamma.values;
    const auto walls = wall_values(grid, params);
    for (std::size_t n = 0; n < grid.num_nodes(); ++n)
        if (grid.is_wall(n)) rho[n] = walls[n];
    path.slices.push_back(rho);

    std::vector<double> scratch;
    for (std::size_t k = 0; k < plan.steps; ++k) {
        if (H && !static_H && k > 0) H_now = evaluate_control(grid, *H, plan.dt * static_cast<double>(k));
        path.clamp_events += explicit_step(grid, tc, rho, H_now, plan.dt, scratch);
        if ((k + 1) % options.stride == 0) path.slices.push_back(rho);
    }
    return path;
}

}  // namespace

Trajectory solve_parabolic(const ScalarField& gamma, const ModelParams& params, double T,
                           const SolverOptions& options) {
    return integrate(gamma, params, T, options, nullptr, true);
}

Trajectory solve_controlled(const ScalarField& gamma, const ModelParams& params, const SpaceTimeFunction& H, double T,
                            const SolverOptions& options, bool static_H) {
    if (!H) throw std::invalid_argument("solve_controlled: empty control");
    return integrate(gamma, params, T, options, &H, static_H);
}

ScalarField solve_hydrostatic(const ModelParams& params, const Grid& grid) {
    params.validate(grid.dim(), true);
    const TransportCoefficients tc{params.a};
    auto wall = wall_values(grid, params);
    for (auto& w : wall)
        if (!std::isnan(w)) w = tc.phi(w);
    std::vector<double> ones(grid.num_nodes() * grid.dim(), 1.0);
    std::vector<double> zero(grid.num_nodes(), 0.0);
    const auto psi = solve_dirichlet(grid, ones, zero, wall);
    ScalarField rho(grid, FieldKind::Density);
    for (std::size_t n = 0; n < grid.num_nodes(); ++n) rho.values[n] = tc.phi_inverse(psi[n]);
    impose_dirichlet(rho, params);
    return rho;
}

double boundary_flux(const Grid& grid, std::span<const double> rho, const ModelParams& params,
                     std::span<const double> H) {
    const TransportCoefficients tc{params.a};
    const auto walls = wall_values(grid, params);
    const double h = grid.h1();
    const auto face_flux = [&](std::size_t n, std::size_t m) {
        const double rn = grid.is_wall(n) ? walls[n] : rho[n];
        const double rm = grid.is_wall(m) ? walls[m] : rho[m];
        double f = -(tc.phi(rm) - tc.phi(rn)) / h;
        if (!H.empty()) f += 0.5 * (tc.sigma(rn) + tc.sigma(rm)) * (H[m] - H[n]) / h;
        return f;
    };
    double total = 0.0;
    for (std::size_t j = 0; j < grid.plane(); ++j) {
        total += face_flux(grid.node(0, j), grid.node(1, j));
        total -= face_flux(grid.node(grid.M1(), j), grid.node(grid.M1() + 1, j));
    }
    return total * grid.cell_volume() / h;
}

double total_mass(const Grid& grid, std::span<const double> values) {
    double total = 0.0;
    for (std::size_t n = 0; n < grid.num_nodes(); ++n)
        if (!grid.is_wall(n)) total += values[n];
    return total * grid.cell_volume();
}

double l1_distance(const Grid& grid, std::span<const double> f, std::span<const double> g) {
    if (f.size() != grid.num_nodes() || g.size() != grid.num_nodes())
        throw std::invalid_argument("l1_distance: size mismatch");
    double total = 0.0;
    for (std::size_t n = 0; n < grid.num_nodes(); ++n)
        if (!grid.is_wall(n)) total += std::abs(f[n] - g[n]);
    return total * grid.cell_volume();
}

// ---------------------------------------------------------------------------

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_field_csv(std::ostream& os, const ScalarField& field) {
    const Grid& g = field.grid;
    for (int k = 0; k < g.dim(); ++k) os << 'u' << (k + 1) << ',';
    os << "value\n";
    for (std::size_t n = 0; n < g.num_nodes(); ++n) {
        for (double p : g.position(n)) os << format_double(p) << ',';
        os << format_double(field.values[n]) << '\n';
    }
}

ScalarField read_field_csv(std::istream& is, const Grid& grid, FieldKind kind) {
    ScalarField out(grid, kind);
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("read_field_csv: empty input");
    std::size_t n = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (n >= grid.num_nodes()) throw std::invalid_argument("read_field_csv: too many rows");
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> cols;
        while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
        if (static_cast<int>(cols.size()) != grid.dim() + 1) throw std::invalid_argument("read_field_csv: bad row");
        const auto pos = grid.position(n);
        for (int k = 0; k < grid.dim(); ++k)
            if (std::abs(pos[static_cast<std::size_t>(k)] - cols[static_cast<std::size_t>(k)]) > 1e-9)
                throw std::invalid_argument("read_field_csv: node positions do not match the grid");
        out.values[n++] = cols.back();
    }
    if (n != grid.num_nodes()) throw std::invalid_argument("read_field_csv: too few rows");
    return out;
}

void write_trajectory(const std::string& directory, const Trajectory& path) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    std::ofstream index(fs::path(directory) / "index.csv");
    index << "k,t\n";
    for (std::size_t k = 0; k < path.slices.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "slice_%05zu.csv", k);
        std::ofstream os(fs::path(directory) / name);
        write_field_csv(os, path.slice(k));
        index << k << ',' << format_double(path.time(k)) << '\n';
    }
}

Trajectory read_trajectory(const std::string& directory, const Grid& grid) {
    namespace fs = std::filesystem;
    std::ifstream index(fs::path(directory) / "index.csv");
    if (!index) throw std::invalid_argument("read_trajectory: missing index.csv");
    std::string line;
    std::getline(index, line);
    std::vector<double> times;
    while (std::getline(index, line)) {
        if (line.empty()) continue;
        times.push_back(std::stod(line.substr(line.find(',') + 1)));
    }
    Trajectory path(grid);
    for (std::size_t k = 0; k < times.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "slice_%05zu.csv", k);
        std::ifstream is(fs::path(directory) / name);
        if (!is) throw std::invalid_argument("read_trajectory: missing slice file");
        path.slices.push_back(read_field_csv(is, grid).values);
    }
    path.dt = times.size() > 1 ? times[1] - times[0] : 0.0;
    return path;
}

}  // namespace bdex
