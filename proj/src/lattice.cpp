#include "bdex/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace bdex {

BoundaryProfile::BoundaryProfile(double constant, std::vector<FourierMode> modes)
    : constant_(constant), modes_(std::move(modes)) {}

double BoundaryProfile::operator()(std::span<const double> v) const {
    double value = constant_;
    for (const auto& m : modes_) {
        double phase = 0.0;
        for (std::size_t k = 0; k < m.wave.size() && k < v.size(); ++k) {
            phase += m.wave[k] * v[k];
        }
        phase *= 2.0 * std::numbers::pi;
        value += m.cos_amp * std::cos(phase) + m.sin_amp * std::sin(phase);
    }
    return value;
}

double BoundaryProfile::lower_bound() const noexcept {
    double s = 0.0;
    for (const auto& m : modes_) s += std::abs(m.cos_amp) + std::abs(m.sin_amp);
    return constant_ - s;
}

double BoundaryProfile::upper_bound() const noexcept {
    double s = 0.0;
    for (const auto& m : modes_) s += std::abs(m.cos_amp) + std::abs(m.sin_amp);
    return constant_ + s;
}

void ModelParams::validate(int d, bool closed_densities) const {
    if (!(a > -0.5)) {
        throw std::invalid_argument("ModelParams: interaction strength a must be > -1/2");
    }
    for (const auto* b : {&b_minus, &b_plus}) {
        if (closed_densities) {
            if (!(b->lower_bound() >= 0.0) || !(b->upper_bound() <= 1.0)) {
                throw std::invalid_argument("ModelParams: boundary density must lie in [0,1]");
            }
        } else if (!(b->lower_bound() > 0.0) || !(b->upper_bound() < 1.0)) {
            throw std::invalid_argument("ModelParams: boundary density must lie strictly inside (0,1)");
        }
        for (const auto& m : b->modes()) {
            if (static_cast<int>(m.wave.size()) != d - 1) {
                throw std::invalid_argument("ModelParams: Fourier mode needs one wave number per transverse direction");
            }
        }
    }
}

double ModelParams::b(int side, std::span<const double> v) const {
    return side < 0 ? b_minus(v) : b_plus(v);
}

// ---------------------------------------------------------------------------

LatticeGeometry::LatticeGeometry(int d, int N) : d_(d), N_(N) {
    if (d < 1) throw std::invalid_argument("LatticeGeometry: dimension must be >= 1");
    if (N < 2) throw std::invalid_argument("LatticeGeometry: half-width N must be >= 2");
    transverse_count_ = 1;
    for (int k = 1; k < d; ++k) transverse_count_ *= static_cast<std::size_t>(N);
    num_sites_ = static_cast<std::size_t>(2 * N - 1) * transverse_count_;

    neighbors_.assign(num_sites_ * 2 * d, -1);
    bond_of_.assign(num_sites_ * d, -1);
    for (std::size_t s = 0; s < num_sites_; ++s) {
        auto c = coords(s);
        for (int dir = 0; dir < d; ++dir) {
            for (int side = 0; side < 2; ++side) {
                auto n = c;
                n[dir] += side == 0 ? -1 : 1;
                if (dir == 0) {
                    if (n[0] < -N + 1 || n[0] > N - 1) continue;
                } else {
                    n[dir] = (n[dir] + N) % N;
                }
                neighbors_[(s * d + dir) * 2 + side] = static_cast<long>(index(n));
            }
        }
    }
    for (std::size_t s = 0; s < num_sites_; ++s) {
        for (int dir = 0; dir < d; ++dir) {
            long y = neighbors_[(s * d + dir) * 2 + 1];
            if (y < 0) continue;
            bond_of_[s * d + dir] = static_cast<long>(bonds_.size());
            bonds_.push_back({s, static_cast<std::size_t>(y), dir});
        }
    }
    for (int side : {-1, 1}) {
        for (std::size_t t = 0; t < transverse_count_; ++t) {
            boundary_.push_back(site_at(side * (N - 1), t));
        }
    }
}

std::size_t LatticeGeometry::index(std::span<const int> c) const {
    if (static_cast<int>(c.size()) != d_) throw std::invalid_argument("LatticeGeometry::index: wrong arity");
    if (c[0] < -N_ + 1 || c[0] > N_ - 1) throw std::out_of_range("LatticeGeometry::index: x_1 outside cylinder");
    std::size_t t = 0;
    for (int k = 1; k < d_; ++k) {
        if (c[k] < 0 || c[k] >= N_) throw std::out_of_range("LatticeGeometry::index: transverse coordinate outside torus");
        t = t * static_cast<std::size_t>(N_) + static_cast<std::size_t>(c[k]);
    }
    return site_at(c[0], t);
}

std::vector<int> LatticeGeometry::coords(std::size_t site) const {
    std::vector<int> c(d_);
    c[0] = x1(site);
    std::size_t t = transverse_index(site);
    for (int k = d_ - 1; k >= 1; --k) {
        c[k] = static_cast<int>(t % static_cast<std::size_t>(N_));
        t /= static_cast<std::size_t>(N_);
    }
    return c;
}

std::vector<double> LatticeGeometry::position(std::size_t site) const {
    auto c = coords(site);
    std::vector<double> u(d_);
    for (int k = 0; k < d_; ++k) u[k] = static_cast<double>(c[k]) / N_;
    return u;
}

std::vector<double> LatticeGeometry::transverse_position(std::size_t transverse) const {
    std::vector<double> v(d_ - 1);
    for (int k = d_ - 2; k >= 0; --k) {
        v[k] = static_cast<double>(transverse % static_cast<std::size_t>(N_)) / N_;
        transverse /= static_cast<std::size_t>(N_);
    }
    return v;
}

long LatticeGeometry::neighbor(std::size_t site, int dir, int step) const {
    if (dir < 0 || dir >= d_) throw std::out_of_range("LatticeGeometry::neighbor: bad direction");
    long cur = static_cast<long>(site);
    const int side = step < 0 ? 0 : 1;
    for (int k = 0; k < std::abs(step) && cur >= 0; ++k) {
        cur = neighbors_[(static_cast<std::size_t>(cur) * d_ + dir) * 2 + side];
    }
    return cur;
}

int LatticeGeometry::boundary_side(std::size_t site) const noexcept {
    const int x = x1(site);
    if (x == -N_ + 1) return -1;
    if (x == N_ - 1) return 1;
    return 0;
}

long LatticeGeometry::bond_index(std::size_t x, int dir) const {
    if (x >= num_sites_ || dir < 0 || dir >= d_) return -1;
    return bond_of_[x * d_ + dir];
}

// ---------------------------------------------------------------------------

Configuration::Configuration(std::vector<std::uint8_t> occupancy) : occ_(std::move(occupancy)) {
    for (auto v : occ_) {
        if (v > 1) throw std::invalid_argument("Configuration: occupancy must be 0 or 1");
    }
}

std::size_t Configuration::particle_count() const noexcept {
    std::size_t n = 0;
    for (auto v : occ_) n += v;
    return n;
}

std::uint64_t Configuration::to_bits() const {
    if (occ_.size() > 63) throw std::length_error("Configuration::to_bits: too many sites");
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < occ_.size(); ++i) bits |= static_cast<std::uint64_t>(occ_[i]) << i;
    return bits;
}

Configuration Configuration::from_bits(std::uint64_t bits, std::size_t num_sites) {
    Configuration c(num_sites);
    for (std::size_t i = 0; i < num_sites; ++i) c.occ_[i] = static_cast<std::uint8_t>((bits >> i) & 1U);
    return c;
}

// ---------------------------------------------------------------------------

ExclusionModel::ExclusionModel(LatticeGeometry geometry, ModelParams params)
    : geo_(std::move(geometry)), params_(std::move(params)) {
    params_.validate(geo_.dim());
    reservoir_.assign(geo_.num_sites(), std::numeric_limits<double>::quiet_NaN());
    for (auto s : geo_.boundary_sites()) {
        auto v = geo_.transverse_position(geo_.transverse_index(s));
        reservoir_[s] = params_.b(geo_.boundary_side(s), v);
    }
    const auto& bonds = geo_.bonds();
    rate_left_.resize(bonds.size());
    rate_right_.resize(bonds.size());
    rate_left_b_.assign(bonds.size(), 0.0);
    rate_right_b_.assign(bonds.size(), 0.0);
    for (std::size_t k = 0; k < bonds.size(); ++k) {
        const auto& bd = bonds[k];
        rate_left_[k] = geo_.neighbor(bd.x, bd.dir, -1);
        rate_right_[k] = geo_.neighbor(bd.y, bd.dir, +1);
        // Missing sites only happen in direction 0 at the extreme bonds.
        if (rate_left_[k] < 0) rate_left_b_[k] = reservoir_[bd.x];
        if (rate_right_[k] < 0) rate_right_b_[k] = reservoir_[bd.y];
    }
}

double ExclusionModel::reservoir_density(std::size_t site) const {
    if (!geo_.is_boundary(site)) throw std::invalid_argument("reservoir_density: site not on the boundary");
    return reservoir_[site];
}

double ExclusionModel::bond_rate(const Configuration& eta, std::size_t k) const noexcept {
    const double left = rate_left_[k] >= 0 ? eta[static_cast<std::size_t>(rate_left_[k])] : rate_left_b_[k];
    const double right = rate_right_[k] >= 0 ? eta[static_cast<std::size_t>(rate_right_[k])] : rate_right_b_[k];
    return 1.0 + params_.a * (left + right);
}

double ExclusionModel::bulk_jump_rate(const Configuration& eta, std::size_t x, int dir) const {
    const long k = geo_.bond_index(x, dir);
    if (k < 0) throw std::invalid_argument("bulk_jump_rate: x + e_i is not in the cylinder");
    return bond_rate(eta, static_cast<std::size_t>(k));
}

double ExclusionModel::boundary_flip_rate(const Configuration& eta, std::size_t x) const {
    if (x >= geo_.num_sites() || !geo_.is_boundary(x)) {
        throw std::invalid_argument("boundary_flip_rate: site not on the boundary");
    }
    const double b = reservoir_[x];
    return eta[x] ? 1.0 - b : b;
}

Configuration ExclusionModel::apply_exchange(const Configuration& eta, std::size_t x, std::size_t y) const {
    bool adjacent = false;
    for (int dir = 0; dir < geo_.dim() && !adjacent; ++dir) {
        adjacent = geo_.neighbor(x, dir, 1) == static_cast<long>(y) || geo_.neighbor(x, dir, -1) == static_cast<long>(y);
    }
    if (!adjacent || x == y) throw std::invalid_argument("apply_exchange: sites are not nearest neighbours");
    Configuration out = eta;
    out.swap_sites(x, y);
    return out;
}

Configuration ExclusionModel::apply_flip(const Configuration& eta, std::size_t x) const {
    if (x >= geo_.num_sites() || !geo_.is_boundary(x)) throw std::invalid_argument("apply_flip: site not on the boundary");
    Configuration out = eta;
    out.flip(x);
    return out;
}

BondCurrentTerms ExclusionModel::current_terms(const Configuration& eta, std::size_t x, int dir) const {
    const long prev = geo_.neighbor(x, dir, -1);
    const long next = geo_.neighbor(x, dir, +1);
    if (prev < 0 || next < 0) throw std::invalid_argument("current_terms: x +- e_i must be in the cylinder");
    const double ep = eta[static_cast<std::size_t>(prev)];
    const double en = eta[static_cast<std::size_t>(next)];
    const double ex = eta[x];
    return {ex - params_.a * en * ep, params_.a * ep * ex};
}

double ExclusionModel::instantaneous_current(const Configuration& eta, std::size_t x, int dir) const {
    const long prev = geo_.neighbor(x, dir, -1);
    const long y = geo_.neighbor(x, dir, 1);
    const long y2 = geo_.neighbor(x, dir, 2);
    if (prev < 0 || y < 0 || y2 < 0) {
        throw std::invalid_argument("instantaneous_current: boundary-adjacent bond; use jump counting there");
    }
    const double a = params_.a;
    const double e_prev = eta[static_cast<std::size_t>(prev)];
    const double e_x = eta[x];
    const double e_y = eta[static_cast<std::size_t>(y)];
    const double e_y2 = eta[static_cast<std::size_t>(y2)];
    const double h_x = e_x - a * e_y * e_prev;
    const double h_y = e_y - a * e_y2 * e_x;
    const double g_x = a * e_prev * e_x;
    const double g_y2 = a * e_y * e_y2;
    return (h_x - h_y) + (g_x - g_y2);
}

double ExclusionModel::rate_difference_current(const Configuration& eta, std::size_t x, int dir) const {
    const long y = geo_.neighbor(x, dir, 1);
    if (y < 0) throw std::invalid_argument("rate_difference_current: x + e_i is not in the cylinder");
    const double r = bulk_jump_rate(eta, x, dir);
    const int ex = eta[x];
    const int ey = eta[static_cast<std::size_t>(y)];
    return r * (ex * (1 - ey) - ey * (1 - ex));
}

std::vector<Transition> ExclusionModel::enumerate_transitions(const Configuration& eta) const {
    std::vector<Transition> out;
    out.reserve(transition_count());
    const auto& bonds = geo_.bonds();
    for (std::size_t k = 0; k < bonds.size(); ++k) {
        Configuration target = eta;
        target.swap_sites(bonds[k].x, bonds[k].y);
        out.push_back({TransitionKind::Exchange, bonds[k].x, bonds[k].y, bond_rate(eta, k), std::move(target)});
    }
    for (auto s : geo_.boundary_sites()) {
        Configuration target = eta;
        target.flip(s);
        out.push_back({TransitionKind::Flip, s, s, boundary_flip_rate(eta, s), std::move(target)});
    }
    return out;
}

double ExclusionModel::max_bulk_rate() const noexcept {
    return std::max(1.0, 1.0 + 2.0 * params_.a);
}

// ---------------------------------------------------------------------------

void write_snapshot(std::ostream& os, const ExclusionModel& model, const Configuration& eta) {
    const auto& g = model.geometry();
    if (eta.size() != g.num_sites()) throw std::invalid_argument("write_snapshot: size mismatch");
    std::ostringstream head;
    head.precision(17);
    head << g.dim() << ' ' << g.half_width() << ' ' << model.a() << '\n';
    os << head.str();
    std::string line(eta.size(), '0');
    for (std::size_t i = 0; i < eta.size(); ++i) line[i] = eta[i] ? '1' : '0';
    os << line << '\n';
}

Snapshot read_snapshot(std::istream& is) {
    Snapshot s{};
    if (!(is >> s.d >> s.N >> s.a)) throw std::runtime_error("read_snapshot: malformed header");
    LatticeGeometry g(s.d, s.N);
    std::string line;
    is >> line;
    if (line.size() != g.num_sites()) throw std::runtime_error("read_snapshot: occupancy line has wrong length");
    std::vector<std::uint8_t> occ(line.size());
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] != '0' && line[i] != '1') throw std::runtime_error("read_snapshot: occupancy must be '0' or '1'");
        occ[i] = line[i] == '1';
    }
    s.eta = Configuration(std::move(occ));
    return s;
}

}  // namespace bdex
