#pragma once

/**
 * @file lattice.hpp
 * @brief Discrete cylinder, configurations and transition rates of the
 *        boundary-driven gradient exclusion process.
 *
 * Sites live on {-N+1, ..., N-1} x T_N^{d-1}. Direction 0 (e_1) is the
 * driven direction with reservoirs at x_1 = +-(N-1); directions 1..d-1 wrap
 * around the transverse torus. Sites are indexed row-major with x_1 slowest,
 * then x_2, ..., x_d fastest. That ordering is part of the snapshot format.
 */

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace bdex {

/// Reservoir density on one face: c + sum_k [A_k cos(2 pi k.v) + B_k sin(2 pi k.v)].
struct FourierMode {
    std::vector<int> wave;  // one integer per transverse direction
    double cos_amp = 0.0;
    double sin_amp = 0.0;
};

class BoundaryProfile {
public:
    BoundaryProfile() = default;
    explicit BoundaryProfile(double constant, std::vector<FourierMode> modes = {});

    /// Evaluate at transverse position v in [0,1)^{d-1}.
    [[nodiscard]] double operator()(std::span<const double> v) const;
    [[nodiscard]] double constant() const noexcept { return constant_; }
    [[nodiscard]] const std::vector<FourierMode>& modes() const noexcept { return modes_; }
    [[nodiscard]] bool is_constant() const noexcept { return modes_.empty(); }

    /// Guaranteed bounds: constant -+ sum of mode amplitudes.
    [[nodiscard]] double lower_bound() const noexcept;
    [[nodiscard]] double upper_bound() const noexcept;

private:
    double constant_ = 0.5;
    std::vector<FourierMode> modes_;
};

struct ModelParams {
    double a = 0.0;
    BoundaryProfile b_minus{0.5};
    BoundaryProfile b_plus{0.5};

    /// Throws std::invalid_argument unless a > -1/2 and 0 < b < 1 on both faces.
    /// Particle systems need b in (0,1); the PDE layer accepts [0,1] (closed_densities).
    void validate(int d, bool closed_densities = false) const;
    /// b(side, v) with side = -1 or +1.
    [[nodiscard]] double b(int side, std::span<const double> v) const;
};

class LatticeGeometry {
public:
    LatticeGeometry(int d, int N);

    [[nodiscard]] int dim() const noexcept { return d_; }
    [[nodiscard]] int half_width() const noexcept { return N_; }
    [[nodiscard]] std::size_t num_sites() const noexcept { return num_sites_; }
    /// N^{d-1}.
    [[nodiscard]] std::size_t transverse_count() const noexcept { return transverse_count_; }

    [[nodiscard]] std::size_t index(std::span<const int> coords) const;
    [[nodiscard]] std::vector<int> coords(std::size_t site) const;
    [[nodiscard]] int x1(std::size_t site) const noexcept {
        return static_cast<int>(site / transverse_count_) - (N_ - 1);
    }
    /// Position of the site in the transverse torus block, in [0, N^{d-1}).
    [[nodiscard]] std::size_t transverse_index(std::size_t site) const noexcept {
        return site % transverse_count_;
    }
    [[nodiscard]] std::size_t site_at(int x1, std::size_t transverse) const noexcept {
        return static_cast<std::size_t>(x1 + N_ - 1) * transverse_count_ + transverse;
    }
    /// Macroscopic position x/N.
    [[nodiscard]] std::vector<double> position(std::size_t site) const;
    /// Transverse macroscopic coordinates x_check/N.
    [[nodiscard]] std::vector<double> transverse_position(std::size_t transverse) const;

    /// Neighbour x + step*e_dir, or -1 when it leaves the cylinder in direction 0.
    [[nodiscard]] long neighbor(std::size_t site, int dir, int step) const;

    /// -1 on the left face, +1 on the right face, 0 otherwise.
    [[nodiscard]] int boundary_side(std::size_t site) const noexcept;
    [[nodiscard]] bool is_boundary(std::size_t site) const noexcept { return boundary_side(site) != 0; }

    struct Bond {
        std::size_t x;
        std::size_t y;  // x + e_dir
        int dir;
    };
    /// Every ordered bond (x, x+e_i) with both ends in the cylinder.
    [[nodiscard]] const std::vector<Bond>& bonds() const noexcept { return bonds_; }
    /// Left face then right face, each in transverse order.
    [[nodiscard]] const std::vector<std::size_t>& boundary_sites() const noexcept { return boundary_; }
    /// Position of bond (x, x+e_dir) in bonds(), or -1.
    [[nodiscard]] long bond_index(std::size_t x, int dir) const;

    bool operator==(const LatticeGeometry& o) const noexcept { return d_ == o.d_ && N_ == o.N_; }

private:
    int d_;
    int N_;
    std::size_t transverse_count_;
    std::size_t num_sites_;
    std::vector<long> neighbors_;  // [site][dir][0:-,1:+]
    std::vector<long> bond_of_;    // [site][dir]
    std::vector<Bond> bonds_;
    std::vector<std::size_t> boundary_;
};

class Configuration {
public:
    Configuration() = default;
    explicit Configuration(std::size_t num_sites, std::uint8_t value = 0)
        : occ_(num_sites, value ? 1 : 0) {}
    explicit Configuration(std::vector<std::uint8_t> occupancy);

    [[nodiscard]] std::size_t size() const noexcept { return occ_.size(); }
    [[nodiscard]] int operator[](std::size_t i) const noexcept { return occ_[i]; }
    void set(std::size_t i, int value) noexcept { occ_[i] = value ? 1 : 0; }
    void flip(std::size_t i) noexcept { occ_[i] ^= 1U; }
    void swap_sites(std::size_t i, std::size_t j) noexcept { std::swap(occ_[i], occ_[j]); }
    [[nodiscard]] std::size_t particle_count() const noexcept;
    [[nodiscard]] std::span<const std::uint8_t> data() const noexcept { return occ_; }

    /// Bit i of the state index is the occupancy of site i (requires size <= 63).
    [[nodiscard]] std::uint64_t to_bits() const;
    static Configuration from_bits(std::uint64_t bits, std::size_t num_sites);

    bool operator==(const Configuration&) const = default;

private:
    std::vector<std::uint8_t> occ_;
};

enum class TransitionKind : std::uint8_t { Exchange, Flip };

struct Transition {
    TransitionKind kind;
    std::size_t x;
    std::size_t y;  // equals x for flips
    double rate;
    Configuration target;
};

/// h_{i,x} and g_{i,x} of the gradient decomposition of the bond current.
struct BondCurrentTerms {
    double h;
    double g;
};

/**
 * Geometry plus parameters, with reservoir densities cached per boundary
 * site. All rate functions are the unspeeded generator rates.
 */
class ExclusionModel {
public:
    ExclusionModel(LatticeGeometry geometry, ModelParams params);

    [[nodiscard]] const LatticeGeometry& geometry() const noexcept { return geo_; }
    [[nodiscard]] const ModelParams& params() const noexcept { return params_; }
    [[nodiscard]] double a() const noexcept { return params_.a; }

    /// Reservoir density seen by a boundary site.
    [[nodiscard]] double reservoir_density(std::size_t boundary_site) const;

    /// r_{x,x+e_dir}(eta). Throws if x+e_dir is outside the cylinder.
    [[nodiscard]] double bulk_jump_rate(const Configuration& eta, std::size_t x, int dir) const;
    /// Rate of the bond given by its index in geometry().bonds(); no checks.
    [[nodiscard]] double bond_rate(const Configuration& eta, std::size_t bond) const noexcept;
    /// C^b(x, eta). Throws unless x is on the boundary.
    [[nodiscard]] double boundary_flip_rate(const Configuration& eta, std::size_t x) const;

    [[nodiscard]] Configuration apply_exchange(const Configuration& eta, std::size_t x, std::size_t y) const;
    [[nodiscard]] Configuration apply_flip(const Configuration& eta, std::size_t x) const;

    [[nodiscard]] BondCurrentTerms current_terms(const Configuration& eta, std::size_t x, int dir) const;
    /// W_{x,x+e_dir} from the gradient decomposition; interior bonds only.
    [[nodiscard]] double instantaneous_current(const Configuration& eta, std::size_t x, int dir) const;
    /// r * [eta(x)(1-eta(y)) - eta(y)(1-eta(x))]; valid on every bond.
    [[nodiscard]] double rate_difference_current(const Configuration& eta, std::size_t x, int dir) const;

    /// Every exchange (one per bond) followed by every boundary flip.
    [[nodiscard]] std::vector<Transition> enumerate_transitions(const Configuration& eta) const;
    [[nodiscard]] std::size_t transition_count() const noexcept {
        return geo_.bonds().size() + geo_.boundary_sites().size();
    }

    /// Upper bound of bulk rates over all configurations: max(1, 1+2a).
    [[nodiscard]] double max_bulk_rate() const noexcept;

private:
    LatticeGeometry geo_;
    ModelParams params_;
    std::vector<double> reservoir_;  // per site, NaN off the boundary
    // Per bond: sites entering the rate, or -1 with the reservoir value to use.
    std::vector<long> rate_left_;
    std::vector<long> rate_right_;
    std::vector<double> rate_left_b_;
    std::vector<double> rate_right_b_;
};

/// Snapshot format: "d N a" header, then one line of '0'/'1' in site order.
void write_snapshot(std::ostream& os, const ExclusionModel& model, const Configuration& eta);
struct Snapshot {
    int d;
    int N;
    double a;
    Configuration eta;
};
Snapshot read_snapshot(std::istream& is);

}  // namespace bdex
