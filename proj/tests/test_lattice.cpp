#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bdex/lattice.hpp"

#include <cmath>
#include <set>
#include <sstream>

using namespace bdex;

namespace {

ModelParams params(double a, double bm = 0.5, double bp = 0.5) {
    ModelParams p;
    p.a = a;
    p.b_minus = BoundaryProfile(bm);
    p.b_plus = BoundaryProfile(bp);
    return p;
}

// Direct transcription of the rate display on a 1-d chain of explicit values,
// with a missing site replaced by the reservoir density.
double rate_formula(double a, double left, double right) { return 1.0 + a * (left + right); }

}  // namespace

TEST_CASE("geometry counts sites, neighbours and faces") {
    for (int d : {1, 2, 3}) {
        for (int N : {2, 3, 5}) {
            LatticeGeometry g(d, N);
            CHECK(g.num_sites() == static_cast<std::size_t>((2 * N - 1) * std::pow(N, d - 1)));
            std::size_t left = 0;
            std::size_t right = 0;
            for (std::size_t s = 0; s < g.num_sites(); ++s) {
                CHECK(g.index(g.coords(s)) == s);
                int present = 0;
                for (int dir = 0; dir < d; ++dir)
                    for (int step : {-1, 1}) present += g.neighbor(s, dir, step) >= 0;
                const int missing = g.is_boundary(s) ? 1 : 0;
                CHECK(present == 2 * d - missing);
                left += g.boundary_side(s) < 0;
                right += g.boundary_side(s) > 0;
            }
            CHECK(left == g.transverse_count());
            CHECK(right == g.transverse_count());
            CHECK(g.boundary_sites().size() == 2 * g.transverse_count());
        }
    }
    CHECK_THROWS_AS(LatticeGeometry(0, 3), std::invalid_argument);
    CHECK_THROWS_AS(LatticeGeometry(2, 1), std::invalid_argument);
}

TEST_CASE("bond list covers every ordered nearest-neighbour pair once") {
    LatticeGeometry g(2, 3);
    // Direction 0: (2N-2) * N bonds; direction 1: (2N-1) * N bonds on the torus.
    CHECK(g.bonds().size() == 4 * 3 + 5 * 3);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& b : g.bonds()) {
        CHECK(static_cast<long>(b.y) == g.neighbor(b.x, b.dir, 1));
        CHECK(seen.insert({b.x, b.y}).second);
        CHECK(g.bond_index(b.x, b.dir) >= 0);
    }
}

TEST_CASE("model parameters are validated") {
    CHECK_THROWS_AS(params(-0.5).validate(1), std::invalid_argument);
    CHECK_NOTHROW(params(-0.49).validate(1));
    CHECK_THROWS_AS(params(0.0, 1.0, 0.5).validate(1), std::invalid_argument);
    CHECK_THROWS_AS(params(0.0, 0.5, 0.0).validate(1), std::invalid_argument);
    CHECK_NOTHROW(params(0.0, 1.0, 0.0).validate(1, true));
    ModelParams p = params(0.0);
    p.b_minus = BoundaryProfile(0.5, {FourierMode{{1}, 0.6, 0.0}});
    CHECK_THROWS_AS(p.validate(2), std::invalid_argument);
    p.b_minus = BoundaryProfile(0.5, {FourierMode{{1, 1}, 0.1, 0.0}});
    CHECK_THROWS_AS(p.validate(2), std::invalid_argument);
}

TEST_CASE("bulk jump rate examples") {
    SUBCASE("a = 0.5 interior bond with eta(x-e)=1, eta(x+2e)=0") {
        ExclusionModel m(LatticeGeometry(1, 4), params(0.5));
        Configuration eta(m.geometry().num_sites());
        const std::size_t x = m.geometry().index(std::vector<int>{0});
        eta.set(x - 1, 1);
        CHECK(m.bulk_jump_rate(eta, x, 0) == doctest::Approx(1.5).epsilon(1e-15));
    }
    SUBCASE("a = 0 gives rate 1 for every configuration") {
        ExclusionModel m(LatticeGeometry(2, 3), params(0.0, 0.3, 0.6));
        Configuration eta(m.geometry().num_sites());
        for (std::size_t s = 0; s < eta.size(); s += 2) eta.set(s, 1);
        for (const auto& b : m.geometry().bonds()) CHECK(m.bulk_jump_rate(eta, b.x, b.dir) == 1.0);
    }
    SUBCASE("left boundary bond uses the reservoir density") {
        ExclusionModel m(LatticeGeometry(2, 4), params(1.0, 0.3, 0.5));
        const auto& g = m.geometry();
        Configuration eta(g.num_sites());
        const std::size_t x = g.site_at(-3, 1);
        eta.set(g.site_at(-1, 1), 1);
        CHECK(m.bulk_jump_rate(eta, x, 0) == doctest::Approx(2.3).epsilon(1e-15));
    }
    SUBCASE("invalid bond is rejected") {
        ExclusionModel m(LatticeGeometry(1, 3), params(0.2));
        Configuration eta(m.geometry().num_sites());
        CHECK_THROWS_AS((void)m.bulk_jump_rate(eta, m.geometry().site_at(2, 0), 0), std::invalid_argument);
    }
}

TEST_CASE("rates are positive and symmetric") {
    for (double a : {-0.45, 0.0, 0.7, 3.0}) {
        ExclusionModel m(LatticeGeometry(1, 3), params(a, 0.2, 0.9));
        const auto& g = m.geometry();
        for (std::uint64_t bits = 0; bits < (1u << g.num_sites()); ++bits) {
            const auto eta = Configuration::from_bits(bits, g.num_sites());
            for (std::size_t k = 0; k < g.bonds().size(); ++k) {
                const double r = m.bond_rate(eta, k);
                CHECK(r >= std::min(1.0, 1.0 + 2.0 * a) - 1e-15);
                CHECK(r == m.bulk_jump_rate(eta, g.bonds()[k].x, g.bonds()[k].dir));
                // The rate only depends on the outer pair, so it is the same for both jump directions.
                const auto swapped = m.apply_exchange(eta, g.bonds()[k].x, g.bonds()[k].y);
                CHECK(m.bond_rate(swapped, k) == r);
            }
        }
    }
}

TEST_CASE("boundary flip rates") {
    ExclusionModel m(LatticeGeometry(1, 3), params(0.0, 0.3, 0.5));
    const auto& g = m.geometry();
    Configuration eta(g.num_sites());
    const std::size_t left = g.site_at(-2, 0);
    const std::size_t right = g.site_at(2, 0);
    CHECK(m.boundary_flip_rate(eta, left) == doctest::Approx(0.3));
    eta.set(left, 1);
    CHECK(m.boundary_flip_rate(eta, left) == doctest::Approx(0.7));
    CHECK(m.boundary_flip_rate(eta, right) == doctest::Approx(0.5));
    eta.set(right, 1);
    CHECK(m.boundary_flip_rate(eta, right) == doctest::Approx(0.5));
    CHECK_THROWS_AS((void)m.boundary_flip_rate(eta, g.site_at(0, 0)), std::invalid_argument);
}

TEST_CASE("exchange and flip") {
    ExclusionModel m(LatticeGeometry(2, 3), params(0.1));
    const auto& g = m.geometry();
    Configuration eta(g.num_sites());
    const std::size_t x = g.site_at(0, 0);
    const auto y = static_cast<std::size_t>(g.neighbor(x, 1, 1));
    eta.set(x, 1);
    const auto moved = m.apply_exchange(eta, x, y);
    CHECK(moved[x] == 0);
    CHECK(moved[y] == 1);
    CHECK(moved.particle_count() == eta.particle_count());
    const auto same = m.apply_exchange(moved, x, g.site_at(1, 0));
    CHECK(same == m.apply_exchange(same, g.site_at(1, 0), x));
    Configuration both(g.num_sites());
    both.set(x, 1);
    both.set(y, 1);
    CHECK(m.apply_exchange(both, x, y) == both);
    CHECK_THROWS_AS((void)m.apply_exchange(eta, x, g.site_at(2, 0)), std::invalid_argument);
    const std::size_t b = g.site_at(-2, 1);
    const auto flipped = m.apply_flip(eta, b);
    CHECK(flipped.particle_count() == eta.particle_count() + 1);
    CHECK(m.apply_flip(flipped, b) == eta);
}

TEST_CASE("instantaneous current examples") {
    ExclusionModel m0(LatticeGeometry(1, 4), params(0.0));
    const auto& g = m0.geometry();
    Configuration eta(g.num_sites());
    const std::size_t x = g.site_at(0, 0);
    eta.set(x, 1);
    CHECK(m0.instantaneous_current(eta, x, 0) == doctest::Approx(1.0));
    eta.set(x + 1, 1);
    CHECK(m0.instantaneous_current(eta, x, 0) == doctest::Approx(0.0));
    // Bonds whose W support leaves the cylinder are rejected.
    CHECK_THROWS_AS((void)m0.instantaneous_current(eta, g.site_at(-3, 0), 0), std::invalid_argument);
    CHECK_THROWS_AS((void)m0.instantaneous_current(eta, g.site_at(2, 0), 0), std::invalid_argument);
    CHECK_NOTHROW((void)m0.instantaneous_current(eta, g.site_at(1, 0), 0));
}

TEST_CASE("gradient decomposition equals the rate-difference current on all 16 local states") {
    for (double a : {-0.4, 0.0, 0.7}) {
        ExclusionModel m(LatticeGeometry(1, 4), params(a));
        const auto& g = m.geometry();
        const std::size_t x = g.site_at(0, 0);
        for (int bits = 0; bits < 16; ++bits) {
            Configuration eta(g.num_sites());
            const int em = bits & 1, e0 = (bits >> 1) & 1, e1 = (bits >> 2) & 1, e2 = (bits >> 3) & 1;
            eta.set(x - 1, em);
            eta.set(x, e0);
            eta.set(x + 1, e1);
            eta.set(x + 2, e2);
            const double expected = rate_formula(a, em, e2) * (e0 * (1 - e1) - e1 * (1 - e0));
            CHECK(m.instantaneous_current(eta, x, 0) == doctest::Approx(expected).epsilon(1e-14));
            CHECK(m.rate_difference_current(eta, x, 0) == doctest::Approx(expected).epsilon(1e-14));
            const auto t = m.current_terms(eta, x, 0);
            CHECK(t.h == doctest::Approx(e0 - a * e1 * em));
            CHECK(t.g == doctest::Approx(a * em * e0));
        }
    }
}

TEST_CASE("enumerate_transitions") {
    SUBCASE("d=1, N=2 empty lattice") {
        ExclusionModel m(LatticeGeometry(1, 2), params(0.3, 0.2, 0.7));
        const Configuration eta(3);
        const auto tr = m.enumerate_transitions(eta);
        REQUIRE(tr.size() == 4);
        int exchanges = 0;
        double flip_rates = 0.0;
        for (const auto& t : tr) {
            if (t.kind == TransitionKind::Exchange) {
                ++exchanges;
                CHECK(t.target == eta);
            } else {
                flip_rates += t.rate;
            }
        }
        CHECK(exchanges == 2);
        // Bond (-1,0): left neighbour is the reservoir (0.2), x+2e = 1 is empty.
        CHECK(tr[0].rate == doctest::Approx(1.0 + 0.3 * 0.2));
        // Bond (0,1): x-e = -1 is empty, x+2e is the right reservoir (0.7).
        CHECK(tr[1].rate == doctest::Approx(1.0 + 0.3 * 0.7));
        CHECK(flip_rates == doctest::Approx(0.2 + 0.7));
    }
    SUBCASE("count equals bonds plus boundary sites") {
        ExclusionModel m(LatticeGeometry(2, 3), params(0.0));
        const auto tr = m.enumerate_transitions(Configuration(m.geometry().num_sites()));
        CHECK(tr.size() == m.geometry().bonds().size() + m.geometry().boundary_sites().size());
        CHECK(tr.size() == m.transition_count());
    }
}

TEST_CASE("snapshot round trip") {
    ExclusionModel m(LatticeGeometry(2, 3), params(0.25));
    Configuration eta(m.geometry().num_sites());
    eta.set(1, 1);
    eta.set(7, 1);
    std::stringstream ss;
    write_snapshot(ss, m, eta);
    const auto snap = read_snapshot(ss);
    CHECK(snap.d == 2);
    CHECK(snap.N == 3);
    CHECK(snap.a == 0.25);
    CHECK(snap.eta == eta);
    std::stringstream short_line("2 3 0.25\n0100\n");
    CHECK_THROWS_AS((void)read_snapshot(short_line), std::runtime_error);
    std::stringstream bad_char("2 3 0.25\n010000000000002\n");
    CHECK_THROWS_AS((void)read_snapshot(bad_char), std::runtime_error);
}

TEST_CASE("state bits round trip") {
    for (std::uint64_t bits : {0ULL, 5ULL, 31ULL}) CHECK(Configuration::from_bits(bits, 5).to_bits() == bits);
    CHECK_THROWS_AS((void)Configuration(64).to_bits(), std::length_error);
}
