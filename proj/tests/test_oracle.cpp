#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bdex/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>

using namespace bdex;

namespace {

ModelParams params(double a, double bm, double bp) {
    ModelParams p;
    p.a = a;
    p.b_minus = BoundaryProfile(bm);
    p.b_plus = BoundaryProfile(bp);
    return p;
}

// Dense generator of the three-site chain written straight from the rate formulas:
// sites 0,1,2; bond rates 1 + a(eta(x-1) + eta(x+2)) with reservoirs outside.
Eigen::MatrixXd three_site_generator(double a, double bm, double bp) {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(8, 8);
    for (int s = 0; s < 8; ++s) {
        const auto occ = [&](int i) -> double {
            if (i < 0) return bm;
            if (i > 2) return bp;
            return (s >> i) & 1;
        };
        for (int x = 0; x < 2; ++x) {
            const int ex = (s >> x) & 1;
            const int ey = (s >> (x + 1)) & 1;
            if (ex == ey) continue;
            const double r = 1.0 + a * (occ(x - 1) + occ(x + 2));
            Q(s, s ^ (1 << x) ^ (1 << (x + 1))) += r;
        }
        Q(s, s ^ 1) += (s & 1) ? 1.0 - bm : bm;
        Q(s, s ^ 4) += (s & 4) ? 1.0 - bp : bp;
        Q(s, s) = -Q.row(s).sum();
    }
    return Q;
}

}  // namespace

TEST_CASE("generator of the smallest chain") {
    const ExclusionModel m(LatticeGeometry(1, 2), params(0.5, 0.8, 0.2));
    const auto gen = build_generator(m);
    CHECK(gen.states == 8);
    CHECK(gen.sites == 3);
    const Eigen::MatrixXd Qd = Eigen::MatrixXd(gen.Q);
    for (int r = 0; r < 8; ++r) CHECK(std::abs(Qd.row(r).sum()) < 1e-15);
    const auto ref = three_site_generator(0.5, 0.8, 0.2);
    CHECK((Qd - ref).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS((void)build_generator(ExclusionModel(LatticeGeometry(2, 4), params(0.0, 0.5, 0.5))),
                    std::invalid_argument);
}

TEST_CASE("stationary law against a dense null vector") {
    for (double a : {-0.3, 0.0, 0.5, 2.0}) {
        const auto ref = three_site_generator(a, 0.7, 0.1);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(ref.transpose());
        Eigen::VectorXd v = lu.kernel().col(0);
        v /= v.sum();
        const auto mu = stationary_distribution(build_generator(ExclusionModel(LatticeGeometry(1, 2), params(a, 0.7, 0.1))));
        for (int s = 0; s < 8; ++s) CHECK(mu[s] == doctest::Approx(v[s]).epsilon(1e-12));
    }
}

TEST_CASE("SSEP closed form") {
    // Balance equations of the one-point functions at a = 0:
    // rho(0) = (b_- + b_+)/2, rho(-1) = (b_- + rho(0))/2, current rho(-1) - rho(0).
    const auto fx = compute_fixture(1, 2, 0.0, 0.8, 0.2);
    CHECK(fx.density[0] == doctest::Approx(0.65).epsilon(1e-13));
    CHECK(fx.density[1] == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(fx.density[2] == doctest::Approx(0.35).epsilon(1e-13));
    for (double j : fx.bond_current) CHECK(j == doctest::Approx(0.15).epsilon(1e-13));
}

TEST_CASE("equal reservoirs: product Bernoulli is reversible") {
    for (int d : {1, 2}) {
        for (double a : {-0.4, 0.0, 0.7}) {
            for (double c : {0.2, 0.5, 0.9}) {
                const ExclusionModel m(LatticeGeometry(d, 2), params(a, c, c));
                const auto gen = build_generator(m);
                const auto nu = product_bernoulli(gen.sites, c);
                CHECK(check_detailed_balance(gen, nu) <= 1e-12);
                CHECK(stationarity_residual(gen, nu) <= 1e-12);
                const auto mu = stationary_distribution(gen);
                double diff = 0.0;
                for (std::size_t s = 0; s < mu.size(); ++s) diff = std::max(diff, std::abs(mu[s] - nu[s]));
                CHECK(diff < 1e-12);
            }
        }
    }
    const auto gen = build_generator(ExclusionModel(LatticeGeometry(1, 3), params(0.5, 0.8, 0.2)));
    CHECK(check_detailed_balance(gen, stationary_distribution(gen)) > 1e-6);
}

TEST_CASE("expectations and product measure") {
    const auto nu = product_bernoulli(4, 0.3);
    double total = 0.0;
    for (double v : nu) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(nu[0] == doctest::Approx(std::pow(0.7, 4)));
    CHECK(nu[15] == doctest::Approx(std::pow(0.3, 4)));
    CHECK(exact_expectation(nu, 4, [](const Configuration& e) { return e[2]; }) == doctest::Approx(0.3));
    CHECK(exact_expectation(nu, 4, [](const Configuration& e) { return e[0] * e[3]; }) == doctest::Approx(0.09));
    CHECK_THROWS_AS((void)exact_expectation(nu, 5, [](const Configuration&) { return 1.0; }), std::invalid_argument);
}

TEST_CASE("stationary currents are uniform and densities bracketed") {
    struct Case {
        int d, N;
        double a, bm, bp;
    };
    for (const auto& c : {Case{1, 2, 0.5, 0.8, 0.2}, Case{1, 3, -0.3, 0.7, 0.1}, Case{2, 2, 0.7, 0.9, 0.3},
                          Case{1, 4, 1.5, 0.6, 0.35}}) {
        const auto fx = compute_fixture(c.d, c.N, c.a, c.bm, c.bp);
        const auto m = fx.model();
        const auto& g = m.geometry();
        // Net direction-0 current through each slice, summed over the torus.
        std::vector<double> slice(2 * c.N - 2, 0.0);
        for (std::size_t k = 0; k < g.bonds().size(); ++k) {
            const auto& b = g.bonds()[k];
            if (b.dir == 0) slice[g.x1(b.x) + c.N - 1] += fx.bond_current[k];
            else CHECK(std::abs(fx.bond_current[k]) < 1e-12);
        }
        for (double s : slice) CHECK(std::abs(s - slice[0]) <= 1e-12);
        CHECK(slice[0] > 0.0);
        for (double rho : fx.density) {
            CHECK(rho <= c.bm + 1e-12);
            CHECK(rho >= c.bp - 1e-12);
        }
        // Flux out of the left reservoir equals the bulk current.
        double inflow = 0.0;
        for (std::size_t j = 0; j < g.transverse_count(); ++j) inflow += c.bm - fx.density[g.site_at(-c.N + 1, j)];
        CHECK(inflow == doctest::Approx(slice[0]).epsilon(1e-11));
        const auto gen = build_generator(m);
        CHECK(stationarity_residual(gen, stationary_distribution(gen)) <= 1e-12);
    }
}

TEST_CASE("flip plus particle-hole symmetry at a = 0") {
    const auto fx = compute_fixture(1, 2, 0.0, 0.9, 0.1);
    const LatticeGeometry g(1, 2);
    for (std::size_t s = 0; s < g.num_sites(); ++s)
        CHECK(fx.density[s] == doctest::Approx(1.0 - fx.density[g.site_at(-g.x1(s), 0)]).epsilon(1e-13));
}

TEST_CASE("sign of the expected current") {
    const ExclusionModel eq(LatticeGeometry(1, 3), params(0.4, 0.6, 0.6));
    const auto mu_eq = stationary_distribution(build_generator(eq));
    const std::size_t x = eq.geometry().site_at(0, 0);
    const auto W = [&](const ExclusionModel& m) {
        return [&m, x](const Configuration& e) { return m.instantaneous_current(e, x, 0); };
    };
    CHECK(std::abs(exact_expectation(mu_eq, 5, W(eq))) < 1e-14);
    const ExclusionModel driven(LatticeGeometry(1, 3), params(0.4, 0.8, 0.3));
    const auto mu = stationary_distribution(build_generator(driven));
    CHECK(exact_expectation(mu, 5, W(driven)) > 0.01);
    // Uniform law on a driven chain is not balanced.
    const auto gen = build_generator(driven);
    CHECK(check_detailed_balance(gen, std::vector<double>(gen.states, 1.0 / gen.states)) > 1e-3);
}

TEST_CASE("reflection symmetry") {
    for (double a : {-0.3, 0.6}) {
        const auto fx = compute_fixture(2, 2, a, 0.85, 0.25);
        const auto fr = compute_fixture(2, 2, a, 0.25, 0.85);
        const LatticeGeometry g(2, 2);
        for (std::size_t s = 0; s < g.num_sites(); ++s) {
            const std::size_t mirror = g.site_at(-g.x1(s), g.transverse_index(s));
            CHECK(fx.density[s] == doctest::Approx(fr.density[mirror]).epsilon(1e-12));
        }
    }
}

TEST_CASE("fixtures round trip and match recomputation") {
    const auto fx = compute_fixture(1, 3, -0.3, 0.7, 0.1);
    const auto back = fixture_from_json(to_json(fx));
    CHECK(back.density == fx.density);
    CHECK(back.bond_current == fx.bond_current);
    CHECK(back.a == fx.a);
    const auto path = std::filesystem::temp_directory_path() / "bdex_fixture_roundtrip.json";
    write_fixture(path.string(), fx);
    const auto read = read_fixture(path.string());
    CHECK(read.density == fx.density);
    std::filesystem::remove(path);
    for (const char* name : {"d1_N2.json", "d1_N3.json", "d2_N2.json"}) {
        const auto committed = read_fixture(std::string(BDEX_FIXTURE_DIR) + "/" + name);
        const auto fresh = compute_fixture(committed.d, committed.N, committed.a, committed.b_minus, committed.b_plus);
        for (std::size_t i = 0; i < fresh.density.size(); ++i)
            CHECK(std::abs(committed.density[i] - fresh.density[i]) <= 1e-10);
        for (std::size_t i = 0; i < fresh.bond_current.size(); ++i)
            CHECK(std::abs(committed.bond_current[i] - fresh.bond_current[i]) <= 1e-10);
    }
    CHECK_THROWS((void)read_fixture("/nonexistent/fixture.json"));
}
