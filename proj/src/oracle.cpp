#include "bdex/oracle.hpp"

#include "bdex/pde.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace bdex {

GeneratorMatrix build_generator(const ExclusionModel& model) {
    const std::size_t sites = model.geometry().num_sites();
    if (sites > kMaxOracleSites) throw std::invalid_argument("build_generator: state space too large");
    GeneratorMatrix gen;
    gen.sites = sites;
    gen.states = std::size_t{1} << sites;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(gen.states * (model.transition_count() + 1));
    for (std::size_t s = 0; s < gen.states; ++s) {
        const auto eta = Configuration::from_bits(s, sites);
        double out = 0.0;
        for (const auto& tr : model.enumerate_transitions(eta)) {
            const auto target = tr.target.to_bits();
            if (target == s || tr.rate == 0.0) continue;
            trip.emplace_back(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(target), tr.rate);
            out += tr.rate;
        }
        trip.emplace_back(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s), -out);
    }
    gen.Q.resize(static_cast<Eigen::Index>(gen.states), static_cast<Eigen::Index>(gen.states));
    gen.Q.setFromTriplets(trip.begin(), trip.end());
    return gen;
}

std::vector<double> stationary_distribution(const GeneratorMatrix& gen) {
    const auto n = static_cast<Eigen::Index>(gen.states);
    if (n == 1) return {1.0};
    // Pin mu(last) = 1 and solve the remaining rows of mu Q = 0; a dense
    // normalisation row would wreck the sparsity of the factorisation.
    const Eigen::SparseMatrix<double> At = Eigen::SparseMatrix<double>(gen.Q.transpose());
    const Eigen::Index m = n - 1;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(At.nonZeros()));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (Eigen::Index k = 0; k < At.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(At, k); it; ++it) {
            if (it.row() == m) continue;
            if (it.col() == m) rhs[it.row()] -= it.value();
            else trip.emplace_back(it.row(), it.col(), it.value());
        }
    }
    Eigen::SparseMatrix<double> M(m, m);
    M.setFromTriplets(trip.begin(), trip.end());
    M.makeCompressed();

    Eigen::VectorXd x;
    if (n <= 4096) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(M);
        if (lu.info() != Eigen::Success)
            throw NumericalError("stationary_distribution: singular system (generator not irreducible)");
        x = lu.solve(rhs);
        if (lu.info() != Eigen::Success)
            throw NumericalError("stationary_distribution: solve failed (generator not irreducible)");
    } else {
        // Direct factorisation fills in badly on hypercube-like state graphs.
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> solver;
        solver.setTolerance(1e-15);
        solver.setMaxIterations(100000);
        solver.compute(M);
        x = solver.solve(rhs);
        if (solver.info() != Eigen::Success && solver.error() > 1e-12)
            throw NumericalError("stationary_distribution: iterative solve did not converge");
    }
    if (!x.allFinite()) throw NumericalError("stationary_distribution: non-finite solution");
    std::vector<double> mu(static_cast<std::size_t>(n));
    double total = 1.0;
    mu.back() = 1.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        mu[static_cast<std::size_t>(i)] = std::max(x[i], 0.0);
        total += mu[static_cast<std::size_t>(i)];
    }
    for (double& v : mu) v /= total;
    return mu;
}

double stationarity_residual(const GeneratorMatrix& gen, const std::vector<double>& mu) {
    const Eigen::Map<const Eigen::VectorXd> m(mu.data(), static_cast<Eigen::Index>(mu.size()));
    const Eigen::VectorXd r = gen.Q.transpose() * m;
    return r.cwiseAbs().maxCoeff();
}

double check_detailed_balance(const GeneratorMatrix& gen, const std::vector<double>& mu) {
    if (mu.size() != gen.states) throw std::invalid_argument("check_detailed_balance: size mismatch");
    const Eigen::SparseMatrix<double, Eigen::RowMajor>& Q = gen.Q;
    double worst = 0.0;
    for (Eigen::Index r = 0; r < Q.outerSize(); ++r) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Q, r); it; ++it) {
            if (it.col() == r) continue;
            const double back = Q.coeff(it.col(), r);
            const double v = std::abs(mu[static_cast<std::size_t>(r)] * it.value() -
                                      mu[static_cast<std::size_t>(it.col())] * back);
            worst = std::max(worst, v);
        }
    }
    return worst;
}

double exact_expectation(const std::vector<double>& mu, std::size_t sites,
                         const std::function<double(const Configuration&)>& obs) {
    if (mu.size() != (std::size_t{1} << sites)) throw std::invalid_argument("exact_expectation: size mismatch");
    double total = 0.0;
    for (std::size_t s = 0; s < mu.size(); ++s) {
        if (mu[s] == 0.0) continue;
        total += mu[s] * obs(Configuration::from_bits(s, sites));
    }
    return total;
}

std::vector<double> product_bernoulli(std::size_t sites, double c) {
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("product_bernoulli: c outside [0,1]");
    std::vector<double> mu(std::size_t{1} << sites);
    for (std::size_t s = 0; s < mu.size(); ++s) {
        const int k = std::popcount(s);
        mu[s] = std::pow(c, k) * std::pow(1.0 - c, static_cast<double>(sites) - k);
    }
    return mu;
}

// ---------------------------------------------------------------------------

ExclusionModel OracleFixture::model() const {
    ModelParams p;
    p.a = a;
    p.b_minus = BoundaryProfile(b_minus);
    p.b_plus = BoundaryProfile(b_plus);
    return ExclusionModel(LatticeGeometry(d, N), p);
}

OracleFixture compute_fixture(int d, int N, double a, double b_minus, double b_plus) {
    OracleFixture f;
    f.d = d;
    f.N = N;
    f.a = a;
    f.b_minus = b_minus;
    f.b_plus = b_plus;
    const ExclusionModel model = f.model();
    const auto& geo = model.geometry();
    const auto gen = build_generator(model);
    const auto mu = stationary_distribution(gen);
    for (std::size_t s = 0; s < geo.num_sites(); ++s)
        f.density.push_back(exact_expectation(mu, gen.sites, [&](const Configuration& eta) { return eta[s]; }));
    for (const auto& b : geo.bonds()) {
        f.bond_current.push_back(exact_expectation(mu, gen.sites, [&](const Configuration& eta) {
            return model.rate_difference_current(eta, b.x, b.dir);
        }));
    }
    return f;
}

nlohmann::json to_json(const OracleFixture& f) {
    return nlohmann::json{{"d", f.d},
                          {"N", f.N},
                          {"a", f.a},
                          {"b_minus", f.b_minus},
                          {"b_plus", f.b_plus},
                          {"density", f.density},
                          {"bond_current", f.bond_current}};
}

OracleFixture fixture_from_json(const nlohmann::json& j) {
    OracleFixture f;
    f.d = j.at("d").get<int>();
    f.N = j.at("N").get<int>();
    f.a = j.at("a").get<double>();
    f.b_minus = j.at("b_minus").get<double>();
    f.b_plus = j.at("b_plus").get<double>();
    f.density = j.at("density").get<std::vector<double>>();
    f.bond_current = j.at("bond_current").get<std::vector<double>>();
    const LatticeGeometry geo(f.d, f.N);
    if (f.density.size() != geo.num_sites() || f.bond_current.size() != geo.bonds().size())
        throw std::invalid_argument("fixture: array sizes do not match the geometry");
    return f;
}

void write_fixture(const std::string& path, const OracleFixture& f) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_fixture: cannot open " + path);
    os << to_json(f).dump(2) << '\n';
}

OracleFixture read_fixture(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("read_fixture: cannot open " + path);
    return fixture_from_json(nlohmann::json::parse(is));
}

}  // namespace bdex
