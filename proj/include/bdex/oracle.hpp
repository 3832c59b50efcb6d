#pragma once

/**
 * @file oracle.hpp
 * @brief Exact generator, stationary law and expectations on tiny cylinders.
 *
 * State index = occupancy bits in site order (bit s is eta(s)).
 */

#include "bdex/lattice.hpp"

#include <Eigen/Sparse>

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace bdex {

inline constexpr std::size_t kMaxOracleSites = 20;

struct GeneratorMatrix {
    std::size_t sites = 0;
    std::size_t states = 0;
    /// Unspeeded generator; diagonal = -(row sum of off-diagonals).
    Eigen::SparseMatrix<double, Eigen::RowMajor> Q;
};

/// Throws std::invalid_argument above kMaxOracleSites sites.
[[nodiscard]] GeneratorMatrix build_generator(const ExclusionModel& model);

/// Null vector of Q^T normalised to a probability vector.
[[nodiscard]] std::vector<double> stationary_distribution(const GeneratorMatrix& gen);

/// max_eta |(mu Q)(eta)|.
[[nodiscard]] double stationarity_residual(const GeneratorMatrix& gen, const std::vector<double>& mu);

/// max over pairs |mu(eta) q(eta, eta') - mu(eta') q(eta', eta)|.
[[nodiscard]] double check_detailed_balance(const GeneratorMatrix& gen, const std::vector<double>& mu);

/// sum_eta mu(eta) obs(eta).
[[nodiscard]] double exact_expectation(const std::vector<double>& mu, std::size_t sites,
                                       const std::function<double(const Configuration&)>& obs);

/// Product Bernoulli(c) law on the state space.
[[nodiscard]] std::vector<double> product_bernoulli(std::size_t sites, double c);

struct OracleFixture {
    int d = 1;
    int N = 2;
    double a = 0.0;
    double b_minus = 0.5;
    double b_plus = 0.5;
    std::vector<double> density;       // per site
    std::vector<double> bond_current;  // per bond, E[r (eta_x(1-eta_y) - eta_y(1-eta_x))]

    [[nodiscard]] ExclusionModel model() const;
};

/// Exact stationary densities and bond currents; constant reservoir densities only.
[[nodiscard]] OracleFixture compute_fixture(int d, int N, double a, double b_minus, double b_plus);

[[nodiscard]] nlohmann::json to_json(const OracleFixture& f);
[[nodiscard]] OracleFixture fixture_from_json(const nlohmann::json& j);
void write_fixture(const std::string& path, const OracleFixture& f);
[[nodiscard]] OracleFixture read_fixture(const std::string& path);

}  // namespace bdex
