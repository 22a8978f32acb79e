#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oscmarket/errors.hpp"
#include "oscmarket/stationary.hpp"

using namespace oscmarket;

namespace {

// Random strictly decreasing phases with consecutive gaps in (lo, hi).
std::vector<double> random_decreasing(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> gap(lo, hi);
  std::uniform_real_distribution<double> start(-1.0, 1.0);
  std::vector<double> theta(n);
  theta[n - 1] = start(rng);
  for (std::size_t i = n - 1; i-- > 0;) theta[i] = theta[i + 1] + gap(rng);
  return theta;
}

}  // namespace

TEST_CASE("chain_stationary examples") {
  SUBCASE("two equal couplings of 2") {
    const std::vector<double> k{2.0, 2.0};
    const auto prof = chain_stationary(1.0, k, 3);
    CHECK(prof.anchor == 2);
    CHECK(prof.theta_star[0] == doctest::Approx(kPi / 3).epsilon(1e-15));
    CHECK(prof.theta_star[1] == doctest::Approx(kPi / 6).epsilon(1e-15));
    CHECK(prof.theta_star[2] == 0.0);
  }
  SUBCASE("zero net input gives equal phases") {
    const std::vector<double> k{0.5, 3.0, 1.0};
    const auto prof = chain_stationary(0.0, k, 4);
    for (double th : prof.theta_star) CHECK(th == 0.0);
  }
  SUBCASE("mixed couplings satisfy the fixed-point equations") {
    const std::vector<double> k{1.1, 5.0, 1.1};
    const auto prof = chain_stationary(1.0, k, 4);
    SystemParams params(endpoint_net_input(4, 1.0), 1.0, 60.0);
    CHECK(stationarity_residual(prof, params, Topology::chain(k)) < 1e-10);
  }
  SUBCASE("coupling below the net input has no solution") {
    const std::vector<double> k{0.9, 2.0};
    CHECK_THROWS_AS(chain_stationary(1.0, k, 3), NoStationarySolution);
    try {
      chain_stationary(1.0, k, 3);
    } catch (const NoStationarySolution& e) {
      CHECK(e.edge() == 0);
    }
  }
  SUBCASE("coupling equal to the net input is rejected") {
    const std::vector<double> k{2.0, 1.0};
    try {
      chain_stationary(1.0, k, 3);
      FAIL("expected NoStationarySolution");
    } catch (const NoStationarySolution& e) {
      CHECK(e.edge() == 1);
    }
  }
  SUBCASE("contract violations") {
    const std::vector<double> one{2.0};
    CHECK_THROWS_AS(chain_stationary(1.0, {}, 1), ContractViolation);
    CHECK_THROWS_AS(chain_stationary(1.0, one, 3), ContractViolation);
    const std::vector<double> negative{2.0, -1.0};
    CHECK_THROWS_AS(chain_stationary(1.0, negative, 3), ContractViolation);
  }
  SUBCASE("negative net input mirrors the profile") {
    const std::vector<double> k{2.0, 2.0};
    const auto prof = chain_stationary(-1.0, k, 3);
    CHECK(prof.theta_star[0] == doctest::Approx(-kPi / 3).epsilon(1e-15));
  }
}

TEST_CASE("reanchoring keeps differences") {
  const std::vector<double> k{2.0, 2.0};
  const auto prof = chain_stationary(1.0, k, 3).reanchored(1);
  CHECK(prof.anchor == 1);
  CHECK(prof.theta_star[1] == 0.0);
  CHECK(prof.theta_star[0] == doctest::Approx(kPi / 6).epsilon(1e-15));
  CHECK(prof.theta_star[2] == doctest::Approx(-kPi / 6).epsilon(1e-15));
  CHECK_THROWS_AS(prof.reanchored(3), ContractViolation);
}

TEST_CASE("calibrate_couplings examples") {
  SUBCASE("sixth of a turn") {
    const std::vector<double> th{kPi / 6, 0.0};
    const auto k = calibrate_couplings(th, 1.0);
    REQUIRE(k.size() == 1);
    CHECK(k[0] == doctest::Approx(2.0).epsilon(1e-15));
  }
  SUBCASE("quarter turn") {
    const std::vector<double> th{kPi / 2, 0.0};
    CHECK(calibrate_couplings(th, 1.0)[0] == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("non-monotone phases are infeasible at the offending pair") {
    const std::vector<double> th{0.5, 0.3, 0.4, 0.0};
    try {
      calibrate_couplings(th, 1.0);
      FAIL("expected CalibrationInfeasible");
    } catch (const CalibrationInfeasible& e) {
      CHECK(e.pair() == 1);
    }
  }
  SUBCASE("zero difference is infeasible") {
    const std::vector<double> th{0.2, 0.2};
    CHECK_THROWS_AS(calibrate_couplings(th, 1.0), CalibrationInfeasible);
  }
  SUBCASE("zero net input is infeasible") {
    const std::vector<double> th{0.2, 0.1};
    CHECK_THROWS_AS(calibrate_couplings(th, 0.0), CalibrationInfeasible);
  }
  SUBCASE("negative net input wants increasing phases") {
    const std::vector<double> th{0.0, kPi / 6};
    CHECK(calibrate_couplings(th, -1.0)[0] == doctest::Approx(2.0).epsilon(1e-15));
    const std::vector<double> dec{kPi / 6, 0.0};
    CHECK_THROWS_AS(calibrate_couplings(dec, -1.0), CalibrationInfeasible);
  }
}

TEST_CASE("calibration round trip on 21 sorted phases") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    auto theta = random_decreasing(rng, 21, 1e-3, 1.5);
    REQUIRE(std::is_sorted(theta.rbegin(), theta.rend()));
    const auto k = calibrate_couplings(theta, 1.0);
    const auto prof = chain_stationary(1.0, k, 21);
    for (std::size_t i = 0; i < 21; ++i) {
      CHECK(std::abs(prof.theta_star[i] - (theta[i] - theta[20])) < 1e-12);
    }
  }
}

TEST_CASE("stationarity residual") {
  SUBCASE("zero for the analytic profile") {
    const std::vector<double> k{2.0, 3.0, 2.5};
    const auto prof = chain_stationary(1.0, k, 4);
    SystemParams params(endpoint_net_input(4, 1.0), 1.0, 60.0);
    CHECK(stationarity_residual(prof, params, Topology::chain(k)) < 1e-10);
  }
  SUBCASE("unit at equal phases with opposite inputs") {
    SystemParams params({1.0, -1.0}, 1.0, 60.0);
    StationaryProfile zero{{0.0, 0.0}, 1};
    CHECK(stationarity_residual(zero, params, Topology::chain_uniform(2, 7.0)) == 1.0);
  }
  SUBCASE("perturbing an interior sector") {
    const std::vector<double> k{2.0, 2.0};
    auto prof = chain_stationary(1.0, k, 3);
    prof.theta_star[1] += 0.01;
    SystemParams params(endpoint_net_input(3, 1.0), 1.0, 60.0);
    // Worst balance is at the perturbed sector: 2 sin(pi/6 - 0.01) - 2 sin(pi/6 + 0.01).
    CHECK(stationarity_residual(prof, params, Topology::chain(k)) ==
          doctest::Approx(0.034640438803995100).epsilon(1e-12));
  }
  SUBCASE("invariant under a global shift") {
    const std::vector<double> k{2.0, 3.0};
    auto prof = chain_stationary(1.0, k, 3);
    prof.theta_star[0] += 0.05;
    SystemParams params(endpoint_net_input(3, 1.0), 1.0, 60.0);
    const double base = stationarity_residual(prof, params, Topology::chain(k));
    for (auto& th : prof.theta_star) th += 2.75;
    CHECK(stationarity_residual(prof, params, Topology::chain(k)) ==
          doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("stronger coupling gives a smaller phase difference") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coupling(1.01, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> k{coupling(rng), coupling(rng)};
    const auto before = chain_stationary(1.0, k, 3);
    k[0] *= 1.5;
    const auto after = chain_stationary(1.0, k, 3);
    CHECK(after.theta_star[0] - after.theta_star[1] < before.theta_star[0] - before.theta_star[1]);
  }
}
