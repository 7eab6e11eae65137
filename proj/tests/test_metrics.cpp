#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "steer/metrics.hpp"

using namespace steer;

namespace {

ReducedSystem wrap(const oracle::TinySystem& tiny) {
  ReducedSystem system;
  system.target_rows = tiny.target_rows;
  system.nuisance_rows = tiny.nuisance_rows;
  system.target_values = tiny.x1;
  return system;
}

CurrentPattern bipolar(double amplitude, int contacts = 2) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(contacts);
  y[0] = amplitude;
  y[1] = -amplitude;
  return CurrentPattern(y, Bounds{});
}

}  // namespace

TEST_CASE("two contact example reproduces the metrics by hand") {
  // target row [1, -1], wanted density 2: the pattern (1, -1) mA delivers
  // L1 y = 2, gamma = 2 * 2 / 2 = 2. Nuisance rows are the identity, so
  // L2 y = (1, -1) and xi = sqrt(2 / 2) = 1, giving theta = 2.
  ReducedSystem system;
  system.target_rows.resize(1, 2);
  system.target_rows << 1.0, -1.0;
  system.nuisance_rows = Eigen::MatrixXd::Identity(2, 2);
  system.target_values.resize(1);
  system.target_values << 2.0;

  const CurrentPattern pattern = bipolar(1.0);
  CHECK(focused_density(system, pattern) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(nuisance_density(system, pattern) == doctest::Approx(1.0).epsilon(1e-15));
  const DecisionVariables dv = decision_variables(system, pattern);
  CHECK(dv.theta == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("metrics agree with the direct formulas on random systems") {
  std::mt19937 engine(99);
  std::uniform_real_distribution<double> uniform(-0.4, 0.4);
  for (unsigned seed : {1u, 2u, 3u, 4u}) {
    const oracle::TinySystem tiny = oracle::random_system(6, 11, seed, 1.5);
    const ReducedSystem system = wrap(tiny);
    Eigen::VectorXd y(6);
    for (int j = 0; j < 5; ++j) y[j] = uniform(engine);
    y[5] = -y.head(5).sum();
    const CurrentPattern pattern(y, Bounds{});
    CHECK(focused_density(system, pattern) ==
          doctest::Approx(oracle::gamma_direct(tiny.target_rows, tiny.x1, y)).epsilon(1e-13));
    CHECK(nuisance_density(system, pattern) ==
          doctest::Approx(oracle::xi_direct(tiny.nuisance_rows, y)).epsilon(1e-13));
  }
}

TEST_CASE("gamma and xi are homogeneous in the pattern, theta is invariant") {
  const oracle::TinySystem tiny = oracle::random_system(8, 20, 7);
  const ReducedSystem system = wrap(tiny);
  Eigen::VectorXd y(8);
  y << 0.2, -0.1, 0.05, -0.15, 0.1, -0.05, -0.02, -0.03;
  const CurrentPattern base(y, Bounds{});
  const DecisionVariables one = decision_variables(system, base);
  for (double c : {0.5, 2.0, 3.5}) {
    const CurrentPattern scaled(c * y, Bounds{});
    const DecisionVariables dv = decision_variables(system, scaled);
    CHECK(dv.gamma == doctest::Approx(c * one.gamma).epsilon(1e-10));
    CHECK(dv.xi == doctest::Approx(c * one.xi).epsilon(1e-10));
    CHECK(dv.theta == doctest::Approx(one.theta).epsilon(1e-10));
  }
}

TEST_CASE("field ratio conventions at xi == 0") {
  CHECK(field_ratio(1.5, 0.0) == std::numeric_limits<double>::infinity());
  CHECK(field_ratio(-0.3, 0.0) == -std::numeric_limits<double>::infinity());
  CHECK(field_ratio(0.0, 0.0) == 0.0);
  CHECK(field_ratio(3.0, 2.0) == doctest::Approx(1.5));
  CHECK_THROWS_AS((void)field_ratio(1.0, -1.0), SolveError);
  CHECK_THROWS_AS((void)field_ratio(1.0, std::numeric_limits<double>::quiet_NaN()), SolveError);
}

TEST_CASE("metric calls reject mismatched shapes and empty blocks") {
  const oracle::TinySystem tiny = oracle::random_system(4, 5, 3);
  const ReducedSystem system = wrap(tiny);
  const CurrentPattern wrong = bipolar(1.0, 6);
  CHECK_THROWS_AS((void)focused_density(system, wrong), DimensionError);
  CHECK_THROWS_AS((void)nuisance_density(system, wrong), DimensionError);

  ReducedSystem no_nuisance = system;
  no_nuisance.nuisance_rows.resize(0, 4);
  CHECK_THROWS_AS((void)nuisance_density(no_nuisance, bipolar(1.0, 4)), ConfigError);

  ReducedSystem zero_target = system;
  zero_target.target_values.setZero();
  CHECK_THROWS_AS((void)focused_density(zero_target, bipolar(1.0, 4)), InvalidTargetError);
}

TEST_CASE("current pattern construction enforces the constraint set") {
  Eigen::VectorXd ok(4);
  ok << 1.0, -1.0, 0.5, -0.5;
  CHECK_NOTHROW(CurrentPattern(ok, Bounds{}));

  Eigen::VectorXd over_box(2);
  over_box << 2.5, -2.5;
  CHECK_THROWS_AS(CurrentPattern(over_box, Bounds{}), SolveError);

  Eigen::VectorXd over_budget(4);
  over_budget << 1.5, -1.5, 1.5, -1.5;
  CHECK_THROWS_AS(CurrentPattern(over_budget, Bounds{}), SolveError);

  Eigen::VectorXd unbalanced(2);
  unbalanced << 1.0, -0.5;
  CHECK_THROWS_AS(CurrentPattern(unbalanced, Bounds{}), SolveError);
}
