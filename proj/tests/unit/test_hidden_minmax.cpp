// Copyright 2026 The atmg-lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>

#include "atmg/hidden_minmax.hpp"
#include "atmg/policy.hpp"

using namespace atmg;

TEST_SUITE_BEGIN("hidden_minmax");

namespace {

Eigen::VectorXd scalar(double v) {
  Eigen::VectorXd z(1);
  z(0) = v;
  return z;
}

HiddenConcaveProblem quadratic_problem() {
  return make_hidden_test_problem("quadratic");
}

// x* near a minimizer of sin^2(3x)/2
HiddenConcaveProblem sine_problem(bool with_exact_inner) {
  HiddenConcaveProblem p = make_hidden_test_problem("sine-affine");
  if (with_exact_inner) {
    p.y_star_exact = [](const Eigen::VectorXd& x) {
      // unconstrained argmax u = sin(3x), feasible for |x| <= 1
      Eigen::VectorXd y(1);
      y(0) = std::sin(3.0 * x(0)) - 0.1 * x(0);
      return y;
    };
  }
  return p;
}

}  // namespace

TEST_CASE("box projection and linear maxima") {
  Box box;
  box.lo = Eigen::VectorXd::Constant(2, -1.0);
  box.hi = Eigen::VectorXd::Constant(2, 2.0);
  Eigen::VectorXd z(2);
  z << -3.0, 5.0;
  const Eigen::VectorXd p = box.project(z);
  CHECK(p(0) == -1.0);
  CHECK(p(1) == 2.0);
  Eigen::VectorXd direction(2);
  direction << 1.0, -1.0;
  // (hi_0 - p_0) * 1 + (lo_1 - p_1) * (-1) = 3 + 3
  CHECK(box.linear_max(direction, p) == doctest::Approx(6.0));
  CHECK(box.diameter() == doctest::Approx(std::sqrt(18.0)));
}

TEST_CASE("certificates are exact for closed-form gradients") {
  const HiddenConcaveProblem p = quadratic_problem();
  const SaddleCertificate cert =
      make_certificate(p, scalar(0.0), scalar(0.0));
  CHECK(cert.deviation_x == doctest::Approx(0.0));
  CHECK(cert.deviation_y == doctest::Approx(0.0));
  const SaddleCertificate off = make_certificate(p, scalar(0.5), scalar(0.5));
  CHECK(off.deviation_x == doctest::Approx(1.5));  // -grad_x = -1, best x' = -1
}

TEST_CASE("deterministic inner solve matches closed-form maximizers") {
  HiddenConcaveProblem p = sine_problem(false);
  for (double x : {-0.9, -0.3, 0.2, 0.8}) {
    const Eigen::VectorXd y = solve_inner_max(p, scalar(x), 1e-10);
    const double expected = std::sin(3.0 * x) - 0.1 * x;
    CHECK(y(0) == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("max oracle reaches the requested accuracy") {
  const HiddenConcaveProblem p = sine_problem(false);
  const double zeta = 1e-4;
  for (double x : {-0.7, 0.1, 0.6}) {
    const Eigen::VectorXd y = max_oracle_sga(p, scalar(x), zeta, 3);
    const Eigen::VectorXd y_ref = solve_inner_max(p, scalar(x), 1e-11);
    const double gap = p.f(scalar(x), y_ref) - p.f(scalar(x), y);
    CHECK(gap >= -1e-12);
    CHECK(gap <= zeta);
  }
}

TEST_CASE("max oracle tracks the quadratic's closed-form argmax") {
  HiddenConcaveProblem p = quadratic_problem();
  p.y_star_exact = nullptr;
  for (double x : {-0.8, 0.0, 0.5}) {
    const Eigen::VectorXd y = max_oracle_sga(p, scalar(x), 1e-6, 2);
    // argmax of 2xy - y^2 over [-1,1] is y = x
    const double gap =
        (2.0 * x * x - x * x) - (2.0 * x * y(0) - y(0) * y(0));
    CHECK(gap >= -1e-12);
    CHECK(gap <= 1e-6);
  }
}

TEST_CASE("noisy max oracle meets the gap over seeds") {
  const HiddenConcaveProblem p = sine_problem(false);
  MaxOracleOptions options;
  options.sigma = 0.05;
  options.batch = 4;
  const double zeta = 0.01;
  const Eigen::VectorXd y_ref = solve_inner_max(p, scalar(0.4), 1e-11);
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::VectorXd y = max_oracle_sga(p, scalar(0.4), zeta, seed,
                                             options);
    const double gap = p.f(scalar(0.4), y_ref) - p.f(scalar(0.4), y);
    if (gap <= zeta) ++hits;
  }
  CHECK(hits >= 4);
}

TEST_CASE("sgdmax certifies the quadratic saddle") {
  const HiddenConcaveProblem p = quadratic_problem();
  SgdmaxSchedule schedule = sgdmax_schedule(p, 1e-3, 0.0);
  schedule.start = scalar(0.9);
  const MaxOracleFn oracle = [&p](const Eigen::VectorXd& x, double zeta,
                                  std::uint64_t seed) {
    return max_oracle_sga(p, x, zeta, seed);
  };
  const StochasticGradX gx = [&p](const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y, CounterRng&) {
    return p.grad_x(x, y);
  };
  const SgdmaxResult result = sgdmax(p, schedule, oracle, gx, 7);
  CHECK(std::abs(result.x_star(0)) <= 1e-3);
  CHECK(result.certificate.deviation_x <= 1e-3);
  CHECK(result.certificate.deviation_y <= 1e-3);
}

TEST_CASE("sgdmax with exact pieces reproduces plain gda with argmax") {
  const HiddenConcaveProblem p = quadratic_problem();
  SgdmaxSchedule schedule;
  schedule.eta_x = 0.2;
  schedule.iterations = 25;
  schedule.batch = 1;
  schedule.oracle_accuracy = 1e-9;
  schedule.start = scalar(0.7);
  const MaxOracleFn oracle = [](const Eigen::VectorXd& x, double,
                                std::uint64_t) { return x; };
  const StochasticGradX gx = [&p](const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y, CounterRng&) {
    return p.grad_x(x, y);
  };
  const SgdmaxResult result = sgdmax(p, schedule, oracle, gx, 1);

  // independent plain implementation
  double x = 0.7;
  double best_dev = 1e18, best_x = x;
  for (int t = 0; t < 25; ++t) {
    const double dev = std::max(2.0 * x >= 0 ? 2.0 * x * (x + 1) : 2.0 * x * (x - 1),
                                0.0);
    if (dev < best_dev) {
      best_dev = dev;
      best_x = x;
    }
    x = std::clamp(x - 0.2 * 2.0 * x, -1.0, 1.0);
  }
  const double final_dev = std::max(
      2.0 * x >= 0 ? 2.0 * x * (x + 1) : 2.0 * x * (x - 1), 0.0);
  if (final_dev < best_dev) best_x = x;
  CHECK(result.x_star(0) == doctest::Approx(best_x).epsilon(1e-12));
}

TEST_CASE("sgdmax certifies the hidden sine problem against the grid") {
  const HiddenConcaveProblem p = sine_problem(false);
  SgdmaxSchedule schedule;
  schedule.eta_x = 0.02;
  schedule.iterations = 400;
  schedule.batch = 1;
  schedule.oracle_accuracy = p.nu * 0.05 * 0.05 / (p.ell * p.ell);
  schedule.start = scalar(0.8);
  const MaxOracleFn oracle = [&p](const Eigen::VectorXd& x, double zeta,
                                  std::uint64_t seed) {
    return max_oracle_sga(p, x, zeta, seed);
  };
  const StochasticGradX gx = [&p](const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y, CounterRng&) {
    return p.grad_x(x, y);
  };
  const SgdmaxResult result = sgdmax(p, schedule, oracle, gx, 11);
  CHECK(result.certificate.deviation_x <= 0.05);
  CHECK(result.certificate.deviation_y <= 0.05);

  // 1-D grid check: Phi(x) = max_u H and the returned x is near a minimizer
  double phi_min = 1e18;
  for (int k = -10000; k <= 10000; ++k) {
    const double x = k * 1e-4;
    const double u = std::clamp(std::sin(3.0 * x), -1.0 + 0.1 * x,
                                1.0 + 0.1 * x);
    phi_min = std::min(phi_min,
                       std::sin(3.0 * x) * u - 0.5 * u * u);
  }
  const Eigen::VectorXd y_at =
      solve_inner_max(p, result.x_star, 1e-10);
  CHECK(p.f(result.x_star, y_at) - phi_min <= 0.05);
}

TEST_CASE("certificates are sound under a brute-force direction sweep") {
  const HiddenConcaveProblem p = sine_problem(false);
  const Eigen::VectorXd x = scalar(0.35);
  const Eigen::VectorXd y = solve_inner_max(p, x, 1e-9);
  const SaddleCertificate cert = make_certificate(p, x, y);
  double sweep_x = 0.0, sweep_y = 0.0;
  for (int k = -1000; k <= 1000; ++k) {
    const double cx = k * 1e-3;
    sweep_x = std::max(sweep_x, -p.grad_x(x, y)(0) * (cx - x(0)));
    sweep_y = std::max(sweep_y, p.grad_y(x, y)(0) * (cx - y(0)));
  }
  CHECK(sweep_x <= cert.deviation_x + 1e-6);
  CHECK(sweep_y <= cert.deviation_y + 1e-6);
}

TEST_CASE("worse oracle accuracy degrades the certificate monotonically") {
  const HiddenConcaveProblem p = sine_problem(false);
  const StochasticGradX gx = [&p](const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y, CounterRng& rng) {
    return scalar(p.grad_x(x, y)(0) + 0.05 * rng.next_gaussian());
  };
  std::vector<double> medians;
  for (double zeta : {1e-4, 1e-2, 1.0}) {
    std::vector<double> devs;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      SgdmaxSchedule schedule;
      schedule.eta_x = 0.02;
      schedule.iterations = 100;
      schedule.batch = 4;
      schedule.oracle_accuracy = zeta;
      schedule.start = scalar(0.8);
      MaxOracleOptions noisy;
      noisy.sigma = 0.05;
      noisy.batch = 2;
      const MaxOracleFn oracle = [&p, &noisy](const Eigen::VectorXd& x,
                                              double z, std::uint64_t seed2) {
        return max_oracle_sga(p, x, z, seed2, noisy);
      };
      const SgdmaxResult result = sgdmax(p, schedule, oracle, gx, seed);
      devs.push_back(std::max(result.certificate.deviation_x,
                              result.certificate.deviation_y));
    }
    std::sort(devs.begin(), devs.end());
    medians.push_back(devs[2]);
  }
  CHECK(medians[0] <= medians[1] + 1e-12);
  CHECK(medians[1] <= medians[2] + 1e-12);
}

TEST_CASE("maximizer is Hoelder in x with the closed-form constant") {
  const HiddenConcaveProblem p = sine_problem(false);
  const double l_star = maximizer_holder_constant(p);
  CHECK(l_star > 0.0);
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
  CounterRng rng(5, 0, 0);
  for (int k = 0; k < 200; ++k) {
    pairs.emplace_back(scalar(2.0 * rng.next_double() - 1.0),
                       scalar(2.0 * rng.next_double() - 1.0));
  }
  pairs.emplace_back(scalar(0.25), scalar(0.25));  // degenerate pair, skipped
  const HolderCheckResult result = hidden_holder_check(p, pairs, 1e-9);
  CHECK(result.pairs_used >= 195);
  CHECK(result.max_ratio <= l_star);
}

TEST_CASE("lipschitz inner maximizers bound the ratio on compact pairs") {
  // c independent of x and a smooth interior max: u* is Lipschitz, so the
  // Hoelder-1/2 ratio stays bounded on any pair set with the distance filter
  HiddenConcaveProblem p = quadratic_problem();
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
  CounterRng rng(6, 0, 0);
  for (int k = 0; k < 100; ++k) {
    pairs.emplace_back(scalar(2.0 * rng.next_double() - 1.0),
                       scalar(2.0 * rng.next_double() - 1.0));
  }
  const HolderCheckResult result = hidden_holder_check(p, pairs, 1e-10);
  // |u*(x) - u*(x')| = |x - x'| <= sqrt(2) sqrt(|x - x'|) on [-1, 1]
  CHECK(result.max_ratio <= std::sqrt(2.0) + 1e-9);
  CHECK(result.max_ratio <= maximizer_holder_constant(p));
}

TEST_CASE("gradient of the max function is Hoelder with the stated constant") {
  const HiddenConcaveProblem p = sine_problem(true);
  const double ell_half = phi_holder_constant(p);
  auto grad_phi = [&p](double x) {
    const Eigen::VectorXd y = solve_inner_max(p, scalar(x), 1e-11);
    return p.grad_x(scalar(x), y)(0);
  };
  CounterRng rng(8, 0, 0);
  for (int k = 0; k < 100; ++k) {
    const double x1 = 2.0 * rng.next_double() - 1.0;
    const double x2 = 2.0 * rng.next_double() - 1.0;
    if (std::abs(x1 - x2) < 1e-6) continue;
    const double ratio = std::abs(grad_phi(x1) - grad_phi(x2)) /
                         std::sqrt(std::abs(x1 - x2));
    CHECK(ratio <= ell_half);
  }
}

TEST_CASE("minmax suite certifies both library problems") {
  const auto rows = run_minmax_suite(0.05, 3);
  REQUIRE(rows.size() == 2);
  for (const MinmaxSuiteRow& row : rows) {
    INFO(row.problem, " deviations ", row.deviation_x, " ", row.deviation_y);
    CHECK(row.pass);
  }
  CHECK_THROWS_AS(make_hidden_test_problem("nonexistent"), UsageError);
}

TEST_CASE("the game reformulation satisfies the round-trip identities") {
  const GameSpec spec = generate_random(70, 3, {2, 2}, 3, 0.9, 0.8);
  const double nu = 0.1;
  const AtmgHiddenProblem problem = atmg_as_hidden_problem(spec, nu);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const PolicyProfile profile = random_profile(spec, 200 + seed);
    const Eigen::MatrixXd lambda =
        problem.map_to_measure(profile.team, profile.adversary);
    // c_inv(c(y; x); x) = y wherever the row mass is positive (always, by
    // full support of rho)
    const AgentPolicy recovered = problem.map_to_policy(lambda);
    CHECK((recovered - profile.adversary).cwiseAbs().maxCoeff() <= 1e-9);
    // H(x, c(y; x)) = V_rho^nu(x, y)
    CHECK(std::abs(problem.hidden_objective(profile.team, lambda) -
                   problem.objective(profile.team, profile.adversary)) <=
          1e-9);
  }
}

TEST_CASE("the hidden objective is nu-strongly concave in the measure") {
  const GameSpec spec = generate_random(71, 2, {2}, 2, 0.8, 0.9);
  const double nu = 0.2;
  const AtmgHiddenProblem problem = atmg_as_hidden_problem(spec, nu);
  const auto team = random_profile(spec, 300).team;
  const Eigen::MatrixXd rx = adversary_reward_matrix(spec, team);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd l1 =
        problem.map_to_measure(team, random_profile(spec, 301 + seed).adversary);
    const Eigen::MatrixXd l2 = problem.map_to_measure(
        team, random_profile(spec, 400 + seed).adversary);
    const double h1 = problem.hidden_objective(team, l1);
    const double h2 = problem.hidden_objective(team, l2);
    const Eigen::MatrixXd grad1 = rx - nu * l1;
    const double linearized =
        h1 + (grad1.array() * (l2 - l1).array()).sum() -
        0.5 * nu * (l2 - l1).squaredNorm();
    CHECK(h2 == doctest::Approx(linearized).epsilon(1e-10));
  }
}

TEST_SUITE_END();
