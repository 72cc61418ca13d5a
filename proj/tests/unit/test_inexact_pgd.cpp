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
#include <cstdio>
#include <fstream>

#include "atmg/inexact_pgd.hpp"

using namespace atmg;

TEST_SUITE_BEGIN("inexact_pgd");

namespace {

// the 1-D weakly smooth family: phi(z) = (2/3)|z|^(3/2),
// phi'(z) = sign(z) sqrt(|z|), which is (sqrt(2), 1/2)-Hoelder
double phi_weak(double z) { return (2.0 / 3.0) * std::pow(std::abs(z), 1.5); }
double dphi_weak(double z) {
  return (z >= 0 ? 1.0 : -1.0) * std::sqrt(std::abs(z));
}

Projector box(double lo, double hi) {
  return [lo, hi](const Eigen::VectorXd& z) {
    return z.cwiseMax(lo).cwiseMin(hi);
  };
}

Eigen::VectorXd scalar(double v) {
  Eigen::VectorXd z(1);
  z(0) = v;
  return z;
}

}  // namespace

TEST_CASE("zero gradient leaves an interior point fixed") {
  const Eigen::VectorXd z = scalar(0.3);
  CHECK(pgd_step(z, scalar(0.0), 0.25, box(-1, 1))(0) == 0.3);
}

TEST_CASE("outward gradients at the boundary are absorbed") {
  const Eigen::VectorXd z = scalar(1.0);
  // descent step moves along -g = +1, projection clips back
  CHECK(pgd_step(z, scalar(-1.0), 0.5, box(-1, 1))(0) == 1.0);
}

TEST_CASE("quadratic iterates contract geometrically") {
  Eigen::VectorXd z = scalar(0.8);
  const double eta = 0.25;
  for (int t = 1; t <= 12; ++t) {
    z = pgd_step(z, 2.0 * z, eta, box(-1, 1));
    CHECK(z(0) == doctest::Approx(0.8 * std::pow(1.0 - 2.0 * eta, t)));
  }
}

TEST_CASE("schedule recovers the classic smooth stepsize at p = 1") {
  const PgdSchedule s = paper_schedule(1.0, 3.0, 0.1, 0.0, 0.0, 1.0);
  CHECK(s.eta == doctest::Approx(1.0 / 6.0));
  CHECK(s.batch == 1);
}

TEST_CASE("schedule evaluates the p = 1/2 stepsize display") {
  const PgdSchedule s = paper_schedule(0.5, 1.0, 0.5, 0.0, 0.0, 1.0);
  CHECK(s.eta == doctest::Approx(1.0 / 32.0));
}

TEST_CASE("certificate translation is zero at zero and monotone") {
  CHECK(certificate_translate(0.0, 0.5, 1.0, 1.0, 0.0) == 0.0);
  const double base = certificate_translate(0.1, 0.5, 1.0, 1.0, 0.0);
  CHECK(certificate_translate(0.2, 0.5, 1.0, 1.0, 0.0) > base);
  CHECK(certificate_translate(0.1, 0.6, 1.0, 1.0, 0.0) > base);
  CHECK(certificate_translate(0.1, 0.5, 2.0, 1.0, 0.0) > base);
  CHECK(certificate_translate(0.1, 0.5, 1.0, 1.0, 0.3) > base);
}

TEST_CASE("weak smoothness surrogate holds on a grid") {
  // |phi(z') - phi(z) - phi'(z)(z'-z)| <= (l_p/(1+p)) |z'-z|^(1+p)
  const double lp = std::sqrt(2.0);
  for (int i = -20; i <= 20; ++i) {
    for (int j = -20; j <= 20; ++j) {
      const double z = i * 0.05, z2 = j * 0.05;
      const double lhs =
          std::abs(phi_weak(z2) - phi_weak(z) - dphi_weak(z) * (z2 - z));
      const double rhs = lp / 1.5 * std::pow(std::abs(z2 - z), 1.5);
      CHECK(lhs <= rhs + 1e-12);
    }
  }
}

TEST_CASE("surrogate quadratic majorizes the Hoelder remainder") {
  SmoothnessSpec smoothness{0.5, std::sqrt(2.0), 1e-3};
  const double ell_prime = smoothness.ell_prime();
  CHECK(ell_prime ==
        doctest::Approx(std::pow(std::sqrt(2.0), 4.0 / 3.0) /
                        std::pow(1e-3, 1.0 / 3.0)));
  for (int k = 0; k <= 200; ++k) {
    const double d = k * 0.01;
    CHECK(smoothness.ell_p / 1.5 * std::pow(d, 1.5) <=
          0.5 * ell_prime * d * d + smoothness.delta + 1e-12);
  }
  // p = 1 keeps the smoothness constant
  CHECK(SmoothnessSpec{1.0, 4.0, 0.0}.ell_prime() == 4.0);
}

TEST_CASE("exact-oracle run certifies the target accuracy") {
  const double eps = 0.1;
  const SmoothnessSpec smoothness{0.5, 1.0,
                                  std::pow(eps / 64.0, 3.0)};
  PgdSchedule schedule = paper_schedule(0.5, 1.0, eps, 0.0, 0.0, 2.0 / 3.0);
  PgdOracle oracle;
  oracle.sample = [](const Eigen::VectorXd& z, CounterRng&) {
    return scalar(dphi_weak(z(0)));
  };
  PgdOptions options;
  options.record_trace = true;
  options.trace_stride = 1;
  const PgdResult result = run_inexact_pgd(oracle, box(-1, 1), scalar(0.9),
                                           schedule, smoothness, 5, options);
  double best = 1e9;
  for (const Eigen::VectorXd& z : result.trace.iterates) {
    best = std::min(best, gradient_mapping(z, scalar(dphi_weak(z(0))),
                                           schedule.eta, box(-1, 1))
                              .norm());
  }
  CHECK(best <= eps);
  CHECK(result.certificate.grad_map_norm <= eps);
  CHECK(result.certificate.deviation_bound ==
        doctest::Approx(certificate_translate(result.certificate.grad_map_norm,
                                              schedule.eta, 1.0, 0.5, 0.0)));
}

TEST_CASE("noisy biased run still certifies in most seeds") {
  const double eps = 0.1;
  const double sigma = 0.1;
  const double theta = eps / 8.0;
  PgdSchedule schedule =
      paper_schedule(0.5, 1.0, eps, sigma * sigma, theta, 2.0 / 3.0);
  const SmoothnessSpec smoothness{0.5, 1.0, schedule.delta};
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    PgdOracle oracle;
    oracle.inexactness = theta;
    oracle.variance = sigma * sigma;
    oracle.sample = [sigma, theta](const Eigen::VectorXd& z, CounterRng& rng) {
      return scalar(dphi_weak(z(0)) + theta + sigma * rng.next_gaussian());
    };
    PgdOptions options;
    options.record_trace = true;
    const PgdResult result = run_inexact_pgd(
        oracle, box(-1, 1), scalar(0.9), schedule, smoothness, seed, options);
    double best = 1e9;
    for (const Eigen::VectorXd& z : result.trace.iterates) {
      best = std::min(best,
                      gradient_mapping(z, scalar(dphi_weak(z(0)) + theta),
                                       schedule.eta, box(-1, 1))
                          .norm());
    }
    if (best <= eps) ++hits;
  }
  CHECK(hits >= 5);
}

TEST_CASE("averaged gradient-mapping bound holds empirically") {
  const double eps = 0.2;
  const double sigma = 0.1;
  PgdSchedule schedule =
      paper_schedule(0.5, std::sqrt(2.0), eps, sigma * sigma, 0.0, 2.0 / 3.0);
  const SmoothnessSpec smoothness{0.5, std::sqrt(2.0), schedule.delta};
  double mean_sq = 0.0;
  long count = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PgdOracle oracle;
    oracle.variance = sigma * sigma;
    oracle.sample = [sigma](const Eigen::VectorXd& z, CounterRng& rng) {
      return scalar(dphi_weak(z(0)) + sigma * rng.next_gaussian());
    };
    PgdOptions options;
    options.record_trace = true;
    const PgdResult result = run_inexact_pgd(
        oracle, box(-1, 1), scalar(0.9), schedule, smoothness, 100 + seed,
        options);
    for (double r : result.trace.grad_map_estimates) {
      mean_sq += r * r;
      ++count;
    }
  }
  mean_sq /= double(count);
  const double bound = averaged_gradient_mapping_bound(
      smoothness, 2.0 / 3.0, schedule.iterations, sigma * sigma,
      schedule.batch, 0.0);
  CHECK(mean_sq <= bound * 1.1);
}

TEST_CASE("p = 1 exact run reduces to plain projected gradient descent") {
  // phi(z) = ||z||^2 over the box; independent textbook implementation
  const double eta = 0.2;
  PgdSchedule schedule{eta, 60, 0.0, 1};
  const SmoothnessSpec smoothness{1.0, 2.0, 0.0};
  PgdOracle oracle;
  oracle.sample = [](const Eigen::VectorXd& z, CounterRng&) {
    return Eigen::VectorXd(2.0 * z);
  };
  Eigen::VectorXd z0(2);
  z0 << 0.9, -0.7;
  PgdOptions options;
  options.record_trace = true;
  const PgdResult result = run_inexact_pgd(oracle, box(-1, 1), z0, schedule,
                                           smoothness, 3, options);

  Eigen::VectorXd z = z0;
  for (long t = 0; t < schedule.iterations; ++t) {
    CHECK((result.trace.iterates[t] - z).norm() == 0.0);
    z = (z - eta * 2.0 * z).cwiseMax(-1.0).cwiseMin(1.0);
  }
}

TEST_CASE("certified deviation bounds the true linearized deviation") {
  // 1-D quadratic with known stationary structure; exhaustive direction
  // check at the post-step point
  const double eta = 0.1;
  PgdSchedule schedule{eta, 200, 0.0, 1};
  const SmoothnessSpec smoothness{1.0, 2.0, 0.0};
  PgdOracle oracle;
  oracle.sample = [](const Eigen::VectorXd& z, CounterRng&) {
    return scalar(2.0 * (z(0) - 0.4));
  };
  const PgdResult result = run_inexact_pgd(oracle, box(-1, 1), scalar(-0.9),
                                           schedule, smoothness, 4);
  const Eigen::VectorXd z_star = result.z_star;
  const Eigen::VectorXd z_plus =
      box(-1, 1)(z_star - eta * scalar(2.0 * (z_star(0) - 0.4)));
  double true_dev = 0.0;
  for (double direction : {-1.0, 1.0}) {
    // feasible points within unit distance of z+
    const double candidate =
        std::max(-1.0, std::min(1.0, z_plus(0) + direction));
    true_dev = std::max(true_dev, -2.0 * (z_plus(0) - 0.4) *
                                      (candidate - z_plus(0)));
  }
  CHECK(true_dev <= result.certificate.deviation_bound + 1e-9);
}

TEST_CASE("uniform-random selection is reproducible and certified") {
  PgdSchedule schedule{0.1, 50, 0.0, 2};
  const SmoothnessSpec smoothness{1.0, 2.0, 0.0};
  PgdOracle oracle;
  oracle.variance = 0.01;
  oracle.sample = [](const Eigen::VectorXd& z, CounterRng& rng) {
    return scalar(2.0 * z(0) + 0.1 * rng.next_gaussian());
  };
  PgdOptions options;
  options.best_iterate = BestIterateMode::kUniformRandom;
  const PgdResult a = run_inexact_pgd(oracle, box(-1, 1), scalar(0.5),
                                      schedule, smoothness, 9, options);
  const PgdResult b = run_inexact_pgd(oracle, box(-1, 1), scalar(0.5),
                                      schedule, smoothness, 9, options);
  CHECK(a.certificate.iterate_index == b.certificate.iterate_index);
  CHECK((a.z_star - b.z_star).norm() == 0.0);
}

TEST_CASE("oracle noise model is unbiased with the stated variance") {
  const double sigma = 0.2;
  PgdOracle oracle;
  oracle.variance = sigma * sigma;
  oracle.sample = [sigma](const Eigen::VectorXd& z, CounterRng& rng) {
    return Eigen::VectorXd(2.0 * z +
                           sigma * Eigen::VectorXd::Constant(
                                       1, rng.next_gaussian()));
  };
  const Eigen::VectorXd z = scalar(0.3);
  const int N = 200000;
  double mean = 0.0, mean_sq = 0.0;
  for (int j = 0; j < N; ++j) {
    CounterRng rng(6, 0, std::uint64_t(j));
    const double g = oracle.sample(z, rng)(0);
    mean += g;
    mean_sq += (g - 0.6) * (g - 0.6);
  }
  mean /= N;
  mean_sq /= N;
  CHECK(std::abs(mean - 0.6) <= 3.0 * sigma / std::sqrt(double(N)));
  CHECK(mean_sq <= sigma * sigma * 1.02);
}

TEST_CASE("schedule deviation radius evaluates the stated form") {
  CHECK(schedule_deviation_radius(0.1, 1.0, 1.0) ==
        doctest::Approx((1.0 + 9.0) * 0.1));
  CHECK(schedule_deviation_radius(0.1, 1.0, 0.5) ==
        doctest::Approx((std::pow(std::sqrt(8.0), 4.0) + 9.0) * 0.1));
}

TEST_CASE("trace csv carries the documented columns") {
  PgdSchedule schedule{0.25, 5, 0.0, 1};
  const SmoothnessSpec smoothness{1.0, 2.0, 0.0};
  PgdOracle oracle;
  oracle.sample = [](const Eigen::VectorXd& z, CounterRng&) {
    return Eigen::VectorXd(2.0 * z);
  };
  PgdOptions options;
  options.record_trace = true;
  options.objective = [](const Eigen::VectorXd& z) { return z.squaredNorm(); };
  const PgdResult result = run_inexact_pgd(oracle, box(-1, 1), scalar(0.5),
                                           schedule, smoothness, 2, options);
  const std::string path = "/tmp/atmg_pgd_trace.csv";
  write_pgd_trace_csv(result, schedule, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,objective_estimate,grad_map_norm_estimate,stepsize");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5);
  std::remove(path.c_str());
}

TEST_CASE("non-finite gradients abort with a diagnostic") {
  PgdSchedule schedule{0.1, 10, 0.0, 1};
  const SmoothnessSpec smoothness{1.0, 2.0, 0.0};
  PgdOracle oracle;
  oracle.sample = [](const Eigen::VectorXd&, CounterRng&) {
    return scalar(std::numeric_limits<double>::quiet_NaN());
  };
  CHECK_THROWS_AS(run_inexact_pgd(oracle, box(-1, 1), scalar(0.5), schedule,
                                  smoothness, 1),
                  NumericError);
}

TEST_SUITE_END();
