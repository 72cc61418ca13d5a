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

#include "atmg/inexact_pgd.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace atmg {

double SmoothnessSpec::ell_prime() const {
  if (p >= 1.0) return ell_p;  // any delta works in the smooth case
  ATMG_CHECK(delta > 0.0, UsageError, "delta must be positive for p < 1");
  return std::pow(ell_p, 2.0 / (1.0 + p)) /
         std::pow(delta, (1.0 - p) / (1.0 + p));
}

PgdSchedule paper_schedule(double p, double ell_p, double eps,
                           double sigma_sq, double theta, double phi_gap) {
  ATMG_CHECK(p > 0.0 && p <= 1.0, UsageError, "p must be in (0,1]");
  ATMG_CHECK(eps > 0.0 && ell_p > 0.0, UsageError,
             "eps and ell_p must be positive");
  PgdSchedule schedule;
  schedule.eta =
      std::pow(std::pow(eps, 1.0 - p) / (std::pow(2.0, 3.0 - 2.0 * p) * ell_p),
               1.0 / p);
  const double exponent = (1.0 + p) / p;
  schedule.iterations = static_cast<long>(std::ceil(
      std::pow(8.0, exponent) * std::pow(ell_p, 1.0 / p) * phi_gap /
      std::pow(eps, exponent)));
  if (schedule.iterations < 1) schedule.iterations = 1;
  schedule.delta = std::pow(eps / std::pow(8.0, 1.0 / p), exponent);
  schedule.batch = std::max(
      1, static_cast<int>(std::ceil(4.5 * sigma_sq / (eps * eps))));
  if (theta > eps / 8.0) {
    ATMG_WARN("oracle inexactness " << theta << " exceeds eps/8 = "
                                    << eps / 8.0
                                    << "; the certificate degrades");
  }
  return schedule;
}

Eigen::VectorXd gradient_mapping(const Eigen::VectorXd& z,
                                 const Eigen::VectorXd& g, double eta,
                                 const Projector& project) {
  return (z - project(z - eta * g)) / eta;
}

double certificate_translate(double eps, double eta, double ell_p, double p,
                             double theta) {
  ATMG_CHECK(eps >= 0.0 && eta >= 0.0 && ell_p >= 0.0 && theta >= 0.0,
             UsageError, "certificate inputs must be nonnegative");
  return theta + eta * eta * eps + ell_p * std::pow(eta, p) * std::pow(eps, p);
}

double schedule_deviation_radius(double eps, double ell_p, double p) {
  return (std::pow(std::pow(8.0, 1.0 - p) / ell_p, 2.0 / p) + 9.0) * eps;
}

double averaged_gradient_mapping_bound(const SmoothnessSpec& smoothness,
                                       double phi_gap, long iterations,
                                       double sigma_sq, int batch,
                                       double theta) {
  const double ell_prime = smoothness.ell_prime();
  return 8.0 * ell_prime * phi_gap / double(iterations) +
         8.0 * sigma_sq / batch + 8.0 * ell_prime * smoothness.delta +
         4.0 * theta * theta;
}

Eigen::VectorXd pgd_step(const Eigen::VectorXd& z, const Eigen::VectorXd& g,
                         double eta, const Projector& project) {
  ATMG_CHECK(eta > 0.0, UsageError, "stepsize must be positive");
  return project(z - eta * g);
}

namespace {

Eigen::VectorXd batch_mean(const PgdOracle& oracle, const Eigen::VectorXd& z,
                           int batch, std::uint64_t seed, std::uint64_t outer,
                           std::uint64_t lane) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(z.size());
  for (int j = 0; j < batch; ++j) {
    CounterRng rng(seed, outer, (lane << 32) | std::uint64_t(j));
    mean += oracle.sample(z, rng);
  }
  return mean / double(batch);
}

}  // namespace

PgdResult run_inexact_pgd(const PgdOracle& oracle, const Projector& project,
                          const Eigen::VectorXd& z0,
                          const PgdSchedule& schedule,
                          const SmoothnessSpec& smoothness,
                          std::uint64_t seed, const PgdOptions& options) {
  ATMG_CHECK(schedule.eta > 0.0 && schedule.iterations >= 1 &&
                 schedule.batch >= 1,
             UsageError, "invalid schedule");
  PgdResult result;
  result.trace.stride = options.trace_stride;

  Eigen::VectorXd z = project(z0);
  Eigen::VectorXd best_z = z;
  double best_norm = std::numeric_limits<double>::infinity();
  long best_t = 0;

  // reservoir lane for the uniform-random selection rule
  CounterRng selector(seed, 0xbe57ULL, 0);

  for (long t = 0; t < schedule.iterations; ++t) {
    if (options.on_iterate) options.on_iterate(t, z);
    const Eigen::VectorXd g_hat =
        batch_mean(oracle, z, schedule.batch, seed, std::uint64_t(t), 0);
    ATMG_CHECK(g_hat.allFinite(), NumericError,
               "non-finite gradient estimate at iteration " << t);
    const double r_norm =
        gradient_mapping(z, g_hat, schedule.eta, project).norm();

    if (options.best_iterate == BestIterateMode::kFreshBatchGradMap) {
      const Eigen::VectorXd g_fresh =
          batch_mean(oracle, z, schedule.batch, seed, std::uint64_t(t), 1);
      const double fresh_norm =
          gradient_mapping(z, g_fresh, schedule.eta, project).norm();
      if (fresh_norm < best_norm) {
        best_norm = fresh_norm;
        best_z = z;
        best_t = t;
      }
    } else {
      // reservoir: z^t replaces the pick with probability 1/(t+1)
      if (selector.next_double() * double(t + 1) < 1.0) {
        best_z = z;
        best_t = t;
      }
    }

    if (options.record_trace && t % options.trace_stride == 0) {
      result.trace.iterates.push_back(z);
      result.trace.grad_map_estimates.push_back(r_norm);
      result.trace.objective_estimates.push_back(
          options.objective ? options.objective(z)
                            : std::numeric_limits<double>::quiet_NaN());
    }

    z = project(z - schedule.eta * g_hat);
    ATMG_CHECK(z.allFinite(), NumericError,
               "non-finite iterate at iteration " << t);
  }

  if (options.best_iterate == BestIterateMode::kUniformRandom) {
    const Eigen::VectorXd g_fresh = batch_mean(oracle, best_z, schedule.batch,
                                               seed, 0xffffffffULL, 1);
    best_norm = gradient_mapping(best_z, g_fresh, schedule.eta, project).norm();
  }

  result.z_star = best_z;
  result.certificate.iterate_index = best_t;
  result.certificate.grad_map_norm = best_norm;
  result.certificate.deviation_bound =
      certificate_translate(best_norm, schedule.eta, smoothness.ell_p,
                            smoothness.p, oracle.inexactness);
  return result;
}

void write_pgd_trace_csv(const PgdResult& result, const PgdSchedule& schedule,
                         const std::string& path) {
  std::ofstream out(path);
  ATMG_CHECK(out.good(), ParseError, "cannot open for writing: " << path);
  out << "t,objective_estimate,grad_map_norm_estimate,stepsize\n";
  out.precision(17);
  for (std::size_t i = 0; i < result.trace.iterates.size(); ++i) {
    out << i * result.trace.stride << "," << result.trace.objective_estimates[i]
        << "," << result.trace.grad_map_estimates[i] << "," << schedule.eta
        << "\n";
  }
}

}  // namespace atmg
