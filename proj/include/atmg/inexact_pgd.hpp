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

#ifndef ATMG_INEXACT_PGD_HPP_
#define ATMG_INEXACT_PGD_HPP_

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "atmg/common.hpp"
#include "atmg/rng.hpp"

namespace atmg {

// Mini-batch stochastic projected gradient descent with a theta-inexact
// oracle on weakly smooth (Hoelder-gradient) nonconvex objectives.

using Projector = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using StochasticGradient =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, CounterRng&)>;

// Oracle model: E[G(z, xi)] = g(z) with ||g(z) - grad phi(z)|| <= inexactness
// and E||G - g||^2 <= variance.
struct PgdOracle {
  StochasticGradient sample;
  double inexactness = 0.0;  // theta
  double variance = 0.0;     // sigma^2 (per single draw)
};

// (ell_p, p)-Hoelder gradient data with the smoothing slack delta and the
// derived surrogate constant ell' = ell_p^{2/(1+p)} / delta^{(1-p)/(1+p)}.
struct SmoothnessSpec {
  double p = 1.0;
  double ell_p = 1.0;
  double delta = 0.0;

  double ell_prime() const;
};

struct PgdSchedule {
  double eta = 0.0;
  long iterations = 0;
  double delta = 0.0;
  int batch = 1;  // M
};

// Stepsize, iteration count, slack and batch size for a target accuracy:
// eta = (eps^(1-p) / (2^(3-2p) ell_p))^(1/p), T >= 8^((1+p)/p) ell_p^(1/p)
// phi_gap / eps^((1+p)/p), delta = (eps / 8^(1/p))^((1+p)/p),
// M >= max(1, 9 sigma^2 / (2 eps^2)).  Warns when theta exceeds eps/8.
PgdSchedule paper_schedule(double p, double ell_p, double eps,
                           double sigma_sq, double theta, double phi_gap);

// r_eta(z) = (z - Proj(z - eta g)) / eta.
Eigen::VectorXd gradient_mapping(const Eigen::VectorXd& z,
                                 const Eigen::VectorXd& g, double eta,
                                 const Projector& project);

// Linearized-deviation bound certified by a gradient-mapping norm eps:
// theta + eta^2 eps + ell_p eta^p eps^p, over feasible directions in the
// unit ball around the projected point.
double certificate_translate(double eps, double eta, double ell_p, double p,
                             double theta);

// Normal-cone radius implied by the schedule's own parameter choices,
// ((8^(1-p)/ell_p)^(2/p) + 9) eps; reported alongside certificates, never
// asserted.
double schedule_deviation_radius(double eps, double ell_p, double p);

// Averaged guarantee of the inexact analysis, used as an empirical test
// target: 8 ell' gap / T + 8 sigma^2 / M + 8 ell' delta + 4 theta^2 with
// ell' from the smoothness surrogate.
double averaged_gradient_mapping_bound(const SmoothnessSpec& smoothness,
                                       double phi_gap, long iterations,
                                       double sigma_sq, int batch,
                                       double theta);

enum class BestIterateMode { kFreshBatchGradMap, kUniformRandom };

struct PgdOptions {
  BestIterateMode best_iterate = BestIterateMode::kFreshBatchGradMap;
  bool record_trace = false;
  int trace_stride = 1;
  // optional, for the trace's objective column
  std::function<double(const Eigen::VectorXd&)> objective;
  // called with (t, z^t) before each update; lets callers track diagnostics
  // without storing the full trace
  std::function<void(long, const Eigen::VectorXd&)> on_iterate;
};

struct PgdCertificate {
  long iterate_index = 0;
  double grad_map_norm = 0.0;   // fresh-batch estimate at the chosen iterate
  double deviation_bound = 0.0;
};

struct PgdTrace {
  int stride = 1;
  std::vector<Eigen::VectorXd> iterates;
  std::vector<double> grad_map_estimates;
  std::vector<double> objective_estimates;
};

struct PgdResult {
  Eigen::VectorXd z_star;
  PgdCertificate certificate;
  PgdTrace trace;
};

// z^{t+1} = Proj(z^t - eta * mean_j G(z^t, xi_j)).  Deterministic in seed;
// aborts with a diagnostic on non-finite gradients.
PgdResult run_inexact_pgd(const PgdOracle& oracle, const Projector& project,
                          const Eigen::VectorXd& z0,
                          const PgdSchedule& schedule,
                          const SmoothnessSpec& smoothness,
                          std::uint64_t seed, const PgdOptions& options = {});

// One projected step with a supplied batch-mean gradient.
Eigen::VectorXd pgd_step(const Eigen::VectorXd& z, const Eigen::VectorXd& g,
                         double eta, const Projector& project);

// Trace CSV: t, objective-estimate, grad-map-norm-estimate, stepsize.
void write_pgd_trace_csv(const PgdResult& result, const PgdSchedule& schedule,
                         const std::string& path);

}  // namespace atmg

#endif  // ATMG_INEXACT_PGD_HPP_
