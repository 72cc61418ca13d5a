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

#ifndef ATMG_HIDDEN_MINMAX_HPP_
#define ATMG_HIDDEN_MINMAX_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "atmg/exact.hpp"
#include "atmg/game.hpp"
#include "atmg/rng.hpp"

namespace atmg {

struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Eigen::VectorXd project(const Eigen::VectorXd& z) const;
  // max over the box of <direction, z' - at>
  double linear_max(const Eigen::VectorXd& direction,
                    const Eigen::VectorXd& at) const;
  double diameter() const { return (hi - lo).norm(); }
  int dim() const { return static_cast<int>(lo.size()); }
};

// Min-max problem min_X max_Y f whose objective becomes nu-strongly concave
// after the invertible change of variables u = c(y; x):
// H(x, u) = f(x, c_inv(u; x)).  Lipschitz data per the structural
// assumptions; diam_u bounds the diameter of the u-feasibility sets.
struct HiddenConcaveProblem {
  std::string name;
  Box x_set;
  Box y_set;
  double nu = 1.0;

  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> f;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&,
                                const Eigen::VectorXd&)>
      grad_x;  // (x, y)
  std::function<Eigen::VectorXd(const Eigen::VectorXd&,
                                const Eigen::VectorXd&)>
      grad_y;  // (x, y)
  std::function<Eigen::VectorXd(const Eigen::VectorXd&,
                                const Eigen::VectorXd&)>
      c;  // (y, x) -> u
  std::function<Eigen::VectorXd(const Eigen::VectorXd&,
                                const Eigen::VectorXd&)>
      c_inv;  // (u, x) -> y

  double L_c = 1.0, L_c_inv = 1.0;
  double L_H = 1.0, ell_H = 1.0;
  double L = 1.0, ell = 1.0;
  double diam_u = 0.0;

  // optional closed-form inner maximizer (test problems)
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> y_star_exact;
};

// L_* of the maximizer continuity statement:
// (1/(2 nu)) (2 ell_H sqrt(Diam_X) +
//             2 sqrt(nu (1 + 2 ell_H) L_c Diam_U + 2 nu L_c L_H)).
double maximizer_holder_constant(const HiddenConcaveProblem& problem);

// ell_1/2 of the max function: ((1 + L_c_inv) sqrt(Diam_X) + L_c_inv L_*) ell.
double phi_holder_constant(const HiddenConcaveProblem& problem);

struct SaddleCertificate {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  double deviation_x = 0.0;  // max_{x'} <-grad_x f, x' - x>
  double deviation_y = 0.0;  // max_{y'} <grad_y f, y' - y>
};

SaddleCertificate make_certificate(const HiddenConcaveProblem& problem,
                                   const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y);

// Deterministic inner maximization of f(x, .) over the y box to a
// gradient-mapping residual <= tol (Armijo ascent, a few spread starts).
Eigen::VectorXd solve_inner_max(const HiddenConcaveProblem& problem,
                                const Eigen::VectorXd& x, double tol);

// Stochastic projected gradient ascent max-oracle with the schedule
// eta_y = min(2/(9L), L_c^2 nu zeta / (10 L sigma^2)) (deterministic ascent
// at sigma = 0); the iteration count covers the ascent's e-folding times
// with a calibrated log factor, capped by max_iterations.
struct MaxOracleOptions {
  double sigma = 0.0;  // oracle noise level; 0 means exact ascent
  long max_iterations = 200000;
  int batch = 1;
};

Eigen::VectorXd max_oracle_sga(const HiddenConcaveProblem& problem,
                               const Eigen::VectorXd& x, double zeta,
                               std::uint64_t seed,
                               const MaxOracleOptions& options = {});

struct SgdmaxSchedule {
  double eta_x = 0.0;
  long iterations = 0;
  int batch = 1;               // M
  double oracle_accuracy = 0;  // zeta
  std::optional<Eigen::VectorXd> start;  // defaults to the box center
};

// Oracle accuracy zeta = nu eps^2 / ell^2 and batch
// M = max(1, 9 sigma^2 / (2 eps^2)); the iteration count keeps the
// 1/(nu^2 eps^3) budget shape with a desk-calibrated leading constant,
// clamped to [10, 2e5].
SgdmaxSchedule sgdmax_schedule(const HiddenConcaveProblem& problem, double eps,
                               double sigma_sq, double budget_scale = 4e-6);

using MaxOracleFn = std::function<Eigen::VectorXd(
    const Eigen::VectorXd& x, double zeta, std::uint64_t seed)>;
using StochasticGradX = std::function<Eigen::VectorXd(
    const Eigen::VectorXd& x, const Eigen::VectorXd& y, CounterRng& rng)>;

struct SgdmaxResult {
  Eigen::VectorXd x_star;
  Eigen::VectorXd y_star;
  SaddleCertificate certificate;
  std::vector<double> deviation_trace;  // max(dev_x, dev_y) per candidate
  bool oracle_converged = true;
};

// Per iteration: y <- max-oracle(f(x, .); zeta), then a projected descent
// step on a batch of stochastic x-gradients at (x, y).  Candidates are
// (x^t, y^{t+1}); the returned pair minimizes the certified deviation.
SgdmaxResult sgdmax(const HiddenConcaveProblem& problem,
                    const SgdmaxSchedule& schedule,
                    const MaxOracleFn& max_oracle,
                    const StochasticGradX& grad_x_oracle, std::uint64_t seed);

// max over sampled pairs of ||u*(x) - u*(x')|| / ||x - x'||^(1/2); pairs
// closer than 1e-6 are excluded.
struct HolderCheckResult {
  double max_ratio = 0.0;
  int pairs_used = 0;
};

HolderCheckResult hidden_holder_check(
    const HiddenConcaveProblem& problem,
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs,
    double inner_tol = 1e-8);

// Built-in test problems addressable by name: "quadratic" (2xy - y^2 on
// [-1,1]^2, c identity, nu = 2) and "sine-affine" (sin(3x) u - u^2/2 with
// u = y + x/10, nu = 1).
HiddenConcaveProblem make_hidden_test_problem(const std::string& name);
std::vector<std::string> hidden_test_problem_names();

struct MinmaxSuiteRow {
  std::string problem;
  double deviation_x = 0.0;
  double deviation_y = 0.0;
  double target = 0.0;
  bool pass = false;
};

// Runs SGDMAX on every named problem at the given accuracy and reports the
// certified deviations; rows go to a CSV with columns
// (problem, deviation_x, deviation_y, target, pass).
std::vector<MinmaxSuiteRow> run_minmax_suite(double eps, std::uint64_t seed);
void write_minmax_suite_csv(const std::vector<MinmaxSuiteRow>& rows,
                            const std::string& path);

// --- the game as a hidden problem -------------------------------------------

// c(y; x) = lambda(y; x), c_inv by row normalization, H(x, u) = r(x)'u -
// (nu/2)||u||^2 on the visitation polytope.
struct AtmgHiddenProblem {
  const GameSpec* spec = nullptr;
  double nu = 0.0;

  Eigen::MatrixXd map_to_measure(const std::vector<AgentPolicy>& team,
                                 const AgentPolicy& y) const;
  AgentPolicy map_to_policy(const Eigen::MatrixXd& lambda) const;
  double hidden_objective(const std::vector<AgentPolicy>& team,
                          const Eigen::MatrixXd& lambda) const;
  double objective(const std::vector<AgentPolicy>& team,
                   const AgentPolicy& y) const;
};

AtmgHiddenProblem atmg_as_hidden_problem(const GameSpec& spec, double nu);

}  // namespace atmg

#endif  // ATMG_HIDDEN_MINMAX_HPP_
