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

#ifndef ATMG_LEARNERS_HPP_
#define ATMG_LEARNERS_HPP_

#include <string>
#include <vector>

#include "atmg/estimators.hpp"
#include "atmg/exact.hpp"
#include "atmg/game.hpp"
#include "atmg/policy.hpp"

namespace atmg {

// Inner loop: visitation-regularized policy gradient for the adversary.
struct InnerConfig {
  double nu = 0.05;        // regularization coefficient
  int batch = 1000;        // K trajectories per epoch
  int horizon = 50;        // H, trajectory length
  double eta_y = 0.05;
  double zeta_y = 0.01;
  int epochs = 200;        // T_y
  double epsilon_y = 1e-3;
  enum class UMode { kOracle, kEmpirical } u_mode = UMode::kOracle;
};

// Outer loop: independent stochastic policy-nested-gradient.
struct OuterConfig {
  double eta_x = 0.05;
  int iterations = 100;  // T_x
  int batch = 1000;      // M REINFORCE rollouts per iteration
  double zeta_x = 0.01;
  double epsilon = 0.05;
  InnerConfig inner;
  enum class BestIterate {
    kNashGap,        // argmin of the exact gap over candidates (default)
    kUniformRandom,  // t* drawn uniformly
    kGradMap,        // argmin of a fresh-batch gradient-mapping estimate
  } best_iterate = BestIterate::kNashGap;
};

void validate_config(const GameSpec& spec, const OuterConfig& config);

OuterConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const OuterConfig& config);

struct RunRecord {
  int iter = 0;
  long inner_epochs = 0;
  double value_est = 0.0;
  double nash_gap = 0.0;
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
};

struct RunLog {
  std::vector<RunRecord> records;
};

void write_run_log_csv(const RunLog& log, const std::string& path);

struct VisRegResult {
  AgentPolicy y;
  long epochs_used = 0;
  double value_estimate = 0.0;   // estimated V^nu at the final iterate
  double final_residual = 0.0;   // exact mode only: gradient-mapping norm
};

// Algorithm: start uniform; per epoch sample K length-H trajectories, form
// the batch visitation estimate, set u = r(x) - nu * lambda_hat, take a
// projected ascent step with the trajectory gradient estimator.  With
// exact_gradients the estimator is replaced by the closed-form gradient.
VisRegResult vis_reg_pg(const GameSpec& spec,
                        const std::vector<AgentPolicy>& team,
                        const InnerConfig& config, std::uint64_t master,
                        std::uint64_t outer_iter, bool exact_gradients,
                        int threads = 1);

struct IspngOptions {
  bool exact_oracles = false;  // swap estimators for exact gradients
  bool evaluate_gap = true;    // record the exact gap per iterate
  int threads = 1;
};

struct IspngResult {
  std::vector<AgentPolicy> x_star;
  AgentPolicy y_star;
  RunLog log;
  int t_star = 0;
  double final_gap = 0.0;  // exact gap at (x*, y*)
};

// Alternating scheme: the adversary approximately maximizes the regularized
// value, then every team player independently takes a projected descent step
// from its own REINFORCE estimate.  Candidate pairs are (x^t, y^{t+1}).
IspngResult ispng(const GameSpec& spec, const OuterConfig& config,
                  std::uint64_t seed, const IspngOptions& options = {});

// --- tuning calculator -------------------------------------------------------

struct TuningParams {
  double n = 1;        // team players
  double S = 1;        // states
  double sumAB = 2;    // sum_i A_i + B
  double Dm = 1;       // mismatch coefficient (upper bound)
  double min_rho = 1;  // min_s rho(s)
  double gamma = 0.0;
  double eps = 0.1;
};

struct TuningSchedule {
  double T = 0, eta_x = 0, zeta_x = 0, M = 0;
  double nu = 0, T_y = 0, eta_y = 0, zeta_y = 0, K = 0, H = 0;
  double epsilon_y = 0;  // derived as nu * eps^2
  std::vector<std::string> warnings;
};

// Pure formula evaluation of the schedule displays; no clamping.
TuningSchedule evaluate_tuning(const TuningParams& params);

// Schedule for a concrete game with D_m taken as the analytic upper bound;
// truncations are clamped to 1/(2m) with a warning, and a warning is issued
// when T exceeds the given iteration budget.
TuningSchedule paper_tuning(const GameSpec& spec, double eps,
                            double iteration_budget = 1e6);

std::string tuning_to_json_text(const TuningSchedule& schedule);
std::string constants_to_json_text(const PaperConstants& constants);

// Exact per-player deviation gains and the gap (delegates to the oracles).
GapBreakdown evaluate_profile(const GameSpec& spec,
                              const PolicyProfile& profile);

}  // namespace atmg

#endif  // ATMG_LEARNERS_HPP_
