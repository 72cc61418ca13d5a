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

#ifndef ATMG_ESTIMATORS_HPP_
#define ATMG_ESTIMATORS_HPP_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "atmg/exact.hpp"
#include "atmg/game.hpp"
#include "atmg/policy.hpp"
#include "atmg/sampler.hpp"

namespace atmg {

enum class EstimatorProtocol { kGeometricHorizon, kFixedHorizon };

struct GradientEstimate {
  Eigen::MatrixXd estimate;
  int batch_size = 0;
  EstimatorProtocol protocol = EstimatorProtocol::kFixedHorizon;
};

// What a single team player is allowed to see of a rollout: the chain's
// states, its own actions, and its own observed rewards.  The estimator
// interfaces consume only these views, which is what keeps the learning
// dynamics uncoupled.
struct TeamPlayerView {
  std::vector<int> states;
  std::vector<int> actions;
  std::vector<double> observed_rewards;  // -r/n per step
};

TeamPlayerView team_view(const Trajectory& trajectory, int player,
                         int num_team_players);

// One REINFORCE sample from a geometric-horizon view: the score of the
// direct parameterization at (s, a) is the indicator basis over x_i(a|s),
// and each step's reward multiplies the scores accumulated up to that step.
// The view's rewards are rescaled by -n so the estimate targets the
// adversary's value gradient.  Throws on a zero policy entry.
Eigen::MatrixXd reinforce_single(const TeamPlayerView& view,
                                 const AgentPolicy& policy,
                                 int num_team_players);

// Batch mean over views.
Eigen::MatrixXd reinforce_from_views(const std::vector<TeamPlayerView>& views,
                                     const AgentPolicy& policy,
                                     int num_team_players);

// Batch REINFORCE targeting d V_rho / d x_i: M geometric-horizon rollouts.
GradientEstimate reinforce_team(const GameSpec& spec,
                                const PolicyProfile& profile, int player,
                                int batch, std::uint64_t master,
                                std::uint64_t outer, int threads = 1);

// lambda~ = sum_h gamma^h e_{s_h, b_h}; total mass (1 - gamma^H)/(1 - gamma).
Eigen::MatrixXd visitation_estimate(const Trajectory& trajectory, double gamma,
                                    int num_states, int num_adv_actions);
Eigen::MatrixXd visitation_batch(const std::vector<Trajectory>& trajectories,
                                 double gamma, int num_states,
                                 int num_adv_actions);

// g~ = sum_h gamma^h u(s_h, b_h) sum_{h'<=h} grad log y(b_h' | s_h').
Eigen::MatrixXd adversary_gradient_single(const Trajectory& trajectory,
                                          const AgentPolicy& policy,
                                          const Eigen::MatrixXd& utility,
                                          double gamma);

// Batch mean over K fresh fixed-horizon trajectories with a frozen utility.
GradientEstimate adversary_gradient_estimate(const GameSpec& spec,
                                             const PolicyProfile& profile,
                                             const Eigen::MatrixXd& utility,
                                             int batch, int horizon,
                                             std::uint64_t master,
                                             std::uint64_t outer,
                                             int threads = 1);

// Adversary utility source r(x).  ORACLE computes the expectation from the
// model; EMPIRICAL maintains per-(s,b) running means of rewards seen along
// trajectories, with unvisited pairs defaulting to 0.5.
class RewardVectorProvider {
 public:
  enum class Mode { kOracle, kEmpirical };

  RewardVectorProvider(Mode mode, const GameSpec& spec,
                       const std::vector<AgentPolicy>& team);

  const Eigen::MatrixXd& current() const { return current_; }
  Mode mode() const { return mode_; }

  // EMPIRICAL only; updated between batches, never concurrently.
  void observe(const std::vector<Trajectory>& batch);

 private:
  Mode mode_;
  Eigen::MatrixXd current_;
  Eigen::MatrixXd sums_;
  Eigen::MatrixXd counts_;
};

// --- paper bounds -----------------------------------------------------------

// Constants appearing in the estimator bias/variance bounds.
struct DiagnosticsBounds {
  double c1 = 0.0;                   // 57 / ((1-g)^6 z^2)
  double c2 = 0.0;                   // 126 H^2 / ((1-g)^6 z^2)
  double c3 = 0.0;                   // sqrt(S B) 6 H / ((1-g)^3 z)
  double visitation_bias = 0.0;      // gamma^H / (1-g)
  double gradient_bias = 0.0;
  double reinforce_second_moment = 0.0;  // 24 A_k^2 / (z (1-g))
  double visitation_variance = 0.0;      // 1 / (K (1-g)^2)
  double gradient_variance = 0.0;
};

DiagnosticsBounds diagnostics_bounds(double gamma, double zeta, int horizon,
                                     double nu, int num_states,
                                     int num_adv_actions, int action_count,
                                     int batch);

// --- diagnostics harness ----------------------------------------------------

struct DiagnosticRow {
  std::string quantity;
  double empirical = 0.0;
  double paper_bound = 0.0;
  bool pass = false;
};

struct DiagnosticsConfig {
  int horizon = 30;
  int batch = 2000;        // K for adversary-side checks
  int reinforce_batch = 10000;  // M for the unbiasedness z-test
  int repetitions = 12;
  double zeta = 0.05;
  double nu = 0.05;
};

// Empirical check of the estimator bias/variance statements against their
// closed-form bounds at one random truncated-feasible profile.
std::vector<DiagnosticRow> run_estimator_diagnostics(
    const GameSpec& spec, const DiagnosticsConfig& config,
    std::uint64_t seed);

void write_diagnostics_csv(const std::vector<DiagnosticRow>& rows,
                           const std::string& path);

}  // namespace atmg

#endif  // ATMG_ESTIMATORS_HPP_
