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

#include "atmg/estimators.hpp"

#include <cmath>
#include <fstream>

namespace atmg {

TeamPlayerView team_view(const Trajectory& trajectory, int player,
                         int num_team_players) {
  TeamPlayerView view;
  view.states.reserve(trajectory.steps.size());
  view.actions.reserve(trajectory.steps.size());
  view.observed_rewards.reserve(trajectory.steps.size());
  for (const TrajectoryStep& step : trajectory.steps) {
    view.states.push_back(step.state);
    view.actions.push_back(step.team_actions[player]);
    view.observed_rewards.push_back(
        observed_reward(step, player, num_team_players));
  }
  return view;
}

Eigen::MatrixXd reinforce_single(const TeamPlayerView& view,
                                 const AgentPolicy& policy,
                                 int num_team_players) {
  const int H = static_cast<int>(view.states.size());
  Eigen::MatrixXd estimate =
      Eigen::MatrixXd::Zero(policy.rows(), policy.cols());
  // suffix sums of the de-scaled rewards; the horizon draw carries the
  // discount, rewards enter undiscounted
  std::vector<double> suffix(H + 1, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    suffix[h] = suffix[h + 1] - num_team_players * view.observed_rewards[h];
  }
  for (int h = 0; h < H; ++h) {
    const int s = view.states[h];
    const int a = view.actions[h];
    const double p = policy(s, a);
    ATMG_CHECK(p > 0.0, NumericError,
               "zero policy entry hit by the score function; the policy must "
               "stay in the truncated simplex");
    estimate(s, a) += suffix[h] / p;
  }
  return estimate;
}

Eigen::MatrixXd reinforce_from_views(const std::vector<TeamPlayerView>& views,
                                     const AgentPolicy& policy,
                                     int num_team_players) {
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(policy.rows(), policy.cols());
  for (const TeamPlayerView& view : views) {
    mean += reinforce_single(view, policy, num_team_players);
  }
  if (!views.empty()) mean /= static_cast<double>(views.size());
  return mean;
}

GradientEstimate reinforce_team(const GameSpec& spec,
                                const PolicyProfile& profile, int player,
                                int batch, std::uint64_t master,
                                std::uint64_t outer, int threads) {
  const auto trajectories =
      sample_geometric_batch(spec, profile, batch, master, outer, threads);
  std::vector<TeamPlayerView> views;
  views.reserve(trajectories.size());
  for (const Trajectory& t : trajectories) {
    views.push_back(team_view(t, player, spec.num_team_players()));
  }
  GradientEstimate out;
  out.estimate = reinforce_from_views(views, profile.team[player],
                                      spec.num_team_players());
  out.batch_size = batch;
  out.protocol = EstimatorProtocol::kGeometricHorizon;
  return out;
}

Eigen::MatrixXd visitation_estimate(const Trajectory& trajectory, double gamma,
                                    int num_states, int num_adv_actions) {
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(num_states, num_adv_actions);
  double discount = 1.0;
  for (const TrajectoryStep& step : trajectory.steps) {
    lambda(step.state, step.adversary_action) += discount;
    discount *= gamma;
  }
  return lambda;
}

Eigen::MatrixXd visitation_batch(const std::vector<Trajectory>& trajectories,
                                 double gamma, int num_states,
                                 int num_adv_actions) {
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(num_states, num_adv_actions);
  for (const Trajectory& t : trajectories) {
    mean += visitation_estimate(t, gamma, num_states, num_adv_actions);
  }
  if (!trajectories.empty()) mean /= static_cast<double>(trajectories.size());
  return mean;
}

Eigen::MatrixXd adversary_gradient_single(const Trajectory& trajectory,
                                          const AgentPolicy& policy,
                                          const Eigen::MatrixXd& utility,
                                          double gamma) {
  const int H = trajectory.horizon();
  Eigen::MatrixXd estimate =
      Eigen::MatrixXd::Zero(policy.rows(), policy.cols());
  // g~ = sum_h' score_h' * sum_{h >= h'} gamma^h u(s_h, b_h)
  std::vector<double> suffix(H + 1, 0.0);
  double discount = std::pow(gamma, H - 1);
  for (int h = H - 1; h >= 0; --h) {
    const TrajectoryStep& step = trajectory.steps[h];
    suffix[h] =
        suffix[h + 1] + discount * utility(step.state, step.adversary_action);
    discount = (gamma > 0.0) ? discount / gamma : 0.0;
  }
  // gamma = 0: only h = 0 carries weight
  if (gamma == 0.0 && H > 0) {
    const TrajectoryStep& step = trajectory.steps[0];
    suffix.assign(H + 1, 0.0);
    suffix[0] = utility(step.state, step.adversary_action);
  }
  for (int h = 0; h < H; ++h) {
    const TrajectoryStep& step = trajectory.steps[h];
    const double p = policy(step.state, step.adversary_action);
    ATMG_CHECK(p > 0.0, NumericError,
               "zero adversary policy entry hit by the score function");
    estimate(step.state, step.adversary_action) += suffix[h] / p;
  }
  return estimate;
}

GradientEstimate adversary_gradient_estimate(const GameSpec& spec,
                                             const PolicyProfile& profile,
                                             const Eigen::MatrixXd& utility,
                                             int batch, int horizon,
                                             std::uint64_t master,
                                             std::uint64_t outer,
                                             int threads) {
  const auto trajectories =
      sample_batch(spec, profile, batch, horizon, master, outer, threads);
  GradientEstimate out;
  out.estimate = Eigen::MatrixXd::Zero(spec.num_states,
                                       spec.adversary_action_size);
  for (const Trajectory& t : trajectories) {
    out.estimate += adversary_gradient_single(t, profile.adversary, utility,
                                              spec.discount);
  }
  if (batch > 0) out.estimate /= static_cast<double>(batch);
  out.batch_size = batch;
  out.protocol = EstimatorProtocol::kFixedHorizon;
  return out;
}

RewardVectorProvider::RewardVectorProvider(
    Mode mode, const GameSpec& spec, const std::vector<AgentPolicy>& team)
    : mode_(mode) {
  if (mode_ == Mode::kOracle) {
    current_ = adversary_reward_matrix(spec, team);
  } else {
    // midpoint of the reward range until a pair is visited
    current_ = Eigen::MatrixXd::Constant(spec.num_states,
                                         spec.adversary_action_size, 0.5);
    sums_ = Eigen::MatrixXd::Zero(spec.num_states, spec.adversary_action_size);
    counts_ =
        Eigen::MatrixXd::Zero(spec.num_states, spec.adversary_action_size);
  }
}

void RewardVectorProvider::observe(const std::vector<Trajectory>& batch) {
  if (mode_ == Mode::kOracle) return;
  for (const Trajectory& t : batch) {
    for (const TrajectoryStep& step : t.steps) {
      sums_(step.state, step.adversary_action) += step.reward;
      counts_(step.state, step.adversary_action) += 1.0;
    }
  }
  for (int s = 0; s < current_.rows(); ++s) {
    for (int b = 0; b < current_.cols(); ++b) {
      if (counts_(s, b) > 0.0) current_(s, b) = sums_(s, b) / counts_(s, b);
    }
  }
}

DiagnosticsBounds diagnostics_bounds(double gamma, double zeta, int horizon,
                                     double nu, int num_states,
                                     int num_adv_actions, int action_count,
                                     int batch) {
  DiagnosticsBounds b;
  const double om = 1.0 - gamma;
  const double gH = std::pow(gamma, horizon);
  b.c1 = 57.0 / (std::pow(om, 6) * zeta * zeta);
  b.c2 = 126.0 * double(horizon) * horizon / (std::pow(om, 6) * zeta * zeta);
  b.c3 = std::sqrt(double(num_states) * num_adv_actions) * 6.0 * horizon /
         (std::pow(om, 3) * zeta);
  b.visitation_bias = gH / om;
  b.gradient_bias = ((horizon + 1.0) / (om * zeta) +
                     (nu * horizon + nu + 1.0) / (om * om * zeta) +
                     nu / (std::pow(om, 3) * zeta)) *
                    gH;
  b.reinforce_second_moment =
      24.0 * double(action_count) * action_count / (zeta * om);
  b.visitation_variance = 1.0 / (batch * om * om);
  b.gradient_variance = 3.0 / (batch * std::pow(om, 4) * zeta * zeta) +
                        6.0 * nu / (batch * std::pow(om, 5) * zeta * zeta) +
                        9.0 * nu * nu / (batch * std::pow(om, 6) * zeta * zeta);
  return b;
}

namespace {

double frobenius(const Eigen::MatrixXd& m) { return m.norm(); }

}  // namespace

std::vector<DiagnosticRow> run_estimator_diagnostics(
    const GameSpec& spec, const DiagnosticsConfig& config,
    std::uint64_t seed) {
  std::vector<DiagnosticRow> rows;
  const int S = spec.num_states;
  const int B = spec.adversary_action_size;
  const double gamma = spec.discount;
  const PolicyProfile profile =
      random_profile(spec, seed, config.zeta, config.zeta);
  const DiagnosticsBounds bounds = diagnostics_bounds(
      gamma, config.zeta, config.horizon, config.nu, S, B,
      spec.max_team_action_size(), config.batch);

  auto push = [&rows](const std::string& name, double empirical,
                      double bound) {
    rows.push_back({name, empirical, bound, empirical <= bound});
  };

  // Per-coordinate z-scores and per-sample second moment of the
  // geometric-horizon REINFORCE estimate against the exact gradient.
  {
    double z_max = 0.0;
    double second_moment_max = 0.0;
    for (int i = 0; i < spec.num_team_players(); ++i) {
      const Eigen::MatrixXd exact = exact_team_gradient(spec, profile, i);
      for (int rep = 0; rep < config.repetitions; ++rep) {
        const auto batch = sample_geometric_batch(
            spec, profile, config.reinforce_batch, seed + 1,
            1000 * (i + 1) + rep);
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(S, profile.team[i].cols());
        Eigen::MatrixXd sum_sq = sum;
        double dist_sq = 0.0;
        for (const Trajectory& t : batch) {
          const Eigen::MatrixXd g = reinforce_single(
              team_view(t, i, spec.num_team_players()), profile.team[i],
              spec.num_team_players());
          sum += g;
          sum_sq += g.cwiseProduct(g);
          dist_sq += (g - exact).squaredNorm();
        }
        const double M = config.reinforce_batch;
        const Eigen::MatrixXd mean = sum / M;
        second_moment_max = std::max(second_moment_max, dist_sq / M);
        for (int s = 0; s < S; ++s) {
          for (int a = 0; a < profile.team[i].cols(); ++a) {
            const double var =
                std::max(sum_sq(s, a) / M - mean(s, a) * mean(s, a), 0.0);
            const double se = std::sqrt(var / M);
            const double err = mean(s, a) - exact(s, a);
            if (se > 0.0) {
              z_max = std::max(z_max, std::abs(err) / se);
            } else if (std::abs(err) > 1e-12) {
              z_max = std::numeric_limits<double>::infinity();
            }
          }
        }
      }
    }
    push("reinforce_unbiasedness_zscore_max", z_max, 4.0);
    push("reinforce_second_moment", second_moment_max,
         bounds.reinforce_second_moment);
  }

  // Deterministic truncation biases: the truncated measure against the
  // full one, and the fixed-horizon gradient estimator's exact mean
  // against the true gradient.
  const VisitationResult vis = exact_visitation(spec, profile);
  const Eigen::MatrixXd lambda_H =
      truncated_visitation(spec, profile, config.horizon);
  push("visitation_truncation_bias", frobenius(lambda_H - vis.lambda),
       bounds.visitation_bias);
  {
    const Eigen::MatrixXd rx = adversary_reward_matrix(spec, profile.team);
    const Eigen::MatrixXd mean_grad = adversary_gradient_for_utility_truncated(
        spec, profile, rx - config.nu * lambda_H, config.horizon);
    const Eigen::MatrixXd true_grad =
        exact_adversary_gradient(spec, profile, config.nu);
    push("gradient_truncation_bias", frobenius(mean_grad - true_grad),
         bounds.gradient_bias);
  }

  // Visitation and gradient second moments at batch size K, about their
  // biased means and about the true gradient.
  {
    const Eigen::MatrixXd rx = adversary_reward_matrix(spec, profile.team);
    const Eigen::MatrixXd true_grad =
        exact_adversary_gradient(spec, profile, config.nu);
    double var_lambda = 0.0;
    double var_grad = 0.0;
    double dist_grad = 0.0;
    for (int rep = 0; rep < config.repetitions; ++rep) {
      const auto batch = sample_batch(spec, profile, config.batch,
                                      config.horizon, seed + 2, rep);
      const Eigen::MatrixXd lambda_hat =
          visitation_batch(batch, gamma, S, B);
      var_lambda += (lambda_hat - lambda_H).squaredNorm();

      const Eigen::MatrixXd u = rx - config.nu * lambda_hat;
      Eigen::MatrixXd g_hat = Eigen::MatrixXd::Zero(S, B);
      for (const Trajectory& t : batch) {
        g_hat +=
            adversary_gradient_single(t, profile.adversary, u, gamma);
      }
      g_hat /= double(config.batch);
      const Eigen::MatrixXd biased_mean =
          adversary_gradient_for_utility_truncated(spec, profile, u,
                                                   config.horizon);
      var_grad += (g_hat - biased_mean).squaredNorm();
      dist_grad += (g_hat - true_grad).squaredNorm();
    }
    var_lambda /= config.repetitions;
    var_grad /= config.repetitions;
    dist_grad /= config.repetitions;
    push("visitation_estimator_variance", var_lambda,
         bounds.visitation_variance);
    push("gradient_estimator_variance", var_grad, bounds.gradient_variance);
    push("gradient_estimator_distance", dist_grad,
         bounds.c1 / config.batch +
             bounds.c2 * std::pow(gamma, 2 * config.horizon));
  }

  return rows;
}

void write_diagnostics_csv(const std::vector<DiagnosticRow>& rows,
                           const std::string& path) {
  std::ofstream out(path);
  ATMG_CHECK(out.good(), ParseError, "cannot open for writing: " << path);
  out << "quantity,empirical,paper_bound,pass\n";
  out.precision(17);
  for (const DiagnosticRow& row : rows) {
    out << row.quantity << "," << row.empirical << "," << row.paper_bound
        << "," << (row.pass ? "pass" : "fail") << "\n";
  }
}

}  // namespace atmg
