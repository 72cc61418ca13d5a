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

#include "atmg/learners.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace atmg {

using nlohmann::json;

namespace {

double elapsed_ms(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

std::uint64_t inner_stream(std::uint64_t outer_iter, int epoch) {
  return (outer_iter << 20) | std::uint64_t(epoch);
}

json require_field(const json& j, const char* name, const char* where) {
  if (!j.contains(name)) {
    throw ParseError(std::string("config missing field \"") + name +
                     "\" in " + where);
  }
  return j.at(name);
}

}  // namespace

void validate_config(const GameSpec& spec, const OuterConfig& config) {
  const int max_a = spec.max_team_action_size();
  const int B = spec.adversary_action_size;
  ATMG_CHECK(config.zeta_x >= 0.0 && config.zeta_x <= 0.5 / max_a + 1e-15,
             ValidationError,
             "zeta_x must satisfy 0 <= zeta_x <= 1/(2 max_i A_i)");
  ATMG_CHECK(config.inner.zeta_y >= 0.0 &&
                 config.inner.zeta_y <= 0.5 / B + 1e-15,
             ValidationError, "zeta_y must satisfy 0 <= zeta_y <= 1/(2B)");
  ATMG_CHECK(config.inner.nu >= 0.0, ValidationError, "nu must be >= 0");
  ATMG_CHECK(config.inner.horizon >= 1, ValidationError, "h must be >= 1");
  ATMG_CHECK(config.inner.batch >= 1 && config.batch >= 1, ValidationError,
             "batch sizes must be >= 1");
  ATMG_CHECK(config.eta_x > 0.0 && config.inner.eta_y > 0.0, ValidationError,
             "stepsizes must be positive");
  ATMG_CHECK(config.iterations >= 1 && config.inner.epochs >= 0,
             ValidationError, "iteration counts must be nonnegative");
}

OuterConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid config JSON: ") + e.what());
  }
  OuterConfig config;
  try {
    config.eta_x = require_field(j, "eta_x", "outer").get<double>();
    config.iterations = require_field(j, "t_x", "outer").get<int>();
    config.batch = require_field(j, "m", "outer").get<int>();
    config.zeta_x = require_field(j, "zeta_x", "outer").get<double>();
    config.epsilon = require_field(j, "epsilon", "outer").get<double>();
    if (j.contains("best_iterate")) {
      const std::string mode = j.at("best_iterate").get<std::string>();
      if (mode == "nash_gap") {
        config.best_iterate = OuterConfig::BestIterate::kNashGap;
      } else if (mode == "uniform_random") {
        config.best_iterate = OuterConfig::BestIterate::kUniformRandom;
      } else if (mode == "grad_map") {
        config.best_iterate = OuterConfig::BestIterate::kGradMap;
      } else {
        throw ParseError("unknown best_iterate mode: " + mode);
      }
    }
    const json inner = require_field(j, "inner", "outer");
    config.inner.nu = require_field(inner, "nu", "inner").get<double>();
    config.inner.batch = require_field(inner, "k", "inner").get<int>();
    config.inner.horizon = require_field(inner, "h", "inner").get<int>();
    config.inner.eta_y = require_field(inner, "eta_y", "inner").get<double>();
    config.inner.zeta_y =
        require_field(inner, "zeta_y", "inner").get<double>();
    config.inner.epochs = require_field(inner, "t_y", "inner").get<int>();
    config.inner.epsilon_y =
        inner.contains("epsilon_y")
            ? inner.at("epsilon_y").get<double>()
            : config.inner.nu * config.epsilon * config.epsilon;
    if (inner.contains("u_mode")) {
      const std::string mode = inner.at("u_mode").get<std::string>();
      if (mode == "oracle") {
        config.inner.u_mode = InnerConfig::UMode::kOracle;
      } else if (mode == "empirical") {
        config.inner.u_mode = InnerConfig::UMode::kEmpirical;
      } else {
        throw ParseError("unknown u_mode: " + mode);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed config: ") + e.what());
  }
  return config;
}

std::string config_to_json_text(const OuterConfig& config) {
  json inner;
  inner["nu"] = config.inner.nu;
  inner["k"] = config.inner.batch;
  inner["h"] = config.inner.horizon;
  inner["eta_y"] = config.inner.eta_y;
  inner["zeta_y"] = config.inner.zeta_y;
  inner["t_y"] = config.inner.epochs;
  inner["epsilon_y"] = config.inner.epsilon_y;
  inner["u_mode"] =
      config.inner.u_mode == InnerConfig::UMode::kOracle ? "oracle"
                                                         : "empirical";
  json j;
  j["eta_x"] = config.eta_x;
  j["t_x"] = config.iterations;
  j["m"] = config.batch;
  j["zeta_x"] = config.zeta_x;
  j["epsilon"] = config.epsilon;
  j["inner"] = inner;
  switch (config.best_iterate) {
    case OuterConfig::BestIterate::kNashGap:
      j["best_iterate"] = "nash_gap";
      break;
    case OuterConfig::BestIterate::kUniformRandom:
      j["best_iterate"] = "uniform_random";
      break;
    case OuterConfig::BestIterate::kGradMap:
      j["best_iterate"] = "grad_map";
      break;
  }
  return j.dump(2);
}

void write_run_log_csv(const RunLog& log, const std::string& path) {
  std::ofstream out(path);
  ATMG_CHECK(out.good(), ParseError, "cannot open for writing: " << path);
  out << "iter,inner_epochs,value_est,nash_gap,wall_ms,seed\n";
  out.precision(17);
  for (const RunRecord& r : log.records) {
    out << r.iter << "," << r.inner_epochs << "," << r.value_est << ","
        << r.nash_gap << "," << r.wall_ms << "," << r.seed << "\n";
  }
}

VisRegResult vis_reg_pg(const GameSpec& spec,
                        const std::vector<AgentPolicy>& team,
                        const InnerConfig& config, std::uint64_t master,
                        std::uint64_t outer_iter, bool exact_gradients,
                        int threads) {
  const int S = spec.num_states;
  const int B = spec.adversary_action_size;
  VisRegResult out;
  out.y = AgentPolicy::Constant(S, B, 1.0 / B);
  if (B == 1) {
    out.value_estimate =
        exact_regularized_value(spec, {team, out.y}, config.nu);
    return out;
  }

  if (exact_gradients) {
    double residual = std::numeric_limits<double>::infinity();
    long epoch = 0;
    for (; epoch < config.epochs; ++epoch) {
      const PolicyProfile profile{team, out.y};
      const Eigen::MatrixXd g =
          exact_adversary_gradient(spec, profile, config.nu);
      residual = (project_policy(out.y + g, config.zeta_y) - out.y).norm();
      if (residual < 1e-12) break;
      out.y = project_policy(out.y + config.eta_y * g, config.zeta_y);
    }
    out.epochs_used = epoch;
    out.final_residual = residual;
    out.value_estimate =
        exact_regularized_value(spec, {team, out.y}, config.nu);
    return out;
  }

  RewardVectorProvider provider(
      config.u_mode == InnerConfig::UMode::kOracle
          ? RewardVectorProvider::Mode::kOracle
          : RewardVectorProvider::Mode::kEmpirical,
      spec, team);
  Eigen::MatrixXd lambda_hat = Eigen::MatrixXd::Zero(S, B);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const PolicyProfile profile{team, out.y};
    const auto batch =
        sample_batch(spec, profile, config.batch, config.horizon, master,
                     inner_stream(outer_iter, epoch), threads);
    lambda_hat = visitation_batch(batch, spec.discount, S, B);
    provider.observe(batch);
    const Eigen::MatrixXd utility =
        provider.current() - config.nu * lambda_hat;
    Eigen::MatrixXd g_hat = Eigen::MatrixXd::Zero(S, B);
    for (const Trajectory& t : batch) {
      g_hat += adversary_gradient_single(t, out.y, utility, spec.discount);
    }
    g_hat /= double(config.batch);
    ATMG_CHECK(g_hat.allFinite(), NumericError,
               "non-finite inner gradient estimate at epoch " << epoch);
    out.y = project_policy(out.y + config.eta_y * g_hat, config.zeta_y);
    out.epochs_used = epoch + 1;
  }
  out.value_estimate =
      (provider.current().array() * lambda_hat.array()).sum() -
      0.5 * config.nu * lambda_hat.squaredNorm();
  return out;
}

namespace {

// aggregate gradient-mapping norm of the team's fresh-batch estimates
double team_grad_map_norm(const GameSpec& spec, const PolicyProfile& profile,
                          const OuterConfig& config, std::uint64_t master,
                          std::uint64_t outer, bool exact, int threads) {
  double sq = 0.0;
  for (int i = 0; i < spec.num_team_players(); ++i) {
    Eigen::MatrixXd g;
    if (exact) {
      g = exact_team_gradient(spec, profile, i);
    } else {
      g = reinforce_team(spec, profile, i, config.batch, master,
                         outer + 7777 * (i + 1), threads)
              .estimate;
    }
    const AgentPolicy stepped =
        project_policy(profile.team[i] - config.eta_x * g, config.zeta_x);
    sq += ((profile.team[i] - stepped) / config.eta_x).squaredNorm();
  }
  return std::sqrt(sq);
}

}  // namespace

IspngResult ispng(const GameSpec& spec, const OuterConfig& config,
                  std::uint64_t seed, const IspngOptions& options) {
  validate_config(spec, config);
  const int n = spec.num_team_players();
  IspngResult out;

  std::vector<std::vector<AgentPolicy>> xs;  // x^0 ... x^T
  std::vector<AgentPolicy> ys;               // y^1 ... y^{T+1}
  std::vector<double> candidate_gaps;        // gap at (x^{t-1}, y^t)
  std::vector<long> inner_epochs;
  std::vector<double> value_estimates;

  std::vector<AgentPolicy> x = uniform_profile(spec).team;
  for (int i = 0; i < n; ++i) x[i] = project_policy(x[i], config.zeta_x);
  xs.push_back(x);

  const auto start = std::chrono::steady_clock::now();
  for (int t = 1; t <= config.iterations; ++t) {
    const VisRegResult inner = vis_reg_pg(spec, x, config.inner, seed, t,
                                          options.exact_oracles,
                                          options.threads);
    ys.push_back(inner.y);
    inner_epochs.push_back(inner.epochs_used);
    value_estimates.push_back(inner.value_estimate);
    const PolicyProfile profile{x, inner.y};

    double gap = std::numeric_limits<double>::quiet_NaN();
    if (options.evaluate_gap ||
        config.best_iterate == OuterConfig::BestIterate::kNashGap) {
      gap = nash_gap(spec, profile);
    }
    candidate_gaps.push_back(gap);

    // shared rollout batch; each player estimates from its own view only
    std::vector<AgentPolicy> next = x;
    if (options.exact_oracles) {
      for (int i = 0; i < n; ++i) {
        const Eigen::MatrixXd g = exact_team_gradient(spec, profile, i);
        next[i] = project_policy(x[i] - config.eta_x * g, config.zeta_x);
      }
    } else {
      const auto batch = sample_geometric_batch(
          spec, profile, config.batch, seed ^ 0x7e33ULL, std::uint64_t(t),
          options.threads);
      for (int i = 0; i < n; ++i) {
        std::vector<TeamPlayerView> views;
        views.reserve(batch.size());
        for (const Trajectory& traj : batch) views.push_back(team_view(traj, i, n));
        const Eigen::MatrixXd g = reinforce_from_views(views, x[i], n);
        ATMG_CHECK(g.allFinite(), NumericError,
                   "non-finite REINFORCE estimate at iteration " << t);
        next[i] = project_policy(x[i] - config.eta_x * g, config.zeta_x);
      }
    }
    x = next;
    xs.push_back(x);

    out.log.records.push_back({t, inner_epochs.back(), value_estimates.back(),
                               gap, elapsed_ms(start), seed});
  }

  // final inner response for the last candidate pair
  const VisRegResult last = vis_reg_pg(spec, x, config.inner,
                                       seed, std::uint64_t(config.iterations) + 1,
                                       options.exact_oracles, options.threads);
  ys.push_back(last.y);
  if (options.evaluate_gap ||
      config.best_iterate == OuterConfig::BestIterate::kNashGap) {
    candidate_gaps.push_back(nash_gap(spec, {x, last.y}));
  } else {
    candidate_gaps.push_back(std::numeric_limits<double>::quiet_NaN());
  }

  // candidates t = 0..T pair x^t with y^{t+1}
  const int num_candidates = config.iterations + 1;
  int best = num_candidates - 1;
  switch (config.best_iterate) {
    case OuterConfig::BestIterate::kNashGap: {
      for (int t = 0; t < num_candidates; ++t) {
        if (candidate_gaps[t] < candidate_gaps[best]) best = t;
      }
      break;
    }
    case OuterConfig::BestIterate::kUniformRandom: {
      CounterRng rng(seed, 0x5e1ec7ULL, 0);
      best = static_cast<int>(rng.next_u64() % std::uint64_t(num_candidates));
      break;
    }
    case OuterConfig::BestIterate::kGradMap: {
      double best_norm = std::numeric_limits<double>::infinity();
      for (int t = 0; t < num_candidates; ++t) {
        const double norm = team_grad_map_norm(
            spec, {xs[t], ys[t]}, config, seed ^ 0xf2e5ULL,
            std::uint64_t(t) + 1, options.exact_oracles, options.threads);
        if (norm < best_norm) {
          best_norm = norm;
          best = t;
        }
      }
      break;
    }
  }

  out.t_star = best;
  out.x_star = xs[best];
  out.y_star = ys[best];
  out.final_gap = options.evaluate_gap ||
                          config.best_iterate ==
                              OuterConfig::BestIterate::kNashGap
                      ? candidate_gaps[best]
                      : nash_gap(spec, {out.x_star, out.y_star});
  return out;
}

TuningSchedule evaluate_tuning(const TuningParams& p) {
  TuningSchedule s;
  const double om = 1.0 - p.gamma;
  const double sumAB = p.sumAB;
  s.T = 1061683200.0 * std::pow(p.Dm, 5) * std::sqrt(p.n) *
        std::pow(p.S, 4.5) * std::pow(sumAB, 6) /
        (std::pow(om, 24) * p.min_rho * p.min_rho * std::pow(p.eps, 5));
  s.eta_x = p.min_rho * p.min_rho * std::pow(om, 22) * std::pow(p.eps, 3) /
            (33177600.0 * std::pow(p.Dm, 3) * std::sqrt(p.n) *
             std::pow(p.S, 4.5) * std::pow(sumAB, 6));
  s.zeta_x = std::pow(om, 3) * p.eps /
             (6.0 * p.Dm * p.S * std::pow(sumAB, 1.5));
  s.M = 2034.0 * std::pow(p.Dm, 3) * p.S * std::pow(sumAB, 3.5) /
        (std::pow(om, 10) * std::pow(p.min_rho, 4) * std::pow(p.eps, 3)) *
        std::max(std::pow(om, 4) * std::pow(p.min_rho, 4) * sumAB / p.S, 4.5);
  s.nu = std::pow(om, 4) * p.eps / (48.0 * p.Dm * p.S * sumAB);
  s.T_y = std::pow(p.Dm, 5) * std::pow(p.S, 6) * std::pow(sumAB, 9) /
          (std::pow(om, 21) * std::pow(p.min_rho, 4) * std::pow(p.eps, 5));
  s.eta_y = std::pow(om, 28) * std::pow(p.min_rho, 4) * std::pow(p.eps, 4) /
            (978447237120.0 * std::pow(p.Dm, 4) * std::pow(p.S, 5) *
             std::pow(sumAB, 8));
  s.zeta_y = std::pow(om, 15) * p.min_rho * p.min_rho * std::pow(p.eps, 3) /
             (18432.0 * p.Dm * p.Dm * std::pow(p.S, 3.5) * std::pow(sumAB, 6));
  s.K = 19365101568.0 * std::pow(p.Dm, 4) * std::pow(p.S, 7) *
        std::pow(sumAB, 12) /
        (std::pow(om, 36) * std::pow(p.min_rho, 4) * std::pow(p.eps, 6));
  s.H = 2.0 / om *
        std::log(2293235712.0 * std::pow(p.Dm, 4) * std::pow(p.S, 4) *
                 std::pow(sumAB, 6) /
                 (std::pow(om, 22) * p.min_rho * p.min_rho *
                  std::pow(p.eps, 4)));
  s.epsilon_y = s.nu * p.eps * p.eps;
  return s;
}

TuningSchedule paper_tuning(const GameSpec& spec, double eps,
                            double iteration_budget) {
  ATMG_CHECK(eps > 0.0, UsageError, "eps must be positive");
  TuningParams params;
  params.n = spec.num_team_players();
  params.S = spec.num_states;
  params.sumAB = spec.sum_action_sizes();
  params.min_rho = spec.initial_dist.minCoeff();
  params.gamma = spec.discount;
  params.Dm = 1.0 / ((1.0 - spec.discount) * params.min_rho);
  params.eps = eps;

  TuningSchedule s = evaluate_tuning(params);
  const double zeta_x_cap = 0.5 / spec.max_team_action_size();
  const double zeta_y_cap = 0.5 / spec.adversary_action_size;
  if (s.zeta_x > zeta_x_cap) {
    std::ostringstream oss;
    oss << "zeta_x " << s.zeta_x << " exceeds 1/(2 max_i A_i); clamped to "
        << zeta_x_cap;
    s.warnings.push_back(oss.str());
    ATMG_WARN(oss.str());
    s.zeta_x = zeta_x_cap;
  }
  if (s.zeta_y > zeta_y_cap) {
    std::ostringstream oss;
    oss << "zeta_y " << s.zeta_y << " exceeds 1/(2B); clamped to "
        << zeta_y_cap;
    s.warnings.push_back(oss.str());
    ATMG_WARN(oss.str());
    s.zeta_y = zeta_y_cap;
  }
  if (s.T > iteration_budget) {
    std::ostringstream oss;
    oss << "schedule T = " << s.T << " exceeds the budget "
        << iteration_budget << "; the schedule is for auditing, not running";
    s.warnings.push_back(oss.str());
    ATMG_WARN(oss.str());
  }
  return s;
}

std::string tuning_to_json_text(const TuningSchedule& s) {
  json j;
  j["t_x"] = s.T;
  j["eta_x"] = s.eta_x;
  j["zeta_x"] = s.zeta_x;
  j["m"] = s.M;
  j["nu"] = s.nu;
  j["t_y"] = s.T_y;
  j["eta_y"] = s.eta_y;
  j["zeta_y"] = s.zeta_y;
  j["k"] = s.K;
  j["h"] = s.H;
  j["epsilon_y"] = s.epsilon_y;
  j["warnings"] = s.warnings;
  return j.dump(2);
}

std::string constants_to_json_text(const PaperConstants& c) {
  json j;
  j["L"] = c.L;
  j["ell"] = c.ell;
  j["L_lambda"] = c.L_lambda;
  j["ell_lambda"] = c.ell_lambda;
  j["L_lambda_inv"] = c.L_lambda_inv;
  j["L_nu"] = c.L_nu;
  j["ell_nu"] = c.ell_nu;
  j["L_r"] = c.L_r;
  j["L_star"] = c.L_star;
  j["ell_half"] = c.ell_half;
  j["D_m_bound"] = c.D_m_bound;
  j["inexactness"] = c.inexactness;
  return j.dump(2);
}

GapBreakdown evaluate_profile(const GameSpec& spec,
                              const PolicyProfile& profile) {
  return nash_gap_breakdown(spec, profile);
}

}  // namespace atmg
