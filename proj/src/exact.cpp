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

#include "atmg/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace atmg {

namespace {

std::vector<std::vector<int>> joint_action_table(const GameSpec& spec) {
  const JointActionIndex idx = spec.joint_index();
  std::vector<std::vector<int>> table(idx.joint_size());
  for (int a = 0; a < idx.joint_size(); ++a) table[a] = idx.unflatten(a);
  return table;
}

Eigen::VectorXd solve_bellman(const Eigen::MatrixXd& transition, double gamma,
                              const Eigen::VectorXd& reward) {
  const int S = static_cast<int>(reward.size());
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(S, S) - gamma * transition;
  return system.partialPivLu().solve(reward);
}

}  // namespace

Eigen::MatrixXd induced_transition(const GameSpec& spec,
                                   const PolicyProfile& profile) {
  const int S = spec.num_states;
  const int JA = spec.joint_action_size();
  const int B = spec.adversary_action_size;
  const auto actions = joint_action_table(spec);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(S, S);
  for (int s = 0; s < S; ++s) {
    const Eigen::VectorXd joint =
        team_joint_distribution(spec, profile.team, s);
    for (int a = 0; a < JA; ++a) {
      if (joint(a) == 0.0) continue;
      for (int b = 0; b < B; ++b) {
        const double w = joint(a) * profile.adversary(s, b);
        if (w == 0.0) continue;
        for (int s2 = 0; s2 < S; ++s2) P(s, s2) += w * spec.p(s, a, b, s2);
      }
    }
  }
  return P;
}

Eigen::VectorXd induced_reward(const GameSpec& spec,
                               const PolicyProfile& profile) {
  const int S = spec.num_states;
  const Eigen::MatrixXd rx = adversary_reward_matrix(spec, profile.team);
  Eigen::VectorXd r(S);
  for (int s = 0; s < S; ++s) {
    r(s) = rx.row(s).dot(profile.adversary.row(s));
  }
  return r;
}

Eigen::MatrixXd adversary_reward_matrix(const GameSpec& spec,
                                        const std::vector<AgentPolicy>& team) {
  const int S = spec.num_states;
  const int JA = spec.joint_action_size();
  const int B = spec.adversary_action_size;
  Eigen::MatrixXd rx = Eigen::MatrixXd::Zero(S, B);
  for (int s = 0; s < S; ++s) {
    const Eigen::VectorXd joint = team_joint_distribution(spec, team, s);
    for (int a = 0; a < JA; ++a) {
      if (joint(a) == 0.0) continue;
      for (int b = 0; b < B; ++b) rx(s, b) += joint(a) * spec.r(s, a, b);
    }
  }
  return rx;
}

Eigen::MatrixXd adversary_transition(const GameSpec& spec,
                                     const std::vector<AgentPolicy>& team) {
  const int S = spec.num_states;
  const int JA = spec.joint_action_size();
  const int B = spec.adversary_action_size;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(S * B, S);
  for (int s = 0; s < S; ++s) {
    const Eigen::VectorXd joint = team_joint_distribution(spec, team, s);
    for (int a = 0; a < JA; ++a) {
      if (joint(a) == 0.0) continue;
      for (int b = 0; b < B; ++b) {
        for (int s2 = 0; s2 < S; ++s2) {
          T(s * B + b, s2) += joint(a) * spec.p(s, a, b, s2);
        }
      }
    }
  }
  return T;
}

Eigen::VectorXd team_joint_distribution(const GameSpec& spec,
                                        const std::vector<AgentPolicy>& team,
                                        int state) {
  const JointActionIndex idx = spec.joint_index();
  const int JA = idx.joint_size();
  Eigen::VectorXd joint = Eigen::VectorXd::Ones(JA);
  // Row-major over (a_1, ..., a_n): the last player's index varies fastest.
  int block = JA;
  for (int i = 0; i < idx.num_players(); ++i) {
    const int ai = idx.size(i);
    block /= ai;
    for (int a = 0; a < JA; ++a) {
      joint(a) *= team[i]((Eigen::Index)state, (a / block) % ai);
    }
  }
  return joint;
}

ValueResult exact_value(const GameSpec& spec, const PolicyProfile& profile) {
  ValueResult out;
  const Eigen::MatrixXd P = induced_transition(spec, profile);
  const Eigen::VectorXd r = induced_reward(spec, profile);
  out.per_state = solve_bellman(P, spec.discount, r);
  out.v_rho = spec.initial_dist.dot(out.per_state);
  out.residual = (out.per_state - spec.discount * P * out.per_state - r)
                     .cwiseAbs()
                     .maxCoeff();
  ATMG_CHECK(out.per_state.allFinite(), NumericError,
             "non-finite value solve");
  if (out.residual > 1e-8) {
    ATMG_WARN("Bellman solve residual " << out.residual << " exceeds 1e-8");
  }
  return out;
}

double exact_regularized_value(const GameSpec& spec,
                               const PolicyProfile& profile, double nu) {
  const double v = exact_value(spec, profile).v_rho;
  if (nu == 0.0) return v;
  const VisitationResult vis = exact_visitation(spec, profile);
  return v - 0.5 * nu * vis.lambda.squaredNorm();
}

VisitationResult exact_visitation(const GameSpec& spec,
                                  const PolicyProfile& profile) {
  VisitationResult out;
  const int S = spec.num_states;
  const Eigen::MatrixXd P = induced_transition(spec, profile);
  // d' = rho' + gamma d' P  <=>  (I - gamma P') d = rho
  out.d = solve_bellman(P.transpose(), spec.discount, spec.initial_dist);
  ATMG_CHECK(out.d.allFinite(), NumericError, "non-finite visitation solve");
  const double residual =
      (out.d - spec.discount * P.transpose() * out.d - spec.initial_dist)
          .cwiseAbs()
          .maxCoeff();
  if (residual > 1e-8) {
    ATMG_WARN("visitation solve residual " << residual << " exceeds 1e-8");
  }
  out.lambda.resize(S, spec.adversary_action_size);
  for (int s = 0; s < S; ++s) {
    out.lambda.row(s) = out.d(s) * profile.adversary.row(s);
  }
  return out;
}

Eigen::MatrixXd truncated_visitation(const GameSpec& spec,
                                     const PolicyProfile& profile,
                                     int horizon) {
  const int S = spec.num_states;
  const int B = spec.adversary_action_size;
  const Eigen::MatrixXd P = induced_transition(spec, profile);
  Eigen::VectorXd occupancy = spec.initial_dist;
  Eigen::VectorXd weighted = Eigen::VectorXd::Zero(S);
  double discount = 1.0;
  for (int h = 0; h < horizon; ++h) {
    weighted += discount * occupancy;
    occupancy = P.transpose() * occupancy;
    discount *= spec.discount;
  }
  Eigen::MatrixXd lambda(S, B);
  for (int s = 0; s < S; ++s) {
    lambda.row(s) = weighted(s) * profile.adversary.row(s);
  }
  return lambda;
}

double flow_conservation_residual(const GameSpec& spec,
                                  const std::vector<AgentPolicy>& team,
                                  const Eigen::MatrixXd& lambda) {
  const int S = spec.num_states;
  const int B = spec.adversary_action_size;
  const Eigen::MatrixXd T = adversary_transition(spec, team);
  double worst = 0.0;
  for (int s = 0; s < S; ++s) {
    double inflow = spec.initial_dist(s);
    for (int s2 = 0; s2 < S; ++s2) {
      for (int b2 = 0; b2 < B; ++b2) {
        inflow += spec.discount * T(s2 * B + b2, s) * lambda(s2, b2);
      }
    }
    worst = std::max(worst, std::abs(lambda.row(s).sum() - inflow));
  }
  return worst;
}

Eigen::MatrixXd team_gradient_with_reward(
    const GameSpec& spec, const PolicyProfile& profile, int player,
    const std::function<double(int, int, int)>& reward) {
  const int S = spec.num_states;
  const int JA = spec.joint_action_size();
  const int B = spec.adversary_action_size;
  const int Ai = spec.team_action_sizes[player];
  const auto actions = joint_action_table(spec);

  Eigen::VectorXd state_reward = Eigen::VectorXd::Zero(S);
  for (int s = 0; s < S; ++s) {
    const Eigen::VectorXd joint =
        team_joint_distribution(spec, profile.team, s);
    for (int a = 0; a < JA; ++a) {
      if (joint(a) == 0.0) continue;
      for (int b = 0; b < B; ++b) {
        state_reward(s) += joint(a) * profile.adversary(s, b) * reward(s, a, b);
      }
    }
  }
  const Eigen::MatrixXd P = induced_transition(spec, profile);
  const Eigen::VectorXd value = solve_bellman(P, spec.discount, state_reward);
  const Eigen::VectorXd d =
      solve_bellman(P.transpose(), spec.discount, spec.initial_dist);

  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(S, Ai);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < JA; ++a) {
      // joint probability of the other team players' actions
      double others = 1.0;
      for (int j = 0; j < spec.num_team_players(); ++j) {
        if (j == player) continue;
        others *= profile.team[j](s, actions[a][j]);
      }
      if (others == 0.0) continue;
      double q = 0.0;
      for (int b = 0; b < B; ++b) {
        double qab = reward(s, a, b);
        if (spec.discount > 0.0) {
          for (int s2 = 0; s2 < S; ++s2) {
            qab += spec.discount * spec.p(s, a, b, s2) * value(s2);
          }
        }
        q += profile.adversary(s, b) * qab;
      }
      grad(s, actions[a][player]) += d(s) * others * q;
    }
  }
  return grad;
}

Eigen::MatrixXd exact_team_gradient(const GameSpec& spec,
                                    const PolicyProfile& profile, int player) {
  return team_gradient_with_reward(
      spec, profile, player,
      [&spec](int s, int a, int b) { return spec.r(s, a, b); });
}

namespace {

// [d lambda / d x_i]' lambda.  The team policy reaches lambda = d(x) * y
// only through the state visitation d, so the gradient is the pure flow
// term gamma d(s) E_{a_-i, b}[ P(. | s, a, b) . u ] with u solving the
// Bellman system for the frozen potential phi(s) = d(s) sum_b y(s,b)^2;
// there is no immediate-reward piece.
Eigen::MatrixXd team_regularizer_gradient(const GameSpec& spec,
                                          const PolicyProfile& profile,
                                          int player) {
  const int S = spec.num_states;
  const int JA = spec.joint_action_size();
  const int B = spec.adversary_action_size;
  const int Ai = spec.team_action_sizes[player];
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(S, Ai);
  if (spec.discount == 0.0) return grad;

  const auto actions = joint_action_table(spec);
  const VisitationResult vis = exact_visitation(spec, profile);
  Eigen::VectorXd potential(S);
  for (int s = 0; s < S; ++s) {
    potential(s) = vis.d(s) * profile.adversary.row(s).squaredNorm();
  }
  const Eigen::MatrixXd P = induced_transition(spec, profile);
  const Eigen::VectorXd u = solve_bellman(P, spec.discount, potential);

  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < JA; ++a) {
      double others = 1.0;
      for (int j = 0; j < spec.num_team_players(); ++j) {
        if (j == player) continue;
        others *= profile.team[j](s, actions[a][j]);
      }
      if (others == 0.0) continue;
      double flow = 0.0;
      for (int b = 0; b < B; ++b) {
        double next = 0.0;
        for (int s2 = 0; s2 < S; ++s2) next += spec.p(s, a, b, s2) * u(s2);
        flow += profile.adversary(s, b) * next;
      }
      grad(s, actions[a][player]) +=
          spec.discount * vis.d(s) * others * flow;
    }
  }
  return grad;
}

}  // namespace

Eigen::MatrixXd exact_team_gradient_regularized(const GameSpec& spec,
                                                const PolicyProfile& profile,
                                                int player, double nu) {
  if (nu == 0.0) return exact_team_gradient(spec, profile, player);
  return exact_team_gradient(spec, profile, player) -
         nu * team_regularizer_gradient(spec, profile, player);
}

Eigen::MatrixXd adversary_gradient_for_utility(const GameSpec& spec,
                                               const PolicyProfile& profile,
                                               const Eigen::MatrixXd& utility) {
  const int S = spec.num_states;
  const int B = spec.adversary_action_size;
  Eigen::VectorXd state_reward(S);
  for (int s = 0; s < S; ++s) {
    state_reward(s) = utility.row(s).dot(profile.adversary.row(s));
  }
  const Eigen::MatrixXd P = induced_transition(spec, profile);
  const Eigen::VectorXd value = solve_bellman(P, spec.discount, state_reward);
  const Eigen::VectorXd d =
      solve_bellman(P.transpose(), spec.discount, spec.initial_dist);
  const Eigen::MatrixXd T = adversary_transition(spec, profile.team);

  Eigen::MatrixXd grad(S, B);
  for (int s = 0; s < S; ++s) {
    for (int b = 0; b < B; ++b) {
      double q = utility(s, b);
      if (spec.discount > 0.0) {
        q += spec.discount * T.row(s * B + b).dot(value);
      }
      grad(s, b) = d(s) * q;
    }
  }
  return grad;
}

Eigen::MatrixXd exact_adversary_gradient(const GameSpec& spec,
                                         const PolicyProfile& profile,
                                         double nu) {
  Eigen::MatrixXd u = adversary_reward_matrix(spec, profile.team);
  if (nu != 0.0) {
    u -= nu * exact_visitation(spec, profile).lambda;
  }
  return adversary_gradient_for_utility(spec, profile, u);
}

Eigen::MatrixXd adversary_gradient_for_utility_truncated(
    const GameSpec& spec, const PolicyProfile& profile,
    const Eigen::MatrixXd& utility, int horizon) {
  const int S = spec.num_states;
  const int B = spec.adversary_action_size;
  const Eigen::MatrixXd T = adversary_transition(spec, profile.team);
  const Eigen::MatrixXd P = induced_transition(spec, profile);

  // W_k(s): expected discounted utility over k remaining steps
  std::vector<Eigen::VectorXd> w(horizon + 1, Eigen::VectorXd::Zero(S));
  Eigen::VectorXd ubar(S);
  for (int s = 0; s < S; ++s) {
    ubar(s) = utility.row(s).dot(profile.adversary.row(s));
  }
  for (int k = 1; k <= horizon; ++k) {
    w[k] = ubar + spec.discount * (P * w[k - 1]);
  }

  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(S, B);
  Eigen::VectorXd occupancy = spec.initial_dist;
  double discount = 1.0;
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < S; ++s) {
      if (occupancy(s) == 0.0) continue;
      for (int b = 0; b < B; ++b) {
        double q = utility(s, b);
        if (horizon - 1 - h > 0) {
          q += spec.discount * T.row(s * B + b).dot(w[horizon - 1 - h]);
        }
        grad(s, b) += discount * occupancy(s) * q;
      }
    }
    occupancy = P.transpose() * occupancy;
    discount *= spec.discount;
  }
  return grad;
}

namespace {

// Optimal control of a single-agent MDP given per-(state, action) reward and
// kernel rows; maximize or minimize.  Value iteration to residual 1e-10,
// then an exact evaluation of the greedy policy.
BestResponse solve_mdp(const Eigen::MatrixXd& reward,    // S x C
                       const Eigen::MatrixXd& kernel,    // (S*C) x S
                       double gamma, const Eigen::VectorXd& rho,
                       bool maximize) {
  const int S = static_cast<int>(reward.rows());
  const int C = static_cast<int>(reward.cols());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(S);
  const double sign = maximize ? 1.0 : -1.0;
  for (int iter = 0; iter < 1000000; ++iter) {
    Eigen::VectorXd next(S);
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < C; ++c) {
        const double q =
            reward(s, c) + gamma * kernel.row(s * C + c).dot(v);
        best = std::max(best, sign * q);
      }
      next(s) = sign * best;
    }
    const double residual = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (residual <= 1e-10 || gamma == 0.0) break;
  }

  BestResponse out;
  out.actions.resize(S);
  for (int s = 0; s < S; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int c = 0; c < C; ++c) {
      const double q = sign * (reward(s, c) + gamma * kernel.row(s * C + c).dot(v));
      if (q > best) {
        best = q;
        arg = c;
      }
    }
    out.actions(s) = arg;
  }
  Eigen::MatrixXd P_pi(S, S);
  Eigen::VectorXd r_pi(S);
  for (int s = 0; s < S; ++s) {
    P_pi.row(s) = kernel.row(s * C + out.actions(s));
    r_pi(s) = reward(s, out.actions(s));
  }
  out.per_state = solve_bellman(P_pi, gamma, r_pi);
  out.value = rho.dot(out.per_state);
  return out;
}

}  // namespace

BestResponse best_response_adversary(const GameSpec& spec,
                                     const std::vector<AgentPolicy>& team) {
  return solve_mdp(adversary_reward_matrix(spec, team),
                   adversary_transition(spec, team), spec.discount,
                   spec.initial_dist, /*maximize=*/true);
}

BestResponse best_response_team(const GameSpec& spec,
                                const PolicyProfile& profile, int player) {
  const int S = spec.num_states;
  const int JA = spec.joint_action_size();
  const int B = spec.adversary_action_size;
  const int Ai = spec.team_action_sizes[player];
  const auto actions = joint_action_table(spec);

  Eigen::MatrixXd reward = Eigen::MatrixXd::Zero(S, Ai);
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(S * Ai, S);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < JA; ++a) {
      double others = 1.0;
      for (int j = 0; j < spec.num_team_players(); ++j) {
        if (j == player) continue;
        others *= profile.team[j](s, actions[a][j]);
      }
      if (others == 0.0) continue;
      const int ai = actions[a][player];
      for (int b = 0; b < B; ++b) {
        const double w = others * profile.adversary(s, b);
        if (w == 0.0) continue;
        reward(s, ai) += w * spec.r(s, a, b);
        for (int s2 = 0; s2 < S; ++s2) {
          kernel(s * Ai + ai, s2) += w * spec.p(s, a, b, s2);
        }
      }
    }
  }
  return solve_mdp(reward, kernel, spec.discount, spec.initial_dist,
                   /*maximize=*/false);
}

GapBreakdown nash_gap_breakdown(const GameSpec& spec,
                                const PolicyProfile& profile) {
  GapBreakdown out;
  out.value = exact_value(spec, profile).v_rho;
  out.gap = 0.0;
  for (int i = 0; i < spec.num_team_players(); ++i) {
    const double gain = out.value - best_response_team(spec, profile, i).value;
    out.team_gains.push_back(gain);
    out.gap = std::max(out.gap, gain);
  }
  out.adversary_gain =
      best_response_adversary(spec, profile.team).value - out.value;
  out.gap = std::max(out.gap, out.adversary_gain);
  return out;
}

double nash_gap(const GameSpec& spec, const PolicyProfile& profile) {
  return nash_gap_breakdown(spec, profile).gap;
}

// --- inner maximization of the regularized value ----------------------------

namespace {

double regularized_value_of_y(const GameSpec& spec,
                              const std::vector<AgentPolicy>& team,
                              const AgentPolicy& y, double nu) {
  PolicyProfile profile{team, y};
  const ValueResult v = exact_value(spec, profile);
  if (nu == 0.0) return v.v_rho;
  return v.v_rho - 0.5 * nu * exact_visitation(spec, profile).lambda.squaredNorm();
}

double gradient_mapping_residual(const GameSpec& spec,
                                 const std::vector<AgentPolicy>& team,
                                 const AgentPolicy& y, double nu,
                                 double zeta_y) {
  PolicyProfile profile{team, y};
  const Eigen::MatrixXd g = exact_adversary_gradient(spec, profile, nu);
  const AgentPolicy stepped = project_policy(y + g, zeta_y);
  return (stepped - y).norm();
}

// Exact solve of max r~'lambda - (nu/2)||lambda||^2 over the visitation
// polytope {C lambda = rho, lambda(s,b) >= zeta * rowsum_s} by active-set
// enumeration.  Any KKT point of the strongly concave program is the unique
// global maximizer, so the first verified candidate wins.  Subsets are
// visited in order of size; a subset activating a whole state row is
// infeasible (rowsum >= rho(s) > 0) and is skipped.
struct KktSolution {
  Eigen::MatrixXd lambda;
  double value = 0.0;
};

std::optional<KktSolution> kkt_inner_max(const GameSpec& spec,
                                         const std::vector<AgentPolicy>& team,
                                         double nu, double zeta_y) {
  const int S = spec.num_states;
  const int B = spec.adversary_action_size;
  const int SB = S * B;
  if (SB > 30) return std::nullopt;

  const Eigen::MatrixXd rx = adversary_reward_matrix(spec, team);
  const Eigen::MatrixXd T = adversary_transition(spec, team);
  Eigen::VectorXd rtil(SB);
  for (int s = 0; s < S; ++s) {
    for (int b = 0; b < B; ++b) rtil(s * B + b) = rx(s, b);
  }
  // flow constraints C lambda = rho
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(S, SB);
  for (int s = 0; s < S; ++s) {
    for (int s2 = 0; s2 < S; ++s2) {
      for (int b2 = 0; b2 < B; ++b2) {
        C(s, s2 * B + b2) =
            (s == s2 ? 1.0 : 0.0) - spec.discount * T(s2 * B + b2, s);
      }
    }
  }
  // inequality rows G lambda >= 0, one per (s, b)
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(SB, SB);
  for (int s = 0; s < S; ++s) {
    for (int b = 0; b < B; ++b) {
      for (int b2 = 0; b2 < B; ++b2) {
        G(s * B + b, s * B + b2) = (b == b2 ? 1.0 : 0.0) - zeta_y;
      }
    }
  }

  std::vector<std::uint32_t> row_masks(S, 0);
  for (int s = 0; s < S; ++s) {
    for (int b = 0; b < B; ++b) row_masks[s] |= (1u << (s * B + b));
  }

  const double tol = 1e-9;
  auto try_active_set = [&](std::uint32_t mask) -> std::optional<KktSolution> {
    for (int s = 0; s < S; ++s) {
      if ((mask & row_masks[s]) == row_masks[s]) return std::nullopt;
    }
    std::vector<int> active;
    for (int i = 0; i < SB; ++i) {
      if (mask & (1u << i)) active.push_back(i);
    }
    const int k = static_cast<int>(active.size());
    const int dim = SB + S + k;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    kkt.topLeftCorner(SB, SB) = nu * Eigen::MatrixXd::Identity(SB, SB);
    kkt.block(0, SB, SB, S) = C.transpose();
    kkt.block(SB, 0, S, SB) = C;
    for (int j = 0; j < k; ++j) {
      kkt.block(0, SB + S + j, SB, 1) = -G.row(active[j]).transpose();
      kkt.block(SB + S + j, 0, 1, SB) = G.row(active[j]);
    }
    rhs.head(SB) = rtil;
    rhs.segment(SB, S) = spec.initial_dist;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) return std::nullopt;
    const Eigen::VectorXd sol = lu.solve(rhs);
    if (!sol.allFinite()) return std::nullopt;
    const Eigen::VectorXd lambda_vec = sol.head(SB);
    // primal feasibility of the inactive constraints
    for (int i = 0; i < SB; ++i) {
      if (mask & (1u << i)) continue;
      if (G.row(i).dot(lambda_vec) < -tol) return std::nullopt;
    }
    // dual feasibility
    for (int j = 0; j < k; ++j) {
      if (sol(SB + S + j) < -tol) return std::nullopt;
    }
    KktSolution out;
    out.lambda.resize(S, B);
    for (int s = 0; s < S; ++s) {
      for (int b = 0; b < B; ++b) out.lambda(s, b) = lambda_vec(s * B + b);
    }
    out.value = rtil.dot(lambda_vec) - 0.5 * nu * lambda_vec.squaredNorm();
    return out;
  };

  // size-ordered subset walk (Gosper); active sets are typically small
  for (int k = 0; k <= SB; ++k) {
    if (k == 0) {
      if (auto sol = try_active_set(0)) return sol;
      continue;
    }
    std::uint32_t mask = (1u << k) - 1;
    const std::uint32_t limit = 1u << SB;
    while (mask < limit) {
      if (auto sol = try_active_set(mask)) return sol;
      const std::uint32_t c = mask & -mask;
      const std::uint32_t r = mask + c;
      mask = (((r ^ mask) >> 2) / c) | r;
    }
  }
  return std::nullopt;
}

}  // namespace

InnerMaxResult inner_max_regularized(const GameSpec& spec,
                                     const std::vector<AgentPolicy>& team,
                                     double nu, double tol,
                                     const InnerMaxOptions& options) {
  ATMG_CHECK(nu > 0.0, UsageError,
             "inner maximization requires nu > 0 (unique maximizer)");
  ATMG_CHECK(tol > 0.0, UsageError, "tol must be positive");
  const int S = spec.num_states;
  const int B = spec.adversary_action_size;

  InnerMaxResult out;
  AgentPolicy y = options.warm_start
                      ? project_policy(*options.warm_start, options.zeta_y)
                      : AgentPolicy::Constant(S, B, 1.0 / B);
  if (B == 1) {
    out.y_star = AgentPolicy::Ones(S, 1);
    out.lambda_star = exact_visitation(spec, {team, out.y_star}).lambda;
    out.value = regularized_value_of_y(spec, team, out.y_star, nu);
    out.residual = 0.0;
    out.converged = true;
    return out;
  }

  double value = regularized_value_of_y(spec, team, y, nu);
  double eta = 1.0;
  long iter = 0;
  double residual = std::numeric_limits<double>::infinity();
  for (; iter < options.max_iterations; ++iter) {
    PolicyProfile profile{team, y};
    const Eigen::MatrixXd g = exact_adversary_gradient(spec, profile, nu);
    residual =
        (project_policy(y + g, options.zeta_y) - y).norm();
    if (residual < tol) break;
    bool moved = false;
    for (int back = 0; back < 60; ++back) {
      const AgentPolicy y_next = project_policy(y + eta * g, options.zeta_y);
      const double predicted =
          (g.array() * (y_next - y).array()).sum();
      const double value_next = regularized_value_of_y(spec, team, y_next, nu);
      if (value_next >= value + 1e-4 * predicted - 1e-15) {
        y = y_next;
        value = value_next;
        eta = std::min(eta * 1.5, 1e3);
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;  // stalled at numerical precision
  }

  out.y_star = y;
  out.residual = residual;
  out.iterations = iter;
  out.converged = residual < tol;

  if (!out.converged && options.use_kkt_refinement &&
      S * B <= options.kkt_max_entries) {
    if (auto kkt = kkt_inner_max(spec, team, nu, options.zeta_y)) {
      Eigen::MatrixXd lambda = kkt->lambda;
      AgentPolicy refined(S, B);
      for (int s = 0; s < S; ++s) {
        const double row = lambda.row(s).sum();
        ATMG_CHECK(row > 0.0, NumericError,
                   "visitation row sum vanished; rho must be full-support");
        refined.row(s) = lambda.row(s) / row;
      }
      const double refined_residual =
          gradient_mapping_residual(spec, team, refined, nu, options.zeta_y);
      if (refined_residual < out.residual) {
        out.y_star = refined;
        out.residual = refined_residual;
        out.converged = refined_residual < tol;
      }
    }
  }
  if (!out.converged) {
    ATMG_WARN("inner maximization stopped at residual "
              << out.residual << " (tol " << tol << ") after "
              << out.iterations << " iterations");
  }

  out.lambda_star = exact_visitation(spec, {team, out.y_star}).lambda;
  out.value = regularized_value_of_y(spec, team, out.y_star, nu);
  return out;
}

PhiNuResult exact_phi_nu_gradient(const GameSpec& spec,
                                  const std::vector<AgentPolicy>& team,
                                  double nu, double tol,
                                  const InnerMaxOptions& options) {
  PhiNuResult out;
  out.inner = inner_max_regularized(spec, team, nu, tol, options);
  out.phi = out.inner.value;
  const PolicyProfile profile{team, out.inner.y_star};
  for (int i = 0; i < spec.num_team_players(); ++i) {
    out.grad_team.push_back(
        exact_team_gradient_regularized(spec, profile, i, nu));
  }
  return out;
}

PaperConstants paper_constants(const GameSpec& spec, double nu) {
  ATMG_CHECK(nu >= 0.0, UsageError, "nu must be nonnegative");
  PaperConstants c;
  const double S = spec.num_states;
  const double n = spec.num_team_players();
  const double sumAB = spec.sum_action_sizes();
  const double gamma = spec.discount;
  const double one_minus = 1.0 - gamma;
  const double min_rho = spec.initial_dist.minCoeff();

  c.L = std::sqrt(sumAB) / (one_minus * one_minus);
  c.ell = 2.0 * gamma * sumAB / std::pow(one_minus, 3);
  c.L_lambda = std::sqrt(S) * sumAB / (one_minus * one_minus);
  c.ell_lambda = 2.0 * std::sqrt(S) * std::pow(sumAB, 1.5) /
                 std::pow(one_minus, 3);
  c.L_lambda_inv = 2.0 / (min_rho * one_minus);
  c.L_nu = c.L + nu * c.L_lambda / (2.0 * one_minus);
  c.ell_nu = c.ell + nu * c.ell_lambda / (2.0 * one_minus) +
             nu * c.L_lambda * c.L_lambda / 2.0;
  c.L_r = std::sqrt(S) * sumAB;
  if (nu > 0.0) {
    c.L_star = 2.0 * std::pow(n, 0.25) * std::sqrt(S) *
               std::pow(sumAB, 0.75) / (nu * std::pow(one_minus, 1.5));
    c.ell_half = 30.0 * std::pow(n, 0.25) * std::pow(S, 1.25) * sumAB * sumAB /
                 (nu * min_rho * std::pow(one_minus, 6.5));
  } else {
    c.L_star = std::numeric_limits<double>::infinity();
    c.ell_half = std::numeric_limits<double>::infinity();
  }
  c.D_m_bound = 1.0 / (one_minus * min_rho);
  c.inexactness = nu * c.L_lambda / one_minus;
  return c;
}

}  // namespace atmg
