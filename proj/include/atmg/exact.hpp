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

#ifndef ATMG_EXACT_HPP_
#define ATMG_EXACT_HPP_

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "atmg/game.hpp"
#include "atmg/policy.hpp"

namespace atmg {

// Closed-form (linear-algebraic) ground truth for a fixed profile: values,
// visitation measures, policy gradients, best responses, the regularized max
// function, and the model constants used by the tuning calculators.  All
// solves are direct factorizations; gamma < 1 keeps them well conditioned.

struct ValueResult {
  Eigen::VectorXd per_state;  // V_s
  double v_rho = 0.0;         // rho' V
  double residual = 0.0;      // Bellman residual of the solve, sup norm
};

struct VisitationResult {
  Eigen::VectorXd d;       // state visitation, sums to 1/(1-gamma)
  Eigen::MatrixXd lambda;  // adversary state-action visitation, S x B
};

// Closed-form evaluations of the model's Lipschitz/smoothness/Hoelder
// constants and derived quantities; D_m is the analytic upper bound
// 1/((1-gamma) min_s rho(s)), not the supremum over policies.
struct PaperConstants {
  double L = 0.0;             // value Lipschitz
  double ell = 0.0;           // value smoothness
  double L_lambda = 0.0;      // visitation Lipschitz
  double ell_lambda = 0.0;    // visitation smoothness
  double L_lambda_inv = 0.0;  // inverse map (measure -> policy) Lipschitz
  double L_nu = 0.0;          // regularized value Lipschitz
  double ell_nu = 0.0;        // regularized value smoothness
  double L_r = 0.0;           // adversary reward vector Lipschitz in x
  double L_star = 0.0;        // Hoelder constant of the argmax measure
  double ell_half = 0.0;      // Hoelder constant of grad Phi^nu
  double D_m_bound = 0.0;     // mismatch coefficient upper bound
  double inexactness = 0.0;   // gradient oracle inexactness theta(nu)
};

struct BestResponse {
  double value = 0.0;          // optimal rho-weighted value
  Eigen::VectorXi actions;     // deterministic optimal action per state
  Eigen::VectorXd per_state;   // optimal per-state values
};

struct GapBreakdown {
  double gap = 0.0;
  std::vector<double> team_gains;  // V - min_{x_i'} V, per team player
  double adversary_gain = 0.0;     // max_{y'} V - V
  double value = 0.0;              // V_rho at the profile
};

struct InnerMaxResult {
  AgentPolicy y_star;          // maximizer of the regularized value in y
  Eigen::MatrixXd lambda_star; // its visitation measure
  double value = 0.0;          // Phi^nu(x) = V^nu(x, y*)
  double residual = 0.0;       // gradient-mapping norm at y* (probe step 1)
  long iterations = 0;
  bool converged = false;
};

struct PhiNuResult {
  double phi = 0.0;
  std::vector<Eigen::MatrixXd> grad_team;  // d Phi^nu / d x_i, S x A_i each
  InnerMaxResult inner;
};

struct InnerMaxOptions {
  double zeta_y = 0.0;       // truncation of the adversary's feasible set
  long max_iterations = 200000;
  // Exact active-set refinement of the strongly concave program over the
  // visitation polytope; used when ascent alone has not reached tol and the
  // measure has at most this many entries.
  int kkt_max_entries = 16;
  bool use_kkt_refinement = true;
  std::optional<AgentPolicy> warm_start;
};

// --- profile-induced quantities -------------------------------------------

// P(x, y): S x S transition matrix of the induced Markov chain.
Eigen::MatrixXd induced_transition(const GameSpec& spec,
                                   const PolicyProfile& profile);
// r(x, y): expected reward per state.
Eigen::VectorXd induced_reward(const GameSpec& spec,
                               const PolicyProfile& profile);
// r(x): S x B adversary reward vector with the team marginalized out.
Eigen::MatrixXd adversary_reward_matrix(const GameSpec& spec,
                                        const std::vector<AgentPolicy>& team);
// T(s' | s, b): adversary-MDP kernel with the team marginalized out,
// row (s * B + b).
Eigen::MatrixXd adversary_transition(const GameSpec& spec,
                                     const std::vector<AgentPolicy>& team);
// Joint team action distribution at state s (length JA).
Eigen::VectorXd team_joint_distribution(const GameSpec& spec,
                                        const std::vector<AgentPolicy>& team,
                                        int state);

// --- values and measures ---------------------------------------------------

ValueResult exact_value(const GameSpec& spec, const PolicyProfile& profile);

double exact_regularized_value(const GameSpec& spec,
                               const PolicyProfile& profile, double nu);

VisitationResult exact_visitation(const GameSpec& spec,
                                  const PolicyProfile& profile);

// H-horizon truncated visitation measure by the finite recursion
// lambda_H(s,b) = sum_{h<H} gamma^h P(s_h = s) y(s,b).
Eigen::MatrixXd truncated_visitation(const GameSpec& spec,
                                     const PolicyProfile& profile, int horizon);

// max_s |sum_b lambda(s,b) - rho(s) - gamma sum_{s',b'} T(s|s',b')
// lambda(s',b')|; zero for a consistent measure.
double flow_conservation_residual(const GameSpec& spec,
                                  const std::vector<AgentPolicy>& team,
                                  const Eigen::MatrixXd& lambda);

// --- gradients ---------------------------------------------------------------

// Policy-gradient-theorem gradient of rho' V_w w.r.t. x_i for an arbitrary
// reward tensor w(s, a, b); component (s, a) = d(s) E[Q_w(s, (a, a_-i), b)].
Eigen::MatrixXd team_gradient_with_reward(
    const GameSpec& spec, const PolicyProfile& profile, int player,
    const std::function<double(int, int, int)>& reward);

// d V_rho / d x_i under the game's own reward.
Eigen::MatrixXd exact_team_gradient(const GameSpec& spec,
                                    const PolicyProfile& profile, int player);

// d V^nu_rho / d x_i; the regularizer contributes -nu [d lambda / d x_i]' lambda.
Eigen::MatrixXd exact_team_gradient_regularized(const GameSpec& spec,
                                                const PolicyProfile& profile,
                                                int player, double nu);

// [d lambda / d y]' u for a fixed utility vector u(s, b); component
// (s, b) = d(s) Q_u(s, b) with Q_u from the Bellman system with reward u.
Eigen::MatrixXd adversary_gradient_for_utility(const GameSpec& spec,
                                               const PolicyProfile& profile,
                                               const Eigen::MatrixXd& utility);

// d V^nu_rho / d y = [d lambda / d y]' (r(x) - nu lambda); nu = 0 reduces to
// the plain policy gradient.
Eigen::MatrixXd exact_adversary_gradient(const GameSpec& spec,
                                         const PolicyProfile& profile,
                                         double nu);

// [d lambda_H / d y]' u, the H-horizon truncated analogue; the fixed-horizon
// estimator's exact mean when run with a frozen utility u.
Eigen::MatrixXd adversary_gradient_for_utility_truncated(
    const GameSpec& spec, const PolicyProfile& profile,
    const Eigen::MatrixXd& utility, int horizon);

// --- best responses and gaps -------------------------------------------------

// Adversary best response to the team policy (maximizes r), solved by value
// iteration to residual 1e-10 plus an exact evaluation of the greedy policy.
BestResponse best_response_adversary(const GameSpec& spec,
                                     const std::vector<AgentPolicy>& team);

// Team player i's best response with x_{-i} and y fixed (minimizes r).
BestResponse best_response_team(const GameSpec& spec,
                                const PolicyProfile& profile, int player);

GapBreakdown nash_gap_breakdown(const GameSpec& spec,
                                const PolicyProfile& profile);
double nash_gap(const GameSpec& spec, const PolicyProfile& profile);

// --- the regularized max function -------------------------------------------

// Maximizes V^nu(x, .) over the (optionally truncated) adversary policy set:
// projected gradient ascent in y-space, with an exact active-set solve of the
// equivalent concave program over the visitation polytope as refinement.
InnerMaxResult inner_max_regularized(const GameSpec& spec,
                                     const std::vector<AgentPolicy>& team,
                                     double nu, double tol,
                                     const InnerMaxOptions& options = {});

// Phi^nu(x) with its Danskin gradient assembled at the inner maximizer.
PhiNuResult exact_phi_nu_gradient(const GameSpec& spec,
                                  const std::vector<AgentPolicy>& team,
                                  double nu, double tol,
                                  const InnerMaxOptions& options = {});

PaperConstants paper_constants(const GameSpec& spec, double nu);

}  // namespace atmg

#endif  // ATMG_EXACT_HPP_
