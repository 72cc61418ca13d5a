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

#ifndef ATMG_POLICY_HPP_
#define ATMG_POLICY_HPP_

#include <vector>

#include <Eigen/Dense>

#include "atmg/game.hpp"

namespace atmg {

// Direct parameterization: a policy is its per-state probability vector.
// Row s of the matrix is the distribution over that agent's actions in
// state s.
using AgentPolicy = Eigen::MatrixXd;

struct PolicyProfile {
  std::vector<AgentPolicy> team;
  AgentPolicy adversary;

  int num_team_players() const { return static_cast<int>(team.size()); }
};

inline constexpr double kPolicyRowTolerance = 1e-10;

// Euclidean projection onto the zeta-truncated simplex
// {p : p_i >= zeta, sum p = 1}.  Implemented by shifting by zeta, sort-based
// projection onto the simplex of mass 1 - m*zeta, and shifting back.
// Requires 0 <= zeta <= 1/(2m); larger zeta is rejected even though the set
// stays nonempty up to 1/m.
Eigen::VectorXd project_truncated_simplex(const Eigen::VectorXd& v,
                                          double zeta);

// Row-wise projection; the feasibility set is a product over states.
AgentPolicy project_policy(const AgentPolicy& p, double zeta);

// Nearest feasible point of the truncated simplex to a probability vector p.
// Being the Euclidean projection it satisfies ||p - out|| <= 2*zeta*m.
Eigen::VectorXd nearest_truncated(const Eigen::VectorXd& p, double zeta);

// x_i(s, a) = 1/A_i for the team, y(s, b) = 1/B for the adversary.
PolicyProfile uniform_profile(const GameSpec& spec);

// True iff every row is a distribution (within 1e-10) with entries >= zeta.
bool policy_feasible(const AgentPolicy& p, double zeta = 0.0);
bool profile_feasible(const PolicyProfile& profile, double zeta_x = 0.0,
                      double zeta_y = 0.0);

// Random interior profile with every row drawn from the zeta-truncated
// simplex (exponential weights, then projection).
PolicyProfile random_profile(const GameSpec& spec, std::uint64_t seed,
                             double zeta_x = 0.0, double zeta_y = 0.0);

// max over the zeta-truncated simplex of <c, p' - p>; the maximizing p'
// loads 1 - (m-1)*zeta on the largest coordinate of c.
double linear_max_over_truncated(const Eigen::VectorXd& c,
                                 const Eigen::VectorXd& p, double zeta);

// Flatten/unflatten a profile to one vector (team blocks then adversary),
// used by norms in continuity checks.
Eigen::VectorXd flatten_team(const std::vector<AgentPolicy>& team);
Eigen::VectorXd flatten_profile(const PolicyProfile& profile);

// Profiles are serialized as JSON nested arrays [agent][state][action]:
// {"team": [...], "adversary": [...]}.
std::string profile_to_json_text(const PolicyProfile& profile);
PolicyProfile profile_from_json_text(const std::string& text);
PolicyProfile read_profile(const std::string& path);
void write_profile(const PolicyProfile& profile, const std::string& path);

}  // namespace atmg

#endif  // ATMG_POLICY_HPP_
