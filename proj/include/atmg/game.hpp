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

#ifndef ATMG_GAME_HPP_
#define ATMG_GAME_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "atmg/common.hpp"

namespace atmg {

// Row-major indexing of the team's joint action space.  flatten(a) walks
// (a_1, ..., a_n) with a_1 slowest; unflatten inverts it exactly.
class JointActionIndex {
 public:
  explicit JointActionIndex(std::vector<int> sizes);

  int flatten(const std::vector<int>& actions) const;
  std::vector<int> unflatten(int flat) const;

  int num_players() const { return static_cast<int>(sizes_.size()); }
  int size(int player) const { return sizes_[player]; }
  int joint_size() const { return joint_size_; }
  const std::vector<int>& sizes() const { return sizes_; }

 private:
  std::vector<int> sizes_;
  std::vector<int> strides_;
  int joint_size_ = 1;
};

// Full tabular description of an adversarial team Markov game: S states,
// n team players with action counts A_i, one adversary with B actions,
// reward r[s][a][b] in [0,1] (a flat over the joint team space), transition
// kernel P[s][a][b] -> distribution over next states, discount gamma, and a
// full-support initial distribution rho.  Immutable after construction; safe
// to share read-only across workers.
struct GameSpec {
  int num_states = 0;
  std::vector<int> team_action_sizes;
  int adversary_action_size = 0;
  double discount = 0.0;
  Eigen::VectorXd initial_dist;
  // reward[(s * JA + a) * B + b]
  std::vector<double> reward;
  // transition[((s * JA + a) * B + b) * S + s2]
  std::vector<double> transition;

  int num_team_players() const {
    return static_cast<int>(team_action_sizes.size());
  }
  int joint_action_size() const;
  int sum_action_sizes() const;  // sum_i A_i + B
  int max_team_action_size() const;
  JointActionIndex joint_index() const {
    return JointActionIndex(team_action_sizes);
  }

  double r(int s, int a, int b) const {
    return reward[static_cast<std::size_t>(
        (s * joint_action_size() + a) * adversary_action_size + b)];
  }
  double p(int s, int a, int b, int s2) const {
    return transition[static_cast<std::size_t>(
        ((s * joint_action_size() + a) * adversary_action_size + b) *
            num_states +
        s2)];
  }
  double& r_mut(int s, int a, int b) {
    return reward[static_cast<std::size_t>(
        (s * joint_action_size() + a) * adversary_action_size + b)];
  }
  double& p_mut(int s, int a, int b, int s2) {
    return transition[static_cast<std::size_t>(
        ((s * joint_action_size() + a) * adversary_action_size + b) *
            num_states +
        s2)];
  }
};

// One broken invariant of a GameSpec, naming the offending field and entry.
struct Violation {
  std::string field;
  std::string index;
  double magnitude = 0.0;
  std::string message;
};

// Diagnostic check of all GameSpec invariants: transition rows stochastic
// within 1e-12 and nonnegative, rewards in [0,1], rho a full-support
// distribution.  Empty result iff the spec is valid.
std::vector<Violation> validate(const GameSpec& spec);

inline constexpr double kRowSumTolerance = 1e-12;

// Deterministic random instance: rewards i.i.d. uniform [0,1]; each
// transition row is an exponential-weight normalization over a
// sparsity-selected support with at least one state.  The joint action space
// is capped at 10^4 entries.
GameSpec generate_random(std::uint64_t seed, int num_states,
                         const std::vector<int>& team_action_sizes,
                         int adversary_action_size, double discount,
                         double sparsity = 1.0);

// Single-state zero-sum pennies game: n = 1, two actions per side,
// r(a, b) = 1 if a == b else 0.  Unique equilibrium is uniform play with
// value 1 / (2 (1 - gamma)).
GameSpec make_matching_pennies(double discount);

// JSON game file round trip.  Probabilities are written as decimal floats
// that parse back to the same doubles.
GameSpec read_game(const std::string& path);
void write_game(const GameSpec& spec, const std::string& path);
GameSpec game_from_json_text(const std::string& text);
std::string game_to_json_text(const GameSpec& spec);

}  // namespace atmg

#endif  // ATMG_GAME_HPP_
