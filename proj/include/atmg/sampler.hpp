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

#ifndef ATMG_SAMPLER_HPP_
#define ATMG_SAMPLER_HPP_

#include <ostream>
#include <vector>

#include "atmg/game.hpp"
#include "atmg/policy.hpp"
#include "atmg/rng.hpp"

namespace atmg {

struct TrajectoryStep {
  int state = 0;
  std::vector<int> team_actions;
  int adversary_action = 0;
  double reward = 0.0;  // r(s, a, b), the adversary's reward
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  int horizon() const { return static_cast<int>(steps.size()); }
};

// Reward convention: the adversary observes r; each team player observes
// -r/n so that team rewards sum to the adversary's loss.
inline constexpr int kAdversary = -1;
double observed_reward(const TrajectoryStep& step, int agent,
                       int num_team_players);

// Length-H rollout under the profile; s_0 ~ rho.  Bit-deterministic in seed.
Trajectory sample_trajectory(const GameSpec& spec,
                             const PolicyProfile& profile, int horizon,
                             const SeedSpec& seed);

// H >= 1 with P(H = h) = gamma^(h-1) (1 - gamma).  Support starts at 1 so
// the geometric-horizon estimators never see an empty trajectory.
int sample_geometric_horizon(double gamma, CounterRng& rng);

// K fixed-horizon trajectories; trajectory j uses stream (master, outer, j),
// so the result is independent of worker count and schedule.
std::vector<Trajectory> sample_batch(const GameSpec& spec,
                                     const PolicyProfile& profile, int count,
                                     int horizon, std::uint64_t master,
                                     std::uint64_t outer, int threads = 1);

// M trajectories with i.i.d. geometric horizons, one stream each; the
// horizon draw is the first draw of the trajectory's stream.
std::vector<Trajectory> sample_geometric_batch(const GameSpec& spec,
                                               const PolicyProfile& profile,
                                               int count, std::uint64_t master,
                                               std::uint64_t outer,
                                               int threads = 1);

// JSON-lines dump, one step per record.
void write_trajectory_jsonl(const Trajectory& trajectory, std::ostream& out);

}  // namespace atmg

#endif  // ATMG_SAMPLER_HPP_
