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

#include "atmg/sampler.hpp"

#include <cmath>
#include <thread>

namespace atmg {

double observed_reward(const TrajectoryStep& step, int agent,
                       int num_team_players) {
  if (agent == kAdversary) return step.reward;
  ATMG_CHECK(agent >= 0 && agent < num_team_players, UsageError,
             "agent index out of range");
  return -step.reward / num_team_players;
}

namespace {

int draw_row(const Eigen::MatrixXd& policy, int state, CounterRng& rng) {
  const int m = static_cast<int>(policy.cols());
  const double u = rng.next_double();
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    acc += policy(state, i);
    if (u < acc) return i;
  }
  return m - 1;
}

Trajectory roll(const GameSpec& spec, const PolicyProfile& profile,
                int horizon, CounterRng& rng) {
  Trajectory trajectory;
  trajectory.steps.reserve(horizon);
  if (horizon == 0) return trajectory;

  const int n = spec.num_team_players();
  const JointActionIndex idx = spec.joint_index();
  int state = rng.next_categorical(spec.initial_dist, spec.num_states);
  for (int h = 0; h < horizon; ++h) {
    TrajectoryStep step;
    step.state = state;
    step.team_actions.resize(n);
    for (int i = 0; i < n; ++i) {
      step.team_actions[i] = draw_row(profile.team[i], state, rng);
    }
    step.adversary_action = draw_row(profile.adversary, state, rng);
    const int flat = idx.flatten(step.team_actions);
    step.reward = spec.r(state, flat, step.adversary_action);

    const double u = rng.next_double();
    double acc = 0.0;
    int next = spec.num_states - 1;
    for (int s2 = 0; s2 < spec.num_states; ++s2) {
      acc += spec.p(state, flat, step.adversary_action, s2);
      if (u < acc) {
        next = s2;
        break;
      }
    }
    trajectory.steps.push_back(std::move(step));
    state = next;
  }
  return trajectory;
}

template <typename Fn>
void parallel_indexed(int count, int threads, const Fn& fn) {
  if (threads <= 1 || count <= 1) {
    for (int j = 0; j < count; ++j) fn(j);
    return;
  }
  const int workers = std::min<int>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int j = w; j < count; j += workers) fn(j);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

Trajectory sample_trajectory(const GameSpec& spec,
                             const PolicyProfile& profile, int horizon,
                             const SeedSpec& seed) {
  ATMG_CHECK(horizon >= 0, UsageError, "horizon must be nonnegative");
  CounterRng rng(seed);
  return roll(spec, profile, horizon, rng);
}

int sample_geometric_horizon(double gamma, CounterRng& rng) {
  ATMG_CHECK(gamma >= 0.0 && gamma < 1.0, UsageError,
             "gamma must be in [0,1)");
  const double u = rng.next_double();
  if (gamma == 0.0) return 1;
  // P(H = h) = gamma^(h-1) (1 - gamma), h = 1, 2, ...
  const int h =
      1 + static_cast<int>(std::floor(std::log1p(-u) / std::log(gamma)));
  return h < 1 ? 1 : h;
}

std::vector<Trajectory> sample_batch(const GameSpec& spec,
                                     const PolicyProfile& profile, int count,
                                     int horizon, std::uint64_t master,
                                     std::uint64_t outer, int threads) {
  std::vector<Trajectory> out(count);
  parallel_indexed(count, threads, [&](int j) {
    CounterRng rng(master, outer, std::uint64_t(j));
    out[j] = roll(spec, profile, horizon, rng);
  });
  return out;
}

std::vector<Trajectory> sample_geometric_batch(const GameSpec& spec,
                                               const PolicyProfile& profile,
                                               int count, std::uint64_t master,
                                               std::uint64_t outer,
                                               int threads) {
  std::vector<Trajectory> out(count);
  parallel_indexed(count, threads, [&](int j) {
    // one stream per trajectory: the horizon draw comes first
    CounterRng rng(master, outer, std::uint64_t(j));
    const int horizon = sample_geometric_horizon(spec.discount, rng);
    out[j] = roll(spec, profile, horizon, rng);
  });
  return out;
}

void write_trajectory_jsonl(const Trajectory& trajectory, std::ostream& out) {
  for (std::size_t h = 0; h < trajectory.steps.size(); ++h) {
    const TrajectoryStep& step = trajectory.steps[h];
    out << "{\"h\":" << h << ",\"s\":" << step.state << ",\"a\":[";
    for (std::size_t i = 0; i < step.team_actions.size(); ++i) {
      if (i) out << ",";
      out << step.team_actions[i];
    }
    out << "],\"b\":" << step.adversary_action << ",\"r\":" << step.reward
        << "}\n";
  }
}

}  // namespace atmg
