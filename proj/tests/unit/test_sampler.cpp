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

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "atmg/estimators.hpp"
#include "atmg/exact.hpp"
#include "atmg/sampler.hpp"

using namespace atmg;

TEST_SUITE_BEGIN("sampler");

namespace {

bool same_trajectory(const Trajectory& a, const Trajectory& b) {
  if (a.steps.size() != b.steps.size()) return false;
  for (std::size_t h = 0; h < a.steps.size(); ++h) {
    if (a.steps[h].state != b.steps[h].state) return false;
    if (a.steps[h].team_actions != b.steps[h].team_actions) return false;
    if (a.steps[h].adversary_action != b.steps[h].adversary_action)
      return false;
    if (a.steps[h].reward != b.steps[h].reward) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("zero horizon gives an empty trajectory") {
  const GameSpec spec = make_matching_pennies(0.5);
  const Trajectory t =
      sample_trajectory(spec, uniform_profile(spec), 0, {1, 2, 3});
  CHECK(t.horizon() == 0);
}

TEST_CASE("deterministic one-state game repeats its reward") {
  GameSpec spec = make_matching_pennies(0.5);
  PolicyProfile profile = uniform_profile(spec);
  profile.team[0] << 1.0, 0.0;
  profile.adversary << 1.0, 0.0;
  const Trajectory t = sample_trajectory(spec, profile, 25, {9, 0, 0});
  REQUIRE(t.horizon() == 25);
  for (const TrajectoryStep& step : t.steps) {
    CHECK(step.state == 0);
    CHECK(step.team_actions[0] == 0);
    CHECK(step.adversary_action == 0);
    CHECK(step.reward == 1.0);
  }
}

TEST_CASE("identical seeds give bit-identical trajectories") {
  const GameSpec spec = generate_random(12, 3, {2, 2}, 2, 0.9, 0.8);
  const PolicyProfile profile = random_profile(spec, 1);
  const Trajectory a = sample_trajectory(spec, profile, 40, {42, 7, 3});
  const Trajectory b = sample_trajectory(spec, profile, 40, {42, 7, 3});
  CHECK(same_trajectory(a, b));
  const Trajectory c = sample_trajectory(spec, profile, 40, {42, 7, 4});
  CHECK_FALSE(same_trajectory(a, c));
}

TEST_CASE("batches are schedule independent") {
  const GameSpec spec = generate_random(13, 3, {2}, 3, 0.8, 0.8);
  const PolicyProfile profile = random_profile(spec, 2);
  const auto serial = sample_batch(spec, profile, 64, 15, 5, 9, 1);
  const auto threaded = sample_batch(spec, profile, 64, 15, 5, 9, 4);
  REQUIRE(serial.size() == threaded.size());
  for (std::size_t j = 0; j < serial.size(); ++j) {
    CHECK(same_trajectory(serial[j], threaded[j]));
  }
  const auto geo_serial = sample_geometric_batch(spec, profile, 64, 5, 9, 1);
  const auto geo_threaded = sample_geometric_batch(spec, profile, 64, 5, 9, 4);
  for (std::size_t j = 0; j < serial.size(); ++j) {
    CHECK(same_trajectory(geo_serial[j], geo_threaded[j]));
  }
}

TEST_CASE("initial states follow rho within three standard errors") {
  const GameSpec spec = generate_random(14, 4, {2}, 2, 0.9, 0.7);
  const PolicyProfile profile = uniform_profile(spec);
  const int K = 100000;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(4);
  const auto batch = sample_batch(spec, profile, K, 1, 77, 0, 2);
  for (const Trajectory& t : batch) counts(t.steps[0].state) += 1.0;
  for (int s = 0; s < 4; ++s) {
    const double p = spec.initial_dist(s);
    const double se = std::sqrt(p * (1.0 - p) / K);
    CHECK(std::abs(counts(s) / K - p) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("geometric horizon has the documented pmf and mean") {
  {
    CounterRng rng(1, 0, 0);
    for (int rep = 0; rep < 100; ++rep) {
      CHECK(sample_geometric_horizon(0.0, rng) == 1);
    }
  }
  {
    CounterRng rng(2, 0, 0);
    const int N = 1000000;
    double sum = 0.0;
    for (int rep = 0; rep < N; ++rep) sum += sample_geometric_horizon(0.5, rng);
    // mean 2, variance gamma/(1-gamma)^2 = 2
    const double se = std::sqrt(2.0 / N);
    CHECK(std::abs(sum / N - 2.0) <= 3.0 * se);
  }
  {
    CounterRng rng(3, 0, 0);
    const int N = 200000;
    int ones = 0;
    for (int rep = 0; rep < N; ++rep) {
      if (sample_geometric_horizon(0.9, rng) == 1) ++ones;
    }
    const double se = std::sqrt(0.1 * 0.9 / N);
    CHECK(std::abs(double(ones) / N - 0.1) <= 3.0 * se);
  }
}

TEST_CASE("observed rewards split the adversary loss across the team") {
  TrajectoryStep step;
  step.reward = 1.0;
  CHECK(observed_reward(step, 0, 2) == doctest::Approx(-0.5));
  CHECK(observed_reward(step, 1, 2) == doctest::Approx(-0.5));
  CHECK(observed_reward(step, 0, 1) == doctest::Approx(-1.0));
  CHECK(observed_reward(step, kAdversary, 2) == doctest::Approx(1.0));
  double total = observed_reward(step, kAdversary, 3);
  for (int i = 0; i < 3; ++i) total += observed_reward(step, i, 3);
  CHECK(total == doctest::Approx(0.0));
  CHECK_THROWS_AS(observed_reward(step, 5, 2), UsageError);
}

TEST_CASE("empirical truncated visitation matches the finite recursion") {
  const GameSpec spec = generate_random(15, 3, {2}, 2, 0.9, 0.8);
  const PolicyProfile profile = random_profile(spec, 3);
  const int H = 20;
  const int K = 100000;
  const Eigen::MatrixXd lambda_H = truncated_visitation(spec, profile, H);
  const auto batch = sample_batch(spec, profile, K, H, 123, 0, 2);

  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(3, 2);
  Eigen::MatrixXd mean_sq = Eigen::MatrixXd::Zero(3, 2);
  for (const Trajectory& t : batch) {
    const Eigen::MatrixXd single = visitation_estimate(t, 0.9, 3, 2);
    mean += single;
    mean_sq += single.cwiseProduct(single);
  }
  mean /= K;
  mean_sq /= K;
  for (int s = 0; s < 3; ++s) {
    for (int b = 0; b < 2; ++b) {
      const double var =
          std::max(mean_sq(s, b) - mean(s, b) * mean(s, b), 0.0);
      const double se = std::sqrt(var / K);
      CHECK(std::abs(mean(s, b) - lambda_H(s, b)) <= 3.0 * se + 1e-9);
    }
  }
}

TEST_CASE("long-horizon empirical visitation matches the full measure") {
  // at H = 200 and gamma = 0.9 the truncation bias is ~7e-9, so the batch
  // mean must match the infinite-horizon measure within its own 3-SE band
  const GameSpec spec = generate_random(18, 3, {2}, 2, 0.9, 0.8);
  const PolicyProfile profile = random_profile(spec, 21);
  const Eigen::MatrixXd lambda = exact_visitation(spec, profile).lambda;
  const int H = 200;
  const int K = 100000;
  const auto batch = sample_batch(spec, profile, K, H, 222, 0, 2);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(3, 2);
  Eigen::MatrixXd mean_sq = Eigen::MatrixXd::Zero(3, 2);
  for (const Trajectory& t : batch) {
    const Eigen::MatrixXd single = visitation_estimate(t, 0.9, 3, 2);
    mean += single;
    mean_sq += single.cwiseProduct(single);
  }
  mean /= K;
  mean_sq /= K;
  for (int s = 0; s < 3; ++s) {
    for (int b = 0; b < 2; ++b) {
      const double var =
          std::max(mean_sq(s, b) - mean(s, b) * mean(s, b), 0.0);
      const double se = std::sqrt(var / K);
      CHECK(std::abs(mean(s, b) - lambda(s, b)) <= 3.0 * se + 1e-6);
    }
  }
}

TEST_CASE("jsonl dump writes one record per step") {
  const GameSpec spec = generate_random(16, 2, {2, 2}, 2, 0.5, 1.0);
  const Trajectory t =
      sample_trajectory(spec, uniform_profile(spec), 6, {1, 1, 1});
  std::ostringstream out;
  write_trajectory_jsonl(t, out);
  const std::string text = out.str();
  int lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == 6);
  CHECK(text.find("\"h\":0") != std::string::npos);
  CHECK(text.find("\"a\":[") != std::string::npos);
}

TEST_SUITE_END();
