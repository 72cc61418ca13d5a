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

#include "atmg/game.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "atmg/rng.hpp"

namespace atmg {

using nlohmann::json;

JointActionIndex::JointActionIndex(std::vector<int> sizes)
    : sizes_(std::move(sizes)) {
  ATMG_CHECK(!sizes_.empty(), ValidationError, "team must have >= 1 player");
  strides_.assign(sizes_.size(), 1);
  for (int i = static_cast<int>(sizes_.size()) - 1; i >= 0; --i) {
    ATMG_CHECK(sizes_[i] >= 1, ValidationError,
               "action size must be positive, got " << sizes_[i]);
    if (i + 1 < static_cast<int>(sizes_.size())) {
      strides_[i] = strides_[i + 1] * sizes_[i + 1];
    }
    joint_size_ *= sizes_[i];
  }
}

int JointActionIndex::flatten(const std::vector<int>& actions) const {
  ATMG_CHECK(actions.size() == sizes_.size(), UsageError,
             "joint action arity mismatch");
  int flat = 0;
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    ATMG_CHECK(actions[i] >= 0 && actions[i] < sizes_[i], UsageError,
               "action out of range for player " << i);
    flat += actions[i] * strides_[i];
  }
  return flat;
}

std::vector<int> JointActionIndex::unflatten(int flat) const {
  ATMG_CHECK(flat >= 0 && flat < joint_size_, UsageError,
             "flat joint action out of range");
  std::vector<int> actions(sizes_.size());
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    actions[i] = flat / strides_[i];
    flat %= strides_[i];
  }
  return actions;
}

int GameSpec::joint_action_size() const {
  int ja = 1;
  for (int a : team_action_sizes) ja *= a;
  return ja;
}

int GameSpec::sum_action_sizes() const {
  return std::accumulate(team_action_sizes.begin(), team_action_sizes.end(),
                         adversary_action_size);
}

int GameSpec::max_team_action_size() const {
  int m = 1;
  for (int a : team_action_sizes) m = std::max(m, a);
  return m;
}

namespace {

std::string sab_index(int s, int a, int b) {
  std::ostringstream oss;
  oss << "[" << s << "][" << a << "][" << b << "]";
  return oss.str();
}

}  // namespace

std::vector<Violation> validate(const GameSpec& spec) {
  std::vector<Violation> out;
  const int S = spec.num_states;
  const int B = spec.adversary_action_size;
  const int JA = spec.joint_action_size();

  if (S < 1) out.push_back({"num_states", "", double(S), "must be positive"});
  if (B < 1) {
    out.push_back(
        {"adversary_action_size", "", double(B), "must be positive"});
  }
  for (std::size_t i = 0; i < spec.team_action_sizes.size(); ++i) {
    if (spec.team_action_sizes[i] < 1) {
      out.push_back({"team_action_sizes", "[" + std::to_string(i) + "]",
                     double(spec.team_action_sizes[i]), "must be positive"});
    }
  }
  if (spec.team_action_sizes.empty()) {
    out.push_back({"team_action_sizes", "", 0.0, "team must be nonempty"});
  }
  if (!(spec.discount >= 0.0 && spec.discount < 1.0)) {
    out.push_back(
        {"discount", "", spec.discount, "discount must be in [0,1)"});
  }
  if (!out.empty()) return out;  // sizes unusable; stop before tensor walks

  if (spec.initial_dist.size() != S) {
    out.push_back({"initial_dist", "", double(spec.initial_dist.size()),
                   "length must equal num_states"});
  } else {
    const double sum = spec.initial_dist.sum();
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      out.push_back({"initial_dist", "", std::abs(sum - 1.0),
                     "must sum to 1 within 1e-12"});
    }
    for (int s = 0; s < S; ++s) {
      if (!(spec.initial_dist(s) > 0.0)) {
        out.push_back({"initial_dist", "[" + std::to_string(s) + "]",
                       spec.initial_dist(s),
                       "initial distribution not full-support"});
      }
    }
  }

  const std::size_t want_r = static_cast<std::size_t>(S) * JA * B;
  const std::size_t want_p = want_r * S;
  if (spec.reward.size() != want_r) {
    out.push_back({"reward", "", double(spec.reward.size()),
                   "tensor has wrong number of entries"});
    return out;
  }
  if (spec.transition.size() != want_p) {
    out.push_back({"transition", "", double(spec.transition.size()),
                   "tensor has wrong number of entries"});
    return out;
  }

  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < JA; ++a) {
      for (int b = 0; b < B; ++b) {
        const double r = spec.r(s, a, b);
        if (!(r >= 0.0 && r <= 1.0)) {
          out.push_back(
              {"reward", sab_index(s, a, b), r, "entry outside [0,1]"});
        }
        double row_sum = 0.0;
        for (int s2 = 0; s2 < S; ++s2) {
          const double p = spec.p(s, a, b, s2);
          if (p < 0.0) {
            out.push_back({"transition",
                           sab_index(s, a, b) + "[" + std::to_string(s2) + "]",
                           p, "negative probability"});
          }
          row_sum += p;
        }
        if (std::abs(row_sum - 1.0) > kRowSumTolerance) {
          out.push_back({"transition", sab_index(s, a, b),
                         std::abs(row_sum - 1.0),
                         "row must sum to 1 within 1e-12"});
        }
      }
    }
  }
  return out;
}

GameSpec generate_random(std::uint64_t seed, int num_states,
                         const std::vector<int>& team_action_sizes,
                         int adversary_action_size, double discount,
                         double sparsity) {
  ATMG_CHECK(num_states >= 1, UsageError, "num_states must be >= 1");
  ATMG_CHECK(adversary_action_size >= 1, UsageError,
             "adversary_action_size must be >= 1");
  ATMG_CHECK(!team_action_sizes.empty(), UsageError, "team must be nonempty");
  for (int a : team_action_sizes) {
    ATMG_CHECK(a >= 1, UsageError, "team action sizes must be >= 1");
  }
  ATMG_CHECK(discount >= 0.0 && discount < 1.0, UsageError,
             "discount must be in [0,1)");
  ATMG_CHECK(sparsity > 0.0 && sparsity <= 1.0, UsageError,
             "sparsity must be in (0,1]");

  GameSpec spec;
  spec.num_states = num_states;
  spec.team_action_sizes = team_action_sizes;
  spec.adversary_action_size = adversary_action_size;
  spec.discount = discount;

  const int JA = spec.joint_action_size();
  ATMG_CHECK(JA <= 10000, UsageError,
             "joint team action space too large (" << JA << " > 10^4)");
  const int S = num_states;
  const int B = adversary_action_size;

  CounterRng rng(seed, 0, 0);
  spec.reward.resize(static_cast<std::size_t>(S) * JA * B);
  spec.transition.resize(static_cast<std::size_t>(S) * JA * B * S);
  for (double& r : spec.reward) r = rng.next_double();

  std::vector<double> weights(S);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < JA; ++a) {
      for (int b = 0; b < B; ++b) {
        int support = 0;
        for (int s2 = 0; s2 < S; ++s2) {
          const bool in = rng.next_double() < sparsity;
          weights[s2] = in ? -std::log(1.0 - rng.next_double()) : 0.0;
          if (in) ++support;
        }
        if (support == 0) {
          const int forced = static_cast<int>(rng.next_u64() % S);
          weights[forced] = 1.0;
        }
        double total = 0.0;
        for (double w : weights) total += w;
        double acc = 0.0;
        for (int s2 = 0; s2 < S; ++s2) {
          // exact unit row sum: last support entry takes the remainder
          double p = weights[s2] / total;
          acc += p;
          spec.p_mut(s, a, b, s2) = p;
        }
        // fold any residual into the largest entry
        int arg = 0;
        for (int s2 = 1; s2 < S; ++s2) {
          if (spec.p(s, a, b, s2) > spec.p(s, a, b, arg)) arg = s2;
        }
        spec.p_mut(s, a, b, arg) += 1.0 - acc;
      }
    }
  }

  spec.initial_dist.resize(S);
  double total = 0.0;
  for (int s = 0; s < S; ++s) {
    spec.initial_dist(s) = 0.1 + rng.next_double();
    total += spec.initial_dist(s);
  }
  spec.initial_dist /= total;
  spec.initial_dist(S - 1) += 1.0 - spec.initial_dist.sum();

  return spec;
}

GameSpec make_matching_pennies(double discount) {
  ATMG_CHECK(discount >= 0.0 && discount < 1.0, UsageError,
             "discount must be in [0,1)");
  GameSpec spec;
  spec.num_states = 1;
  spec.team_action_sizes = {2};
  spec.adversary_action_size = 2;
  spec.discount = discount;
  spec.initial_dist = Eigen::VectorXd::Ones(1);
  spec.reward.assign(4, 0.0);
  spec.transition.assign(4, 1.0);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) spec.r_mut(0, a, b) = (a == b) ? 1.0 : 0.0;
  }
  return spec;
}

namespace {

json require_field(const json& j, const char* name) {
  if (!j.contains(name)) {
    throw ParseError(std::string("game file missing field \"") + name + "\"");
  }
  return j.at(name);
}

void check_valid_or_throw(const GameSpec& spec) {
  auto violations = validate(spec);
  if (!violations.empty()) {
    std::ostringstream oss;
    oss << "game validation failed (" << violations.size() << " violations):";
    for (const auto& v : violations) {
      oss << "\n  " << v.field << v.index << ": " << v.message
          << " (magnitude " << v.magnitude << ")";
      if (v.field == "discount") oss << "; discount must be < 1";
    }
    throw ValidationError(oss.str());
  }
}

}  // namespace

std::string game_to_json_text(const GameSpec& spec) {
  json j;
  j["num_states"] = spec.num_states;
  j["team_action_sizes"] = spec.team_action_sizes;
  j["adversary_action_size"] = spec.adversary_action_size;
  j["discount"] = spec.discount;
  j["initial_dist"] = std::vector<double>(
      spec.initial_dist.data(), spec.initial_dist.data() + spec.num_states);

  const int S = spec.num_states;
  const int JA = spec.joint_action_size();
  const int B = spec.adversary_action_size;
  json rew = json::array();
  json tra = json::array();
  for (int s = 0; s < S; ++s) {
    json rs = json::array();
    json ts = json::array();
    for (int a = 0; a < JA; ++a) {
      json ra = json::array();
      json ta = json::array();
      for (int b = 0; b < B; ++b) {
        ra.push_back(spec.r(s, a, b));
        json row = json::array();
        for (int s2 = 0; s2 < S; ++s2) row.push_back(spec.p(s, a, b, s2));
        ta.push_back(row);
      }
      rs.push_back(ra);
      ts.push_back(ta);
    }
    rew.push_back(rs);
    tra.push_back(ts);
  }
  j["reward"] = rew;
  j["transition"] = tra;
  return j.dump(2);
}

GameSpec game_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }

  GameSpec spec;
  try {
    spec.num_states = require_field(j, "num_states").get<int>();
    spec.team_action_sizes =
        require_field(j, "team_action_sizes").get<std::vector<int>>();
    spec.adversary_action_size =
        require_field(j, "adversary_action_size").get<int>();
    spec.discount = require_field(j, "discount").get<double>();
    auto rho = require_field(j, "initial_dist").get<std::vector<double>>();
    spec.initial_dist =
        Eigen::Map<Eigen::VectorXd>(rho.data(), rho.size());

    const json rew = require_field(j, "reward");
    const json tra = require_field(j, "transition");
    const int S = spec.num_states;
    ATMG_CHECK(S >= 1 && spec.adversary_action_size >= 1 &&
                   !spec.team_action_sizes.empty(),
               ParseError, "nonpositive sizes in game file");
    const int JA = spec.joint_action_size();
    const int B = spec.adversary_action_size;
    spec.reward.resize(static_cast<std::size_t>(S) * JA * B);
    spec.transition.resize(static_cast<std::size_t>(S) * JA * B * S);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < JA; ++a) {
        for (int b = 0; b < B; ++b) {
          spec.r_mut(s, a, b) = rew.at(s).at(a).at(b).get<double>();
          const json row = tra.at(s).at(a).at(b);
          for (int s2 = 0; s2 < S; ++s2) {
            spec.p_mut(s, a, b, s2) = row.at(s2).get<double>();
          }
        }
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed game file: ") + e.what());
  }

  check_valid_or_throw(spec);
  return spec;
}

GameSpec read_game(const std::string& path) {
  std::ifstream in(path);
  ATMG_CHECK(in.good(), ParseError, "cannot open game file: " << path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return game_from_json_text(buffer.str());
}

void write_game(const GameSpec& spec, const std::string& path) {
  check_valid_or_throw(spec);
  std::ofstream out(path);
  ATMG_CHECK(out.good(), ParseError, "cannot open for writing: " << path);
  out << game_to_json_text(spec) << "\n";
}

}  // namespace atmg
