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

#include "atmg/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "atmg/rng.hpp"

namespace atmg {

namespace {

// Sort-based projection of w onto {p >= 0, sum p = mass}, O(m log m).
// Ties in the sort are broken by index; the projection itself is unique.
Eigen::VectorXd project_simplex_mass(const Eigen::VectorXd& w, double mass) {
  const int m = static_cast<int>(w.size());
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (w(a) != w(b)) return w(a) > w(b);
    return a < b;
  });
  double cumulative = 0.0;
  double theta = 0.0;
  for (int j = 0; j < m; ++j) {
    cumulative += w(order[j]);
    const double candidate = (cumulative - mass) / (j + 1);
    if (w(order[j]) - candidate > 0.0) {
      theta = candidate;
    } else {
      break;
    }
  }
  Eigen::VectorXd out(m);
  for (int i = 0; i < m; ++i) out(i) = std::max(w(i) - theta, 0.0);
  return out;
}

}  // namespace

Eigen::VectorXd project_truncated_simplex(const Eigen::VectorXd& v,
                                          double zeta) {
  const int m = static_cast<int>(v.size());
  ATMG_CHECK(m >= 1, UsageError, "empty vector");
  ATMG_CHECK(zeta >= 0.0 && zeta <= 0.5 / m + 1e-15, UsageError,
             "zeta out of range: need 0 <= zeta <= 1/(2m), got "
                 << zeta << " with m = " << m);
  if (m == 1) return Eigen::VectorXd::Ones(1);
  const Eigen::VectorXd shifted = v.array() - zeta;
  Eigen::VectorXd out = project_simplex_mass(shifted, 1.0 - m * zeta);
  out.array() += zeta;
  return out;
}

AgentPolicy project_policy(const AgentPolicy& p, double zeta) {
  AgentPolicy out(p.rows(), p.cols());
  for (int s = 0; s < p.rows(); ++s) {
    out.row(s) = project_truncated_simplex(p.row(s).transpose(), zeta)
                     .transpose();
  }
  return out;
}

Eigen::VectorXd nearest_truncated(const Eigen::VectorXd& p, double zeta) {
  return project_truncated_simplex(p, zeta);
}

PolicyProfile uniform_profile(const GameSpec& spec) {
  PolicyProfile profile;
  const int S = spec.num_states;
  profile.team.reserve(spec.num_team_players());
  for (int a : spec.team_action_sizes) {
    profile.team.push_back(AgentPolicy::Constant(S, a, 1.0 / a));
  }
  profile.adversary = AgentPolicy::Constant(S, spec.adversary_action_size,
                                            1.0 / spec.adversary_action_size);
  return profile;
}

bool policy_feasible(const AgentPolicy& p, double zeta) {
  for (int s = 0; s < p.rows(); ++s) {
    double sum = 0.0;
    for (int a = 0; a < p.cols(); ++a) {
      if (p(s, a) < zeta - 1e-12) return false;
      sum += p(s, a);
    }
    if (std::abs(sum - 1.0) > kPolicyRowTolerance) return false;
  }
  return true;
}

bool profile_feasible(const PolicyProfile& profile, double zeta_x,
                      double zeta_y) {
  for (const auto& p : profile.team) {
    if (!policy_feasible(p, zeta_x)) return false;
  }
  return policy_feasible(profile.adversary, zeta_y);
}

namespace {

AgentPolicy random_policy(int S, int m, double zeta, CounterRng& rng) {
  AgentPolicy p(S, m);
  for (int s = 0; s < S; ++s) {
    Eigen::VectorXd w(m);
    for (int a = 0; a < m; ++a) w(a) = -std::log(1.0 - rng.next_double());
    w /= w.sum();
    p.row(s) = project_truncated_simplex(w, zeta).transpose();
  }
  return p;
}

}  // namespace

PolicyProfile random_profile(const GameSpec& spec, std::uint64_t seed,
                             double zeta_x, double zeta_y) {
  CounterRng rng(seed, 0x70726f66ULL, 0);
  PolicyProfile profile;
  const int S = spec.num_states;
  for (int a : spec.team_action_sizes) {
    profile.team.push_back(random_policy(S, a, zeta_x, rng));
  }
  profile.adversary =
      random_policy(S, spec.adversary_action_size, zeta_y, rng);
  return profile;
}

double linear_max_over_truncated(const Eigen::VectorXd& c,
                                 const Eigen::VectorXd& p, double zeta) {
  const int m = static_cast<int>(c.size());
  int arg = 0;
  for (int i = 1; i < m; ++i) {
    if (c(i) > c(arg)) arg = i;
  }
  Eigen::VectorXd best = Eigen::VectorXd::Constant(m, zeta);
  best(arg) = 1.0 - (m - 1) * zeta;
  return c.dot(best - p);
}

Eigen::VectorXd flatten_team(const std::vector<AgentPolicy>& team) {
  int total = 0;
  for (const auto& p : team) total += static_cast<int>(p.size());
  Eigen::VectorXd out(total);
  int at = 0;
  for (const auto& p : team) {
    for (int s = 0; s < p.rows(); ++s) {
      for (int a = 0; a < p.cols(); ++a) out(at++) = p(s, a);
    }
  }
  return out;
}

namespace {

nlohmann::json policy_to_json(const AgentPolicy& p) {
  nlohmann::json rows = nlohmann::json::array();
  for (int s = 0; s < p.rows(); ++s) {
    nlohmann::json row = nlohmann::json::array();
    for (int a = 0; a < p.cols(); ++a) row.push_back(p(s, a));
    rows.push_back(row);
  }
  return rows;
}

AgentPolicy policy_from_json(const nlohmann::json& rows) {
  const int S = static_cast<int>(rows.size());
  ATMG_CHECK(S >= 1, ParseError, "empty policy in profile file");
  const int m = static_cast<int>(rows.at(0).size());
  AgentPolicy p(S, m);
  for (int s = 0; s < S; ++s) {
    ATMG_CHECK(static_cast<int>(rows.at(s).size()) == m, ParseError,
               "ragged policy rows in profile file");
    for (int a = 0; a < m; ++a) p(s, a) = rows.at(s).at(a).get<double>();
  }
  return p;
}

}  // namespace

std::string profile_to_json_text(const PolicyProfile& profile) {
  nlohmann::json j;
  nlohmann::json team = nlohmann::json::array();
  for (const auto& p : profile.team) team.push_back(policy_to_json(p));
  j["team"] = team;
  j["adversary"] = policy_to_json(profile.adversary);
  return j.dump(2);
}

PolicyProfile profile_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid profile JSON: ") + e.what());
  }
  PolicyProfile profile;
  try {
    ATMG_CHECK(j.contains("team") && j.contains("adversary"), ParseError,
               "profile file missing \"team\" or \"adversary\"");
    for (const auto& rows : j.at("team")) {
      profile.team.push_back(policy_from_json(rows));
    }
    profile.adversary = policy_from_json(j.at("adversary"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed profile: ") + e.what());
  }
  ATMG_CHECK(profile_feasible(profile), ValidationError,
             "profile rows must be probability vectors");
  return profile;
}

PolicyProfile read_profile(const std::string& path) {
  std::ifstream in(path);
  ATMG_CHECK(in.good(), ParseError, "cannot open profile file: " << path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return profile_from_json_text(buffer.str());
}

void write_profile(const PolicyProfile& profile, const std::string& path) {
  std::ofstream out(path);
  ATMG_CHECK(out.good(), ParseError, "cannot open for writing: " << path);
  out << profile_to_json_text(profile) << "\n";
}

Eigen::VectorXd flatten_profile(const PolicyProfile& profile) {
  Eigen::VectorXd team = flatten_team(profile.team);
  Eigen::VectorXd out(team.size() + profile.adversary.size());
  out.head(team.size()) = team;
  int at = static_cast<int>(team.size());
  for (int s = 0; s < profile.adversary.rows(); ++s) {
    for (int b = 0; b < profile.adversary.cols(); ++b) {
      out(at++) = profile.adversary(s, b);
    }
  }
  return out;
}

}  // namespace atmg
