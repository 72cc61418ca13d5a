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

#include "atmg/capi.h"

#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "atmg/estimators.hpp"
#include "atmg/exact.hpp"
#include "atmg/game.hpp"
#include "atmg/hidden_minmax.hpp"
#include "atmg/learners.hpp"
#include "atmg/policy.hpp"

struct atmg_game {
  atmg::GameSpec spec;
};

struct atmg_profile {
  atmg::PolicyProfile profile;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
atmg_status guarded(Fn&& fn) {
  try {
    fn();
    return ATMG_OK;
  } catch (const atmg::UsageError& e) {
    g_last_error = e.what();
    return ATMG_ERR_USAGE;
  } catch (const atmg::ParseError& e) {
    g_last_error = e.what();
    return ATMG_ERR_PARSE;
  } catch (const atmg::ValidationError& e) {
    g_last_error = e.what();
    return ATMG_ERR_VALIDATION;
  } catch (const atmg::NumericError& e) {
    g_last_error = e.what();
    return ATMG_ERR_NUMERIC;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ATMG_ERR_NUMERIC;
  }
}

atmg_status require(bool cond, const char* message) {
  if (!cond) {
    g_last_error = message;
    return ATMG_ERR_USAGE;
  }
  return ATMG_OK;
}

}  // namespace

extern "C" {

const char* atmg_version(void) { return "1.0.0"; }

const char* atmg_last_error(void) { return g_last_error.c_str(); }

void atmg_string_free(char* str) { delete[] str; }

atmg_status atmg_game_generate(uint64_t seed, int num_states,
                               const int* team_action_sizes, int num_team,
                               int adversary_actions, double discount,
                               double sparsity, atmg_game** out) {
  if (atmg_status s = require(out && team_action_sizes && num_team >= 1,
                              "null output or empty team"))
    return s;
  return guarded([&] {
    std::vector<int> sizes(team_action_sizes, team_action_sizes + num_team);
    auto game = std::make_unique<atmg_game>();
    game->spec = atmg::generate_random(seed, num_states, sizes,
                                       adversary_actions, discount, sparsity);
    *out = game.release();
  });
}

atmg_status atmg_game_matching_pennies(double discount, atmg_game** out) {
  if (atmg_status s = require(out != nullptr, "null output")) return s;
  return guarded([&] {
    auto game = std::make_unique<atmg_game>();
    game->spec = atmg::make_matching_pennies(discount);
    *out = game.release();
  });
}

atmg_status atmg_game_read(const char* path, atmg_game** out) {
  if (atmg_status s = require(out && path, "null argument")) return s;
  return guarded([&] {
    auto game = std::make_unique<atmg_game>();
    game->spec = atmg::read_game(path);
    *out = game.release();
  });
}

atmg_status atmg_game_write(const atmg_game* game, const char* path) {
  if (atmg_status s = require(game && path, "null argument")) return s;
  return guarded([&] { atmg::write_game(game->spec, path); });
}

atmg_status atmg_game_validate(const atmg_game* game,
                               char** violations_json) {
  if (atmg_status s = require(game && violations_json, "null argument"))
    return s;
  return guarded([&] {
    nlohmann::json arr = nlohmann::json::array();
    for (const atmg::Violation& v : atmg::validate(game->spec)) {
      arr.push_back({{"field", v.field},
                     {"index", v.index},
                     {"magnitude", v.magnitude},
                     {"message", v.message}});
    }
    *violations_json = dup_string(arr.dump(2));
  });
}

void atmg_game_free(atmg_game* game) { delete game; }

int atmg_game_num_states(const atmg_game* game) {
  return game ? game->spec.num_states : 0;
}
int atmg_game_num_team_players(const atmg_game* game) {
  return game ? game->spec.num_team_players() : 0;
}
int atmg_game_adversary_actions(const atmg_game* game) {
  return game ? game->spec.adversary_action_size : 0;
}
double atmg_game_discount(const atmg_game* game) {
  return game ? game->spec.discount : 0.0;
}

atmg_status atmg_profile_uniform(const atmg_game* game, atmg_profile** out) {
  if (atmg_status s = require(game && out, "null argument")) return s;
  return guarded([&] {
    auto profile = std::make_unique<atmg_profile>();
    profile->profile = atmg::uniform_profile(game->spec);
    *out = profile.release();
  });
}

atmg_status atmg_profile_read(const atmg_game* game, const char* path,
                              atmg_profile** out) {
  if (atmg_status s = require(game && path && out, "null argument")) return s;
  return guarded([&] {
    auto profile = std::make_unique<atmg_profile>();
    profile->profile = atmg::read_profile(path);
    const atmg::GameSpec& spec = game->spec;
    ATMG_CHECK(profile->profile.num_team_players() ==
                   spec.num_team_players(),
               atmg::ValidationError, "profile has wrong number of players");
    for (int i = 0; i < spec.num_team_players(); ++i) {
      ATMG_CHECK(profile->profile.team[i].rows() == spec.num_states &&
                     profile->profile.team[i].cols() ==
                         spec.team_action_sizes[i],
                 atmg::ValidationError, "team policy shape mismatch");
    }
    ATMG_CHECK(profile->profile.adversary.rows() == spec.num_states &&
                   profile->profile.adversary.cols() ==
                       spec.adversary_action_size,
               atmg::ValidationError, "adversary policy shape mismatch");
    *out = profile.release();
  });
}

atmg_status atmg_profile_write(const atmg_profile* profile,
                               const char* path) {
  if (atmg_status s = require(profile && path, "null argument")) return s;
  return guarded([&] { atmg::write_profile(profile->profile, path); });
}

void atmg_profile_free(atmg_profile* profile) { delete profile; }

atmg_status atmg_exact_value(const atmg_game* game,
                             const atmg_profile* profile, double* v_rho) {
  if (atmg_status s = require(game && profile && v_rho, "null argument"))
    return s;
  return guarded([&] {
    *v_rho = atmg::exact_value(game->spec, profile->profile).v_rho;
  });
}

atmg_status atmg_nash_gap(const atmg_game* game, const atmg_profile* profile,
                          double* gap) {
  if (atmg_status s = require(game && profile && gap, "null argument"))
    return s;
  return guarded([&] {
    *gap = atmg::nash_gap(game->spec, profile->profile);
  });
}

atmg_status atmg_evaluate_json(const atmg_game* game,
                               const atmg_profile* profile, char** json_out) {
  if (atmg_status s = require(game && profile && json_out, "null argument"))
    return s;
  return guarded([&] {
    const atmg::GapBreakdown gaps =
        atmg::evaluate_profile(game->spec, profile->profile);
    nlohmann::json j;
    j["nash_gap"] = gaps.gap;
    j["team_gains"] = gaps.team_gains;
    j["adversary_gain"] = gaps.adversary_gain;
    j["value"] = gaps.value;
    *json_out = dup_string(j.dump(2));
  });
}

atmg_status atmg_train(const atmg_game* game, const char* config_json,
                       uint64_t seed, const char* out_dir, int exact_oracles,
                       int threads, char** summary_json) {
  if (atmg_status s =
          require(game && config_json && out_dir && summary_json,
                  "null argument"))
    return s;
  return guarded([&] {
    const atmg::OuterConfig config =
        atmg::config_from_json_text(config_json);
    atmg::validate_config(game->spec, config);
    atmg::IspngOptions options;
    options.exact_oracles = exact_oracles != 0;
    options.threads = threads > 0 ? threads : 1;
    const atmg::IspngResult result =
        atmg::ispng(game->spec, config, seed, options);

    std::filesystem::create_directories(out_dir);
    const std::string runlog =
        (std::filesystem::path(out_dir) / "runlog.csv").string();
    const std::string profile_path =
        (std::filesystem::path(out_dir) / "profile.json").string();
    atmg::write_run_log_csv(result.log, runlog);
    atmg::write_profile({result.x_star, result.y_star}, profile_path);

    nlohmann::json j;
    j["t_star"] = result.t_star;
    j["final_gap"] = result.final_gap;
    j["runlog"] = runlog;
    j["profile"] = profile_path;
    *summary_json = dup_string(j.dump(2));
  });
}

atmg_status atmg_tune_json(const atmg_game* game, double eps,
                           char** json_out) {
  if (atmg_status s = require(game && json_out, "null argument")) return s;
  return guarded([&] {
    const atmg::TuningSchedule schedule = atmg::paper_tuning(game->spec, eps);
    nlohmann::json j =
        nlohmann::json::parse(atmg::tuning_to_json_text(schedule));
    j["constants"] = nlohmann::json::parse(atmg::constants_to_json_text(
        atmg::paper_constants(game->spec, schedule.nu)));
    *json_out = dup_string(j.dump(2));
  });
}

atmg_status atmg_diagnose(const atmg_game* game, uint64_t seed,
                          const char* out_csv, char** summary_json) {
  if (atmg_status s = require(game && out_csv && summary_json,
                              "null argument"))
    return s;
  return guarded([&] {
    atmg::DiagnosticsConfig config;
    const auto rows =
        atmg::run_estimator_diagnostics(game->spec, config, seed);
    atmg::write_diagnostics_csv(rows, out_csv);
    bool all_pass = true;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows) {
      all_pass = all_pass && row.pass;
      arr.push_back({{"quantity", row.quantity},
                     {"empirical", row.empirical},
                     {"paper_bound", row.paper_bound},
                     {"pass", row.pass}});
    }
    nlohmann::json j;
    j["csv"] = out_csv;
    j["rows"] = arr;
    j["all_pass"] = all_pass;
    *summary_json = dup_string(j.dump(2));
  });
}

atmg_status atmg_minmax_suite(double eps, uint64_t seed, const char* out_csv,
                              char** summary_json) {
  if (atmg_status s = require(out_csv && summary_json, "null argument"))
    return s;
  return guarded([&] {
    const auto rows = atmg::run_minmax_suite(eps, seed);
    atmg::write_minmax_suite_csv(rows, out_csv);
    bool all_pass = true;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows) {
      all_pass = all_pass && row.pass;
      arr.push_back({{"problem", row.problem},
                     {"deviation_x", row.deviation_x},
                     {"deviation_y", row.deviation_y},
                     {"target", row.target},
                     {"pass", row.pass}});
    }
    nlohmann::json j;
    j["csv"] = out_csv;
    j["rows"] = arr;
    j["all_pass"] = all_pass;
    *summary_json = dup_string(j.dump(2));
  });
}

}  // extern "C"
