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

// Command-line front end over the shared-library C API: generate games, run
// the nested learner, evaluate profiles, audit the schedule calculator, and
// run the estimator diagnostics.  Exit codes: 0 success, 2 usage error,
// 3 validation/parse error, 4 numerical abort.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "atmg/capi.h"

namespace {

int status_to_exit(atmg_status status) {
  switch (status) {
    case ATMG_OK:
      return 0;
    case ATMG_ERR_USAGE:
      return 2;
    case ATMG_ERR_PARSE:
    case ATMG_ERR_VALIDATION:
      return 3;
    case ATMG_ERR_NUMERIC:
      return 4;
  }
  return 4;
}

int fail(atmg_status status) {
  std::fprintf(stderr, "error: %s\n", atmg_last_error());
  return status_to_exit(status);
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string meta_json(int argc, char** argv, const std::string& config_text,
                      std::uint64_t seed) {
  std::ostringstream cmd;
  for (int i = 0; i < argc; ++i) {
    if (i) cmd << " ";
    cmd << argv[i];
  }
  std::ostringstream out;
  out << "{\"command_line\":\"" << cmd.str() << "\",\"config_hash\":\""
      << std::hex << fnv1a(config_text) << std::dec << "\",\"seed\":" << seed
      << "}";
  return out.str();
}

// every command's stdout log starts with the invocation record
void print_with_meta(const char* body, const std::string& meta) {
  std::string text(body);
  const auto brace = text.find('{');
  if (brace != std::string::npos) {
    text.insert(brace + 1, "\n  \"meta\": " + meta + ",");
  }
  std::printf("%s\n", text.c_str());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw CLI::ValidationError("cannot open file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<int> parse_team_actions(const std::string& csv) {
  std::vector<int> sizes;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) sizes.push_back(std::stoi(item));
  return sizes;
}

struct GameHandle {
  atmg_game* game = nullptr;
  ~GameHandle() { atmg_game_free(game); }
};

struct ProfileHandle {
  atmg_profile* profile = nullptr;
  ~ProfileHandle() { atmg_profile_free(profile); }
};

struct StringHandle {
  char* str = nullptr;
  ~StringHandle() { atmg_string_free(str); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarial team Markov game laboratory"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "write a random game file");
  std::uint64_t gen_seed = 0;
  int gen_states = 2;
  std::string gen_team = "2,2";
  int gen_adv = 2;
  double gen_gamma = 0.9;
  double gen_sparsity = 1.0;
  std::string gen_out;
  generate->add_option("--seed", gen_seed, "master seed");
  generate->add_option("--states", gen_states, "number of states");
  generate->add_option("--team-actions", gen_team,
                       "comma-separated team action counts");
  generate->add_option("--adv-actions", gen_adv, "adversary action count");
  generate->add_option("--gamma", gen_gamma, "discount factor in [0,1)");
  generate->add_option("--sparsity", gen_sparsity,
                       "transition support density in (0,1]");
  generate->add_option("--out", gen_out, "output path")->required();

  // train
  auto* train = app.add_subcommand("train", "run the nested learner");
  std::string train_game, train_config, train_out_dir;
  std::uint64_t train_seed = 0;
  bool train_exact = false;
  int train_threads = 1;
  train->add_option("--game", train_game, "game file")->required();
  train->add_option("--config", train_config, "config JSON file")->required();
  train->add_option("--seed", train_seed, "master seed");
  train->add_option("--out-dir", train_out_dir, "output directory")
      ->required();
  train->add_flag("--exact-oracles", train_exact,
                  "swap estimators for exact gradients");
  train->add_option("--threads", train_threads,
                    "worker cap; does not change results");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "exact deviation gains");
  std::string eval_game, eval_profile;
  evaluate->add_option("--game", eval_game, "game file")->required();
  evaluate->add_option("--profile", eval_profile, "profile JSON")->required();

  // tune
  auto* tune = app.add_subcommand("tune", "audit the schedule calculator");
  std::string tune_game;
  double tune_eps = 0.1;
  tune->add_option("--game", tune_game, "game file")->required();
  tune->add_option("--epsilon", tune_eps, "target accuracy")->required();

  // diagnose
  auto* diagnose =
      app.add_subcommand("diagnose", "estimator or min-max suites to CSV");
  std::string diag_game, diag_suite = "estimators", diag_out = "diagnostics.csv";
  std::uint64_t diag_seed = 0;
  double diag_eps = 0.05;
  diagnose->add_option("--game", diag_game,
                       "game file (estimators suite only)");
  diagnose->add_option("--suite", diag_suite,
                       "suite name: estimators | minmax");
  diagnose->add_option("--seed", diag_seed, "master seed");
  diagnose->add_option("--out", diag_out, "output CSV path");
  diagnose->add_option("--epsilon", diag_eps,
                       "target accuracy (minmax suite)");

  // bench
  auto* bench = app.add_subcommand("bench", "time the exact oracles");
  std::string bench_game;
  int bench_reps = 50;
  bench->add_option("--game", bench_game, "game file")->required();
  bench->add_option("--reps", bench_reps, "repetitions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  }

  try {
    if (*generate) {
      const auto sizes = parse_team_actions(gen_team);
      GameHandle game;
      if (atmg_status s = atmg_game_generate(
              gen_seed, gen_states, sizes.data(),
              static_cast<int>(sizes.size()), gen_adv, gen_gamma,
              gen_sparsity, &game.game))
        return fail(s);
      if (atmg_status s = atmg_game_write(game.game, gen_out.c_str()))
        return fail(s);
      std::printf("{\"game\":\"%s\",\"meta\":%s}\n", gen_out.c_str(),
                  meta_json(argc, argv, "", gen_seed).c_str());
      return 0;
    }

    if (*train) {
      GameHandle game;
      if (atmg_status s = atmg_game_read(train_game.c_str(), &game.game))
        return fail(s);
      const std::string config_text = read_file(train_config);
      StringHandle summary;
      if (atmg_status s = atmg_train(game.game, config_text.c_str(),
                                     train_seed, train_out_dir.c_str(),
                                     train_exact ? 1 : 0, train_threads,
                                     &summary.str))
        return fail(s);
      const std::string meta = meta_json(argc, argv, config_text, train_seed);
      std::ofstream meta_out(train_out_dir + "/run_meta.json");
      meta_out << meta << "\n";
      print_with_meta(summary.str, meta);
      return 0;
    }

    if (*evaluate) {
      GameHandle game;
      if (atmg_status s = atmg_game_read(eval_game.c_str(), &game.game))
        return fail(s);
      ProfileHandle profile;
      if (atmg_status s = atmg_profile_read(game.game, eval_profile.c_str(),
                                            &profile.profile))
        return fail(s);
      StringHandle json;
      if (atmg_status s =
              atmg_evaluate_json(game.game, profile.profile, &json.str))
        return fail(s);
      print_with_meta(json.str, meta_json(argc, argv, "", 0));
      return 0;
    }

    if (*tune) {
      GameHandle game;
      if (atmg_status s = atmg_game_read(tune_game.c_str(), &game.game))
        return fail(s);
      StringHandle json;
      if (atmg_status s = atmg_tune_json(game.game, tune_eps, &json.str))
        return fail(s);
      print_with_meta(json.str, meta_json(argc, argv, "", 0));
      return 0;
    }

    if (*diagnose) {
      StringHandle json;
      if (diag_suite == "estimators") {
        if (diag_game.empty()) {
          std::fprintf(stderr,
                       "usage error: --game is required for the estimators "
                       "suite\n");
          return 2;
        }
        GameHandle game;
        if (atmg_status s = atmg_game_read(diag_game.c_str(), &game.game))
          return fail(s);
        if (atmg_status s = atmg_diagnose(game.game, diag_seed,
                                          diag_out.c_str(), &json.str))
          return fail(s);
      } else if (diag_suite == "minmax") {
        if (atmg_status s = atmg_minmax_suite(diag_eps, diag_seed,
                                              diag_out.c_str(), &json.str))
          return fail(s);
      } else {
        std::fprintf(stderr, "usage error: unknown suite \"%s\"\n",
                     diag_suite.c_str());
        return 2;
      }
      print_with_meta(json.str, meta_json(argc, argv, diag_suite, diag_seed));
      return 0;
    }

    if (*bench) {
      GameHandle game;
      if (atmg_status s = atmg_game_read(bench_game.c_str(), &game.game))
        return fail(s);
      ProfileHandle profile;
      if (atmg_status s = atmg_profile_uniform(game.game, &profile.profile))
        return fail(s);
      double value = 0.0, gap = 0.0;
      const auto t0 = std::chrono::steady_clock::now();
      for (int r = 0; r < bench_reps; ++r) {
        if (atmg_status s =
                atmg_exact_value(game.game, profile.profile, &value))
          return fail(s);
      }
      const auto t1 = std::chrono::steady_clock::now();
      for (int r = 0; r < bench_reps; ++r) {
        if (atmg_status s = atmg_nash_gap(game.game, profile.profile, &gap))
          return fail(s);
      }
      const auto t2 = std::chrono::steady_clock::now();
      const double ms_value =
          std::chrono::duration<double, std::milli>(t1 - t0).count() /
          bench_reps;
      const double ms_gap =
          std::chrono::duration<double, std::milli>(t2 - t1).count() /
          bench_reps;
      std::printf(
          "{\"meta\":%s,\"exact_value_ms\":%g,\"nash_gap_ms\":%g,"
          "\"value\":%g,\"nash_gap\":%g}\n",
          meta_json(argc, argv, "", 0).c_str(), ms_value, ms_gap, value,
          gap);
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 2;
}
