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
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>

#include "atmg/capi.h"

TEST_SUITE_BEGIN("capi");

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

struct Game {
  atmg_game* handle = nullptr;
  ~Game() { atmg_game_free(handle); }
};

struct Profile {
  atmg_profile* handle = nullptr;
  ~Profile() { atmg_profile_free(handle); }
};

}  // namespace

TEST_CASE("version and null-argument handling") {
  CHECK(std::strlen(atmg_version()) > 0);
  CHECK(atmg_game_read(nullptr, nullptr) == ATMG_ERR_USAGE);
  CHECK(std::strlen(atmg_last_error()) > 0);
}

TEST_CASE("generate, write, read and validate through the C surface") {
  Game game;
  const int sizes[2] = {2, 2};
  REQUIRE(atmg_game_generate(7, 2, sizes, 2, 2, 0.9, 1.0, &game.handle) ==
          ATMG_OK);
  CHECK(atmg_game_num_states(game.handle) == 2);
  CHECK(atmg_game_num_team_players(game.handle) == 2);
  CHECK(atmg_game_adversary_actions(game.handle) == 2);
  CHECK(atmg_game_discount(game.handle) == 0.9);

  char* violations = nullptr;
  REQUIRE(atmg_game_validate(game.handle, &violations) == ATMG_OK);
  CHECK(std::string(violations) == "[]");
  atmg_string_free(violations);

  const std::string path = temp_path("atmg_capi_game.json");
  REQUIRE(atmg_game_write(game.handle, path.c_str()) == ATMG_OK);
  Game loaded;
  REQUIRE(atmg_game_read(path.c_str(), &loaded.handle) == ATMG_OK);
  CHECK(atmg_game_num_states(loaded.handle) == 2);
  std::remove(path.c_str());

  Game missing;
  CHECK(atmg_game_read("/nonexistent/game.json", &missing.handle) ==
        ATMG_ERR_PARSE);
}

TEST_CASE("bad generation parameters surface as usage errors") {
  Game game;
  const int sizes[1] = {2};
  CHECK(atmg_game_generate(1, 2, sizes, 1, 2, 1.0, 1.0, &game.handle) ==
        ATMG_ERR_USAGE);
  CHECK(std::string(atmg_last_error()).find("discount") !=
        std::string::npos);
}

TEST_CASE("profiles, values and gaps round-trip") {
  Game game;
  REQUIRE(atmg_game_matching_pennies(0.5, &game.handle) == ATMG_OK);
  Profile profile;
  REQUIRE(atmg_profile_uniform(game.handle, &profile.handle) == ATMG_OK);

  double value = 0.0;
  REQUIRE(atmg_exact_value(game.handle, profile.handle, &value) == ATMG_OK);
  CHECK(value == doctest::Approx(1.0));

  double gap = 1.0;
  REQUIRE(atmg_nash_gap(game.handle, profile.handle, &gap) == ATMG_OK);
  CHECK(std::abs(gap) <= 1e-8);

  char* json = nullptr;
  REQUIRE(atmg_evaluate_json(game.handle, profile.handle, &json) == ATMG_OK);
  CHECK(std::string(json).find("nash_gap") != std::string::npos);
  atmg_string_free(json);

  const std::string path = temp_path("atmg_capi_profile.json");
  REQUIRE(atmg_profile_write(profile.handle, path.c_str()) == ATMG_OK);
  Profile loaded;
  REQUIRE(atmg_profile_read(game.handle, path.c_str(), &loaded.handle) ==
          ATMG_OK);
  std::remove(path.c_str());
}

TEST_CASE("profile shape mismatches are validation errors") {
  Game pennies;
  REQUIRE(atmg_game_matching_pennies(0.5, &pennies.handle) == ATMG_OK);
  Profile profile;
  REQUIRE(atmg_profile_uniform(pennies.handle, &profile.handle) == ATMG_OK);
  const std::string path = temp_path("atmg_capi_profile2.json");
  REQUIRE(atmg_profile_write(profile.handle, path.c_str()) == ATMG_OK);

  Game other;
  const int sizes[1] = {3};
  REQUIRE(atmg_game_generate(3, 2, sizes, 1, 2, 0.5, 1.0, &other.handle) ==
          ATMG_OK);
  Profile bad;
  CHECK(atmg_profile_read(other.handle, path.c_str(), &bad.handle) ==
        ATMG_ERR_VALIDATION);
  std::remove(path.c_str());
}

TEST_CASE("train writes artifacts and reports the final gap") {
  Game game;
  REQUIRE(atmg_game_matching_pennies(0.0, &game.handle) == ATMG_OK);
  const char* config =
      "{\"eta_x\":0.05,\"t_x\":3,\"m\":50,\"zeta_x\":0.05,\"epsilon\":0.1,"
      "\"inner\":{\"nu\":0.1,\"k\":50,\"h\":5,\"eta_y\":0.1,\"zeta_y\":0.05,"
      "\"t_y\":10}}";
  const std::string out_dir = temp_path("atmg_capi_train");
  char* summary = nullptr;
  REQUIRE(atmg_train(game.handle, config, 11, out_dir.c_str(), 0, 2,
                     &summary) == ATMG_OK);
  const std::string text(summary);
  atmg_string_free(summary);
  CHECK(text.find("final_gap") != std::string::npos);
  CHECK(std::filesystem::exists(out_dir + "/runlog.csv"));
  CHECK(std::filesystem::exists(out_dir + "/profile.json"));
  std::filesystem::remove_all(out_dir);

  char* bad_summary = nullptr;
  CHECK(atmg_train(game.handle, "{\"eta_x\":0.1}", 1, out_dir.c_str(), 0, 1,
                   &bad_summary) == ATMG_ERR_PARSE);
  CHECK(std::string(atmg_last_error()).find("t_x") != std::string::npos);
  std::filesystem::remove_all(out_dir);
}

TEST_CASE("tune emits the full schedule as JSON") {
  Game game;
  REQUIRE(atmg_game_matching_pennies(0.5, &game.handle) == ATMG_OK);
  char* json = nullptr;
  REQUIRE(atmg_tune_json(game.handle, 0.1, &json) == ATMG_OK);
  const std::string text(json);
  atmg_string_free(json);
  for (const char* field :
       {"t_x", "eta_x", "zeta_x", "m", "nu", "t_y", "eta_y", "zeta_y", "k",
        "h", "warnings"}) {
    CHECK(text.find(field) != std::string::npos);
  }
}

TEST_CASE("diagnose writes the bound CSV") {
  Game game;
  const int sizes[1] = {2};
  REQUIRE(atmg_game_generate(5, 2, sizes, 1, 2, 0.5, 1.0, &game.handle) ==
          ATMG_OK);
  const std::string csv = temp_path("atmg_capi_diag.csv");
  char* summary = nullptr;
  REQUIRE(atmg_diagnose(game.handle, 2, csv.c_str(), &summary) == ATMG_OK);
  const std::string text(summary);
  atmg_string_free(summary);
  CHECK(text.find("all_pass") != std::string::npos);
  CHECK(std::filesystem::exists(csv));
  std::remove(csv.c_str());
}

TEST_SUITE_END();
