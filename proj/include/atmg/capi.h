/* Copyright 2026 The atmg-lab Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the adversarial team Markov game laboratory.  All entry
 * points return an atmg_status; outputs go through pointers.  Handles are
 * opaque and freed with their matching *_free call.  Strings returned
 * through char** are heap-allocated; release them with atmg_string_free.
 * On failure, atmg_last_error() describes the most recent error in the
 * calling thread. */

#ifndef ATMG_CAPI_H_
#define ATMG_CAPI_H_

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum atmg_status {
  ATMG_OK = 0,
  ATMG_ERR_USAGE = 1,      /* bad arguments or preconditions */
  ATMG_ERR_PARSE = 2,      /* unreadable file or malformed JSON */
  ATMG_ERR_VALIDATION = 3, /* structurally valid input violating invariants */
  ATMG_ERR_NUMERIC = 4,    /* non-finite quantities or failed solves */
} atmg_status;

typedef struct atmg_game atmg_game;
typedef struct atmg_profile atmg_profile;

const char* atmg_version(void);
const char* atmg_last_error(void);
void atmg_string_free(char* str);

/* --- games ---------------------------------------------------------------- */

atmg_status atmg_game_generate(uint64_t seed, int num_states,
                               const int* team_action_sizes, int num_team,
                               int adversary_actions, double discount,
                               double sparsity, atmg_game** out);
atmg_status atmg_game_matching_pennies(double discount, atmg_game** out);
atmg_status atmg_game_read(const char* path, atmg_game** out);
atmg_status atmg_game_write(const atmg_game* game, const char* path);
/* violations_json: JSON array of {field, index, magnitude, message} */
atmg_status atmg_game_validate(const atmg_game* game, char** violations_json);
void atmg_game_free(atmg_game* game);

int atmg_game_num_states(const atmg_game* game);
int atmg_game_num_team_players(const atmg_game* game);
int atmg_game_adversary_actions(const atmg_game* game);
double atmg_game_discount(const atmg_game* game);

/* --- profiles --------------------------------------------------------------- */

atmg_status atmg_profile_uniform(const atmg_game* game, atmg_profile** out);
atmg_status atmg_profile_read(const atmg_game* game, const char* path,
                              atmg_profile** out);
atmg_status atmg_profile_write(const atmg_profile* profile, const char* path);
void atmg_profile_free(atmg_profile* profile);

/* --- oracles ---------------------------------------------------------------- */

atmg_status atmg_exact_value(const atmg_game* game,
                             const atmg_profile* profile, double* v_rho);
atmg_status atmg_nash_gap(const atmg_game* game, const atmg_profile* profile,
                          double* gap);
/* {"nash_gap", "team_gains", "adversary_gain", "value"} */
atmg_status atmg_evaluate_json(const atmg_game* game,
                               const atmg_profile* profile, char** json_out);

/* --- learning ---------------------------------------------------------------- */

/* Runs the nested learner with the JSON config; writes runlog.csv and
 * profile.json into out_dir and returns a JSON summary
 * {"t_star", "final_gap", "runlog", "profile"}. */
atmg_status atmg_train(const atmg_game* game, const char* config_json,
                       uint64_t seed, const char* out_dir, int exact_oracles,
                       int threads, char** summary_json);

/* Schedule audit at accuracy eps; JSON with every schedule field plus a
 * "warnings" list. */
atmg_status atmg_tune_json(const atmg_game* game, double eps, char** json_out);

/* Estimator bound suite; writes a CSV (quantity, empirical, paper_bound,
 * pass) and returns {"csv", "rows", "all_pass"}. */
atmg_status atmg_diagnose(const atmg_game* game, uint64_t seed,
                          const char* out_csv, char** summary_json);

/* Min-max test-problem suite: certifies every named problem at accuracy eps,
 * writes a CSV (problem, deviation_x, deviation_y, target, pass) and returns
 * {"csv", "rows", "all_pass"}.  Needs no game handle. */
atmg_status atmg_minmax_suite(double eps, uint64_t seed, const char* out_csv,
                              char** summary_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ATMG_CAPI_H_ */
