#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bada/common.hpp"
#include "bada/rng.hpp"

namespace bada {

// One stationary gridworld MDP. Observations are one-hot position plus
// normalized (row, col), passed through permute -> gain -> bias in that order.
struct EnvSpec {
  std::string id = "grid";
  int grid = 7;
  int horizon = 64;
  int action_count = 4;  // 0 up, 1 right, 2 down, 3 left
  double step_reward = -0.01;
  double transition_noise = 0.0;  // probability the action is replaced
  std::vector<int> start_cells{0};
  std::map<int, double> terminals;  // cell -> reward on entry
  std::vector<int> walls;
  Vector obs_gain;            // empty = identity
  Vector obs_bias;            // empty = zero
  std::vector<int> obs_perm;  // empty = identity; out[i] = base[perm[i]]

  int cells() const { return grid * grid; }
  int obs_dim() const { return grid * grid + 2; }
};

void validate(const EnvSpec& spec);

struct EnvState {
  EnvSpec spec;
  int cell = 0;
  int step_count = 0;
  int schedule_cursor = 0;
};

// Epochs at which the MDP swaps, with the full replacement spec. Hidden from
// the detector and trainer; only the evaluator reads it.
struct ChangeSchedule {
  std::vector<std::pair<int, EnvSpec>> changes;
};

Vector observe(const EnvSpec& spec, int cell);

Vector env_reset(EnvState& env, Rng& rng);

struct StepResult {
  Vector observation;
  double reward = 0.0;
  bool done = false;
};

StepResult env_step(EnvState& env, int action, Rng& rng);

// Swaps in every pending spec with change_epoch <= epoch; returns whether a
// swap happened. Call with non-decreasing epochs.
bool advance_schedule(EnvState& env, int epoch, const ChangeSchedule& schedule);

// Base specs for the shipped scenario families: shift-grid (observation
// gain/bias change), goal-grid (terminal reward swap), noisy-corridor
// (transition-noise change), perm-grid (observation feature permutation).
EnvSpec make_scenario(const std::string& id);

// Merge patch describing one change of the given family. magnitude scales the
// change; change_index reseeds drawn vectors / alternates directions so that
// consecutive changes differ from each other.
nlohmann::json scenario_change(const std::string& id, double magnitude, int change_index = 0);

EnvSpec apply_patch(const EnvSpec& spec, const nlohmann::json& patch);

void to_json(nlohmann::json& j, const EnvSpec& spec);
void from_json(const nlohmann::json& j, EnvSpec& spec);

}  // namespace bada
