#include "bada/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bada {

namespace {

bool cell_in_grid(const EnvSpec& spec, int cell) { return cell >= 0 && cell < spec.cells(); }

bool is_wall(const EnvSpec& spec, int cell) {
  return std::find(spec.walls.begin(), spec.walls.end(), cell) != spec.walls.end();
}

constexpr int kRowDelta[4] = {-1, 0, 1, 0};
constexpr int kColDelta[4] = {0, 1, 0, -1};

// Fixed per-family seeds so a scenario's drawn change vectors are identical
// across runs and master seeds.
std::uint64_t scenario_seed(const std::string& id) {
  if (id == "shift-grid") return 7101;
  if (id == "goal-grid") return 7102;
  if (id == "noisy-corridor") return 7103;
  if (id == "perm-grid") return 7104;
  throw std::invalid_argument("unknown scenario id: " + id);
}

}  // namespace

void validate(const EnvSpec& spec) {
  if (spec.grid < 2) throw std::invalid_argument("env: grid must be >= 2");
  if (spec.horizon < 1) throw std::invalid_argument("env: horizon must be >= 1");
  if (spec.action_count != 4) throw std::invalid_argument("env: action_count must be 4");
  if (spec.transition_noise < 0.0 || spec.transition_noise >= 1.0) {
    throw std::invalid_argument("env: transition_noise must lie in [0, 1)");
  }
  if (spec.start_cells.empty()) throw std::invalid_argument("env: no start cells");
  for (int c : spec.start_cells) {
    if (!cell_in_grid(spec, c)) throw std::invalid_argument("env: start cell out of bounds");
    if (is_wall(spec, c)) throw std::invalid_argument("env: start cell is a wall");
    if (spec.terminals.count(c)) throw std::invalid_argument("env: start cell is terminal");
  }
  for (const auto& [c, r] : spec.terminals) {
    if (!cell_in_grid(spec, c)) throw std::invalid_argument("env: terminal out of bounds");
    if (is_wall(spec, c)) throw std::invalid_argument("env: terminal is a wall");
  }
  for (int c : spec.walls) {
    if (!cell_in_grid(spec, c)) throw std::invalid_argument("env: wall out of bounds");
  }
  const int d = spec.obs_dim();
  if (spec.obs_gain.size() != 0 && spec.obs_gain.size() != d) {
    throw std::invalid_argument("env: obs_gain size mismatch");
  }
  if (spec.obs_bias.size() != 0 && spec.obs_bias.size() != d) {
    throw std::invalid_argument("env: obs_bias size mismatch");
  }
  if (!spec.obs_perm.empty()) {
    if (static_cast<int>(spec.obs_perm.size()) != d) {
      throw std::invalid_argument("env: obs_perm size mismatch");
    }
    std::vector<char> seen(d, 0);
    for (int i : spec.obs_perm) {
      if (i < 0 || i >= d || seen[i]) {
        throw std::invalid_argument("env: obs_perm is not a permutation");
      }
      seen[i] = 1;
    }
  }
}

Vector observe(const EnvSpec& spec, int cell) {
  const int d = spec.obs_dim();
  Vector base = Vector::Zero(d);
  base(cell) = 1.0;
  base(spec.cells()) = static_cast<double>(cell / spec.grid) / (spec.grid - 1);
  base(spec.cells() + 1) = static_cast<double>(cell % spec.grid) / (spec.grid - 1);

  Vector out(d);
  if (spec.obs_perm.empty()) {
    out = base;
  } else {
    for (int i = 0; i < d; ++i) out(i) = base(spec.obs_perm[i]);
  }
  if (spec.obs_gain.size() != 0) out.array() *= spec.obs_gain.array();
  if (spec.obs_bias.size() != 0) out += spec.obs_bias;
  return out;
}

Vector env_reset(EnvState& env, Rng& rng) {
  const auto& starts = env.spec.start_cells;
  env.cell = starts.size() == 1
                 ? starts[0]
                 : starts[rng.uniform_int(static_cast<int>(starts.size()))];
  env.step_count = 0;
  return observe(env.spec, env.cell);
}

StepResult env_step(EnvState& env, int action, Rng& rng) {
  const EnvSpec& spec = env.spec;
  if (action < 0 || action >= spec.action_count) {
    throw std::invalid_argument("env_step: action out of range");
  }
  int a = action;
  if (spec.transition_noise > 0.0 && rng.uniform() < spec.transition_noise) {
    a = (a + 1 + rng.uniform_int(spec.action_count - 1)) % spec.action_count;
  }
  const int row = env.cell / spec.grid + kRowDelta[a];
  const int col = env.cell % spec.grid + kColDelta[a];
  if (row >= 0 && row < spec.grid && col >= 0 && col < spec.grid) {
    const int target = row * spec.grid + col;
    if (!is_wall(spec, target)) env.cell = target;
  }
  env.step_count += 1;

  StepResult res;
  res.observation = observe(spec, env.cell);
  const auto it = spec.terminals.find(env.cell);
  if (it != spec.terminals.end()) {
    res.reward = it->second;
    res.done = true;
  } else {
    res.reward = spec.step_reward;
    res.done = env.step_count >= spec.horizon;
  }
  return res;
}

bool advance_schedule(EnvState& env, int epoch, const ChangeSchedule& schedule) {
  bool changed = false;
  while (env.schedule_cursor < static_cast<int>(schedule.changes.size()) &&
         epoch >= schedule.changes[env.schedule_cursor].first) {
    env.spec = schedule.changes[env.schedule_cursor].second;
    env.schedule_cursor += 1;
    changed = true;
  }
  return changed;
}

EnvSpec make_scenario(const std::string& id) {
  EnvSpec spec;
  spec.id = id;
  spec.transition_noise = 0.05;
  if (id == "shift-grid" || id == "perm-grid") {
    spec.start_cells = {0};
    spec.terminals = {{48, 1.0}};
  } else if (id == "goal-grid") {
    spec.start_cells = {0};
    spec.terminals = {{48, 1.0}, {42, -1.0}};
  } else if (id == "noisy-corridor") {
    spec.start_cells = {21};
    spec.terminals = {{27, 1.0}};
    for (int c = 0; c < spec.cells(); ++c) {
      if (c / spec.grid != 3) spec.walls.push_back(c);
    }
  } else {
    throw std::invalid_argument("unknown scenario id: " + id);
  }
  validate(spec);
  return spec;
}

nlohmann::json scenario_change(const std::string& id, double magnitude, int change_index) {
  Rng rng(derive_seed(scenario_seed(id), static_cast<std::uint64_t>(change_index)));
  const EnvSpec base = make_scenario(id);
  const int d = base.obs_dim();
  nlohmann::json patch;
  if (id == "shift-grid") {
    std::vector<double> gain(d), bias(d);
    for (int i = 0; i < d; ++i) {
      gain[i] = 1.0 + magnitude * 0.25 * rng.uniform(-1.0, 1.0);
      bias[i] = magnitude * 0.5 * rng.uniform(-1.0, 1.0);
    }
    patch["obs_gain"] = gain;
    patch["obs_bias"] = bias;
  } else if (id == "goal-grid") {
    // The goal hops between the far corner and its bottom-row neighbour; the
    // vacated cell keeps a sign-flipped payoff so stale policies pay for it.
    const bool away = change_index % 2 == 0;
    patch["terminals"][away ? "48" : "47"] = -magnitude;
    patch["terminals"][away ? "47" : "48"] = magnitude;
  } else if (id == "noisy-corridor") {
    const double noisy = std::min(0.45, base.transition_noise + 0.3 * magnitude);
    patch["transition_noise"] = (change_index % 2 == 0) ? noisy : base.transition_noise;
  } else if (id == "perm-grid") {
    const int k = std::max(
        2, static_cast<int>(std::lround(std::clamp(magnitude, 0.0, 1.0) * d)));
    std::vector<int> order = rng.permutation(d);
    std::vector<int> perm(d);
    for (int i = 0; i < d; ++i) perm[i] = i;
    for (int j = 0; j < k; ++j) perm[order[j]] = order[(j + 1) % k];
    patch["obs_perm"] = perm;
  } else {
    throw std::invalid_argument("unknown scenario id: " + id);
  }
  return patch;
}

EnvSpec apply_patch(const EnvSpec& spec, const nlohmann::json& patch) {
  nlohmann::json j = spec;
  j.merge_patch(patch);
  EnvSpec out = j.get<EnvSpec>();
  validate(out);
  return out;
}

void to_json(nlohmann::json& j, const EnvSpec& spec) {
  j = nlohmann::json{{"id", spec.id},
                     {"grid", spec.grid},
                     {"horizon", spec.horizon},
                     {"action_count", spec.action_count},
                     {"step_reward", spec.step_reward},
                     {"transition_noise", spec.transition_noise},
                     {"start_cells", spec.start_cells},
                     {"walls", spec.walls}};
  nlohmann::json terminals = nlohmann::json::object();
  for (const auto& [cell, reward] : spec.terminals) {
    terminals[std::to_string(cell)] = reward;
  }
  j["terminals"] = terminals;
  if (spec.obs_gain.size() != 0) {
    j["obs_gain"] = std::vector<double>(spec.obs_gain.data(),
                                        spec.obs_gain.data() + spec.obs_gain.size());
  }
  if (spec.obs_bias.size() != 0) {
    j["obs_bias"] = std::vector<double>(spec.obs_bias.data(),
                                        spec.obs_bias.data() + spec.obs_bias.size());
  }
  if (!spec.obs_perm.empty()) j["obs_perm"] = spec.obs_perm;
}

void from_json(const nlohmann::json& j, EnvSpec& spec) {
  const EnvSpec defaults;
  spec.id = j.value("id", defaults.id);
  spec.grid = j.value("grid", defaults.grid);
  spec.horizon = j.value("horizon", defaults.horizon);
  spec.action_count = j.value("action_count", defaults.action_count);
  spec.step_reward = j.value("step_reward", defaults.step_reward);
  spec.transition_noise = j.value("transition_noise", defaults.transition_noise);
  spec.start_cells = j.value("start_cells", defaults.start_cells);
  spec.walls = j.value("walls", defaults.walls);
  spec.terminals.clear();
  if (j.contains("terminals")) {
    for (const auto& [key, value] : j.at("terminals").items()) {
      if (!value.is_null()) spec.terminals[std::stoi(key)] = value.get<double>();
    }
  }
  spec.obs_gain.resize(0);
  if (j.contains("obs_gain") && !j.at("obs_gain").is_null()) {
    const auto v = j.at("obs_gain").get<std::vector<double>>();
    spec.obs_gain = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
  }
  spec.obs_bias.resize(0);
  if (j.contains("obs_bias") && !j.at("obs_bias").is_null()) {
    const auto v = j.at("obs_bias").get<std::vector<double>>();
    spec.obs_bias = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
  }
  spec.obs_perm.clear();
  if (j.contains("obs_perm") && !j.at("obs_perm").is_null()) {
    spec.obs_perm = j.at("obs_perm").get<std::vector<int>>();
  }
}

}  // namespace bada
