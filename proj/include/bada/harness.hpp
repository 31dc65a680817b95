#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bada/detection.hpp"
#include "bada/env.hpp"
#include "bada/metrics.hpp"
#include "bada/policy.hpp"

namespace bada {

// One scheduled change. `set` is an explicit spec merge patch; when null the
// patch comes from scenario_change(env_id, magnitude, index-in-schedule).
struct ScheduleEntry {
  int epoch = 0;
  double magnitude = 1.0;
  nlohmann::json set;
};

struct DetectorConfig {
  PermutationTestConfig test;
  // Epochs at the start of a run during which no detector is consulted, so
  // the policy's own convergence drift cannot trip the test.
  int warmup_epochs = 0;
  // reward-gap baseline windows (episodes) and threshold (long-window stds)
  int short_window = 5;
  int long_window = 50;
  double threshold = 1.0;
};

struct RunConfig {
  std::string env_id = "shift-grid";
  nlohmann::json env_overrides;  // merge patch over the scenario base spec
  std::vector<ScheduleEntry> schedule;
  std::string method = "bada";  // bada | no_adapt | restart | permu_kl | reward_gap
  int epochs = 80;
  int trajectories_per_epoch = 16;
  std::uint64_t seed = 1;
  std::string out;  // output directory; empty runs without writing files
  DetectorConfig detector;
  PolicyConfig policy;
  int embed_latent_dim = 8;
  std::vector<int> embed_hidden{32, 32};
  int tolerance_window = 3;
  int recovery_window = 20;
  bool checkpoint = false;
};

struct EpochReport {
  int epoch = 0;
  double mean_reward = 0.0;
  double statistic = -1.0;  // -1 when no test ran
  double p_value = -1.0;
  bool detected = false;
  double delta = 0.0;  // delta in force during this epoch's update
  ObjectiveTerms terms;
  double wall_ms = 0.0;
};

struct RunResult {
  std::vector<EpochReport> reports;
  std::vector<DetectionEvent> events;
  std::vector<int> truth;  // scheduled change epochs
  DetectionScore score;
  RewardSummary rewards;
};

// Per-epoch op callback for tests asserting the loop order:
// collect -> embed -> test -> update -> save -> advance.
struct RunHooks {
  std::function<void(int epoch, const std::string& op)> on_op;
};

// Independent sub-seed streams derived from the master seed.
namespace seed_stream {
constexpr std::uint64_t env = 1;
constexpr std::uint64_t action = 2;
constexpr std::uint64_t permutation = 3;
constexpr std::uint64_t policy_init = 4;
constexpr std::uint64_t embedding = 5;
constexpr std::uint64_t restart = 6;
}  // namespace seed_stream

Trajectory collect_episode(EnvState& env, const PolicyParams& params, Rng& env_rng,
                           Rng& action_rng, int epoch);

RunResult run_method(const RunConfig& cfg, const RunHooks& hooks = {});
RunResult run_bada(const RunConfig& cfg, const RunHooks& hooks = {});
RunResult run_baseline(const RunConfig& cfg, const RunHooks& hooks = {});

// Executes every config (cfg.out defaults to a directory under out_dir),
// writes summary.csv, failures.json, and the suite SVG plots. Returns the
// number of failed runs; failures do not stop the remaining runs.
int run_suite(const std::vector<RunConfig>& configs, const std::string& out_dir);

// Expands optional "seeds", "methods", and "magnitudes" arrays in a config
// JSON into the cross product of concrete RunConfigs.
std::vector<RunConfig> expand_run_configs(const nlohmann::json& j);

// Re-derives scores.json for a finished run directory from its logs.
void rescore_run(const std::string& run_dir);

// Rebuilds the suite plots (and summary.csv) from the run directories under
// suite_dir.
void replot_suite(const std::string& suite_dir);

void to_json(nlohmann::json& j, const ScheduleEntry& entry);
void from_json(const nlohmann::json& j, ScheduleEntry& entry);
void to_json(nlohmann::json& j, const DetectorConfig& cfg);
void from_json(const nlohmann::json& j, DetectorConfig& cfg);
void to_json(nlohmann::json& j, const RunConfig& cfg);
void from_json(const nlohmann::json& j, RunConfig& cfg);
void to_json(nlohmann::json& j, const ObjectiveTerms& terms);
void from_json(const nlohmann::json& j, ObjectiveTerms& terms);
void to_json(nlohmann::json& j, const EpochReport& report);
void from_json(const nlohmann::json& j, EpochReport& report);
void to_json(nlohmann::json& j, const DetectionEvent& event);
void from_json(const nlohmann::json& j, DetectionEvent& event);

}  // namespace bada
