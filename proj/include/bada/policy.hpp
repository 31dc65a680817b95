#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bada/common.hpp"
#include "bada/detection.hpp"
#include "bada/embedding.hpp"
#include "bada/mlp.hpp"
#include "bada/rng.hpp"
#include "bada/trajectory.hpp"
#include "bada/transport.hpp"

namespace bada {

struct PolicyConfig {
  std::vector<int> policy_hidden{32, 32};
  std::vector<int> value_hidden{32, 32};
  double gamma = 0.99;
  double lambda = 0.95;
  double learning_rate = 3e-4;
  double value_learning_rate = 3e-4;
  int minor_epochs = 4;
  double grad_clip = 0.5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // Per-trajectory log-ratio clamp for the transport terms; clamped
  // trajectories contribute value but no gradient.
  double ratio_log_clamp = 20.0;
  int delta_decay_window = 0;  // 0 keeps delta constant until the next event
  EntropicOptions ot;
};

struct AdamState {
  Vector m;
  Vector v;
  int t = 0;
};

struct PolicyParams {
  PolicyConfig cfg;
  Mlp policy;  // observation -> action logits
  Mlp value;   // observation -> scalar value
  AdamState policy_opt;
  AdamState value_opt;
};

PolicyParams make_policy(int obs_dim, int action_count, const PolicyConfig& cfg,
                         std::uint64_t seed);

// Numerically stable log-softmax; act() and policy_log_probs() share it so a
// recomputed log-prob is bit-identical to the one stored at collection time.
Vector log_softmax(const Vector& logits);

std::pair<int, double> act(const PolicyParams& params, const Vector& state, Rng& rng);

// Flattened per-step batch; rows of `states` follow trajectory order and
// traj_offsets[i]..traj_offsets[i+1] delimit trajectory i's steps.
struct AdvantageBatch {
  Matrix states;
  std::vector<int> actions;
  std::vector<Index> traj_offsets;
  Vector advantages;  // normalized to zero mean, unit variance
  Vector returns;     // value-function regression targets
  Vector stored_log_probs;
  Vector ratios;  // exp(new - stored); exactly 1 at construction

  Index steps() const { return states.rows(); }
  Index trajectories() const { return static_cast<Index>(traj_offsets.size()) - 1; }
};

Vector policy_log_probs(const Mlp& policy, const Matrix& states,
                        const std::vector<int>& actions);

AdvantageBatch compute_advantages(const std::vector<Trajectory>& trajs,
                                  const PolicyParams& params);

// Recomputes batch.ratios against the current policy weights.
void refresh_ratios(AdvantageBatch& batch, const PolicyParams& params);

struct ObjectiveTerms {
  double surrogate_reward = 0.0;
  double trust_penalty = 0.0;
  double adaptation_bonus = 0.0;
  double delta = 0.0;
  double total = 0.0;
};

// Frozen per-epoch transport quantities for one W(P_theta, reference) term:
// potential values on the current cloud, their mean, and the mean of the
// potential extended onto the reference cloud. center - offset is the dual
// distance estimate at importance ratios = 1.
struct WTermContext {
  Vector f;
  double center = 0.0;
  double offset = 0.0;
  double primal_distance = 0.0;
  double epsilon = 0.0;
};

WTermContext make_wterm_context(const EmbeddingBatch& current, const EmbeddingBatch& reference,
                                const EntropicOptions& opt);

struct ObjectiveContext {
  const AdvantageBatch* batch = nullptr;
  const WTermContext* trust = nullptr;       // null on the first-ever update
  const WTermContext* adaptation = nullptr;  // null without a live anchor
  double delta = 0.0;
  double ratio_log_clamp = 20.0;
};

struct ObjectiveParts {
  double reward = 0.0;
  double trust = 0.0;
  double bonus = 0.0;
  double total = 0.0;
};

// Importance-weighted objective on a fixed batch: reward term uses per-step
// ratios, transport terms reweight the frozen potential values with clamped
// per-trajectory ratios. total = reward - trust + delta * bonus.
ObjectiveParts objective_value(const Mlp& policy, const ObjectiveContext& ctx);

// Analytic gradient of objective_value w.r.t. the policy weights, accumulated
// into `grads` (an architecture copy); returns the same parts as the value.
ObjectiveParts objective_gradient(const Mlp& policy, const ObjectiveContext& ctx, Mlp& grads);

double value_loss(const Mlp& value, const AdvantageBatch& batch);
double value_loss_gradient(const Mlp& value, const AdvantageBatch& batch, Mlp& grads);

struct AnchorState {
  std::optional<EmbeddingBatch> pre;
  double delta = 0.0;
  int detection_epoch = -1;
};

// Installs the pre-change reference: the batch saved from epoch c-1 and the
// measured shift magnitude. Any earlier anchor is replaced wholesale.
AnchorState set_adaptation_anchor(const DetectionEvent& event, const EmbeddingBatch& saved_prev);

// Delta in force at `epoch`: the anchored value, optionally decayed linearly
// to zero over decay_window epochs after the detection.
double effective_delta(const AnchorState& anchor, int epoch, int decay_window);

struct UpdateContext {
  const EmbeddingBatch* previous = nullptr;  // trust reference, null on first epoch
  const EmbeddingBatch* pre = nullptr;       // adaptation reference
  double delta = 0.0;
};

// One update epoch: GAE advantages, then minor-epoch ascent on the objective
// and descent on the value loss, transport potentials frozen throughout.
// Returns the terms evaluated at the final weights.
ObjectiveTerms update_step(PolicyParams& params, const std::vector<Trajectory>& trajs,
                           const EmbeddingBatch& current, const UpdateContext& ctx);

// Reporting composition over an existing batch: trust penalty is the entropic
// primal distance, adaptation bonus the dual estimate against `pre`.
ObjectiveTerms surrogate_objective(const AdvantageBatch& batch, const EmbeddingBatch& current,
                                   const EmbeddingBatch& prev,
                                   const std::optional<EmbeddingBatch>& pre, double delta,
                                   const EntropicOptions& opt = {});

void save_checkpoint(const PolicyParams& params, const std::string& path_prefix);
PolicyParams load_checkpoint(const std::string& path_prefix);

void to_json(nlohmann::json& j, const PolicyConfig& cfg);
void from_json(const nlohmann::json& j, PolicyConfig& cfg);

}  // namespace bada
