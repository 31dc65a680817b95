#include "bada/policy.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace bada {

namespace {

void adam_apply(Mlp& net, AdamState& st, const Vector& grad, double lr, double direction,
                const PolicyConfig& cfg) {
  st.t += 1;
  st.m = cfg.adam_beta1 * st.m + (1.0 - cfg.adam_beta1) * grad;
  st.v = (cfg.adam_beta2 * st.v.array() + (1.0 - cfg.adam_beta2) * grad.array().square()).matrix();
  const double m_corr = 1.0 - std::pow(cfg.adam_beta1, st.t);
  const double v_corr = 1.0 - std::pow(cfg.adam_beta2, st.t);
  Vector flat = net.flatten();
  flat.array() += direction * lr * (st.m.array() / m_corr) /
                  ((st.v.array() / v_corr).sqrt() + cfg.adam_eps);
  net.unflatten(flat);
}

void clip_gradient(Vector& grad, double max_norm, const char* what) {
  if (!grad.allFinite()) {
    throw std::runtime_error(std::string(what) + ": non-finite gradient");
  }
  const double norm = grad.norm();
  if (max_norm > 0.0 && norm > max_norm) grad *= max_norm / norm;
}

// Per-trajectory clamped importance ratios for the transport terms. grad_flag
// is the ratio itself inside the clamp range and 0 where the clamp is active.
void trajectory_ratios(const AdvantageBatch& batch, const Vector& log_probs, double clamp,
                       Vector& ratio, Vector& grad_flag) {
  const Index m = batch.trajectories();
  ratio.resize(m);
  grad_flag.resize(m);
  for (Index i = 0; i < m; ++i) {
    double sum = 0.0;
    for (Index t = batch.traj_offsets[i]; t < batch.traj_offsets[i + 1]; ++t) {
      sum += log_probs(t) - batch.stored_log_probs(t);
    }
    const bool clamped = sum > clamp || sum < -clamp;
    ratio(i) = std::exp(std::clamp(sum, -clamp, clamp));
    grad_flag(i) = clamped ? 0.0 : ratio(i);
  }
}

double wterm_value(const WTermContext& ctx, const Vector& traj_ratio) {
  const double reweighted =
      (traj_ratio.array() * (ctx.f.array() - ctx.center)).mean();
  return reweighted + ctx.center - ctx.offset;
}

}  // namespace

PolicyParams make_policy(int obs_dim, int action_count, const PolicyConfig& cfg,
                         std::uint64_t seed) {
  PolicyParams params;
  params.cfg = cfg;
  params.policy = Mlp(obs_dim, cfg.policy_hidden, action_count);
  params.value = Mlp(obs_dim, cfg.value_hidden, 1);
  Rng rng(seed);
  params.policy.init(rng, 0.01);  // near-uniform initial action distribution
  params.value.init(rng, 1.0);
  params.policy_opt.m = Vector::Zero(params.policy.parameter_count());
  params.policy_opt.v = Vector::Zero(params.policy.parameter_count());
  params.value_opt.m = Vector::Zero(params.value.parameter_count());
  params.value_opt.v = Vector::Zero(params.value.parameter_count());
  return params;
}

Vector log_softmax(const Vector& logits) {
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  return logits.array() - lse;
}

std::pair<int, double> act(const PolicyParams& params, const Vector& state, Rng& rng) {
  const Vector logits = params.policy.forward(state);
  if (!logits.allFinite()) throw std::runtime_error("act: non-finite logits");
  const Vector lp = log_softmax(logits);
  const double u = rng.uniform();
  double cum = 0.0;
  int action = static_cast<int>(lp.size()) - 1;
  for (int a = 0; a < lp.size(); ++a) {
    cum += std::exp(lp(a));
    if (u < cum) {
      action = a;
      break;
    }
  }
  return {action, lp(action)};
}

Vector policy_log_probs(const Mlp& policy, const Matrix& states,
                        const std::vector<int>& actions) {
  Vector out(states.rows());
  for (Index t = 0; t < states.rows(); ++t) {
    out(t) = log_softmax(policy.forward(states.row(t).transpose()))(actions[t]);
  }
  return out;
}

AdvantageBatch compute_advantages(const std::vector<Trajectory>& trajs,
                                  const PolicyParams& params) {
  if (trajs.empty()) throw std::invalid_argument("compute_advantages: empty batch");
  Index total = 0;
  for (const auto& tr : trajs) total += static_cast<Index>(tr.steps.size());

  AdvantageBatch batch;
  batch.states.resize(total, params.policy.input_dim());
  batch.actions.resize(total);
  batch.traj_offsets.resize(trajs.size() + 1, 0);
  batch.advantages.resize(total);
  batch.returns.resize(total);
  batch.stored_log_probs.resize(total);

  const double gamma = params.cfg.gamma;
  const double lambda = params.cfg.lambda;
  Index row = 0;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto& steps = trajs[i].steps;
    const Index n = static_cast<Index>(steps.size());
    batch.traj_offsets[i + 1] = batch.traj_offsets[i] + n;
    Vector values(n);
    for (Index t = 0; t < n; ++t) {
      batch.states.row(row + t) = steps[t].state.transpose();
      batch.actions[row + t] = steps[t].action;
      batch.stored_log_probs(row + t) = steps[t].log_prob;
      values(t) = params.value.forward(steps[t].state)(0);
    }
    double gae = 0.0;
    for (Index t = n - 1; t >= 0; --t) {
      const bool terminal = (t + 1 == n) || steps[t].done;
      const double next_value = terminal ? 0.0 : values(t + 1);
      const double next_gae = terminal ? 0.0 : gae;
      const double td = steps[t].reward + gamma * next_value - values(t);
      gae = td + gamma * lambda * next_gae;
      batch.advantages(row + t) = gae;
      batch.returns(row + t) = gae + values(t);
    }
    row += n;
  }

  const double mean = batch.advantages.mean();
  const double std_dev =
      std::sqrt((batch.advantages.array() - mean).square().mean());
  batch.advantages = (batch.advantages.array() - mean) / (std_dev + 1e-8);

  batch.ratios =
      (policy_log_probs(params.policy, batch.states, batch.actions) - batch.stored_log_probs)
          .array()
          .exp();
  return batch;
}

void refresh_ratios(AdvantageBatch& batch, const PolicyParams& params) {
  batch.ratios =
      (policy_log_probs(params.policy, batch.states, batch.actions) - batch.stored_log_probs)
          .array()
          .exp();
}

WTermContext make_wterm_context(const EmbeddingBatch& current, const EmbeddingBatch& reference,
                                const EntropicOptions& opt) {
  const TransportResult res = w1_entropic(current.points, reference.points, opt);
  WTermContext ctx;
  ctx.f = res.potential_mu;
  ctx.center = ctx.f.mean();
  ctx.offset =
      extend_potential(reference.points, res.potential_nu, reference.points, res.epsilon).mean();
  ctx.primal_distance = res.distance;
  ctx.epsilon = res.epsilon;
  return ctx;
}

ObjectiveParts objective_value(const Mlp& policy, const ObjectiveContext& ctx) {
  const AdvantageBatch& batch = *ctx.batch;
  const Vector lp = policy_log_probs(policy, batch.states, batch.actions);
  const Vector step_ratio = (lp - batch.stored_log_probs).array().exp();

  ObjectiveParts parts;
  parts.reward = (step_ratio.array() * batch.advantages.array()).mean();
  Vector traj_ratio, grad_flag;
  if (ctx.trust || ctx.adaptation) {
    trajectory_ratios(batch, lp, ctx.ratio_log_clamp, traj_ratio, grad_flag);
  }
  if (ctx.trust) parts.trust = wterm_value(*ctx.trust, traj_ratio);
  if (ctx.adaptation) parts.bonus = wterm_value(*ctx.adaptation, traj_ratio);
  parts.total = parts.reward - parts.trust + ctx.delta * parts.bonus;
  return parts;
}

ObjectiveParts objective_gradient(const Mlp& policy, const ObjectiveContext& ctx, Mlp& grads) {
  const AdvantageBatch& batch = *ctx.batch;
  const Index n = batch.steps();
  const Index m = batch.trajectories();

  Vector lp(n);
  std::vector<Mlp::Trace> traces(n);
  std::vector<Vector> probs(n);
  for (Index t = 0; t < n; ++t) {
    const Vector logits = policy.forward(batch.states.row(t).transpose(), traces[t]);
    const Vector ls = log_softmax(logits);
    lp(t) = ls(batch.actions[t]);
    probs[t] = ls.array().exp();
  }
  const Vector step_ratio = (lp - batch.stored_log_probs).array().exp();

  ObjectiveParts parts;
  parts.reward = (step_ratio.array() * batch.advantages.array()).mean();
  Vector traj_ratio, grad_flag;
  if (ctx.trust || ctx.adaptation) {
    trajectory_ratios(batch, lp, ctx.ratio_log_clamp, traj_ratio, grad_flag);
  }
  if (ctx.trust) parts.trust = wterm_value(*ctx.trust, traj_ratio);
  if (ctx.adaptation) parts.bonus = wterm_value(*ctx.adaptation, traj_ratio);
  parts.total = parts.reward - parts.trust + ctx.delta * parts.bonus;

  for (Index i = 0; i < m; ++i) {
    double traj_coeff = 0.0;
    if (ctx.trust) {
      traj_coeff -= grad_flag(i) * (ctx.trust->f(i) - ctx.trust->center) / m;
    }
    if (ctx.adaptation) {
      traj_coeff +=
          ctx.delta * grad_flag(i) * (ctx.adaptation->f(i) - ctx.adaptation->center) / m;
    }
    for (Index t = batch.traj_offsets[i]; t < batch.traj_offsets[i + 1]; ++t) {
      const double coeff =
          step_ratio(t) * batch.advantages(t) / n + traj_coeff;
      Vector dlogits = -coeff * probs[t];
      dlogits(batch.actions[t]) += coeff;
      policy.backward(traces[t], dlogits, grads);
    }
  }
  return parts;
}

double value_loss(const Mlp& value, const AdvantageBatch& batch) {
  double loss = 0.0;
  for (Index t = 0; t < batch.steps(); ++t) {
    const double err = value.forward(batch.states.row(t).transpose())(0) - batch.returns(t);
    loss += err * err;
  }
  return loss / batch.steps();
}

double value_loss_gradient(const Mlp& value, const AdvantageBatch& batch, Mlp& grads) {
  double loss = 0.0;
  Vector dout(1);
  for (Index t = 0; t < batch.steps(); ++t) {
    Mlp::Trace tr;
    const double err = value.forward(batch.states.row(t).transpose(), tr)(0) - batch.returns(t);
    loss += err * err;
    dout(0) = 2.0 * err / batch.steps();
    value.backward(tr, dout, grads);
  }
  return loss / batch.steps();
}

AnchorState set_adaptation_anchor(const DetectionEvent& event, const EmbeddingBatch& saved_prev) {
  AnchorState anchor;
  anchor.pre = saved_prev;
  anchor.delta = event.delta;
  anchor.detection_epoch = event.epoch;
  return anchor;
}

double effective_delta(const AnchorState& anchor, int epoch, int decay_window) {
  if (!anchor.pre) return 0.0;
  if (decay_window <= 0) return anchor.delta;
  const double frac =
      1.0 - static_cast<double>(epoch - anchor.detection_epoch) / decay_window;
  return anchor.delta * std::max(0.0, frac);
}

ObjectiveTerms update_step(PolicyParams& params, const std::vector<Trajectory>& trajs,
                           const EmbeddingBatch& current, const UpdateContext& ctx) {
  if (ctx.delta > 0.0 && ctx.pre == nullptr) {
    throw std::invalid_argument("update_step: delta > 0 without a pre-change reference");
  }
  AdvantageBatch batch = compute_advantages(trajs, params);

  std::optional<WTermContext> trust, adaptation;
  if (ctx.previous) trust = make_wterm_context(current, *ctx.previous, params.cfg.ot);
  if (ctx.pre && ctx.delta != 0.0) {
    adaptation = make_wterm_context(current, *ctx.pre, params.cfg.ot);
  }
  ObjectiveContext octx;
  octx.batch = &batch;
  octx.trust = trust ? &*trust : nullptr;
  octx.adaptation = adaptation ? &*adaptation : nullptr;
  octx.delta = adaptation ? ctx.delta : 0.0;
  octx.ratio_log_clamp = params.cfg.ratio_log_clamp;

  Mlp policy_grads = params.policy;
  Mlp value_grads = params.value;
  ObjectiveParts parts;
  for (int e = 0; e < params.cfg.minor_epochs; ++e) {
    policy_grads.set_zero();
    parts = objective_gradient(params.policy, octx, policy_grads);
    Vector g = policy_grads.flatten();
    clip_gradient(g, params.cfg.grad_clip, "update_step/policy");
    adam_apply(params.policy, params.policy_opt, g, params.cfg.learning_rate, +1.0, params.cfg);

    value_grads.set_zero();
    value_loss_gradient(params.value, batch, value_grads);
    g = value_grads.flatten();
    clip_gradient(g, params.cfg.grad_clip, "update_step/value");
    adam_apply(params.value, params.value_opt, g, params.cfg.value_learning_rate, -1.0,
               params.cfg);
  }

  refresh_ratios(batch, params);
  ObjectiveTerms terms;
  terms.surrogate_reward = (batch.ratios.array() * batch.advantages.array()).mean();
  terms.trust_penalty = trust ? trust->primal_distance : 0.0;
  terms.adaptation_bonus = adaptation ? (adaptation->center - adaptation->offset) : 0.0;
  terms.delta = octx.delta;
  terms.total =
      terms.surrogate_reward - terms.trust_penalty + terms.delta * terms.adaptation_bonus;
  return terms;
}

ObjectiveTerms surrogate_objective(const AdvantageBatch& batch, const EmbeddingBatch& current,
                                   const EmbeddingBatch& prev,
                                   const std::optional<EmbeddingBatch>& pre, double delta,
                                   const EntropicOptions& opt) {
  if (delta > 0.0 && !pre) {
    throw std::invalid_argument("surrogate_objective: delta > 0 without a pre-change reference");
  }
  ObjectiveTerms terms;
  terms.surrogate_reward = (batch.ratios.array() * batch.advantages.array()).mean();
  terms.trust_penalty = w1_entropic(current.points, prev.points, opt).distance;
  if (pre) {
    const TransportResult res = w1_entropic(current.points, pre->points, opt);
    terms.adaptation_bonus = dual_regularizer_estimate(current.points, pre->points, res);
  }
  terms.delta = delta;
  terms.total =
      terms.surrogate_reward - terms.trust_penalty + terms.delta * terms.adaptation_bonus;
  return terms;
}

void to_json(nlohmann::json& j, const PolicyConfig& cfg) {
  j = nlohmann::json{{"policy_hidden", cfg.policy_hidden},
                     {"value_hidden", cfg.value_hidden},
                     {"gamma", cfg.gamma},
                     {"lambda", cfg.lambda},
                     {"learning_rate", cfg.learning_rate},
                     {"value_learning_rate", cfg.value_learning_rate},
                     {"minor_epochs", cfg.minor_epochs},
                     {"grad_clip", cfg.grad_clip},
                     {"adam_beta1", cfg.adam_beta1},
                     {"adam_beta2", cfg.adam_beta2},
                     {"adam_eps", cfg.adam_eps},
                     {"ratio_log_clamp", cfg.ratio_log_clamp},
                     {"delta_decay_window", cfg.delta_decay_window},
                     {"ot_epsilon", cfg.ot.epsilon},
                     {"ot_max_iterations", cfg.ot.max_iterations},
                     {"ot_marginal_tol", cfg.ot.marginal_tol}};
}

void from_json(const nlohmann::json& j, PolicyConfig& cfg) {
  const PolicyConfig defaults;
  cfg.policy_hidden = j.value("policy_hidden", defaults.policy_hidden);
  cfg.value_hidden = j.value("value_hidden", defaults.value_hidden);
  cfg.gamma = j.value("gamma", defaults.gamma);
  cfg.lambda = j.value("lambda", defaults.lambda);
  cfg.learning_rate = j.value("learning_rate", defaults.learning_rate);
  cfg.value_learning_rate = j.value("value_learning_rate", defaults.value_learning_rate);
  cfg.minor_epochs = j.value("minor_epochs", defaults.minor_epochs);
  cfg.grad_clip = j.value("grad_clip", defaults.grad_clip);
  cfg.adam_beta1 = j.value("adam_beta1", defaults.adam_beta1);
  cfg.adam_beta2 = j.value("adam_beta2", defaults.adam_beta2);
  cfg.adam_eps = j.value("adam_eps", defaults.adam_eps);
  cfg.ratio_log_clamp = j.value("ratio_log_clamp", defaults.ratio_log_clamp);
  cfg.delta_decay_window = j.value("delta_decay_window", defaults.delta_decay_window);
  cfg.ot.epsilon = j.value("ot_epsilon", defaults.ot.epsilon);
  cfg.ot.max_iterations = j.value("ot_max_iterations", defaults.ot.max_iterations);
  cfg.ot.marginal_tol = j.value("ot_marginal_tol", defaults.ot.marginal_tol);
}

namespace {

void write_doubles(std::ofstream& out, const Vector& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Vector read_doubles(std::ifstream& in, Index n) {
  Vector v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("checkpoint: truncated weight file");
  return v;
}

}  // namespace

void save_checkpoint(const PolicyParams& params, const std::string& path_prefix) {
  nlohmann::json meta;
  meta["config"] = params.cfg;
  meta["obs_dim"] = params.policy.input_dim();
  meta["action_count"] = params.policy.output_dim();
  meta["policy_parameters"] = params.policy.parameter_count();
  meta["value_parameters"] = params.value.parameter_count();
  meta["policy_adam_t"] = params.policy_opt.t;
  meta["value_adam_t"] = params.value_opt.t;
  std::ofstream meta_out(path_prefix + ".json");
  if (!meta_out) throw std::runtime_error("checkpoint: cannot write " + path_prefix + ".json");
  meta_out << meta.dump(2) << "\n";

  std::ofstream bin(path_prefix + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("checkpoint: cannot write " + path_prefix + ".bin");
  write_doubles(bin, params.policy.flatten());
  write_doubles(bin, params.value.flatten());
  write_doubles(bin, params.policy_opt.m);
  write_doubles(bin, params.policy_opt.v);
  write_doubles(bin, params.value_opt.m);
  write_doubles(bin, params.value_opt.v);
}

PolicyParams load_checkpoint(const std::string& path_prefix) {
  std::ifstream meta_in(path_prefix + ".json");
  if (!meta_in) throw std::runtime_error("checkpoint: cannot read " + path_prefix + ".json");
  nlohmann::json meta = nlohmann::json::parse(meta_in);

  const PolicyConfig cfg = meta.at("config").get<PolicyConfig>();
  PolicyParams params = make_policy(meta.at("obs_dim").get<int>(),
                                    meta.at("action_count").get<int>(), cfg, 0);
  const Index np = meta.at("policy_parameters").get<Index>();
  const Index nv = meta.at("value_parameters").get<Index>();
  if (np != params.policy.parameter_count() || nv != params.value.parameter_count()) {
    throw std::runtime_error("checkpoint: architecture mismatch");
  }
  std::ifstream bin(path_prefix + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("checkpoint: cannot read " + path_prefix + ".bin");
  params.policy.unflatten(read_doubles(bin, np));
  params.value.unflatten(read_doubles(bin, nv));
  params.policy_opt.m = read_doubles(bin, np);
  params.policy_opt.v = read_doubles(bin, np);
  params.value_opt.m = read_doubles(bin, nv);
  params.value_opt.v = read_doubles(bin, nv);
  params.policy_opt.t = meta.at("policy_adam_t").get<int>();
  params.value_opt.t = meta.at("value_adam_t").get<int>();
  return params;
}

}  // namespace bada
