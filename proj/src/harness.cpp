#include "bada/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bada/svg_plot.hpp"

namespace fs = std::filesystem;

namespace bada {

namespace {

const std::vector<std::string> kMethods = {"bada", "no_adapt", "restart", "permu_kl",
                                           "reward_gap"};

int method_rank(const std::string& m) {
  const auto it = std::find(kMethods.begin(), kMethods.end(), m);
  return static_cast<int>(it - kMethods.begin());
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void emit(const RunHooks& hooks, int epoch, const char* op) {
  if (hooks.on_op) hooks.on_op(epoch, op);
}

}  // namespace

Trajectory collect_episode(EnvState& env, const PolicyParams& params, Rng& env_rng,
                           Rng& action_rng, int epoch) {
  Trajectory traj;
  traj.epoch = epoch;
  Vector obs = env_reset(env, env_rng);
  bool done = false;
  while (!done) {
    const auto [action, log_prob] = act(params, obs, action_rng);
    const StepResult sr = env_step(env, action, env_rng);
    traj.steps.push_back({obs, action, sr.reward, log_prob, sr.done});
    obs = sr.observation;
    done = sr.done;
  }
  return traj;
}

namespace {

struct RunContext {
  EnvSpec base;
  ChangeSchedule schedule;
  std::vector<int> truth;
};

RunContext resolve_environment(const RunConfig& cfg) {
  RunContext ctx;
  ctx.base = make_scenario(cfg.env_id);
  if (!cfg.env_overrides.is_null() && !cfg.env_overrides.empty()) {
    ctx.base = apply_patch(ctx.base, cfg.env_overrides);
  }
  EnvSpec cursor = ctx.base;
  for (std::size_t k = 0; k < cfg.schedule.size(); ++k) {
    const ScheduleEntry& entry = cfg.schedule[k];
    if (k > 0 && entry.epoch <= cfg.schedule[k - 1].epoch) {
      throw std::invalid_argument("run config: schedule epochs must be strictly increasing");
    }
    const nlohmann::json patch =
        entry.set.is_null()
            ? scenario_change(cfg.env_id, entry.magnitude, static_cast<int>(k))
            : entry.set;
    cursor = apply_patch(cursor, patch);
    ctx.schedule.changes.emplace_back(entry.epoch, cursor);
    ctx.truth.push_back(entry.epoch);
  }
  return ctx;
}

void write_scores_json(const RunConfig& cfg, const RunResult& result, const std::string& dir) {
  nlohmann::json j;
  j["env"] = cfg.env_id;
  j["method"] = cfg.method;
  j["seed"] = cfg.seed;
  j["f1"] = result.score.f1;
  j["precision"] = result.score.precision;
  j["recall"] = result.score.recall;
  j["matches"] = result.score.matches;
  j["tolerance_window"] = result.score.tolerance_window;
  j["cumulative_reward"] = result.rewards.cumulative;
  j["recovery_mean"] = result.rewards.recovery_mean;
  nlohmann::json recoveries = nlohmann::json::array();
  for (const auto& win : result.rewards.recoveries) {
    recoveries.push_back({{"change_epoch", win.change_epoch},
                          {"mean_reward", win.mean_reward},
                          {"epochs", win.epochs}});
  }
  j["recoveries"] = recoveries;
  j["truth"] = result.truth;
  nlohmann::json detections = nlohmann::json::array();
  for (const auto& ev : result.events) detections.push_back(ev.epoch);
  j["detections"] = detections;

  std::ofstream out(dir + "/scores.json");
  if (!out) throw std::runtime_error("cannot write " + dir + "/scores.json");
  out << j.dump(2) << "\n";
}

void finalize_result(const RunConfig& cfg, RunResult& result) {
  std::vector<int> detected;
  for (const auto& ev : result.events) detected.push_back(ev.epoch);
  result.score = score_detections(result.truth, detected, cfg.tolerance_window);
  std::vector<double> per_epoch;
  for (const auto& rep : result.reports) per_epoch.push_back(rep.mean_reward);
  result.rewards = summarize_rewards(per_epoch, cfg.trajectories_per_epoch, result.truth,
                                     cfg.recovery_window);
}

}  // namespace

RunResult run_method(const RunConfig& cfg, const RunHooks& hooks) {
  if (method_rank(cfg.method) >= static_cast<int>(kMethods.size())) {
    throw std::invalid_argument("run config: unknown method " + cfg.method);
  }
  if (cfg.epochs < 1 || cfg.trajectories_per_epoch < 1) {
    throw std::invalid_argument("run config: epochs and trajectories_per_epoch must be >= 1");
  }
  const RunContext ctx = resolve_environment(cfg);

  std::ofstream epochs_out, events_out;
  if (!cfg.out.empty()) {
    fs::create_directories(cfg.out);
    nlohmann::json resolved = cfg;
    std::ofstream cfg_out(cfg.out + "/config.json");
    if (!cfg_out) throw std::runtime_error("cannot write " + cfg.out + "/config.json");
    cfg_out << resolved.dump(2) << "\n";
    epochs_out.open(cfg.out + "/epochs.jsonl");
    events_out.open(cfg.out + "/events.jsonl");
    if (!epochs_out || !events_out) {
      throw std::runtime_error("cannot open log files under " + cfg.out);
    }
    if (cfg.checkpoint) fs::create_directories(cfg.out + "/checkpoints");
  }

  Rng env_rng(derive_seed(cfg.seed, seed_stream::env));
  Rng action_rng(derive_seed(cfg.seed, seed_stream::action));
  const std::uint64_t perm_base = derive_seed(cfg.seed, seed_stream::permutation);
  const std::uint64_t restart_base = derive_seed(cfg.seed, seed_stream::restart);

  EmbeddingMap map =
      make_embedding_map(ctx.base.obs_dim(), ctx.base.action_count, cfg.embed_latent_dim,
                         cfg.embed_hidden, derive_seed(cfg.seed, seed_stream::embedding));
  PolicyParams params = make_policy(ctx.base.obs_dim(), ctx.base.action_count, cfg.policy,
                                    derive_seed(cfg.seed, seed_stream::policy_init));

  EnvState env;
  env.spec = ctx.base;
  DetectorState det;
  AnchorState anchor;
  std::optional<EmbeddingBatch> prev_batch;
  bool pending_restart = false;

  RunResult result;
  result.truth = ctx.truth;

  for (int t = 0; t < cfg.epochs; ++t) {
    const auto wall_start = std::chrono::steady_clock::now();
    if (pending_restart) {
      params = make_policy(ctx.base.obs_dim(), ctx.base.action_count, cfg.policy,
                           derive_seed(restart_base, static_cast<std::uint64_t>(t)));
      pending_restart = false;
    }

    emit(hooks, t, "collect");
    std::vector<Trajectory> trajs;
    trajs.reserve(cfg.trajectories_per_epoch);
    double reward_sum = 0.0;
    for (int i = 0; i < cfg.trajectories_per_epoch; ++i) {
      trajs.push_back(collect_episode(env, params, env_rng, action_rng, t));
      const double total = trajs.back().total_reward();
      reward_sum += total;
      det.reward_history.push_back(total);
    }
    const double mean_reward = reward_sum / cfg.trajectories_per_epoch;

    emit(hooks, t, "embed");
    EmbeddingBatch current = embed_batch(map, trajs);
    current.epoch = t;

    emit(hooks, t, "test");
    det.epochs_since_last_detection += 1;
    const std::optional<EmbeddingBatch> prev_copy = prev_batch;
    std::optional<DetectionEvent> event;
    if (t < cfg.detector.warmup_epochs) {
      det.last_p_value = -1.0;
      det.last_statistic = -1.0;
    } else if (cfg.method == "bada" || cfg.method == "permu_kl") {
      PermutationTestConfig pc = cfg.detector.test;
      pc.rng_seed = derive_seed(perm_base, static_cast<std::uint64_t>(t));
      event = cfg.method == "bada" ? bada_detect(current, det, pc)
                                   : kl_knn_detect(current, det, pc);
    } else if (cfg.method == "reward_gap") {
      auto ev = reward_gap_detect(det.reward_history, det, cfg.detector.short_window,
                                  cfg.detector.long_window, cfg.detector.threshold);
      if (ev && det.epochs_since_last_detection >= cfg.detector.test.refractory_epochs) {
        ev->epoch = t;
        det.epochs_since_last_detection = 0;
        event = ev;
      }
    } else {
      det.last_p_value = -1.0;
      det.last_statistic = -1.0;
    }
    if (event) {
      result.events.push_back(*event);
      if (events_out.is_open()) {
        nlohmann::json je = *event;
        events_out << je.dump() << std::endl;
      }
      if (prev_copy) anchor = set_adaptation_anchor(*event, *prev_copy);
    }

    emit(hooks, t, "update");
    const double delta_eff =
        effective_delta(anchor, t, cfg.policy.delta_decay_window);
    AdvantageBatch report_batch = compute_advantages(trajs, params);
    const EmbeddingBatch& prev_ref = prev_batch ? *prev_batch : current;
    const std::optional<EmbeddingBatch> pre_ref =
        (delta_eff > 0.0 && anchor.pre) ? anchor.pre : std::nullopt;
    const ObjectiveTerms terms =
        surrogate_objective(report_batch, current, prev_ref, pre_ref,
                            pre_ref ? delta_eff : 0.0, cfg.policy.ot);
    UpdateContext uctx;
    uctx.previous = prev_batch ? &*prev_batch : nullptr;
    if (delta_eff > 0.0 && anchor.pre) {
      uctx.pre = &*anchor.pre;
      uctx.delta = delta_eff;
    }
    update_step(params, trajs, current, uctx);

    emit(hooks, t, "save");
    prev_batch = std::move(current);

    emit(hooks, t, "advance");
    const bool changed = advance_schedule(env, t, ctx.schedule);
    if (changed && cfg.method == "restart") pending_restart = true;

    EpochReport rep;
    rep.epoch = t;
    rep.mean_reward = mean_reward;
    rep.statistic = det.last_statistic;
    rep.p_value = det.last_p_value;
    rep.detected = event.has_value();
    rep.delta = uctx.delta;
    rep.terms = terms;
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            wall_start)
                      .count();
    result.reports.push_back(rep);
    if (epochs_out.is_open()) {
      nlohmann::json jr = rep;
      epochs_out << jr.dump() << std::endl;
    }
    if (cfg.checkpoint && !cfg.out.empty()) {
      char name[32];
      std::snprintf(name, sizeof(name), "/checkpoints/epoch_%04d", t);
      save_checkpoint(params, cfg.out + name);
    }
  }

  finalize_result(cfg, result);
  if (!cfg.out.empty()) write_scores_json(cfg, result, cfg.out);
  return result;
}

RunResult run_bada(const RunConfig& cfg, const RunHooks& hooks) {
  if (cfg.method != "bada") throw std::invalid_argument("run_bada: method must be bada");
  return run_method(cfg, hooks);
}

RunResult run_baseline(const RunConfig& cfg, const RunHooks& hooks) {
  if (cfg.method == "bada") {
    throw std::invalid_argument("run_baseline: method must not be bada");
  }
  return run_method(cfg, hooks);
}

namespace {

struct SuiteRow {
  RunConfig cfg;
  RunResult result;
  bool failed = false;
  std::string error;
};

double first_event_delta(const RunResult& r) {
  return r.events.empty() ? std::numeric_limits<double>::quiet_NaN() : r.events.front().delta;
}

void write_summary_csv(const std::vector<SuiteRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "env,method,seed,f1,precision,recall,cumulative_reward,recovery_mean\n";
  for (const auto& row : rows) {
    if (row.failed) continue;
    out << row.cfg.env_id << "," << row.cfg.method << "," << row.cfg.seed << ","
        << fmt_double(row.result.score.f1) << "," << fmt_double(row.result.score.precision)
        << "," << fmt_double(row.result.score.recall) << ","
        << fmt_double(row.result.rewards.cumulative) << ","
        << fmt_double(row.result.rewards.recovery_mean) << "\n";
  }
}

std::vector<std::string> ordered_methods(const std::vector<SuiteRow>& rows) {
  std::set<std::string> present;
  for (const auto& row : rows) {
    if (!row.failed) present.insert(row.cfg.method);
  }
  std::vector<std::string> out(present.begin(), present.end());
  std::sort(out.begin(), out.end(),
            [](const std::string& a, const std::string& b) {
              return method_rank(a) < method_rank(b);
            });
  return out;
}

void write_suite_plots(const std::vector<SuiteRow>& rows, const std::string& out_dir) {
  std::set<std::string> envs;
  for (const auto& row : rows) {
    if (!row.failed) envs.insert(row.cfg.env_id);
  }
  const std::vector<std::string> methods = ordered_methods(rows);

  // Reward curves: per-epoch means averaged across seeds, one chart per env.
  for (const auto& env : envs) {
    std::vector<PlotSeries> series;
    std::vector<double> vlines;
    for (const auto& method : methods) {
      std::vector<double> sums;
      std::vector<int> counts;
      for (const auto& row : rows) {
        if (row.failed || row.cfg.env_id != env || row.cfg.method != method) continue;
        if (vlines.empty()) {
          for (int c : row.result.truth) vlines.push_back(c);
        }
        for (std::size_t t = 0; t < row.result.reports.size(); ++t) {
          if (t >= sums.size()) {
            sums.push_back(0.0);
            counts.push_back(0);
          }
          sums[t] += row.result.reports[t].mean_reward;
          counts[t] += 1;
        }
      }
      if (sums.empty()) continue;
      PlotSeries s;
      s.label = method;
      for (std::size_t t = 0; t < sums.size(); ++t) {
        s.x.push_back(static_cast<double>(t));
        s.y.push_back(sums[t] / counts[t]);
      }
      series.push_back(std::move(s));
    }
    if (series.empty()) continue;
    write_text_file(out_dir + "/reward_" + env + ".svg",
                    svg_line_chart("Mean episode reward: " + env, "epoch", "reward", series,
                                   vlines));
  }

  // Detection F1 bars, one group per env, one bar per method.
  {
    std::vector<BarGroup> groups;
    for (const auto& env : envs) {
      BarGroup group;
      group.label = env;
      for (const auto& method : methods) {
        double sum = 0.0;
        int count = 0;
        for (const auto& row : rows) {
          if (row.failed || row.cfg.env_id != env || row.cfg.method != method) continue;
          sum += row.result.score.f1;
          count += 1;
        }
        group.values.push_back(count > 0 ? sum / count : 0.0);
      }
      groups.push_back(std::move(group));
    }
    if (!groups.empty()) {
      write_text_file(out_dir + "/f1_bars.svg",
                      svg_bar_chart("Detection F1 by environment", "F1", methods, groups));
    }
  }

  // Delta sweep: measured delta at first detection vs scheduled magnitude,
  // for single-change bada runs with at least two distinct magnitudes.
  {
    std::map<std::string, std::map<double, std::pair<double, int>>> sweep;
    for (const auto& row : rows) {
      if (row.failed || row.cfg.method != "bada" || row.cfg.schedule.size() != 1) continue;
      const double d = first_event_delta(row.result);
      if (!std::isfinite(d)) continue;
      auto& acc = sweep[row.cfg.env_id][row.cfg.schedule[0].magnitude];
      acc.first += d;
      acc.second += 1;
    }
    std::vector<PlotSeries> series;
    for (const auto& [env, by_mag] : sweep) {
      if (by_mag.size() < 2) continue;
      PlotSeries s;
      s.label = env;
      for (const auto& [mag, acc] : by_mag) {
        s.x.push_back(mag);
        s.y.push_back(acc.first / acc.second);
      }
      series.push_back(std::move(s));
    }
    if (!series.empty()) {
      write_text_file(out_dir + "/delta_sweep.svg",
                      svg_line_chart("Measured delta vs change magnitude", "magnitude",
                                     "delta at detection", series));
    }
  }
}

void write_suite_outputs(const std::vector<SuiteRow>& rows, const std::string& out_dir) {
  write_summary_csv(rows, out_dir + "/summary.csv");
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& row : rows) {
    if (row.failed) {
      failures.push_back({{"out", row.cfg.out},
                          {"env", row.cfg.env_id},
                          {"method", row.cfg.method},
                          {"seed", row.cfg.seed},
                          {"error", row.error}});
    }
  }
  std::ofstream fail_out(out_dir + "/failures.json");
  fail_out << failures.dump(2) << "\n";
  write_suite_plots(rows, out_dir);
}

}  // namespace

int run_suite(const std::vector<RunConfig>& configs, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<SuiteRow> rows;
  int failures = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    SuiteRow row;
    row.cfg = configs[i];
    if (row.cfg.out.empty()) {
      char name[96];
      std::snprintf(name, sizeof(name), "/%03d_%s_%s_s%llu", static_cast<int>(i),
                    row.cfg.env_id.c_str(), row.cfg.method.c_str(),
                    static_cast<unsigned long long>(row.cfg.seed));
      row.cfg.out = out_dir + name;
    }
    try {
      row.result = run_method(row.cfg);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
      failures += 1;
    }
    rows.push_back(std::move(row));
  }
  write_suite_outputs(rows, out_dir);
  return failures;
}

std::vector<RunConfig> expand_run_configs(const nlohmann::json& j) {
  nlohmann::json base = j;
  base.erase("seeds");
  base.erase("methods");
  base.erase("magnitudes");
  const RunConfig proto = base.get<RunConfig>();

  std::vector<std::string> methods{proto.method};
  if (j.contains("methods")) methods = j.at("methods").get<std::vector<std::string>>();
  std::vector<std::uint64_t> seeds{proto.seed};
  if (j.contains("seeds")) seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  std::vector<double> magnitudes;
  if (j.contains("magnitudes")) magnitudes = j.at("magnitudes").get<std::vector<double>>();

  std::vector<RunConfig> out;
  const std::size_t mag_count = magnitudes.empty() ? 1 : magnitudes.size();
  for (std::size_t mi = 0; mi < mag_count; ++mi) {
    for (const auto& method : methods) {
      for (const auto seed : seeds) {
        RunConfig cfg = proto;
        cfg.method = method;
        cfg.seed = seed;
        if (!magnitudes.empty()) {
          for (auto& entry : cfg.schedule) {
            if (entry.set.is_null()) entry.magnitude = magnitudes[mi];
          }
        }
        out.push_back(std::move(cfg));
      }
    }
  }
  return out;
}

namespace {

SuiteRow load_run_dir(const std::string& dir) {
  SuiteRow row;
  std::ifstream cfg_in(dir + "/config.json");
  if (!cfg_in) throw std::runtime_error("missing " + dir + "/config.json");
  row.cfg = nlohmann::json::parse(cfg_in).get<RunConfig>();
  row.cfg.out = dir;

  std::ifstream epochs_in(dir + "/epochs.jsonl");
  if (!epochs_in) throw std::runtime_error("missing " + dir + "/epochs.jsonl");
  std::string line;
  while (std::getline(epochs_in, line)) {
    if (line.empty()) continue;
    row.result.reports.push_back(nlohmann::json::parse(line).get<EpochReport>());
  }
  std::ifstream events_in(dir + "/events.jsonl");
  if (events_in) {
    while (std::getline(events_in, line)) {
      if (line.empty()) continue;
      row.result.events.push_back(nlohmann::json::parse(line).get<DetectionEvent>());
    }
  }
  for (const auto& entry : row.cfg.schedule) row.result.truth.push_back(entry.epoch);
  finalize_result(row.cfg, row.result);
  return row;
}

}  // namespace

void rescore_run(const std::string& run_dir) {
  SuiteRow row = load_run_dir(run_dir);
  write_scores_json(row.cfg, row.result, run_dir);
}

void replot_suite(const std::string& suite_dir) {
  std::vector<std::string> dirs;
  for (const auto& entry : fs::directory_iterator(suite_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "config.json")) {
      dirs.push_back(entry.path().string());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<SuiteRow> rows;
  for (const auto& dir : dirs) rows.push_back(load_run_dir(dir));
  write_suite_outputs(rows, suite_dir);
}

void to_json(nlohmann::json& j, const ScheduleEntry& entry) {
  j = nlohmann::json{{"epoch", entry.epoch}, {"magnitude", entry.magnitude}};
  if (!entry.set.is_null()) j["set"] = entry.set;
}

void from_json(const nlohmann::json& j, ScheduleEntry& entry) {
  const ScheduleEntry defaults;
  entry.epoch = j.at("epoch").get<int>();
  entry.magnitude = j.value("magnitude", defaults.magnitude);
  entry.set = j.value("set", nlohmann::json());
}

void to_json(nlohmann::json& j, const DetectorConfig& cfg) {
  j = nlohmann::json{{"permutations", cfg.test.permutations},
                     {"alpha", cfg.test.alpha},
                     {"refractory_epochs", cfg.test.refractory_epochs},
                     {"smoothed_p", cfg.test.smoothed_p},
                     {"knn_k", cfg.test.knn_k},
                     {"warmup_epochs", cfg.warmup_epochs},
                     {"short_window", cfg.short_window},
                     {"long_window", cfg.long_window},
                     {"threshold", cfg.threshold}};
}

void from_json(const nlohmann::json& j, DetectorConfig& cfg) {
  const DetectorConfig defaults;
  cfg.test.permutations = j.value("permutations", defaults.test.permutations);
  cfg.test.alpha = j.value("alpha", defaults.test.alpha);
  cfg.test.refractory_epochs = j.value("refractory_epochs", defaults.test.refractory_epochs);
  cfg.test.smoothed_p = j.value("smoothed_p", defaults.test.smoothed_p);
  cfg.test.knn_k = j.value("knn_k", defaults.test.knn_k);
  cfg.warmup_epochs = j.value("warmup_epochs", defaults.warmup_epochs);
  cfg.short_window = j.value("short_window", defaults.short_window);
  cfg.long_window = j.value("long_window", defaults.long_window);
  cfg.threshold = j.value("threshold", defaults.threshold);
}

void to_json(nlohmann::json& j, const RunConfig& cfg) {
  j = nlohmann::json{{"env", {{"id", cfg.env_id}}},
                     {"schedule", cfg.schedule},
                     {"method", cfg.method},
                     {"epochs", cfg.epochs},
                     {"trajectories_per_epoch", cfg.trajectories_per_epoch},
                     {"seed", cfg.seed},
                     {"detector", cfg.detector},
                     {"policy", cfg.policy},
                     {"embedding",
                      {{"latent_dim", cfg.embed_latent_dim}, {"hidden", cfg.embed_hidden}}},
                     {"eval",
                      {{"tolerance_window", cfg.tolerance_window},
                       {"recovery_window", cfg.recovery_window}}},
                     {"checkpoint", cfg.checkpoint}};
  if (!cfg.env_overrides.is_null() && !cfg.env_overrides.empty()) {
    j["env"]["overrides"] = cfg.env_overrides;
  }
  if (!cfg.out.empty()) j["out"] = cfg.out;
}

void from_json(const nlohmann::json& j, RunConfig& cfg) {
  const RunConfig defaults;
  if (j.contains("env")) {
    cfg.env_id = j.at("env").value("id", defaults.env_id);
    cfg.env_overrides = j.at("env").value("overrides", nlohmann::json());
  }
  cfg.schedule = j.value("schedule", std::vector<ScheduleEntry>{});
  cfg.method = j.value("method", defaults.method);
  cfg.epochs = j.value("epochs", defaults.epochs);
  cfg.trajectories_per_epoch =
      j.value("trajectories_per_epoch", defaults.trajectories_per_epoch);
  cfg.seed = j.value("seed", defaults.seed);
  cfg.out = j.value("out", defaults.out);
  cfg.detector = j.value("detector", defaults.detector);
  cfg.policy = j.value("policy", defaults.policy);
  if (j.contains("embedding")) {
    cfg.embed_latent_dim = j.at("embedding").value("latent_dim", defaults.embed_latent_dim);
    cfg.embed_hidden = j.at("embedding").value("hidden", defaults.embed_hidden);
  }
  if (j.contains("eval")) {
    cfg.tolerance_window = j.at("eval").value("tolerance_window", defaults.tolerance_window);
    cfg.recovery_window = j.at("eval").value("recovery_window", defaults.recovery_window);
  }
  cfg.checkpoint = j.value("checkpoint", defaults.checkpoint);
}

void to_json(nlohmann::json& j, const ObjectiveTerms& terms) {
  j = nlohmann::json{{"surrogate_reward", terms.surrogate_reward},
                     {"trust_penalty", terms.trust_penalty},
                     {"adaptation_bonus", terms.adaptation_bonus},
                     {"delta", terms.delta},
                     {"total", terms.total}};
}

void from_json(const nlohmann::json& j, ObjectiveTerms& terms) {
  terms.surrogate_reward = j.at("surrogate_reward").get<double>();
  terms.trust_penalty = j.at("trust_penalty").get<double>();
  terms.adaptation_bonus = j.at("adaptation_bonus").get<double>();
  terms.delta = j.at("delta").get<double>();
  terms.total = j.at("total").get<double>();
}

void to_json(nlohmann::json& j, const EpochReport& report) {
  j = nlohmann::json{{"epoch", report.epoch},
                     {"mean_reward", report.mean_reward},
                     {"statistic", report.statistic},
                     {"p_value", report.p_value},
                     {"detected", report.detected},
                     {"delta", report.delta},
                     {"terms", report.terms},
                     {"wall_ms", report.wall_ms}};
}

void from_json(const nlohmann::json& j, EpochReport& report) {
  report.epoch = j.at("epoch").get<int>();
  report.mean_reward = j.at("mean_reward").get<double>();
  report.statistic = j.at("statistic").get<double>();
  report.p_value = j.at("p_value").get<double>();
  report.detected = j.at("detected").get<bool>();
  report.delta = j.at("delta").get<double>();
  report.terms = j.at("terms").get<ObjectiveTerms>();
  report.wall_ms = j.at("wall_ms").get<double>();
}

void to_json(nlohmann::json& j, const DetectionEvent& event) {
  j = nlohmann::json{{"epoch", event.epoch},
                     {"detector", event.detector},
                     {"p_value", event.p_value},
                     {"statistic", event.statistic},
                     {"delta", event.delta}};
}

void from_json(const nlohmann::json& j, DetectionEvent& event) {
  event.epoch = j.at("epoch").get<int>();
  event.detector = j.at("detector").get<std::string>();
  event.p_value = j.at("p_value").get<double>();
  event.statistic = j.at("statistic").get<double>();
  event.delta = j.at("delta").get<double>();
}

}  // namespace bada
