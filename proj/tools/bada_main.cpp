#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bada/harness.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfigError = 2;

nlohmann::json parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void print_run_summary(const bada::RunConfig& cfg, const bada::RunResult& result) {
  std::printf("%s %s seed=%llu f1=%.4f precision=%.4f recall=%.4f cumulative=%.3f\n",
              cfg.env_id.c_str(), cfg.method.c_str(),
              static_cast<unsigned long long>(cfg.seed), result.score.f1,
              result.score.precision, result.score.recall, result.rewards.cumulative);
}

int cmd_run(const std::string& config_path, const std::string& out,
            const std::string& method, long long seed, bool checkpoint) {
  bada::RunConfig cfg;
  try {
    const auto expanded = bada::expand_run_configs(parse_config_file(config_path));
    if (expanded.size() != 1) {
      std::cerr << "run: config expands to " << expanded.size()
                << " runs; use the suite command\n";
      return kExitConfigError;
    }
    cfg = expanded.front();
    if (!out.empty()) cfg.out = out;
    if (!method.empty()) cfg.method = method;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (checkpoint) cfg.checkpoint = true;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    const bada::RunResult result = bada::run_method(cfg);
    print_run_summary(cfg, result);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitRunFailure;
  }
  return kExitOk;
}

int cmd_suite(const std::string& config_dir, const std::string& out) {
  std::vector<bada::RunConfig> configs;
  try {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(config_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        files.push_back(entry.path().string());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      for (auto& cfg : bada::expand_run_configs(parse_config_file(file))) {
        configs.push_back(std::move(cfg));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  const int failures = bada::run_suite(configs, out);
  std::printf("suite: %zu runs, %d failed; summary at %s/summary.csv\n", configs.size(),
              failures, out.c_str());
  return failures > 0 ? kExitRunFailure : kExitOk;
}

int cmd_score(const std::string& out) {
  try {
    bada::rescore_run(out);
    std::printf("scores written to %s/scores.json\n", out.c_str());
  } catch (const std::exception& e) {
    std::cerr << "score error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitOk;
}

int cmd_plot(const std::string& out) {
  try {
    bada::replot_suite(out);
    std::printf("plots regenerated under %s\n", out.c_str());
  } catch (const std::exception& e) {
    std::cerr << "plot error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Change-point detection and adaptation experiment runner"};
  app.require_subcommand(1);

  std::string config_path, out_dir, method;
  long long seed = -1;
  bool checkpoint = false;

  auto* run = app.add_subcommand("run", "Execute a single run config");
  run->add_option("--config", config_path, "Run config JSON")->required();
  run->add_option("--out", out_dir, "Output directory (overrides config)");
  run->add_option("--method", method, "Method override");
  run->add_option("--seed", seed, "Master seed override");
  run->add_flag("--checkpoint", checkpoint, "Write per-epoch checkpoints");

  auto* suite = app.add_subcommand("suite", "Execute every config in a directory");
  suite->add_option("--config", config_path, "Directory of run config JSON files")->required();
  suite->add_option("--out", out_dir, "Suite output directory")->required();

  auto* score = app.add_subcommand("score", "Re-score an existing run directory");
  score->add_option("--out", out_dir, "Run output directory")->required();

  auto* plot = app.add_subcommand("plot", "Regenerate plots for a suite directory");
  plot->add_option("--out", out_dir, "Suite output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  if (run->parsed()) return cmd_run(config_path, out_dir, method, seed, checkpoint);
  if (suite->parsed()) return cmd_suite(config_path, out_dir);
  if (score->parsed()) return cmd_score(out_dir);
  return cmd_plot(out_dir);
}
