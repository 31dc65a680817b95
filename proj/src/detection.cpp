#include "bada/detection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bada/transport.hpp"

namespace bada {

namespace {

double evaluate_statistic(const Matrix& a, const Matrix& b, TestStatistic stat, int k) {
  if (stat == TestStatistic::wasserstein) return w1_exact(a, b).distance;
  return knn_kl_estimate(a, b, k);
}

// k-th smallest strictly positive entry, or -1 when fewer than k exist.
double kth_positive(std::vector<double>& d, int k) {
  std::sort(d.begin(), d.end());
  int seen = 0;
  for (double v : d) {
    if (v > 0.0 && ++seen == k) return v;
  }
  return -1.0;
}

}  // namespace

double knn_kl_estimate(const Matrix& p, const Matrix& q, int k) {
  const int n = static_cast<int>(p.rows());
  const int m = static_cast<int>(q.rows());
  if (n < k + 1 || m < k + 1) {
    throw std::invalid_argument("knn_kl_estimate: batches must have > k points");
  }
  const double dim = static_cast<double>(p.cols());
  double log_sum = 0.0;
  std::vector<double> own, other;
  for (int i = 0; i < n; ++i) {
    own.clear();
    other.clear();
    for (int j = 0; j < n; ++j) {
      if (j != i) own.push_back((p.row(i) - p.row(j)).norm());
    }
    for (int j = 0; j < m; ++j) other.push_back((p.row(i) - q.row(j)).norm());
    const double rho = kth_positive(own, k);
    const double nu = kth_positive(other, k);
    if (rho > 0.0 && nu > 0.0) log_sum += std::log(nu / rho);
  }
  return dim / n * log_sum + std::log(static_cast<double>(m) / (n - 1));
}

PermutationOutcome permutation_test(const Matrix& current, const Matrix& previous,
                                    const PermutationTestConfig& cfg, TestStatistic stat) {
  if (current.cols() != previous.cols()) {
    throw std::invalid_argument("permutation_test: latent dimension mismatch");
  }
  const int n1 = static_cast<int>(current.rows());
  const int n2 = static_cast<int>(previous.rows());
  Matrix pooled(n1 + n2, current.cols());
  pooled.topRows(n1) = current;
  pooled.bottomRows(n2) = previous;

  PermutationOutcome out;
  out.statistic = evaluate_statistic(current, previous, stat, cfg.knn_k);

  Rng rng(cfg.rng_seed);
  Matrix part_a(n1, pooled.cols()), part_b(n2, pooled.cols());
  int exceed = 0;
  for (int e = 0; e < cfg.permutations; ++e) {
    const std::vector<int> idx = rng.permutation(n1 + n2);
    for (int i = 0; i < n1; ++i) part_a.row(i) = pooled.row(idx[i]);
    for (int i = 0; i < n2; ++i) part_b.row(i) = pooled.row(idx[n1 + i]);
    if (evaluate_statistic(part_a, part_b, stat, cfg.knn_k) >= out.statistic) ++exceed;
  }
  out.p_value = cfg.smoothed_p
                    ? (1.0 + exceed) / (1.0 + cfg.permutations)
                    : static_cast<double>(exceed) / cfg.permutations;
  return out;
}

namespace {

std::optional<DetectionEvent> embedding_detect(const EmbeddingBatch& current,
                                               DetectorState& state,
                                               const PermutationTestConfig& cfg,
                                               TestStatistic stat, const char* name) {
  std::optional<DetectionEvent> event;
  if (state.previous_batch) {
    const PermutationOutcome out =
        permutation_test(current.points, state.previous_batch->points, cfg, stat);
    state.last_p_value = out.p_value;
    state.last_statistic = out.statistic;
    if (out.p_value <= cfg.alpha &&
        state.epochs_since_last_detection >= cfg.refractory_epochs) {
      DetectionEvent ev;
      ev.epoch = current.epoch;
      ev.detector = name;
      ev.p_value = out.p_value;
      ev.statistic = out.statistic;
      ev.delta = (stat == TestStatistic::wasserstein)
                     ? out.statistic
                     : w1_exact(current.points, state.previous_batch->points).distance;
      state.epochs_since_last_detection = 0;
      event = std::move(ev);
    }
  } else {
    state.last_p_value = -1.0;
    state.last_statistic = -1.0;
  }
  state.previous_batch = current;
  return event;
}

}  // namespace

std::optional<DetectionEvent> bada_detect(const EmbeddingBatch& current, DetectorState& state,
                                          const PermutationTestConfig& cfg) {
  return embedding_detect(current, state, cfg, TestStatistic::wasserstein, "bada");
}

std::optional<DetectionEvent> kl_knn_detect(const EmbeddingBatch& current, DetectorState& state,
                                            const PermutationTestConfig& cfg) {
  if (current.size() < cfg.knn_k + 1 ||
      (state.previous_batch && state.previous_batch->size() < cfg.knn_k + 1)) {
    throw std::invalid_argument("kl_knn_detect: batches must have > k points");
  }
  return embedding_detect(current, state, cfg, TestStatistic::kl_knn, "permu_kl");
}

std::optional<DetectionEvent> reward_gap_detect(const std::vector<double>& recent_rewards,
                                                DetectorState& state, int short_window,
                                                int long_window, double threshold) {
  if (long_window <= short_window || short_window < 1) {
    throw std::invalid_argument("reward_gap_detect: need long_window > short_window >= 1");
  }
  const int total = short_window + long_window;
  if (static_cast<int>(recent_rewards.size()) < total) return std::nullopt;

  const auto* end = recent_rewards.data() + recent_rewards.size();
  double short_mean = 0.0, long_mean = 0.0;
  for (const auto* v = end - short_window; v != end; ++v) short_mean += *v;
  short_mean /= short_window;
  const auto* long_begin = end - total;
  for (const auto* v = long_begin; v != long_begin + long_window; ++v) long_mean += *v;
  long_mean /= long_window;
  double long_var = 0.0;
  for (const auto* v = long_begin; v != long_begin + long_window; ++v) {
    long_var += (*v - long_mean) * (*v - long_mean);
  }
  const double long_std = std::sqrt(long_var / long_window);

  if (!(short_mean < long_mean - threshold * long_std)) return std::nullopt;

  const double std_floor = std::max(long_std, 1e-9 * std::max(1.0, std::abs(long_mean)));
  DetectionEvent ev;
  ev.detector = "reward_gap";
  ev.p_value = -1.0;  // not applicable for this detector
  ev.statistic = (long_mean - short_mean) / std_floor;
  ev.delta = ev.statistic;
  state.last_p_value = -1.0;
  state.last_statistic = ev.statistic;
  return ev;
}

}  // namespace bada
