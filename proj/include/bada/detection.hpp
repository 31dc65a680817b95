#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bada/common.hpp"
#include "bada/embedding.hpp"
#include "bada/rng.hpp"

namespace bada {

struct PermutationTestConfig {
  int permutations = 100;    // E
  double alpha = 0.05;
  std::uint64_t rng_seed = 0;
  int refractory_epochs = 3;
  bool smoothed_p = false;   // (1 + sum) / (1 + E) instead of sum / E
  int knn_k = 1;
};

struct DetectionEvent {
  int epoch = 0;
  std::string detector;
  double p_value = 0.0;
  double statistic = 0.0;
  double delta = 0.0;
};

struct DetectorState {
  std::optional<EmbeddingBatch> previous_batch;
  // Starts large so the very first detection is never suppressed.
  int epochs_since_last_detection = 1 << 24;
  std::vector<double> reward_history;  // per-episode rewards, appended by the driver
  double last_p_value = -1.0;          // most recent test outputs, for reporting
  double last_statistic = -1.0;
};

struct PermutationOutcome {
  double p_value = 1.0;
  double statistic = 0.0;
};

enum class TestStatistic { wasserstein, kl_knn };

// Two-sample permutation test: pools the rows, re-splits E times at the
// original sizes under a generator seeded with cfg.rng_seed, and counts
// permuted statistics >= the observed one (ties count as exceedances).
PermutationOutcome permutation_test(const Matrix& current, const Matrix& previous,
                                    const PermutationTestConfig& cfg,
                                    TestStatistic stat = TestStatistic::wasserstein);

// k-NN Kullback-Leibler estimate D(P || Q). Zero distances (exact duplicates
// across or within the sets) are skipped, so identical batches score ~0.
double knn_kl_estimate(const Matrix& p, const Matrix& q, int k);

// Wasserstein permutation detector. Skips the first call (no previous batch),
// honors the refractory window, and always leaves state.previous_batch equal
// to `current` on return.
std::optional<DetectionEvent> bada_detect(const EmbeddingBatch& current, DetectorState& state,
                                          const PermutationTestConfig& cfg);

// Same scheme with the k-NN KL statistic; the event's delta still records the
// exact Wasserstein distance between the two batches.
std::optional<DetectionEvent> kl_knn_detect(const EmbeddingBatch& current, DetectorState& state,
                                            const PermutationTestConfig& cfg);

// Short-vs-long reward-window baseline over per-episode rewards. The long
// window is the stretch immediately preceding the short window; fires when
// mean(short) < mean(long) - threshold * std(long). No p-value (-1 sentinel).
std::optional<DetectionEvent> reward_gap_detect(const std::vector<double>& recent_rewards,
                                                DetectorState& state, int short_window,
                                                int long_window, double threshold);

}  // namespace bada
