#pragma once

#include <utility>
#include <vector>

#include "bada/common.hpp"

namespace bada {

struct DetectionScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<std::pair<int, int>> matches;  // (true epoch, detected epoch)
  int tolerance_window = 0;
};

// Greedy earliest-first one-to-one matching: detections in ascending order
// each take the earliest unmatched truth within the window. Conventions for
// empty sides: precision is 1 with no detections, recall is 1 with no truths.
DetectionScore score_detections(const std::vector<int>& truth, const std::vector<int>& detected,
                                int window);

struct RecoveryWindow {
  int change_epoch = 0;
  double mean_reward = 0.0;
  int epochs = 0;  // window length after truncation at the run end
};

struct RewardSummary {
  std::vector<double> per_epoch_mean;
  double cumulative = 0.0;  // sum of per-epoch means x episodes per epoch
  std::vector<RecoveryWindow> recoveries;
  double recovery_mean = 0.0;  // NaN when the schedule has no changes
};

// Recovery for a change at epoch C covers epochs [C+1, C+window], truncated
// at the run end; changes at or past the final epoch contribute nothing.
RewardSummary summarize_rewards(const std::vector<double>& per_epoch_mean,
                                int episodes_per_epoch, const std::vector<int>& change_epochs,
                                int recovery_window);

}  // namespace bada
