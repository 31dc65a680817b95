#include "bada/metrics.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace bada {

DetectionScore score_detections(const std::vector<int>& truth, const std::vector<int>& detected,
                                int window) {
  for (std::size_t i = 1; i < truth.size(); ++i) {
    if (truth[i] < truth[i - 1]) throw std::invalid_argument("score_detections: truth unsorted");
  }
  for (std::size_t i = 1; i < detected.size(); ++i) {
    if (detected[i] < detected[i - 1]) {
      throw std::invalid_argument("score_detections: detections unsorted");
    }
  }

  DetectionScore score;
  score.tolerance_window = window;
  std::vector<char> truth_used(truth.size(), 0);
  for (int d : detected) {
    for (std::size_t k = 0; k < truth.size(); ++k) {
      if (!truth_used[k] && std::abs(d - truth[k]) <= window) {
        truth_used[k] = 1;
        score.matches.emplace_back(truth[k], d);
        break;
      }
    }
  }
  const double tp = static_cast<double>(score.matches.size());
  const double fp = static_cast<double>(detected.size()) - tp;
  const double fn = static_cast<double>(truth.size()) - tp;
  score.precision = (tp + fp > 0.0) ? tp / (tp + fp) : 1.0;
  score.recall = (tp + fn > 0.0) ? tp / (tp + fn) : 1.0;
  score.f1 = (score.precision + score.recall > 0.0)
                 ? 2.0 * score.precision * score.recall / (score.precision + score.recall)
                 : 0.0;
  return score;
}

RewardSummary summarize_rewards(const std::vector<double>& per_epoch_mean,
                                int episodes_per_epoch, const std::vector<int>& change_epochs,
                                int recovery_window) {
  RewardSummary summary;
  summary.per_epoch_mean = per_epoch_mean;
  for (double r : per_epoch_mean) summary.cumulative += r * episodes_per_epoch;

  const int epochs = static_cast<int>(per_epoch_mean.size());
  for (int c : change_epochs) {
    RecoveryWindow win;
    win.change_epoch = c;
    const int begin = c + 1;
    const int end = std::min(epochs, begin + recovery_window);
    for (int e = begin; e < end; ++e) {
      win.mean_reward += per_epoch_mean[e];
      win.epochs += 1;
    }
    if (win.epochs > 0) win.mean_reward /= win.epochs;
    summary.recoveries.push_back(win);
  }

  int covered = 0;
  double total = 0.0;
  for (const auto& win : summary.recoveries) {
    if (win.epochs > 0) {
      total += win.mean_reward;
      covered += 1;
    }
  }
  summary.recovery_mean =
      covered > 0 ? total / covered : std::numeric_limits<double>::quiet_NaN();
  return summary;
}

}  // namespace bada
