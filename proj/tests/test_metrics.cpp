#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bada/metrics.hpp"
#include "bada/rng.hpp"

using namespace bada;

TEST_SUITE("metrics") {

TEST_CASE("single detection inside the window scores perfectly") {
  const DetectionScore s = score_detections({100}, {102}, 5);
  CHECK(s.precision == 1.0);
  CHECK(s.recall == 1.0);
  CHECK(s.f1 == 1.0);
  REQUIRE(s.matches.size() == 1);
  CHECK(s.matches[0] == std::pair<int, int>{100, 102});
}

TEST_CASE("a detection outside the window is a false positive and a miss") {
  const DetectionScore s = score_detections({100}, {110}, 5);
  CHECK(s.precision == 0.0);
  CHECK(s.recall == 0.0);
  CHECK(s.f1 == 0.0);
  CHECK(s.matches.empty());
}

TEST_CASE("mixed case with one spurious detection") {
  const DetectionScore s = score_detections({40, 80}, {41, 60, 81}, 3);
  CHECK(s.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(s.recall == 1.0);
  CHECK(s.f1 == doctest::Approx(0.8).epsilon(1e-15));
  REQUIRE(s.matches.size() == 2);
  CHECK(s.matches[0] == std::pair<int, int>{40, 41});
  CHECK(s.matches[1] == std::pair<int, int>{80, 81});
}

TEST_CASE("f1 follows the harmonic mean exactly") {
  // 4 matched truths, 1 extra detection: precision 0.8, recall 1.0.
  const DetectionScore s = score_detections({0, 10, 20, 30}, {0, 10, 20, 30, 100}, 2);
  CHECK(s.precision == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(s.recall == 1.0);
  CHECK(std::abs(s.f1 - 8.0 / 9.0) <= 1e-12);
}

TEST_CASE("empty sides follow the stated conventions") {
  const DetectionScore both = score_detections({}, {}, 3);
  CHECK(both.precision == 1.0);
  CHECK(both.recall == 1.0);
  CHECK(both.f1 == 1.0);

  const DetectionScore no_det = score_detections({50}, {}, 3);
  CHECK(no_det.precision == 1.0);
  CHECK(no_det.recall == 0.0);
  CHECK(no_det.f1 == 0.0);

  const DetectionScore no_truth = score_detections({}, {50}, 3);
  CHECK(no_truth.precision == 0.0);
  CHECK(no_truth.recall == 1.0);
  CHECK(no_truth.f1 == 0.0);
}

TEST_CASE("matching is one-to-one") {
  // Two detections bracket one truth: only one can claim it.
  const DetectionScore s = score_detections({10}, {9, 11}, 3);
  CHECK(s.precision == 0.5);
  CHECK(s.recall == 1.0);
  REQUIRE(s.matches.size() == 1);
  CHECK(s.matches[0] == std::pair<int, int>{10, 9});

  // Two truths close together, one detection between them: one match only.
  const DetectionScore s2 = score_detections({10, 12}, {11}, 3);
  CHECK(s2.precision == 1.0);
  CHECK(s2.recall == 0.5);
  CHECK(s2.matches[0] == std::pair<int, int>{10, 11});
}

TEST_CASE("unsorted inputs are rejected") {
  CHECK_THROWS_AS(score_detections({20, 10}, {}, 3), std::invalid_argument);
  CHECK_THROWS_AS(score_detections({}, {5, 1}, 3), std::invalid_argument);
}

TEST_CASE("f1 never decreases as the window widens") {
  Rng rng(80);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> truth, detected;
    int at = 0;
    const int truths = 1 + static_cast<int>(rng.uniform_int(4));
    for (int i = 0; i < truths; ++i) {
      at += 5 + static_cast<int>(rng.uniform_int(30));
      truth.push_back(at);
    }
    at = 0;
    const int dets = static_cast<int>(rng.uniform_int(6));
    for (int i = 0; i < dets; ++i) {
      at += 5 + static_cast<int>(rng.uniform_int(30));
      detected.push_back(at);
    }
    double prev = -1.0;
    for (int window = 0; window <= 8; ++window) {
      const double f1 = score_detections(truth, detected, window).f1;
      CHECK(f1 >= prev - 1e-15);
      prev = f1;
    }
  }
}

TEST_CASE("reward summary accumulates and windows correctly") {
  // 10 epochs, change at epoch 4, window 3 -> recovery epochs 5, 6, 7.
  std::vector<double> rewards{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const RewardSummary s = summarize_rewards(rewards, 4, {4}, 3);
  CHECK(s.per_epoch_mean == rewards);
  CHECK(s.cumulative == doctest::Approx(45.0 * 4).epsilon(1e-15));
  REQUIRE(s.recoveries.size() == 1);
  CHECK(s.recoveries[0].change_epoch == 4);
  CHECK(s.recoveries[0].epochs == 3);
  CHECK(s.recoveries[0].mean_reward == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(s.recovery_mean == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("recovery windows truncate at the run end") {
  std::vector<double> rewards{1, 1, 1, 5, 7};
  const RewardSummary s = summarize_rewards(rewards, 2, {2}, 10);
  REQUIRE(s.recoveries.size() == 1);
  CHECK(s.recoveries[0].epochs == 2);  // epochs 3 and 4 only
  CHECK(s.recoveries[0].mean_reward == doctest::Approx(6.0).epsilon(1e-15));

  // A change at the final epoch has no post-change window: the entry exists
  // but covers zero epochs and is excluded from the aggregate.
  const RewardSummary tail = summarize_rewards(rewards, 2, {4}, 10);
  REQUIRE(tail.recoveries.size() == 1);
  CHECK(tail.recoveries[0].epochs == 0);
  CHECK(std::isnan(tail.recovery_mean));
}

TEST_CASE("no changes leaves the recovery mean undefined") {
  const RewardSummary s = summarize_rewards({1, 2, 3}, 1, {}, 5);
  CHECK(std::isnan(s.recovery_mean));
  CHECK(s.recoveries.empty());
  CHECK(s.cumulative == doctest::Approx(6.0));
}

TEST_CASE("multiple changes average their recovery windows") {
  std::vector<double> rewards(12, 0.0);
  for (int i = 0; i < 12; ++i) rewards[i] = i;
  const RewardSummary s = summarize_rewards(rewards, 1, {2, 8}, 2);
  REQUIRE(s.recoveries.size() == 2);
  CHECK(s.recoveries[0].mean_reward == doctest::Approx(3.5));   // epochs 3, 4
  CHECK(s.recoveries[1].mean_reward == doctest::Approx(9.5));   // epochs 9, 10
  CHECK(s.recovery_mean == doctest::Approx(6.5));
}

}  // TEST_SUITE
