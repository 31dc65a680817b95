#pragma once

#include <vector>

#include "bada/common.hpp"

namespace bada {

struct StepRecord {
  Vector state;    // observation before the action
  int action = 0;
  double reward = 0.0;
  double log_prob = 0.0;  // log pi(action | state) under the collecting policy
  bool done = false;
};

struct Trajectory {
  std::vector<StepRecord> steps;
  int epoch = 0;

  double total_reward() const {
    double sum = 0.0;
    for (const auto& s : steps) sum += s.reward;
    return sum;
  }
};

}  // namespace bada
