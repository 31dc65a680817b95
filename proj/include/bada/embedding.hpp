#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "bada/common.hpp"
#include "bada/mlp.hpp"
#include "bada/trajectory.hpp"

namespace bada {

// Fixed random-feature map from trajectories to a low-dimensional latent
// space. Weights are drawn once from a seeded generator and never trained,
// so the same seed always produces the same map.
struct EmbeddingMap {
  int obs_dim = 0;
  int action_count = 0;
  int latent_dim = 8;
  std::uint64_t seed = 0;
  Mlp net;

  int feature_dim() const { return obs_dim + action_count + 1; }
};

EmbeddingMap make_embedding_map(int obs_dim, int action_count, int latent_dim,
                                const std::vector<int>& hidden, std::uint64_t seed);

// Uniform empirical distribution over embedded trajectories; one row per point.
struct EmbeddingBatch {
  Matrix points;  // n x latent_dim
  int epoch = 0;

  Index size() const { return points.rows(); }
};

// Per-step features (state (+) one-hot(action) (+) reward), mean-pooled over
// the trajectory before the net is applied.
Vector trajectory_features(const EmbeddingMap& map, const Trajectory& traj);
Vector embed_trajectory(const EmbeddingMap& map, const Trajectory& traj);
EmbeddingBatch embed_batch(const EmbeddingMap& map, const std::vector<Trajectory>& trajs);

void to_json(nlohmann::json& j, const EmbeddingMap& map);
void from_json(const nlohmann::json& j, EmbeddingMap& map);

}  // namespace bada
