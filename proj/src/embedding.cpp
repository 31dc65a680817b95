#include "bada/embedding.hpp"

#include <stdexcept>

namespace bada {

EmbeddingMap make_embedding_map(int obs_dim, int action_count, int latent_dim,
                                const std::vector<int>& hidden, std::uint64_t seed) {
  EmbeddingMap map;
  map.obs_dim = obs_dim;
  map.action_count = action_count;
  map.latent_dim = latent_dim;
  map.seed = seed;
  map.net = Mlp(map.feature_dim(), hidden, latent_dim);
  Rng rng(seed);
  map.net.init(rng);
  return map;
}

Vector trajectory_features(const EmbeddingMap& map, const Trajectory& traj) {
  if (traj.steps.empty()) {
    throw std::invalid_argument("trajectory_features: empty trajectory");
  }
  Vector pooled = Vector::Zero(map.feature_dim());
  for (const auto& s : traj.steps) {
    if (s.state.size() != map.obs_dim) {
      throw std::invalid_argument("trajectory_features: observation dim mismatch");
    }
    pooled.head(map.obs_dim) += s.state;
    pooled(map.obs_dim + s.action) += 1.0;
    pooled(map.feature_dim() - 1) += s.reward;
  }
  return pooled / static_cast<double>(traj.steps.size());
}

Vector embed_trajectory(const EmbeddingMap& map, const Trajectory& traj) {
  return map.net.forward(trajectory_features(map, traj));
}

EmbeddingBatch embed_batch(const EmbeddingMap& map, const std::vector<Trajectory>& trajs) {
  EmbeddingBatch batch;
  batch.points.resize(static_cast<Index>(trajs.size()), map.latent_dim);
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    batch.points.row(static_cast<Index>(i)) = embed_trajectory(map, trajs[i]).transpose();
  }
  if (!trajs.empty()) batch.epoch = trajs.front().epoch;
  return batch;
}

void to_json(nlohmann::json& j, const EmbeddingMap& map) {
  j = nlohmann::json{{"obs_dim", map.obs_dim},
                     {"action_count", map.action_count},
                     {"latent_dim", map.latent_dim},
                     {"seed", map.seed},
                     {"net", map.net}};
}

void from_json(const nlohmann::json& j, EmbeddingMap& map) {
  j.at("obs_dim").get_to(map.obs_dim);
  j.at("action_count").get_to(map.action_count);
  j.at("latent_dim").get_to(map.latent_dim);
  j.at("seed").get_to(map.seed);
  j.at("net").get_to(map.net);
}

}  // namespace bada
