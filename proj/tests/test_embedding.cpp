#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "bada/embedding.hpp"
#include "bada/transport.hpp"
#include "test_util.hpp"

using namespace bada;

namespace {

Trajectory make_traj(Rng& rng, int obs_dim, int actions, int len, double reward_scale,
                     int epoch = 0) {
  Trajectory traj;
  traj.epoch = epoch;
  for (int t = 0; t < len; ++t) {
    StepRecord s;
    s.state = testutil::random_cloud(rng, 1, obs_dim).row(0).transpose();
    s.action = static_cast<int>(rng.uniform_int(actions));
    s.reward = reward_scale * rng.uniform();
    traj.steps.push_back(std::move(s));
  }
  return traj;
}

// Product of layer spectral norms; an upper bound on the net's Lipschitz
// constant because tanh is 1-Lipschitz.
double lipschitz_bound(const Mlp& net) {
  double bound = 1.0;
  for (const Matrix& w : net.weights()) {
    Eigen::JacobiSVD<Matrix> svd(w);
    bound *= svd.singularValues()(0);
  }
  return bound;
}

}  // namespace

TEST_SUITE("embedding") {

TEST_CASE("features are the mean-pooled step descriptors") {
  EmbeddingMap map = make_embedding_map(3, 2, 4, {8}, 77);
  Trajectory traj;
  StepRecord a, b;
  a.state = Vector::Zero(3);
  a.state << 1.0, 2.0, 3.0;
  a.action = 0;
  a.reward = 0.5;
  b.state = Vector::Zero(3);
  b.state << 3.0, 2.0, 1.0;
  b.action = 1;
  b.reward = 1.5;
  traj.steps = {a, b};

  const Vector feat = trajectory_features(map, traj);
  REQUIRE(feat.size() == 6);  // 3 state + 2 action one-hot + 1 reward
  CHECK(feat(0) == doctest::Approx(2.0));
  CHECK(feat(1) == doctest::Approx(2.0));
  CHECK(feat(2) == doctest::Approx(2.0));
  CHECK(feat(3) == doctest::Approx(0.5));  // action 0 in half the steps
  CHECK(feat(4) == doctest::Approx(0.5));
  CHECK(feat(5) == doctest::Approx(1.0));  // mean reward
}

TEST_CASE("embedding rejects malformed trajectories") {
  EmbeddingMap map = make_embedding_map(3, 2, 4, {8}, 77);
  Trajectory empty;
  CHECK_THROWS_AS(trajectory_features(map, empty), std::invalid_argument);
  Trajectory bad;
  StepRecord s;
  s.state = Vector::Zero(5);
  bad.steps.push_back(s);
  CHECK_THROWS_AS(trajectory_features(map, bad), std::invalid_argument);
}

TEST_CASE("same seed gives the same map, different seeds differ") {
  Rng rng(40);
  const Trajectory traj = make_traj(rng, 4, 3, 6, 1.0);
  EmbeddingMap m1 = make_embedding_map(4, 3, 5, {16}, 123);
  EmbeddingMap m2 = make_embedding_map(4, 3, 5, {16}, 123);
  EmbeddingMap m3 = make_embedding_map(4, 3, 5, {16}, 124);
  CHECK((embed_trajectory(m1, traj) - embed_trajectory(m2, traj)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((embed_trajectory(m1, traj) - embed_trajectory(m3, traj)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("batch embedding stacks one row per trajectory and keeps the epoch") {
  Rng rng(41);
  EmbeddingMap map = make_embedding_map(4, 3, 5, {16}, 9);
  std::vector<Trajectory> trajs;
  for (int i = 0; i < 7; ++i) trajs.push_back(make_traj(rng, 4, 3, 5, 1.0, 12));
  const EmbeddingBatch batch = embed_batch(map, trajs);
  CHECK(batch.size() == 7);
  CHECK(batch.points.cols() == 5);
  CHECK(batch.epoch == 12);
  const Vector row0 = embed_trajectory(map, trajs[0]);
  CHECK((batch.points.row(0).transpose() - row0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("latent displacement is bounded by the spectral lipschitz constant") {
  Rng rng(42);
  EmbeddingMap map = make_embedding_map(6, 4, 8, {32, 32}, 55);
  const double bound = lipschitz_bound(map.net);
  CHECK(bound > 0.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Trajectory t1 = make_traj(rng, 6, 4, 8, 1.0);
    const Trajectory t2 = make_traj(rng, 6, 4, 8, 1.0);
    const double in_dist =
        (trajectory_features(map, t1) - trajectory_features(map, t2)).norm();
    const double out_dist = (embed_trajectory(map, t1) - embed_trajectory(map, t2)).norm();
    CHECK(out_dist <= bound * in_dist + 1e-12);
  }
}

TEST_CASE("behaviorally distinct trajectory groups separate in latent space") {
  Rng rng(43);
  EmbeddingMap map = make_embedding_map(5, 3, 6, {32}, 91);
  std::vector<Trajectory> low, high;
  for (int i = 0; i < 12; ++i) {
    low.push_back(make_traj(rng, 5, 3, 6, 0.1));
    Trajectory t = make_traj(rng, 5, 3, 6, 0.1);
    for (auto& s : t.steps) {
      s.reward += 8.0;
      s.state.array() += 3.0;
    }
    high.push_back(std::move(t));
  }
  const EmbeddingBatch lo = embed_batch(map, low);
  const EmbeddingBatch hi = embed_batch(map, high);
  const double between = w1_exact(lo.points, hi.points).distance;
  const double within = w1_exact(lo.points, embed_batch(map, low).points).distance;
  CHECK(within == 0.0);  // identical inputs, identical map
  CHECK(between > 0.05);
}

TEST_CASE("map json round-trip preserves the net exactly") {
  EmbeddingMap map = make_embedding_map(4, 2, 3, {8, 8}, 1234);
  nlohmann::json j = map;
  const EmbeddingMap back = j.get<EmbeddingMap>();
  CHECK(back.obs_dim == 4);
  CHECK(back.action_count == 2);
  CHECK(back.latent_dim == 3);
  CHECK(back.seed == 1234);
  CHECK((back.net.flatten() - map.net.flatten()).cwiseAbs().maxCoeff() == 0.0);
}

}  // TEST_SUITE
