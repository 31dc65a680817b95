#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bada/transport.hpp"
#include "test_util.hpp"

using namespace bada;
using testutil::brute_force_w1;
using testutil::brute_force_w1_unequal;
using testutil::random_cloud;

TEST_SUITE("transport") {

TEST_CASE("cost matrix is the pairwise euclidean distance") {
  Matrix a(2, 2), b(3, 2);
  a << 0, 0, 1, 0;
  b << 0, 0, 0, 3, 4, 3;
  const Matrix c = cost_matrix(a, b);
  CHECK(c.rows() == 2);
  CHECK(c.cols() == 3);
  CHECK(c(0, 0) == 0.0);
  CHECK(c(0, 1) == doctest::Approx(3.0));
  CHECK(c(0, 2) == doctest::Approx(5.0));
  CHECK(c(1, 1) == doctest::Approx(std::sqrt(10.0)));
}

TEST_CASE("equal-size solve matches exhaustive assignment enumeration") {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(6));
    const int d = 1 + static_cast<int>(rng.uniform_int(4));
    const Matrix a = random_cloud(rng, n, d);
    const Matrix b = random_cloud(rng, n, d);
    const TransportResult res = w1_exact(a, b);
    CHECK(std::abs(res.distance - brute_force_w1(a, b)) <= 1e-9);
  }
}

TEST_CASE("unequal-size solve matches the duplicated-point assignment oracle") {
  Rng rng(12);
  const int shapes[][2] = {{1, 2}, {2, 3}, {3, 2}, {2, 4}, {4, 2}, {3, 4}, {2, 8}, {8, 2}};
  for (const auto& shape : shapes) {
    for (int trial = 0; trial < 8; ++trial) {
      const Matrix a = random_cloud(rng, shape[0], 3);
      const Matrix b = random_cloud(rng, shape[1], 3);
      const TransportResult res = w1_exact(a, b);
      CHECK(std::abs(res.distance - brute_force_w1_unequal(a, b)) <= 1e-9);
    }
  }
}

TEST_CASE("one-dimensional clouds match the sorted-sample closed form") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(15));
    const Matrix a = random_cloud(rng, n, 1);
    const Matrix b = random_cloud(rng, n, 1);
    const double want = testutil::sorted_w1_1d(a.col(0), b.col(0));
    CHECK(w1_exact(a, b).distance == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("metric axioms hold") {
  Rng rng(14);
  const Matrix a = random_cloud(rng, 5, 3);
  const Matrix b = random_cloud(rng, 5, 3);
  const Matrix c = random_cloud(rng, 5, 3);
  const double ab = w1_exact(a, b).distance;
  const double ba = w1_exact(b, a).distance;
  const double ac = w1_exact(a, c).distance;
  const double cb = w1_exact(c, b).distance;
  CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
  CHECK(w1_exact(a, a).distance == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ab <= ac + cb + 1e-9);
  CHECK(ab > 0.0);
}

TEST_CASE("doubling all coordinates doubles the distance exactly") {
  Rng rng(15);
  const Matrix a = random_cloud(rng, 6, 4);
  const Matrix b = random_cloud(rng, 4, 4);
  const double base = w1_exact(a, b).distance;
  const double scaled = w1_exact(Matrix(2.0 * a), Matrix(2.0 * b)).distance;
  CHECK(scaled == 2.0 * base);
}

TEST_CASE("common translation leaves the distance unchanged") {
  Rng rng(16);
  const Matrix a = random_cloud(rng, 5, 3);
  const Matrix b = random_cloud(rng, 7, 3);
  Matrix at = a, bt = b;
  at.col(1).array() += 4.25;
  bt.col(1).array() += 4.25;
  CHECK(w1_exact(at, bt).distance == doctest::Approx(w1_exact(a, b).distance).epsilon(1e-10));
}

TEST_CASE("exact plans have uniform marginals and feasible tight duals") {
  Rng rng(17);
  for (const auto& shape : {std::pair<int, int>{6, 6}, {5, 8}}) {
    const Matrix a = random_cloud(rng, shape.first, 3);
    const Matrix b = random_cloud(rng, shape.second, 3);
    const TransportResult res = w1_exact(a, b);
    const Matrix cost = cost_matrix(a, b);

    const Vector row_sums = res.plan.rowwise().sum();
    const Vector col_sums = res.plan.colwise().sum();
    CHECK((row_sums.array() - 1.0 / shape.first).abs().maxCoeff() <= 1e-12);
    CHECK((col_sums.array() - 1.0 / shape.second).abs().maxCoeff() <= 1e-12);
    CHECK(res.plan.minCoeff() >= 0.0);
    CHECK((res.plan.array() * cost.array()).sum() == doctest::Approx(res.distance).epsilon(1e-12));

    // Dual feasibility f_i + g_j <= c_ij, and strong duality at the optimum.
    double max_violation = -1e300;
    for (Index i = 0; i < cost.rows(); ++i) {
      for (Index j = 0; j < cost.cols(); ++j) {
        max_violation = std::max(
            max_violation, res.potential_mu(i) + res.potential_nu(j) - cost(i, j));
      }
    }
    CHECK(max_violation <= 1e-9);
    const double dual_value = res.potential_mu.mean() + res.potential_nu.mean();
    CHECK(std::abs(dual_value - res.distance) <= 1e-9);
    CHECK(res.epsilon == 0.0);
  }
}

TEST_CASE("degenerate exact cases") {
  Matrix a(1, 2), b(1, 2);
  a << 0.0, 0.0;
  b << 3.0, 4.0;
  CHECK(w1_exact(a, b).distance == doctest::Approx(5.0));

  Matrix same(3, 2);
  same << 1, 2, 1, 2, 1, 2;
  CHECK(w1_exact(same, same).distance == 0.0);
}

TEST_CASE("entropic distance tracks the exact distance at small epsilon") {
  Rng rng(18);
  for (int trial = 0; trial < 6; ++trial) {
    const Matrix a = random_cloud(rng, 12, 4);
    const Matrix b = random_cloud(rng, 12, 4);
    const double exact = w1_exact(a, b).distance;
    EntropicOptions opt;
    opt.epsilon = 0.01 * cost_matrix(a, b).mean();
    opt.marginal_tol = 1e-5;  // the 1e-6 tail can stall at this epsilon
    const TransportResult res = w1_entropic(a, b, opt);
    CHECK(testutil::rel_error(res.distance, exact) <= 0.02);
    CHECK(res.epsilon == doctest::Approx(opt.epsilon));
    // The final row refresh perturbs the column marginals by at most the
    // converged residual again.
    CHECK(res.marginal_error <= 2 * opt.marginal_tol);
    CHECK(res.iterations > 0);
  }
}

TEST_CASE("entropic plan satisfies both marginals") {
  Rng rng(19);
  const Matrix a = random_cloud(rng, 9, 3);
  const Matrix b = random_cloud(rng, 6, 3);
  const TransportResult res = w1_entropic(a, b);
  const Vector row_sums = res.plan.rowwise().sum();
  const Vector col_sums = res.plan.colwise().sum();
  // Rows are exact after the closing f refresh; columns stay within tolerance.
  CHECK((row_sums.array() - 1.0 / 9).abs().maxCoeff() <= 1e-12);
  CHECK((col_sums.array() - 1.0 / 6).abs().sum() <= 2e-6);
}

TEST_CASE("default epsilon resolves to a fraction of the mean cost") {
  Rng rng(20);
  const Matrix a = random_cloud(rng, 5, 2);
  const Matrix b = random_cloud(rng, 5, 2);
  const Matrix cost = cost_matrix(a, b);
  CHECK(resolve_epsilon(cost, EntropicOptions{}) == doctest::Approx(0.05 * cost.mean()));
  EntropicOptions opt;
  opt.epsilon = 0.125;
  CHECK(resolve_epsilon(cost, opt) == 0.125);
  const TransportResult res = w1_entropic(a, b);
  CHECK(res.epsilon == doctest::Approx(0.05 * cost.mean()));
}

TEST_CASE("identical single-point clouds short-circuit to the trivial plan") {
  Matrix a(1, 3), b(1, 3);
  a << 1, 2, 3;
  b << 1, 2, 3;
  const TransportResult res = w1_entropic(a, b);
  CHECK(res.distance == 0.0);
  CHECK(res.plan(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("entropic potentials reproduce themselves under the c-transform") {
  Rng rng(21);
  const Matrix a = random_cloud(rng, 8, 3);
  const Matrix b = random_cloud(rng, 5, 3);
  const TransportResult res = w1_entropic(a, b);
  const Vector f = extend_potential(b, res.potential_nu, a, res.epsilon);
  CHECK((f - res.potential_mu).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("dual estimate approximates the transport distance") {
  Rng rng(22);
  const Matrix a = testutil::shifted_cloud(rng, 16, 4, 2.0);
  const Matrix b = random_cloud(rng, 16, 4);
  const double exact = w1_exact(a, b).distance;
  EntropicOptions opt;
  opt.epsilon = 0.01 * cost_matrix(a, b).mean();
  const TransportResult res = w1_entropic(a, b, opt);
  const double estimate = dual_regularizer_estimate(a, b, res);
  CHECK(testutil::rel_error(estimate, exact) <= 0.05);
}

TEST_CASE("dual estimate refuses results without a regularizer") {
  Matrix a(2, 1), b(2, 1);
  a << 0, 1;
  b << 2, 3;
  const TransportResult res = w1_exact(a, b);
  CHECK_THROWS_AS(dual_regularizer_estimate(a, b, res), std::invalid_argument);
}

TEST_CASE("starved iteration budget raises instead of returning garbage") {
  Rng rng(23);
  const Matrix a = random_cloud(rng, 10, 3);
  const Matrix b = random_cloud(rng, 10, 3);
  EntropicOptions opt;
  opt.epsilon = 0.001 * cost_matrix(a, b).mean();
  opt.max_iterations = 2;
  opt.marginal_tol = 1e-14;
  CHECK_THROWS_AS(w1_entropic(a, b, opt), std::runtime_error);
}

}  // TEST_SUITE
