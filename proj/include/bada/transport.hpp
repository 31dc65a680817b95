#pragma once

#include "bada/common.hpp"

namespace bada {

// Pairwise Euclidean distances between row-point sets; entries(i, j) is zero
// exactly when the points coincide.
Matrix cost_matrix(const Matrix& a, const Matrix& b);

struct TransportResult {
  double distance = 0.0;
  Matrix plan;            // n x m, rows sum to 1/n, columns to 1/m
  Vector potential_mu;    // dual potential on a's points
  Vector potential_nu;    // dual potential on b's points
  int iterations = 0;
  double marginal_error = 0.0;
  double epsilon = 0.0;   // regularization in force; 0 for exact solves
};

struct EntropicOptions {
  double epsilon = 0.0;        // <= 0 means 0.05 * mean(cost)
  int max_iterations = 50000;  // budget for the final annealing stage
  double marginal_tol = 1e-6;  // L1 error on the unconstrained marginal
};

// Exact Wasserstein-1 between uniform empirical distributions. Equal-size
// inputs reduce to a minimum-cost assignment; unequal sizes are solved as a
// transportation problem over integer masses scaled by lcm(n, m).
TransportResult w1_exact(const Matrix& a, const Matrix& b);

// Entropically regularized Wasserstein-1, log-domain updates with epsilon
// annealing. distance is the transport cost <plan, cost> of the regularized
// plan; potentials satisfy the usual marginal fixed-point conditions.
TransportResult w1_entropic(const Matrix& a, const Matrix& b,
                            const EntropicOptions& opt = {});

// Smoothed c-transform extension of potential_nu onto arbitrary points:
// f(z) = -eps * log sum_j (1/m) exp((g_j - |z - b_j|) / eps).
// At the solver's fixed point this reproduces potential_mu on a's points.
Vector extend_potential(const Matrix& b, const Vector& potential_nu, const Matrix& z,
                        double epsilon);

// Dual estimate mean_i f(a_i) - mean_j f(b_j) with f = potential_mu extended
// onto b's points; equals the transport distance up to regularization bias.
// result must come from w1_entropic so that result.epsilon is positive.
double dual_regularizer_estimate(const Matrix& a, const Matrix& b,
                                 const TransportResult& result);

// Effective epsilon used by w1_entropic for the given options and cost scale.
double resolve_epsilon(const Matrix& cost, const EntropicOptions& opt);

}  // namespace bada
