#include "bada/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bada {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_points(const Matrix& a, const Matrix& b) {
  if (a.rows() == 0 || b.rows() == 0) {
    throw std::invalid_argument("transport: empty point set");
  }
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("transport: dimension mismatch");
  }
}

// Shortest-augmenting-path assignment with potentials, 1-based internally.
// On return u, v are feasible duals (u_i + v_j <= c_ij, tight on matches)
// and match_col[j] is the row assigned to column j.
void solve_assignment(const Matrix& c, std::vector<int>& match_col,
                      std::vector<double>& u, std::vector<double>& v) {
  const int n = static_cast<int>(c.rows());
  u.assign(n + 1, 0.0);
  v.assign(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  match_col.assign(n, -1);
  for (int j = 1; j <= n; ++j) match_col[j - 1] = p[j] - 1;
}

TransportResult w1_assignment(const Matrix& a, const Matrix& b, const Matrix& c) {
  const int n = static_cast<int>(a.rows());
  std::vector<int> match_col;
  std::vector<double> u, v;
  solve_assignment(c, match_col, u, v);

  TransportResult res;
  res.plan = Matrix::Zero(n, n);
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    res.plan(match_col[j], j) = 1.0 / n;
    total += c(match_col[j], j);
  }
  res.distance = total / n;
  res.potential_mu = Eigen::Map<const Vector>(u.data() + 1, n);
  res.potential_nu = Eigen::Map<const Vector>(v.data() + 1, n);
  res.iterations = n;
  return res;
}

// Successive shortest paths with Johnson potentials on the bipartite
// transportation graph. Masses are scaled by lcm(n, m) so all flows are
// integral; transport arcs are uncapacitated, keeping the final node
// potentials dual-feasible for every (i, j) pair.
TransportResult w1_transportation(const Matrix& a, const Matrix& b, const Matrix& c) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(b.rows());
  const long long g = std::gcd(static_cast<long long>(n), static_cast<long long>(m));
  const long long total = static_cast<long long>(n) / g * m;
  const long long supply = total / n;  // = m / g
  const long long demand = total / m;  // = n / g

  struct Arc {
    int to;
    long long cap;
    double cost;
    int rev;
  };
  const int source = 0, sink = n + m + 1, nodes = n + m + 2;
  std::vector<std::vector<Arc>> graph(nodes);
  auto add_arc = [&](int from, int to, long long cap, double cost) {
    graph[from].push_back({to, cap, cost, static_cast<int>(graph[to].size())});
    graph[to].push_back({from, 0, -cost, static_cast<int>(graph[from].size()) - 1});
  };
  for (int i = 0; i < n; ++i) add_arc(source, 1 + i, supply, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) add_arc(1 + i, 1 + n + j, total, c(i, j));
  }
  for (int j = 0; j < m; ++j) add_arc(1 + n + j, sink, demand, 0.0);

  std::vector<double> pi(nodes, 0.0), dist(nodes);
  std::vector<int> prev_node(nodes), prev_arc(nodes);
  long long flow = 0;
  int rounds = 0;
  while (flow < total) {
    dist.assign(nodes, kInf);
    dist[source] = 0.0;
    std::vector<char> done(nodes, 0);
    for (int it = 0; it < nodes; ++it) {  // dense Dijkstra
      int best = -1;
      for (int v = 0; v < nodes; ++v) {
        if (!done[v] && dist[v] < kInf && (best < 0 || dist[v] < dist[best])) best = v;
      }
      if (best < 0) break;
      done[best] = 1;
      for (std::size_t k = 0; k < graph[best].size(); ++k) {
        const Arc& arc = graph[best][k];
        if (arc.cap <= 0) continue;
        const double nd = dist[best] + arc.cost + pi[best] - pi[arc.to];
        if (nd < dist[arc.to] - 1e-15) {
          dist[arc.to] = nd;
          prev_node[arc.to] = best;
          prev_arc[arc.to] = static_cast<int>(k);
        }
      }
    }
    if (dist[sink] >= kInf) {
      throw std::runtime_error("transport: no augmenting path");
    }
    for (int v = 0; v < nodes; ++v) {
      if (dist[v] < kInf) pi[v] += dist[v];
    }
    long long push = total - flow;
    for (int v = sink; v != source; v = prev_node[v]) {
      push = std::min(push, graph[prev_node[v]][prev_arc[v]].cap);
    }
    for (int v = sink; v != source; v = prev_node[v]) {
      Arc& arc = graph[prev_node[v]][prev_arc[v]];
      arc.cap -= push;
      graph[arc.to][arc.rev].cap += push;
    }
    flow += push;
    ++rounds;
  }

  TransportResult res;
  res.plan = Matrix::Zero(n, m);
  double cost_total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (const Arc& arc : graph[1 + i]) {
      if (arc.to >= 1 + n && arc.to < 1 + n + m) {
        const long long used = total - arc.cap;  // initial cap was `total`
        if (used > 0) {
          const int j = arc.to - 1 - n;
          res.plan(i, j) = static_cast<double>(used) / static_cast<double>(total);
          cost_total += static_cast<double>(used) * c(i, j);
        }
      }
    }
  }
  res.distance = cost_total / static_cast<double>(total);
  res.potential_mu.resize(n);
  res.potential_nu.resize(m);
  for (int i = 0; i < n; ++i) res.potential_mu(i) = -pi[1 + i];
  for (int j = 0; j < m; ++j) res.potential_nu(j) = pi[1 + n + j];
  res.iterations = rounds;
  return res;
}

double logsumexp_row(const Vector& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

}  // namespace

Matrix cost_matrix(const Matrix& a, const Matrix& b) {
  check_points(a, b);
  Matrix c(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.rows(); ++j) {
      c(i, j) = (a.row(i) - b.row(j)).norm();
    }
  }
  return c;
}

TransportResult w1_exact(const Matrix& a, const Matrix& b) {
  check_points(a, b);
  const Matrix c = cost_matrix(a, b);
  if (a.rows() == b.rows()) return w1_assignment(a, b, c);
  return w1_transportation(a, b, c);
}

double resolve_epsilon(const Matrix& cost, const EntropicOptions& opt) {
  if (opt.epsilon > 0.0) return opt.epsilon;
  return 0.05 * cost.mean();
}

TransportResult w1_entropic(const Matrix& a, const Matrix& b, const EntropicOptions& opt) {
  check_points(a, b);
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(b.rows());
  const Matrix c = cost_matrix(a, b);
  const double eps = resolve_epsilon(c, opt);

  TransportResult res;
  if (eps <= 0.0) {  // all costs zero: any feasible plan is optimal
    res.plan = Matrix::Constant(n, m, 1.0 / (n * m));
    res.potential_mu = Vector::Zero(n);
    res.potential_nu = Vector::Zero(m);
    return res;
  }

  const double log_a = -std::log(static_cast<double>(n));
  const double log_b = -std::log(static_cast<double>(m));
  Vector f = Vector::Zero(n), g = Vector::Zero(m);
  int total_iters = 0;

  // Anneal epsilon from a coarse level down to the target, warm-starting the
  // potentials at each stage; small target epsilons converge orders of
  // magnitude faster this way.
  std::vector<double> stages;
  for (double e = std::max(0.5 * c.maxCoeff(), eps); e > eps; e *= 0.5) stages.push_back(e);
  stages.push_back(eps);

  auto update_f = [&](double e) {
    for (int i = 0; i < n; ++i) {
      const Vector row = ((g.array() - c.row(i).transpose().array()) / e) + log_b;
      f(i) = -e * logsumexp_row(row);
    }
  };
  auto update_g = [&](double e) {
    for (int j = 0; j < m; ++j) {
      const Vector col = ((f.array() - c.col(j).array()) / e) + log_a;
      g(j) = -e * logsumexp_row(col);
    }
  };
  auto row_marginal_error = [&](double e) {
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      const Vector row = (f(i) + g.array() - c.row(i).transpose().array()) / e;
      err += std::abs(row.array().exp().sum() / (n * m) - 1.0 / n);
    }
    return err;
  };

  bool converged = false;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const double e = stages[s];
    const bool final_stage = (s + 1 == stages.size());
    const int iters = final_stage ? opt.max_iterations : std::min(opt.max_iterations, 50);
    for (int it = 0; it < iters; ++it) {
      update_f(e);
      update_g(e);
      ++total_iters;
      if (final_stage && row_marginal_error(e) <= opt.marginal_tol) {
        converged = true;
        break;
      }
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "w1_entropic: marginal residual " << row_marginal_error(eps)
        << " above tolerance " << opt.marginal_tol << " after " << total_iters
        << " iterations";
    throw std::runtime_error(msg.str());
  }
  update_f(eps);  // leave f consistent with g; columns stay exact from update_g

  res.plan.resize(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      res.plan(i, j) = std::exp((f(i) + g(j) - c(i, j)) / eps) / (n * m);
    }
  }
  res.distance = (res.plan.array() * c.array()).sum();
  res.potential_mu = f;
  res.potential_nu = g;
  res.iterations = total_iters;
  res.epsilon = eps;
  double col_err = 0.0;
  for (int j = 0; j < m; ++j) col_err += std::abs(res.plan.col(j).sum() - 1.0 / m);
  res.marginal_error = col_err;
  return res;
}

Vector extend_potential(const Matrix& b, const Vector& potential_nu, const Matrix& z,
                        double epsilon) {
  if (epsilon <= 0.0) throw std::invalid_argument("extend_potential: epsilon must be > 0");
  const Matrix c = cost_matrix(z, b);
  const double log_b = -std::log(static_cast<double>(b.rows()));
  Vector out(z.rows());
  for (Index i = 0; i < z.rows(); ++i) {
    const Vector row =
        ((potential_nu.array() - c.row(i).transpose().array()) / epsilon) + log_b;
    out(i) = -epsilon * logsumexp_row(row);
  }
  return out;
}

double dual_regularizer_estimate(const Matrix& a, const Matrix& b,
                                 const TransportResult& result) {
  if (result.epsilon <= 0.0) {
    throw std::invalid_argument("dual_regularizer_estimate: result lacks a regularizer");
  }
  const Vector f_on_b = extend_potential(b, result.potential_nu, b, result.epsilon);
  return result.potential_mu.mean() - f_on_b.mean();
}

}  // namespace bada
