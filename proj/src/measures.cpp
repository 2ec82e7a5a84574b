#include "levy/measures.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "levy/errors.hpp"

namespace levy {

EmpiricalMeasure::EmpiricalMeasure(Mat atoms) : atoms_(std::move(atoms)) {
  require(atoms_.cols() >= 1 && atoms_.rows() >= 1, "EmpiricalMeasure: need at least one atom");
  weights_ = Vec::Constant(atoms_.cols(), 1.0 / static_cast<double>(atoms_.cols()));
  uniform_ = true;
}

EmpiricalMeasure::EmpiricalMeasure(Mat atoms, Vec weights) : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  require(atoms_.cols() >= 1 && atoms_.rows() >= 1, "EmpiricalMeasure: need at least one atom");
  require(weights_.size() == atoms_.cols(), "EmpiricalMeasure: weight count mismatch");
  require((weights_.array() >= 0.0).all(), "EmpiricalMeasure: weights must be nonnegative");
  require(std::abs(weights_.sum() - 1.0) <= 1e-12, "EmpiricalMeasure: weights must sum to 1");
  const double w0 = weights_(0);
  uniform_ = (weights_.array() == w0).all() && std::abs(w0 * atoms_.cols() - 1.0) <= 1e-14;
}

EmpiricalMeasure EmpiricalMeasure::from_values(const std::vector<double>& xs) {
  Mat a(1, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t k = 0; k < xs.size(); ++k) a(0, static_cast<Eigen::Index>(k)) = xs[k];
  return EmpiricalMeasure(std::move(a));
}

EmpiricalMeasure EmpiricalMeasure::dirac(const Vec& x) { return EmpiricalMeasure(Mat(x)); }

EmpiricalMeasure EmpiricalMeasure::mixture(const EmpiricalMeasure& a, double t, const EmpiricalMeasure& b) {
  require(a.dim() == b.dim(), "mixture: dimension mismatch");
  require(t >= 0.0 && t <= 1.0, "mixture: t must lie in [0,1]");
  Mat atoms(a.dim(), a.atoms_.cols() + b.atoms_.cols());
  atoms << a.atoms_, b.atoms_;
  Vec w(atoms.cols());
  w << t * a.weights_, (1.0 - t) * b.weights_;
  w /= w.sum();
  return EmpiricalMeasure(std::move(atoms), std::move(w));
}

Vec EmpiricalMeasure::mean() const { return atoms_ * weights_; }

double EmpiricalMeasure::moment(double beta) const { return measure_moment(*this, beta).value; }

EmpiricalMeasure EmpiricalMeasure::translated(const Vec& c) const {
  EmpiricalMeasure m = *this;
  m.atoms_.colwise() += c;
  return m;
}

EmpiricalMeasure EmpiricalMeasure::with_atom(std::size_t k, const Vec& x) const {
  require(k < size(), "with_atom: index out of range");
  EmpiricalMeasure m = *this;
  m.atoms_.col(static_cast<Eigen::Index>(k)) = x;
  return m;
}

EmpiricalMeasure EmpiricalMeasure::reweighted(Vec weights) const { return EmpiricalMeasure(atoms_, std::move(weights)); }

MeasureMoment measure_moment(const EmpiricalMeasure& mu, double beta) {
  require(beta > 0.0, "measure_moment: beta must be positive");
  double s = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) s += mu.weight(k) * std::pow(mu.atom(k).norm(), beta);
  return {beta, beta >= 1.0 ? std::pow(s, 1.0 / beta) : s};
}

double w1_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  require(mu.dim() == 1 && nu.dim() == 1, "w1_1d: one-dimensional measures required");
  struct Pt {
    double x;
    double dw;
    std::size_t idx;
  };
  std::vector<Pt> pts;
  pts.reserve(mu.size() + nu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) pts.push_back({mu.atoms()(0, k), mu.weight(k), k});
  for (std::size_t k = 0; k < nu.size(); ++k) pts.push_back({nu.atoms()(0, k), -nu.weight(k), mu.size() + k});
  std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) { return a.x < b.x || (a.x == b.x && a.idx < b.idx); });
  double cdf_gap = 0.0, area = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    cdf_gap += pts[k].dw;
    area += std::abs(cdf_gap) * (pts[k + 1].x - pts[k].x);
  }
  return area;
}

double assignment_cost(const Mat& cost) {
  // Shortest augmenting path with potentials, O(n^3).
  const int n = static_cast<int>(cost.rows());
  require(cost.cols() == n, "assignment_cost: square cost matrix required");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += cost(p[j] - 1, j - 1);
  return total;
}

double transport_cost(const Mat& cost, const Vec& a, const Vec& b) {
  // Successive shortest paths from a super source S to a super sink T on the residual
  // graph S -> rows -> cols -> T. Dijkstra runs on reduced costs, which stay
  // nonnegative because potentials only move on nodes that remain reachable.
  const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
  require(cost.rows() == n && cost.cols() == m, "transport_cost: shape mismatch");
  const double tol = 1e-15;
  const double inf = std::numeric_limits<double>::infinity();
  const int S = n + m, T = n + m + 1, V = n + m + 2;
  // Node ids: rows 0..n-1, cols n..n+m-1, then S and T.
  std::vector<double> supply(a.data(), a.data() + n), demand(b.data(), b.data() + m);
  Mat flow = Mat::Zero(n, m);
  std::vector<double> pot(V, 0.0), dist(V);
  std::vector<int> prev(V);
  std::vector<char> done(V);
  for (;;) {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(prev.begin(), prev.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    dist[S] = 0.0;
    for (int it = 0; it < V; ++it) {
      int u = -1;
      double du = inf;
      for (int v = 0; v < V; ++v)
        if (!done[v] && dist[v] < du) {
          du = dist[v];
          u = v;
        }
      if (u < 0) break;
      done[u] = 1;
      auto relax = [&](int v, double c) {
        if (done[v]) return;  // rounding can make a reduced cost slightly negative
        const double nd = du + c + pot[u] - pot[v];
        if (nd < dist[v]) {
          dist[v] = nd;
          prev[v] = u;
        }
      };
      if (u == S) {
        for (int i = 0; i < n; ++i)
          if (supply[i] > tol) relax(i, 0.0);
      } else if (u < n) {
        for (int j = 0; j < m; ++j) relax(n + j, cost(u, j));
      } else if (u < n + m) {
        const int j = u - n;
        for (int i = 0; i < n; ++i)
          if (flow(i, j) > tol) relax(i, -cost(i, j));
        if (demand[j] > tol) relax(T, 0.0);
      }
    }
    if (dist[T] == inf) break;
    for (int v = 0; v < V; ++v)
      if (dist[v] < inf) pot[v] += dist[v];

    // Bottleneck along T <- col <- ... <- row <- S.
    double push = demand[prev[T] - n];
    int v = prev[T];
    while (prev[v] != S) {
      const int u = prev[v];
      if (u >= n) push = std::min(push, flow(v, u - n));  // reverse edge col u -> row v
      v = u;
    }
    push = std::min(push, supply[v]);
    supply[v] -= push;
    demand[prev[T] - n] -= push;
    v = prev[T];
    while (prev[v] != S) {
      const int u = prev[v];
      if (u < n)
        flow(u, v - n) += push;
      else
        flow(v, u - n) -= push;
      v = u;
    }
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (flow(i, j) > 0.0) total += flow(i, j) * cost(i, j);
  return total;
}

namespace {

double transport_beta(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double beta) {
  require(mu.dim() == nu.dim(), "w_beta: dimension mismatch");
  const std::size_t n = mu.size(), m = nu.size();
  const bool assignment = mu.uniform_weights() && nu.uniform_weights() && n == m;
  if (assignment) {
    if (n > kAssignmentLimit) throw CapacityError("w_beta: assignment limited to 2048 atoms");
  } else if (std::max(n, m) > kFlowLimit) {
    throw CapacityError("w_beta: min-cost flow limited to 512 atoms");
  }
  Mat cost(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double r = (mu.atom(i) - nu.atom(j)).norm();
      cost(i, j) = beta == 1.0 ? r : std::pow(r, beta);
    }
  if (assignment) return assignment_cost(cost) / static_cast<double>(n);
  return transport_cost(cost, mu.weights(), nu.weights());
}

}  // namespace

double w1_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) { return transport_beta(mu, nu, 1.0); }

double w_beta(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double beta) {
  require(beta > 0.0 && beta <= 2.0, "w_beta: beta must lie in (0,2]");
  const double c = transport_beta(mu, nu, beta);
  return beta >= 1.0 ? std::pow(c, 1.0 / beta) : c;
}

void write_csv(std::ostream& os, const EmpiricalMeasure& mu) {
  os << "w";
  for (int i = 0; i < mu.dim(); ++i) os << ",x" << i;
  os << "\n" << std::setprecision(17);
  for (std::size_t k = 0; k < mu.size(); ++k) {
    os << mu.weight(k);
    for (int i = 0; i < mu.dim(); ++i) os << "," << mu.atoms()(i, k);
    os << "\n";
  }
}

EmpiricalMeasure read_csv(std::istream& is) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), "read_csv: missing header");
  const int d = static_cast<int>(std::count(line.begin(), line.end(), ','));
  require(d >= 1, "read_csv: header must list coordinates");
  std::vector<double> w, x;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      (col == 0 ? w : x).push_back(std::stod(cell));
      ++col;
    }
    require(col == d + 1, "read_csv: ragged row");
  }
  Mat atoms(d, static_cast<Eigen::Index>(w.size()));
  for (std::size_t k = 0; k < w.size(); ++k)
    for (int i = 0; i < d; ++i) atoms(i, static_cast<Eigen::Index>(k)) = x[k * d + i];
  Vec weights = Eigen::Map<Vec>(w.data(), static_cast<Eigen::Index>(w.size()));
  return EmpiricalMeasure(std::move(atoms), std::move(weights));
}

}  // namespace levy
