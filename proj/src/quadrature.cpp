#include "levy/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Dense>

#include "levy/errors.hpp"

namespace levy {

Rule gauss_legendre(int n) {
  require(n >= 1, "gauss_legendre: n must be positive");
  static std::mutex mu;
  static std::map<int, Rule> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  Rule r;
  auto zeros = boost::math::legendre_p_zeros<double>(n);  // nonnegative zeros, ascending
  std::vector<double> pos;
  for (double z : zeros) pos.push_back(z);
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) {
    if (*it == 0.0) continue;
    r.nodes.push_back(-*it);
  }
  for (double z : pos) r.nodes.push_back(z);
  for (double x : r.nodes) {
    double dp = boost::math::legendre_p_prime(n, x);
    r.weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
  }
  cache.emplace(n, r);
  return r;
}

Rule gauss_legendre(int n, double a, double b) {
  Rule base = gauss_legendre(n);
  Rule r;
  double h = 0.5 * (b - a), c = 0.5 * (b + a);
  for (std::size_t k = 0; k < base.size(); ++k) {
    r.nodes.push_back(c + h * base.nodes[k]);
    r.weights.push_back(h * base.weights[k]);
  }
  return r;
}

Rule gauss_laguerre(int n) {
  require(n >= 1, "gauss_laguerre: n must be positive");
  // Golub-Welsch on the Jacobi matrix of the Laguerre recurrence.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    J(i, i) = 2.0 * i + 1.0;
    if (i + 1 < n) J(i, i + 1) = J(i + 1, i) = i + 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule r;
  for (int i = 0; i < n; ++i) {
    r.nodes.push_back(es.eigenvalues()(i));
    double v0 = es.eigenvectors()(0, i);
    r.weights.push_back(v0 * v0);
  }
  return r;
}

Rule midpoint_rule(int n, double t) {
  require(n >= 1, "midpoint_rule: n must be positive");
  Rule r;
  double h = t / n;
  for (int k = 0; k < n; ++k) {
    r.nodes.push_back((k + 0.5) * h);
    r.weights.push_back(h);
  }
  return r;
}

Rule radial_rule(double alpha, double a, double b, const RadialRuleOptions& opt) {
  require(a >= 0.0 && b > a && std::isfinite(b), "radial_rule: need 0 <= a < b < inf");
  Rule r;
  double lo = a;
  if (a == 0.0) {
    const double p = opt.closure_order;
    require(p > alpha, "radial_rule: closure order must exceed alpha");
    const double rc = std::min(opt.closure_radius, b);
    // g(rc) = P + Q, g(rc/2) = P 2^{-p} + Q 2^{-p-1}
    const double a11 = 1.0, a12 = 1.0, a21 = std::pow(2.0, -p), a22 = std::pow(2.0, -p - 1.0);
    const double det = a11 * a22 - a12 * a21;
    // [P,Q] = inv * [g1,g2]
    const double i11 = a22 / det, i12 = -a12 / det, i21 = -a21 / det, i22 = a11 / det;
    const double scale = std::pow(rc, -alpha);
    const double cP = scale / (p - alpha), cQ = scale / (p + 1.0 - alpha);
    r.nodes.push_back(rc);
    r.weights.push_back(cP * i11 + cQ * i21);
    r.nodes.push_back(0.5 * rc);
    r.weights.push_back(cP * i12 + cQ * i22);
    lo = rc;
  }
  if (b > lo) {
    const double s0 = std::log(lo), s1 = std::log(b);
    const int panels = std::max(1, static_cast<int>(std::ceil((s1 - s0) / opt.panel_width)));
    const double w = (s1 - s0) / panels;
    for (int k = 0; k < panels; ++k) {
      Rule gl = gauss_legendre(opt.nodes_per_panel, s0 + k * w, s0 + (k + 1) * w);
      for (std::size_t j = 0; j < gl.size(); ++j) {
        const double s = gl.nodes[j];
        r.nodes.push_back(std::exp(s));
        r.weights.push_back(gl.weights[j] * std::exp(-alpha * s));
      }
    }
  }
  return r;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double* err) {
  double e = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, rel_tol, &e);
  if (err) *err = e;
  return v;
}

}  // namespace levy
