#include "levy/functionals.hpp"

#include <cmath>
#include <sstream>

#include "levy/errors.hpp"
#include "levy/quadrature.hpp"

namespace levy {

// ---------------------------------------------------------------- defaults

Mat Functional::hess_d1(const EmpiricalMeasure&, const Vec&) const {
  throw UnsupportedFunctional(name() + ": second space derivative unavailable");
}

double Functional::flat_d2(const EmpiricalMeasure&, const Vec&, const Vec&) const {
  throw UnsupportedFunctional(name() + ": second flat derivative unavailable");
}

Mat Functional::cross_d2(const EmpiricalMeasure&, const Vec&, const Vec&) const {
  throw UnsupportedFunctional(name() + ": mixed derivative unavailable");
}

double Functional::eval_moved(const EmpiricalMeasure& mu, std::size_t k, const Vec& x) const {
  return eval(mu.with_atom(k, x)) - eval(mu);
}

// ---------------------------------------------------------------- scalar fields

ScalarField ScalarField::affine(Vec slope) {
  ScalarField f;
  f.kind = Kind::Affine;
  f.slope = std::move(slope);
  return f;
}

ScalarField ScalarField::soft_abs(int dim, double scale, Vec center) {
  ScalarField f;
  f.kind = Kind::SoftAbs;
  f.scale = scale;
  f.center = center.size() == 0 ? Vec::Zero(dim) : std::move(center);
  require(f.center.size() == dim, "ScalarField::soft_abs: center dimension mismatch");
  return f;
}

ScalarField ScalarField::constant_value(int dim, double c) {
  ScalarField f;
  f.kind = Kind::Constant;
  f.constant = c;
  f.slope = Vec::Zero(dim);
  return f;
}

ScalarField ScalarField::sine(double scale, double freq) {
  require(freq > 0.0, "ScalarField::sine: frequency must be positive");
  ScalarField f;
  f.kind = Kind::Sine;
  f.scale = scale;
  f.freq = freq;
  return f;
}

int ScalarField::dim() const {
  switch (kind) {
    case Kind::Affine:
    case Kind::Constant:
      return static_cast<int>(slope.size());
    case Kind::SoftAbs:
      return static_cast<int>(center.size());
    case Kind::Sine:
      return 1;
  }
  return 1;
}

double ScalarField::value(const Vec& x) const {
  switch (kind) {
    case Kind::Affine:
      return slope.dot(x);
    case Kind::Constant:
      return constant;
    case Kind::SoftAbs: {
      const Vec u = x - center;
      return scale * x.dot(x - 2.0 * center) / (std::sqrt(1.0 + u.squaredNorm()) + std::sqrt(1.0 + center.squaredNorm()));
    }
    case Kind::Sine:
      return scale * std::sin(freq * x(0)) / freq;
  }
  return 0.0;
}

Vec ScalarField::grad(const Vec& x) const {
  switch (kind) {
    case Kind::Affine:
      return slope;
    case Kind::Constant:
      return Vec::Zero(x.size());
    case Kind::SoftAbs: {
      const Vec u = x - center;
      return scale * u / std::sqrt(1.0 + u.squaredNorm());
    }
    case Kind::Sine:
      return Vec::Constant(1, scale * std::cos(freq * x(0)));
  }
  return Vec();
}

Mat ScalarField::hess(const Vec& x) const {
  const auto d = x.size();
  switch (kind) {
    case Kind::Affine:
    case Kind::Constant:
      return Mat::Zero(d, d);
    case Kind::SoftAbs: {
      const Vec u = x - center;
      const double q = 1.0 + u.squaredNorm();
      return scale * (Mat::Identity(d, d) * q - u * u.transpose()) / (q * std::sqrt(q));
    }
    case Kind::Sine:
      return Mat::Constant(1, 1, -scale * freq * std::sin(freq * x(0)));
  }
  return Mat();
}

double ScalarField::lipschitz() const {
  switch (kind) {
    case Kind::Affine:
      return slope.norm();
    case Kind::Constant:
      return 0.0;
    case Kind::SoftAbs:
    case Kind::Sine:
      return std::abs(scale);
  }
  return 0.0;
}

double ScalarField::growth_order() const {
  switch (kind) {
    case Kind::Affine:
    case Kind::SoftAbs:
      return 1.0;
    case Kind::Constant:
    case Kind::Sine:
      return 0.0;
  }
  return 1.0;
}

std::string ScalarField::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Affine:
      os << "affine";
      break;
    case Kind::Constant:
      os << "constant(" << constant << ")";
      break;
    case Kind::SoftAbs:
      os << "soft_abs(scale=" << scale << ")";
      break;
    case Kind::Sine:
      os << "sine(scale=" << scale << ",freq=" << freq << ")";
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------- linear

double LinearFunctional::eval(const EmpiricalMeasure& mu) const {
  double s = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) s += mu.weight(k) * phi_.value(mu.atom(k));
  return s;
}

double LinearFunctional::eval_moved(const EmpiricalMeasure& mu, std::size_t k, const Vec& x) const {
  return mu.weight(k) * (phi_.value(x) - phi_.value(mu.atom(k)));
}

// ---------------------------------------------------------------- smoothed power

namespace {

double smoothstep(double y) {
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  return y * y * y * (10.0 + y * (-15.0 + 6.0 * y));
}
double smoothstep_d1(double y) {
  if (y <= 0.0 || y >= 1.0) return 0.0;
  return 30.0 * y * y * (1.0 - y) * (1.0 - y);
}
double smoothstep_d2(double y) {
  if (y <= 0.0 || y >= 1.0) return 0.0;
  return 60.0 * y * (1.0 - y) * (1.0 - 2.0 * y);
}

}  // namespace

double SmoothedPowerFunctional::chi(double v, double eps) { return smoothstep((std::abs(v) - eps) / eps); }

double SmoothedPowerFunctional::chi_d1(double v, double eps) {
  const double s = v < 0 ? -1.0 : 1.0;
  return s * smoothstep_d1((std::abs(v) - eps) / eps) / eps;
}

double SmoothedPowerFunctional::chi_d2(double v, double eps) {
  return smoothstep_d2((std::abs(v) - eps) / eps) / (eps * eps);
}

SmoothedPowerFunctional::SmoothedPowerFunctional(double beta, double eps) : beta_(beta), eps_(eps) {
  require(beta > 0.0 && beta <= 2.0, "SmoothedPower: beta must lie in (0,2]");
  require(eps > 0.0, "SmoothedPower: eps must be positive");
  if (beta > 1.0) {
    lipschitz_ = std::numeric_limits<double>::infinity();
  } else {
    // Past 2 eps the slope beta |v|^{beta-1} only decreases.
    lipschitz_ = 0.0;
    for (int k = 0; k <= 4000; ++k) lipschitz_ = std::max(lipschitz_, std::abs(deriv(eps * (1.0 + k / 4000.0))));
    lipschitz_ *= 1.0 + 1e-6;
  }
}

double SmoothedPowerFunctional::value(double v) const {
  const double a = std::abs(v);
  if (a <= eps_) return 0.0;
  return std::pow(a, beta_) * chi(v, eps_);
}

double SmoothedPowerFunctional::deriv(double v) const {
  const double a = std::abs(v);
  if (a <= eps_) return 0.0;
  const double s = v < 0 ? -1.0 : 1.0;
  return beta_ * s * std::pow(a, beta_ - 1.0) * chi(v, eps_) + std::pow(a, beta_) * chi_d1(v, eps_);
}

double SmoothedPowerFunctional::deriv2(double v) const {
  const double a = std::abs(v);
  if (a <= eps_) return 0.0;
  const double s = v < 0 ? -1.0 : 1.0;
  return beta_ * (beta_ - 1.0) * std::pow(a, beta_ - 2.0) * chi(v, eps_) +
         2.0 * beta_ * s * std::pow(a, beta_ - 1.0) * chi_d1(v, eps_) + std::pow(a, beta_) * chi_d2(v, eps_);
}

double SmoothedPowerFunctional::eval(const EmpiricalMeasure& mu) const {
  require(mu.dim() == 1, "SmoothedPower: one-dimensional measures only");
  double s = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) s += mu.weight(k) * value(mu.atoms()(0, k));
  return s;
}

double SmoothedPowerFunctional::eval_moved(const EmpiricalMeasure& mu, std::size_t k, const Vec& x) const {
  return mu.weight(k) * (value(x(0)) - value(mu.atoms()(0, k)));
}

// ---------------------------------------------------------------- quadratic

QuadraticFunctional::QuadraticFunctional(int dim, double scale, Vec shift)
    : dim_(dim), scale_(scale), shift_(shift.size() == 0 ? Vec::Zero(dim) : std::move(shift)) {
  require(dim >= 1, "Quadratic: dimension must be positive");
  require(scale >= 0.0, "Quadratic: scale must be nonnegative");
  require(shift_.size() == dim, "Quadratic: shift dimension mismatch");
}

double QuadraticFunctional::psi(const Vec& z) const {
  const Vec u = z - shift_;
  return scale_ * z.dot(z - 2.0 * shift_) / (std::sqrt(1.0 + u.squaredNorm()) + std::sqrt(1.0 + shift_.squaredNorm()));
}

Vec QuadraticFunctional::psi_grad(const Vec& z) const {
  const Vec u = z - shift_;
  return scale_ * u / std::sqrt(1.0 + u.squaredNorm());
}

Mat QuadraticFunctional::psi_hess(const Vec& z) const {
  const Vec u = z - shift_;
  const double q = 1.0 + u.squaredNorm();
  return scale_ * (Mat::Identity(dim_, dim_) * q - u * u.transpose()) / (q * std::sqrt(q));
}

double QuadraticFunctional::eval(const EmpiricalMeasure& mu) const {
  double s = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    double row = 0.0;
    for (std::size_t l = 0; l < mu.size(); ++l) row += mu.weight(l) * psi(mu.atom(j) - mu.atom(l));
    s += mu.weight(j) * row;
  }
  return s;
}

double QuadraticFunctional::flat_d1(const EmpiricalMeasure& mu, const Vec& v) const {
  double s = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) s += mu.weight(j) * sym(v - mu.atom(j));
  return s;
}

Vec QuadraticFunctional::grad_d1(const EmpiricalMeasure& mu, const Vec& v) const {
  Vec g = Vec::Zero(dim_);
  for (std::size_t j = 0; j < mu.size(); ++j) g += mu.weight(j) * sym_grad(v - mu.atom(j));
  return g;
}

Mat QuadraticFunctional::hess_d1(const EmpiricalMeasure& mu, const Vec& v) const {
  Mat h = Mat::Zero(dim_, dim_);
  for (std::size_t j = 0; j < mu.size(); ++j) h += mu.weight(j) * sym_hess(v - mu.atom(j));
  return h;
}

double QuadraticFunctional::eval_moved(const EmpiricalMeasure& mu, std::size_t k, const Vec& x) const {
  const Vec xk = mu.atom(k);
  double s = 0.0;
  for (std::size_t l = 0; l < mu.size(); ++l) {
    if (l == k) continue;
    const Vec xl = mu.atom(l);
    s += mu.weight(l) * (sym(x - xl) - sym(xk - xl));
  }
  return mu.weight(k) * s;
}

// ---------------------------------------------------------------- factories and checks

FunctionalPtr make_linear(ScalarField phi) { return std::make_shared<LinearFunctional>(std::move(phi)); }
FunctionalPtr make_smoothed_power(double beta, double eps) {
  return std::make_shared<SmoothedPowerFunctional>(beta, eps);
}
FunctionalPtr make_quadratic(int dim, double scale, Vec shift) {
  return std::make_shared<QuadraticFunctional>(dim, scale, std::move(shift));
}

double flat_derivative_identity_residual(const Functional& u, const EmpiricalMeasure& mu,
                                         const EmpiricalMeasure& nu, int t_nodes) {
  const Rule gl = gauss_legendre(t_nodes, 0.0, 1.0);
  double integral = 0.0;
  for (std::size_t q = 0; q < gl.size(); ++q) {
    const EmpiricalMeasure m = EmpiricalMeasure::mixture(mu, gl.nodes[q], nu);
    double s = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) s += mu.weight(k) * u.flat_d1(m, mu.atom(k));
    for (std::size_t k = 0; k < nu.size(); ++k) s -= nu.weight(k) * u.flat_d1(m, nu.atom(k));
    integral += gl.weights[q] * s;
  }
  return std::abs(u.eval(mu) - u.eval(nu) - integral);
}

Vec empirical_projection_grad(const Functional& u, const Mat& x, std::size_t i) {
  require(i < static_cast<std::size_t>(x.cols()), "empirical_projection_grad: index out of range");
  const EmpiricalMeasure mu(x);
  return u.grad_d1(mu, x.col(static_cast<Eigen::Index>(i))) / static_cast<double>(x.cols());
}

Mat empirical_projection_hess(const Functional& u, const Mat& x, std::size_t i, std::size_t j) {
  const auto n = static_cast<std::size_t>(x.cols());
  require(i < n && j < n, "empirical_projection_hess: index out of range");
  if (!u.has_second_order()) throw UnsupportedFunctional(u.name() + ": second derivatives unavailable");
  const EmpiricalMeasure mu(x);
  const double N = static_cast<double>(n);
  const Vec xi = x.col(static_cast<Eigen::Index>(i)), xj = x.col(static_cast<Eigen::Index>(j));
  Mat h = u.cross_d2(mu, xi, xj) / (N * N);
  if (i == j) h += u.hess_d1(mu, xj) / N;
  return h;
}

}  // namespace levy
