#pragma once

#include <map>
#include <memory>
#include <string>

#include "levy/measures.hpp"
#include "levy/types.hpp"

namespace levy {

// A measure functional u with its linear (flat) derivatives.
class Functional {
 public:
  virtual ~Functional() = default;

  virtual std::string name() const = 0;
  virtual double eval(const EmpiricalMeasure& mu) const = 0;
  virtual double flat_d1(const EmpiricalMeasure& mu, const Vec& v) const = 0;  // du/dm(mu)(v)
  virtual Vec grad_d1(const EmpiricalMeasure& mu, const Vec& v) const = 0;     // d_v du/dm(mu)(v)

  // Second-order data. Defaults throw UnsupportedFunctional.
  virtual bool has_second_order() const { return false; }
  virtual Mat hess_d1(const EmpiricalMeasure& mu, const Vec& v) const;                  // d_v^2 du/dm
  virtual double flat_d2(const EmpiricalMeasure& mu, const Vec& v, const Vec& w) const;  // d^2u/dm^2(v,w)
  // Entry (a,b) is d_{w_b} of the flat derivative of d_{v_a} du/dm.
  virtual Mat cross_d2(const EmpiricalMeasure& mu, const Vec& v, const Vec& w) const;

  // u(mu with atom k moved to x) - u(mu).
  virtual double eval_moved(const EmpiricalMeasure& mu, std::size_t k, const Vec& x) const;

  // True when du/dm(mu)(v) does not depend on mu.
  virtual bool measure_independent() const { return false; }

  virtual double lipschitz_d1() const = 0;
  virtual double lipschitz_d2() const { return 0.0; }
  // |du/dm(mu)(v)| <= C (1 + |v|^order).
  virtual double growth_order() const = 0;

  bool class_c() const { return lipschitz_d1() <= 1.0 && lipschitz_d2() <= 1.0; }
};

using FunctionalPtr = std::shared_ptr<const Functional>;

// Test function phi for linear functionals u(mu) = int phi dmu.
struct ScalarField {
  enum class Kind { Affine, SoftAbs, Constant, Sine };
  Kind kind = Kind::SoftAbs;
  Vec slope;         // Affine: phi(x) = <slope, x>
  double scale = 1;  // SoftAbs: scale (sqrt(1+|x-c|^2) - sqrt(1+|c|^2)); Sine: scale sin(freq x_0) / freq
  Vec center;
  double freq = 1;
  double constant = 0;

  static ScalarField affine(Vec slope);
  static ScalarField soft_abs(int dim, double scale = 1.0, Vec center = Vec());
  static ScalarField constant_value(int dim, double c);
  static ScalarField sine(double scale, double freq);

  int dim() const;
  double value(const Vec& x) const;
  Vec grad(const Vec& x) const;
  Mat hess(const Vec& x) const;
  double lipschitz() const;
  double growth_order() const;
  std::string describe() const;
};

class LinearFunctional : public Functional {
 public:
  explicit LinearFunctional(ScalarField phi) : phi_(std::move(phi)) {}
  std::string name() const override { return "linear"; }
  double eval(const EmpiricalMeasure& mu) const override;
  double flat_d1(const EmpiricalMeasure&, const Vec& v) const override { return phi_.value(v); }
  Vec grad_d1(const EmpiricalMeasure&, const Vec& v) const override { return phi_.grad(v); }
  bool has_second_order() const override { return true; }
  Mat hess_d1(const EmpiricalMeasure&, const Vec& v) const override { return phi_.hess(v); }
  double flat_d2(const EmpiricalMeasure&, const Vec&, const Vec&) const override { return 0.0; }
  Mat cross_d2(const EmpiricalMeasure&, const Vec& v, const Vec&) const override {
    return Mat::Zero(v.size(), v.size());
  }
  double eval_moved(const EmpiricalMeasure& mu, std::size_t k, const Vec& x) const override;
  bool measure_independent() const override { return true; }
  double lipschitz_d1() const override { return phi_.lipschitz(); }
  double growth_order() const override { return phi_.growth_order(); }
  const ScalarField& field() const { return phi_; }

 private:
  ScalarField phi_;
};

// u(mu) = int |x|^beta chi_eps(x) dmu in d = 1. chi_eps is the quintic smoothstep
// S(y) = 6y^5 - 15y^4 + 10y^3 in y = (|x| - eps)/eps: zero on [-eps, eps], one off [-2eps, 2eps].
class SmoothedPowerFunctional : public Functional {
 public:
  SmoothedPowerFunctional(double beta, double eps);
  std::string name() const override { return "smoothed_power"; }
  double eval(const EmpiricalMeasure& mu) const override;
  double flat_d1(const EmpiricalMeasure&, const Vec& v) const override { return value(v(0)); }
  Vec grad_d1(const EmpiricalMeasure&, const Vec& v) const override { return Vec::Constant(1, deriv(v(0))); }
  bool has_second_order() const override { return true; }
  Mat hess_d1(const EmpiricalMeasure&, const Vec& v) const override { return Mat::Constant(1, 1, deriv2(v(0))); }
  double flat_d2(const EmpiricalMeasure&, const Vec&, const Vec&) const override { return 0.0; }
  Mat cross_d2(const EmpiricalMeasure&, const Vec&, const Vec&) const override { return Mat::Zero(1, 1); }
  double eval_moved(const EmpiricalMeasure& mu, std::size_t k, const Vec& x) const override;
  bool measure_independent() const override { return true; }
  double lipschitz_d1() const override { return lipschitz_; }
  double growth_order() const override { return beta_; }

  double value(double v) const;
  double deriv(double v) const;
  double deriv2(double v) const;
  double beta() const { return beta_; }
  double eps() const { return eps_; }

  static double chi(double v, double eps);
  static double chi_d1(double v, double eps);
  static double chi_d2(double v, double eps);

 private:
  double beta_, eps_, lipschitz_;
};

// u(mu) = int int psi(x - y) dmu(x) dmu(y) with
// psi(z) = scale (sqrt(1+|z-a|^2) - sqrt(1+|a|^2)).
class QuadraticFunctional : public Functional {
 public:
  QuadraticFunctional(int dim, double scale, Vec shift = Vec());
  std::string name() const override { return "quadratic"; }
  double eval(const EmpiricalMeasure& mu) const override;
  double flat_d1(const EmpiricalMeasure& mu, const Vec& v) const override;
  Vec grad_d1(const EmpiricalMeasure& mu, const Vec& v) const override;
  bool has_second_order() const override { return true; }
  Mat hess_d1(const EmpiricalMeasure& mu, const Vec& v) const override;
  double flat_d2(const EmpiricalMeasure&, const Vec& v, const Vec& w) const override { return sym(v - w); }
  Mat cross_d2(const EmpiricalMeasure&, const Vec& v, const Vec& w) const override { return -sym_hess(v - w); }
  double eval_moved(const EmpiricalMeasure& mu, std::size_t k, const Vec& x) const override;
  double lipschitz_d1() const override { return 2.0 * scale_; }
  double lipschitz_d2() const override { return 2.0 * std::sqrt(2.0) * scale_; }
  double growth_order() const override { return 1.0; }

  double psi(const Vec& z) const;
  Vec psi_grad(const Vec& z) const;
  Mat psi_hess(const Vec& z) const;
  double sym(const Vec& z) const { return psi(z) + psi(-z); }
  Vec sym_grad(const Vec& z) const { return psi_grad(z) - psi_grad(-z); }
  Mat sym_hess(const Vec& z) const { return psi_hess(z) + psi_hess(-z); }

 private:
  int dim_;
  double scale_;
  Vec shift_;
};

FunctionalPtr make_linear(ScalarField phi);
FunctionalPtr make_smoothed_power(double beta, double eps);
FunctionalPtr make_quadratic(int dim, double scale, Vec shift = Vec());

// |u(mu) - u(nu) - int_0^1 int du/dm(t mu + (1-t) nu) d(mu - nu) dt| with Gauss-Legendre in t.
double flat_derivative_identity_residual(const Functional& u, const EmpiricalMeasure& mu,
                                         const EmpiricalMeasure& nu, int t_nodes);

// Derivatives of the empirical projection u^N(x_1..x_N) = u(N^{-1} sum delta_{x_k}); x is d x N.
Vec empirical_projection_grad(const Functional& u, const Mat& x, std::size_t i);
Mat empirical_projection_hess(const Functional& u, const Mat& x, std::size_t i, std::size_t j);

}  // namespace levy
