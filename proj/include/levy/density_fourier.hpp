#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "levy/mckv_sim.hpp"
#include "levy/types.hpp"

namespace levy {

// lambda -> E exp(i <lambda, Y_t>) for Y_t = int_0^t e^{(t-s)A} B dZ_s with the noise
// truncated at `trunc`, i.e. exp(int_0^t psi_trunc(B^T e^{sA^T} lambda) ds).
class CharFunction {
 public:
  CharFunction(const OUModel& model, double trunc, double t, int s_nodes = 48);
  cplx operator()(const Vec& lambda) const;
  cplx at(double lambda) const;  // d = 1
  double t() const { return t_; }
  double trunc() const { return spec_.trunc; }
  int dim() const { return spec_.dim(); }

 private:
  StableSpec spec_;
  RadialSymbol rs_;
  double t_;
  std::vector<Mat> maps_;  // B^T e^{s_k A^T}
  std::vector<double> weights_;
};

// Smallest eta with |phi(lambda)| <= exp(-t eta min(|lambda|^alpha, |lambda|^2)) on a
// log-spaced grid of |lambda| in [lo, hi], fitted as the minimum ratio.
double fit_decay_rate(const CharFunction& cf, double alpha, double lo = 0.1, double hi = 50.0, int points = 200);

// Power-law tails p(y) ~ c_plus y^{-1-alpha} (y -> +inf), c_minus |y|^{-1-alpha} (y -> -inf).
// Zero when the noise is truncated.
struct TailModel {
  double alpha = 1.5;
  double c_plus = 0.0;
  double c_minus = 0.0;
  bool heavy() const { return c_plus > 0.0 || c_minus > 0.0; }
};
TailModel tail_model(const OUModel& model, double trunc, double t);

struct GridParams {
  int log2_n = 0;               // 0: chosen from the decay of the characteristic function
  double oversample = 16.0;     // zero padding beyond the cutoff frequency, for interpolation
  double half_width = 0.0;      // 0: extent_factor (t^{1/alpha}-scale 0.9999 quantile + shift_cover)
  double extent_factor = 4.0;
  double shift_cover = 0.0;     // largest |shift| that flow_density will request
  double alias_threshold = 1e-7;  // boundary density relative to the peak
  int s_nodes = 48;
};

// Density of Y_t on the periodic grid x_j = -L + j dx, j < n, with spectral derivatives.
class DensityGrid {
 public:
  DensityGrid(double t, double half_width, std::vector<double> p, std::vector<double> dp, std::vector<double> d2p,
              TailModel tail);

  double t() const { return t_; }
  double half_width() const { return half_width_; }
  double dx() const { return dx_; }
  std::size_t size() const { return p_.size(); }
  double x(std::size_t j) const { return -half_width_ + static_cast<double>(j) * dx_; }
  const std::vector<double>& p() const { return p_; }
  const std::vector<double>& dp() const { return dp_; }
  const std::vector<double>& d2p() const { return d2p_; }
  const TailModel& tail() const { return tail_; }

  double mass() const;
  // Cubic B-spline interpolation; zero outside the grid.
  double value(double y) const;
  double deriv(double y) const;
  // sum_j dx f(shift + x_j) p_j, plus the analytic correction for mass beyond the grid
  // when the tails are heavy: the periodic grid density folds the far tails back inside.
  double expect(const std::function<double(double)>& f, double shift = 0.0) const;
  // Same sum without the tail correction.
  double expect_on_grid(const std::function<double(double)>& f, double shift = 0.0) const;
  // int |x|^gamma |d^order p| dx by the rectangle rule on the grid.
  double weighted_abs_integral(double gamma, int order) const;

 private:
  double t_, half_width_, dx_;
  std::vector<double> p_, dp_, d2p_;
  TailModel tail_;
  struct Splines;
  std::shared_ptr<const Splines> splines_;
};

// d = 1 only. Throws GridTooSmall when the boundary density exceeds the alias threshold.
DensityGrid invert_density(const OUModel& model, double trunc, double t, const GridParams& params = {});

// Centered difference (p(t+h) - p(t-h)) / 2h on the grid of `at`.
std::vector<double> density_time_derivative(const OUModel& model, double trunc, const DensityGrid& at, double h,
                                            const GridParams& params = {});

struct MomentFit {
  std::vector<double> times;
  std::vector<double> integrals;
  double slope = 0.0;
  double expected = 0.0;        // (gamma - order) / alpha
  double min_ratio = 0.0;       // integral / t^{expected}
  double max_ratio = 0.0;
  bool pass = false;            // slope >= expected - tol and bounded ratios
};
MomentFit moment_estimate_check(const std::vector<DensityGrid>& grids, double alpha, double gamma, int order,
                                double tol = 0.05);

// q(mu, t, y) = sum_k w_k p(t, y - e^{tA} x_k - K_t M(mu)) at each y.
std::vector<double> flow_density(const DensityGrid& grid, const OUModel& model, const EmpiricalMeasure& mu,
                                 const std::vector<double>& ys);

}  // namespace levy
