#pragma once

#include <functional>
#include <vector>

namespace levy {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre on [-1,1] and mapped to [a,b].
Rule gauss_legendre(int n);
Rule gauss_legendre(int n, double a, double b);

// Gauss-Laguerre for the weight e^{-x} on [0, inf).
Rule gauss_laguerre(int n);

// Composite midpoint nodes on [0,t].
Rule midpoint_rule(int n, double t);

struct RadialRuleOptions {
  int nodes_per_panel = 8;
  double panel_width = 0.5;       // panel length in ln r
  double closure_radius = 1e-3;   // below this radius the integrand is extrapolated
  int closure_order = 2;          // leading power of g near r = 0
};

// Fixed rule with sum_k w_k g(r_k) ~ int_a^b g(r) r^{-1-alpha} dr for 0 <= a < b < inf.
// For a == 0 the piece [0, r_c] is closed by fitting g(r) = P (r/r_c)^p + Q (r/r_c)^{p+1}
// through g(r_c) and g(r_c/2), which needs p > alpha.
Rule radial_rule(double alpha, double a, double b, const RadialRuleOptions& opt = {});

// Adaptive Gauss-Kronrod on a finite interval; err receives the estimate.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-12, double* err = nullptr);

}  // namespace levy
