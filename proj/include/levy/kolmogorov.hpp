#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "levy/density_fourier.hpp"
#include "levy/functionals.hpp"
#include "levy/mckv_sim.hpp"
#include "levy/quadrature.hpp"

namespace levy {

// Radial rules for the jump integrals, split at r = 1. Above `cap` an infinite cutoff is
// replaced by a tail bound.
struct GeneratorQuadrature {
  double alpha = 1.5;
  double trunc = kInf;
  double cap = 1e3;
  RadialRuleOptions options;
  Rule small;  // (0, min(1, trunc))
  Rule big;    // [1, min(trunc, cap))

  static GeneratorQuadrature make(double alpha, double trunc, const RadialRuleOptions& opt = {}, double cap = 1e3);
  GeneratorQuadrature refined() const;  // twice the nodes, half the panel width
  double upper() const { return std::min(trunc, cap); }
};

// A function on R^d with its gradient, e.g. v -> du/dm(mu)(v).
struct TestFunction {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
};

// sum over atoms w of int_0^1 [f(v + rB theta) - f(v) - r <grad f(v), B theta>] r^{-1-alpha} dr
// + int_1^trunc [f(v + rB theta) - f(v)] r^{-1-alpha} dr.
double jump_integral(const StableSpec& spec, const Mat& B, const GeneratorQuadrature& quad, const TestFunction& f,
                     const Vec& v);

// Drift of the OU dynamics, b(v, mu) = Av + A'M(mu) + B c, where c = -int_{1<=|z|<trunc} z dnu
// restores the compensation of the big jumps (the driver is a martingale).
Vec ou_drift(const OUModel& model, double trunc, const Vec& v, const Vec& mean);

// int [ <grad d(v), b(v, mu)> + jump_integral(d, v) ] dmu(v) for the flat derivative d.
double measure_generator(const OUModel& model, double trunc, const GeneratorQuadrature& quad,
                         const EmpiricalMeasure& mu, const TestFunction& flat);
// Same, with d = du/dm(mu).
double measure_generator(const OUModel& model, double trunc, const GeneratorQuadrature& quad,
                         const EmpiricalMeasure& mu, const Functional& u);

// Generator of the N-particle system applied to u^N at x (d x N); each particle carries
// its own noise.
double particle_generator(const OUModel& model, double trunc, const GeneratorQuadrature& quad, const Functional& u,
                          const Mat& x);

struct GapResult {
  double particle = 0.0;  // L u^N(x)
  double measure = 0.0;   // script-L u(empirical(x))
  double gap = 0.0;       // particle - measure
};
GapResult generator_gap(const OUModel& model, double trunc, const GeneratorQuadrature& quad, const Functional& u,
                        const Mat& x);

enum class Backend { Density, MonteCarlo };

struct SemigroupValue {
  double value = 0.0;
  double tolerance = 0.0;
};

// phi(t, mu) = u(law at time t of the OU McKean-Vlasov dynamics started from mu), d = 1.
// The density backend needs a linear u; the Monte Carlo backend takes any u.
class Semigroup {
 public:
  Semigroup(OUModel model, double trunc, FunctionalPtr u, Backend backend = Backend::Density,
            GridParams grid = default_grid(), std::size_t mc_samples = 20000, std::uint64_t seed = 1);

  static GridParams default_grid();

  const OUModel& model() const { return model_; }
  double trunc() const { return trunc_; }
  const Functional& functional() const { return *u_; }
  Backend backend() const { return backend_; }

  SemigroupValue phi(double t, const EmpiricalMeasure& mu) const;

  // g_t(c) = E phi0(c + Y_t) and its derivative -int phi0(c + y) d_y p(t, y) dy.
  double g(double t, double c) const;
  double g_prime(double t, double c) const;

  // Closed forms for linear u with the density backend:
  // d phi/dm (t, mu)(v) = g_t(e^{tA} v + K_t M) + K_t v int g_t'(e^{tA} x + K_t M) dmu(x).
  double flat_derivative(double t, const EmpiricalMeasure& mu, double v) const;
  double flat_derivative_grad(double t, const EmpiricalMeasure& mu, double v) const;
  TestFunction flat_derivative_function(double t, const EmpiricalMeasure& mu) const;

  // (d/dh) phi(t, (1-h) mu + h delta_v) at h = 0 by Richardson-extrapolated one-sided
  // differences: the flat derivative normalised to zero mu-mean. Works for any backend.
  double flat_derivative_fd(double t, const EmpiricalMeasure& mu, double v, double h = 1e-4) const;

  const DensityGrid& grid(double t) const;

 private:
  const LinearFunctional& linear() const;
  SemigroupValue phi_mc(double t, const EmpiricalMeasure& mu) const;

  OUModel model_;
  double trunc_;
  FunctionalPtr u_;
  Backend backend_;
  GridParams grid_params_;
  std::size_t mc_samples_;
  std::uint64_t seed_;
  mutable std::mutex mutex_;
  mutable std::map<double, std::shared_ptr<const DensityGrid>> grids_;
};

// script-L applied to phi(t, .) at mu through the closed-form flat derivative.
double semigroup_generator(const Semigroup& sg, const GeneratorQuadrature& quad, double t, const EmpiricalMeasure& mu);

struct PdePoint {
  double t = 0.0;          // time to go
  std::size_t measure = 0;
  double dphi_dt = 0.0;    // centred difference in t
  double generator = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;  // h^2 truncation estimate plus quadrature refinement change
};
struct PdeReport {
  std::vector<PdePoint> points;
  double max_residual = 0.0;
  bool pass = false;
};
// d/dt phi(t, mu) = script-L phi(t, .)(mu) on every (t, mu) of the grid.
PdeReport pde_residual(const Semigroup& sg, const GeneratorQuadrature& quad, const std::vector<double>& times,
                       const std::vector<EmpiricalMeasure>& measures, double h = 0.02);

struct ConstancyReport {
  std::vector<double> s;
  std::vector<double> values;  // phi(T - s, mu_s)
  double total_variation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};
// s -> phi(T - s, mu_s) along the exact flow mu_s from mu (linear u, density backend).
ConstancyReport flow_constancy(const Semigroup& sg, const EmpiricalMeasure& mu, int points = 16,
                               double tolerance = 1e-6);

}  // namespace levy
