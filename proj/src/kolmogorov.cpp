#include "levy/kolmogorov.hpp"

#include <algorithm>
#include <cmath>

#include "levy/errors.hpp"
#include "levy/stats.hpp"

namespace levy {

// ---------------------------------------------------------------- quadrature

GeneratorQuadrature GeneratorQuadrature::make(double alpha, double trunc, const RadialRuleOptions& opt, double cap) {
  require(trunc > 0.0 && cap > 1.0, "GeneratorQuadrature: need trunc > 0 and cap > 1");
  GeneratorQuadrature q;
  q.alpha = alpha;
  q.trunc = trunc;
  q.cap = cap;
  q.options = opt;
  q.small = radial_rule(alpha, 0.0, std::min(1.0, trunc), opt);
  if (q.upper() > 1.0) q.big = radial_rule(alpha, 1.0, q.upper(), opt);
  return q;
}

GeneratorQuadrature GeneratorQuadrature::refined() const {
  RadialRuleOptions opt = options;
  opt.nodes_per_panel *= 2;
  opt.panel_width *= 0.5;
  return make(alpha, trunc, opt, cap);
}

double jump_integral(const StableSpec& spec, const Mat& B, const GeneratorQuadrature& quad, const TestFunction& f,
                     const Vec& v) {
  const double f0 = f.value(v);
  const Vec g0 = f.grad(v);
  double acc = 0.0;
  for (const auto& atom : spec.spectral.atoms()) {
    const Vec dir = B * atom.theta;
    const double slope = g0.dot(dir);
    double part = 0.0;
    for (std::size_t k = 0; k < quad.small.size(); ++k) {
      const double r = quad.small.nodes[k];
      part += quad.small.weights[k] * (f.value(v + r * dir) - f0 - r * slope);
    }
    for (std::size_t k = 0; k < quad.big.size(); ++k) {
      const double r = quad.big.nodes[k];
      part += quad.big.weights[k] * (f.value(v + r * dir) - f0);
    }
    acc += atom.weight * part;
  }
  return acc;
}

Vec ou_drift(const OUModel& model, double trunc, const Vec& v, const Vec& mean) {
  Vec b = model.flow.A * v + model.flow.Aprime * mean;
  const double level = std::min(trunc, model.noise.trunc);
  if (level > 1.0 && !model.noise.symmetric) b -= model.flow.B * levy_annulus_drift(model.noise, 1.0, level);
  return b;
}

double measure_generator(const OUModel& model, double trunc, const GeneratorQuadrature& quad,
                         const EmpiricalMeasure& mu, const TestFunction& flat) {
  require(std::min(trunc, model.noise.trunc) == quad.trunc, "measure_generator: quadrature built for another level");
  const Vec m = mu.mean();
  std::vector<double> terms(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const Vec v = mu.atom(k);
    terms[k] = mu.weight(k) * (flat.grad(v).dot(ou_drift(model, trunc, v, m)) +
                               jump_integral(model.noise, model.flow.B, quad, flat, v));
  }
  return pairwise_sum(terms.data(), terms.size());
}

double measure_generator(const OUModel& model, double trunc, const GeneratorQuadrature& quad,
                         const EmpiricalMeasure& mu, const Functional& u) {
  TestFunction flat{[&](const Vec& v) { return u.flat_d1(mu, v); }, [&](const Vec& v) { return u.grad_d1(mu, v); }};
  return measure_generator(model, trunc, quad, mu, flat);
}

double particle_generator(const OUModel& model, double trunc, const GeneratorQuadrature& quad, const Functional& u,
                          const Mat& x) {
  require(std::min(trunc, model.noise.trunc) == quad.trunc, "particle_generator: quadrature built for another level");
  const EmpiricalMeasure mu(x);
  const Vec m = mu.mean();
  const auto N = static_cast<std::size_t>(x.cols());
  std::vector<double> terms(N);
  for (std::size_t i = 0; i < N; ++i) {
    const Vec xi = x.col(static_cast<Eigen::Index>(i));
    const Vec grad = empirical_projection_grad(u, x, i);
    // u^N along particle i: y -> u^N(x with x_i replaced by y) - u^N(x).
    TestFunction along{[&](const Vec& y) { return u.eval_moved(mu, i, y); }, [&](const Vec&) { return grad; }};
    terms[i] = grad.dot(ou_drift(model, trunc, xi, m)) + jump_integral(model.noise, model.flow.B, quad, along, xi);
  }
  return pairwise_sum(terms.data(), terms.size());
}

GapResult generator_gap(const OUModel& model, double trunc, const GeneratorQuadrature& quad, const Functional& u,
                        const Mat& x) {
  if (!u.has_second_order()) throw UnsupportedFunctional(u.name() + ": generator gap needs second flat derivatives");
  require(std::isfinite(std::min(trunc, model.noise.trunc)), "generator_gap: the Levy measure must be truncated");
  GapResult r;
  r.particle = particle_generator(model, trunc, quad, u, x);
  r.measure = measure_generator(model, trunc, quad, EmpiricalMeasure(x), u);
  r.gap = r.particle - r.measure;
  return r;
}

// ---------------------------------------------------------------- semigroup

GridParams Semigroup::default_grid() {
  GridParams gp;
  gp.oversample = 4.0;
  return gp;
}

Semigroup::Semigroup(OUModel model, double trunc, FunctionalPtr u, Backend backend, GridParams grid,
                     std::size_t mc_samples, std::uint64_t seed)
    : model_(std::move(model)),
      trunc_(std::min(trunc, model_.noise.trunc)),
      u_(std::move(u)),
      backend_(backend),
      grid_params_(grid),
      mc_samples_(mc_samples),
      seed_(seed) {
  require(model_.dim() == 1, "Semigroup: one-dimensional model required");
  require(u_ != nullptr, "Semigroup: null functional");
  if (backend_ == Backend::Density && dynamic_cast<const LinearFunctional*>(u_.get()) == nullptr)
    throw UnsupportedFunctional("Semigroup: the density backend needs a linear functional");
  require(mc_samples_ >= 16, "Semigroup: need at least 16 Monte Carlo samples");
}

const LinearFunctional& Semigroup::linear() const {
  const auto* lin = dynamic_cast<const LinearFunctional*>(u_.get());
  if (lin == nullptr) throw UnsupportedFunctional("Semigroup: closed forms need a linear functional");
  return *lin;
}

const DensityGrid& Semigroup::grid(double t) const {
  require(t > 0.0, "Semigroup::grid: t must be positive");
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = grids_.find(t);
  if (it == grids_.end())
    it = grids_.emplace(t, std::make_shared<const DensityGrid>(invert_density(model_, trunc_, t, grid_params_))).first;
  return *it->second;
}

double Semigroup::g(double t, double c) const {
  const ScalarField& phi0 = linear().field();
  if (t == 0.0) return phi0.value(Vec::Constant(1, c));
  return grid(t).expect([&](double y) { return phi0.value(Vec::Constant(1, y)); }, c);
}

double Semigroup::g_prime(double t, double c) const {
  const ScalarField& phi0 = linear().field();
  if (t == 0.0) return phi0.grad(Vec::Constant(1, c))(0);
  const DensityGrid& gr = grid(t);
  std::vector<double> terms(gr.size());
  for (std::size_t j = 0; j < gr.size(); ++j) terms[j] = phi0.value(Vec::Constant(1, c + gr.x(j))) * gr.dp()[j];
  return -gr.dx() * pairwise_sum(terms.data(), terms.size());
}

SemigroupValue Semigroup::phi(double t, const EmpiricalMeasure& mu) const {
  require(t >= 0.0 && t <= model_.T + 1e-12, "Semigroup::phi: t must lie in [0, T]");
  require(mu.dim() == 1, "Semigroup::phi: one-dimensional measure required");
  if (t == 0.0) return {u_->eval(mu), 0.0};
  if (backend_ == Backend::MonteCarlo) return phi_mc(t, mu);
  const double e = std::exp(model_.flow.A(0, 0) * t);
  const double km = coupling_kernel(model_.flow, t)(0, 0) * mu.mean()(0);
  std::vector<double> terms(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) terms[k] = mu.weight(k) * g(t, e * mu.atom(k)(0) + km);
  // Rectangle-rule error on the periodic grid is far below this floor.
  return {pairwise_sum(terms.data(), terms.size()), 1e-9};
}

SemigroupValue Semigroup::phi_mc(double t, const EmpiricalMeasure& mu) const {
  OUModel noise_only = model_;
  noise_only.mu0 = InitialLaw::point_mass(Vec::Zero(1));
  noise_only.T = t;
  const EmpiricalMeasure ys = sample_limit_law(noise_only, trunc_, mc_samples_, seed_);
  const double e = std::exp(model_.flow.A(0, 0) * t);
  const double km = coupling_kernel(model_.flow, t)(0, 0) * mu.mean()(0);
  // Stratified atom choice: sample j starts from the atom holding quantile (j + 1/2)/M of mu.
  std::vector<double> cum(mu.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) cum[k] = (acc += mu.weight(k));
  const std::size_t M = mc_samples_;
  Mat pts(1, static_cast<Eigen::Index>(M));
  for (std::size_t j = 0; j < M; ++j) {
    const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(M) * acc;
    const std::size_t k = std::min<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin(), mu.size() - 1);
    pts(0, static_cast<Eigen::Index>(j)) = e * mu.atom(k)(0) + km + ys.atom(j)(0);
  }
  // Batches give the spread; the full sample gives the value.
  constexpr int kBatches = 8;
  std::vector<double> batch;
  const std::size_t per = M / kBatches;
  for (int b = 0; b < kBatches; ++b) {
    Mat part(1, static_cast<Eigen::Index>(per));
    for (std::size_t j = 0; j < per; ++j) part(0, static_cast<Eigen::Index>(j)) = pts(0, static_cast<Eigen::Index>(b + kBatches * j));
    batch.push_back(u_->eval(EmpiricalMeasure(part)));
  }
  return {u_->eval(EmpiricalMeasure(pts)), 3.0 * std_error(batch)};
}

double Semigroup::flat_derivative(double t, const EmpiricalMeasure& mu, double v) const {
  return flat_derivative_function(t, mu).value(Vec::Constant(1, v));
}

double Semigroup::flat_derivative_grad(double t, const EmpiricalMeasure& mu, double v) const {
  return flat_derivative_function(t, mu).grad(Vec::Constant(1, v))(0);
}

TestFunction Semigroup::flat_derivative_function(double t, const EmpiricalMeasure& mu) const {
  require(backend_ == Backend::Density, "flat_derivative: closed form needs the density backend");
  const double e = std::exp(model_.flow.A(0, 0) * t);
  const double K = t == 0.0 ? 0.0 : coupling_kernel(model_.flow, t)(0, 0);
  const double km = K * mu.mean()(0);
  double slope = 0.0;
  if (K != 0.0)
    for (std::size_t k = 0; k < mu.size(); ++k) slope += mu.weight(k) * g_prime(t, e * mu.atom(k)(0) + km);
  TestFunction f;
  f.value = [this, t, e, K, km, slope](const Vec& v) { return g(t, e * v(0) + km) + K * v(0) * slope; };
  f.grad = [this, t, e, K, km, slope](const Vec& v) {
    return Vec::Constant(1, e * g_prime(t, e * v(0) + km) + K * slope);
  };
  return f;
}

double Semigroup::flat_derivative_fd(double t, const EmpiricalMeasure& mu, double v, double h) const {
  require(h > 0.0 && h < 0.5, "flat_derivative_fd: h must lie in (0, 1/2)");
  const EmpiricalMeasure dv = EmpiricalMeasure::dirac(Vec::Constant(1, v));
  const double base = phi(t, mu).value;
  auto diff = [&](double s) { return (phi(t, EmpiricalMeasure::mixture(dv, s, mu)).value - base) / s; };
  return 2.0 * diff(0.5 * h) - diff(h);
}

double semigroup_generator(const Semigroup& sg, const GeneratorQuadrature& quad, double t, const EmpiricalMeasure& mu) {
  return measure_generator(sg.model(), sg.trunc(), quad, mu, sg.flat_derivative_function(t, mu));
}

// ---------------------------------------------------------------- checks

PdeReport pde_residual(const Semigroup& sg, const GeneratorQuadrature& quad, const std::vector<double>& times,
                       const std::vector<EmpiricalMeasure>& measures, double h) {
  require(h > 0.0, "pde_residual: h must be positive");
  const GeneratorQuadrature fine = quad.refined();
  PdeReport rep;
  rep.pass = true;
  for (double t : times) {
    require(t - 2.0 * h > 0.0 && t + 2.0 * h <= sg.model().T, "pde_residual: t +- 2h must stay inside (0, T]");
    for (std::size_t m = 0; m < measures.size(); ++m) {
      const auto& mu = measures[m];
      const double p2 = sg.phi(t + 2 * h, mu).value, p1 = sg.phi(t + h, mu).value;
      const double m1 = sg.phi(t - h, mu).value, m2 = sg.phi(t - 2 * h, mu).value;
      PdePoint pt;
      pt.t = t;
      pt.measure = m;
      pt.dphi_dt = (p1 - m1) / (2.0 * h);
      pt.generator = semigroup_generator(sg, quad, t, mu);
      pt.residual = std::abs(pt.dphi_dt - pt.generator);
      // Centred-difference error h^2 phi'''/6 with phi''' from the five-point stencil.
      const double third = (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h);
      const double quad_change = std::abs(semigroup_generator(sg, fine, t, mu) - pt.generator);
      pt.tolerance = 3.0 * h * h * std::abs(third) / 6.0 + 2.0 * quad_change + 1e-7;
      rep.max_residual = std::max(rep.max_residual, pt.residual);
      rep.pass = rep.pass && pt.residual <= pt.tolerance;
      rep.points.push_back(pt);
    }
  }
  return rep;
}

ConstancyReport flow_constancy(const Semigroup& sg, const EmpiricalMeasure& mu, int points, double tolerance) {
  require(points >= 2, "flow_constancy: need at least two points");
  const OUModel& model = sg.model();
  const double T = model.T, a = model.flow.A(0, 0);
  const double M = mu.mean()(0);
  ConstancyReport rep;
  rep.tolerance = tolerance;
  for (int i = 0; i < points; ++i) {
    const double s = T * i / (points - 1);
    const double tau = T - s;
    double value;
    if (s == 0.0) {
      value = sg.phi(T, mu).value;
    } else {
      // mu_s = sum_k w_k p(s, . - e^{sA} x_k - K_s M); its mean is e^{s(A+A')} M.
      const DensityGrid& ps = sg.grid(s);
      const double Ks = coupling_kernel(model.flow, s)(0, 0);
      const double Ms = mean_flow(model.flow, Vec::Constant(1, M), s)(0);
      const double e_tau = std::exp(a * tau);
      const double K_tau = tau == 0.0 ? 0.0 : coupling_kernel(model.flow, tau)(0, 0);
      double peak = *std::max_element(ps.p().begin(), ps.p().end());
      std::vector<double> terms;
      for (std::size_t k = 0; k < mu.size(); ++k) {
        const double shift = std::exp(a * s) * mu.atom(k)(0) + Ks * M;
        for (std::size_t j = 0; j < ps.size(); ++j) {
          if (ps.p()[j] < 1e-16 * peak) continue;
          const double y = shift + ps.x(j);
          terms.push_back(mu.weight(k) * ps.dx() * ps.p()[j] * sg.g(tau, e_tau * y + K_tau * Ms));
        }
      }
      value = pairwise_sum(terms.data(), terms.size());
    }
    rep.s.push_back(s);
    rep.values.push_back(value);
    if (i > 0) rep.total_variation += std::abs(value - rep.values[i - 1]);
  }
  rep.pass = rep.total_variation <= rep.tolerance;
  return rep;
}

}  // namespace levy
