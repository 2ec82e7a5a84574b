#include "levy/ito_check.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "levy/errors.hpp"

namespace levy {

ItoExperiment::ItoExperiment(StableSpec driver_, InitialLaw mu0_, FunctionalPtr u_)
    : driver(std::move(driver_)), mu0(std::move(mu0_)), u(std::move(u_)) {}

RegimeCheck check_regime(const ItoExperiment& e) {
  const double a = e.driver.alpha, b = e.beta, g = e.gamma;
  RegimeCheck r;
  if (a > 1.0) {
    r.regime = "alpha>1";
    r.ok = b > 1.0 && b < a && g > a - 1.0 && g <= 1.0;
    if (!r.ok) r.reason = "need beta in (1, alpha) and gamma in (alpha - 1, 1]";
  } else if (a < 1.0) {
    r.regime = "alpha<1";
    r.ok = b > 0.0 && b < a && g == 0.0;
    if (!r.ok) r.reason = "need beta in (0, alpha) and gamma = 0";
  } else {
    r.regime = "alpha=1";
    r.ok = b > 0.0 && b < 1.0 && g > 0.0 && g <= 1.0;
    if (!r.ok) r.reason = "need beta in (0, 1) and gamma in (0, 1]";
  }
  return r;
}

void validate(const ItoExperiment& e) {
  if (!e.u) throw InvalidExperiment("ito_check: no functional");
  if (!e.u->measure_independent())
    throw UnsupportedFunctional("ito_check: " + e.u->name() + " has a measure-dependent flat derivative");
  auto fail = [](const std::string& m) { throw InvalidExperiment("ito_check: " + m); };
  if (e.driver.dim() != 1 || e.mu0.dim() != 1) fail("only d = 1 is supported");
  if (!(e.driver.alpha > 0.0 && e.driver.alpha < 2.0)) fail("alpha must lie in (0, 2)");
  if (!std::isfinite(e.driver.trunc)) fail("the driver must be truncated");
  if (!(e.t >= 0.0)) fail("negative horizon");
  if (e.paths < 2 || e.time_nodes < 1) fail("need at least two paths and one time node");
  if (e.u->growth_order() > e.beta) fail("growth of du/dm exceeds beta");
  // E |X_0|^beta < inf; the drift is deterministic and bounded on [0, t].
  if (!(e.mu0.moment_order_bound() > e.beta)) fail("initial law lacks a beta-moment");
  // int_{|z|<1} |z|^{1+gamma} dnu < inf.
  if (!(1.0 + e.gamma > e.driver.alpha)) fail("1 + gamma must exceed alpha");
  if (!(e.gamma >= 0.0 && e.gamma <= 1.0)) fail("gamma must lie in [0, 1]");
}

namespace {

// du/dm as a scalar function, without per-call allocation.
struct ScalarDerivative {
  FunctionalPtr u;
  const SmoothedPowerFunctional* power = nullptr;
  EmpiricalMeasure dummy = EmpiricalMeasure::dirac(Vec::Zero(1));
  mutable Vec buf = Vec::Zero(1);

  explicit ScalarDerivative(FunctionalPtr f) : u(std::move(f)) {
    power = dynamic_cast<const SmoothedPowerFunctional*>(u.get());
  }
  double value(double x) const {
    if (power) return power->value(x);
    buf(0) = x;
    return u->flat_d1(dummy, buf);
  }
  double deriv(double x) const {
    if (power) return power->deriv(x);
    buf(0) = x;
    return u->grad_d1(dummy, buf)(0);
  }
  double deriv2(double x) const {
    if (power) return power->deriv2(x);
    buf(0) = x;
    return u->hess_d1(dummy, buf)(0, 0);
  }
};

struct JumpRules {
  Rule small, big;
  double gauss_var = 0.0;
};

JumpRules make_rules(const ItoExperiment& e, const RadialRuleOptions& opt) {
  JumpRules r;
  const StableSpec& z = e.driver;
  const double split = std::min(1.0, z.trunc);
  if (split > z.eps) r.small = radial_rule(z.alpha, z.eps, split, opt);
  const double lo = std::max(1.0, z.eps);
  if (z.trunc > lo) r.big = radial_rule(z.alpha, lo, z.trunc, opt);
  if (e.small_jumps == SmallJumps::Gaussian) r.gauss_var = small_jump_gaussian_cov(z)(0, 0);
  return r;
}

struct Terms {
  double drift = 0.0, small = 0.0, big = 0.0, gaussian = 0.0;
  double total() const { return drift + small + big + gaussian; }
};

// Integrand of the right-hand side at time s and state x.
Terms integrand(const ItoExperiment& e, const ScalarDerivative& f, const JumpRules& rules, double s, double x) {
  Terms out;
  const double f0 = f.value(x), f1 = f.deriv(x), sg = e.sigma(s);
  out.drift = f1 * e.drift(s);
  if (sg == 0.0) return out;
  for (const auto& atom : e.driver.spectral.atoms()) {
    const double dir = sg * atom.theta(0);
    double small = 0.0, big = 0.0;
    for (std::size_t k = 0; k < rules.small.size(); ++k) {
      const double h = rules.small.nodes[k] * dir;
      small += rules.small.weights[k] * (f.value(x + h) - f0 - f1 * h);
    }
    for (std::size_t k = 0; k < rules.big.size(); ++k)
      big += rules.big.weights[k] * (f.value(x + rules.big.nodes[k] * dir) - f0);
    out.small += atom.weight * small;
    out.big += atom.weight * big;
  }
  if (rules.gauss_var > 0.0) out.gaussian = 0.5 * sg * sg * rules.gauss_var * f.deriv2(x);
  return out;
}

// State of path i at the sorted checkpoints; the last checkpoint is the horizon.
struct PathSample {
  double x0 = 0.0;
  std::vector<double> at;
};

PathSample simulate_path(const ItoExperiment& e, std::uint64_t root, std::uint64_t i,
                         const std::vector<double>& checkpoints, double gauss_var) {
  PathSample p;
  Rng init(derive_seed(root, {i, kTagInitial}));
  p.x0 = e.mu0.sample(init)(0);
  p.at.resize(checkpoints.size());
  if (e.t == 0.0) {
    std::fill(p.at.begin(), p.at.end(), p.x0);
    return p;
  }
  Rng jumps(derive_seed(root, {i, kTagJumps}));
  Rng gauss(derive_seed(root, {i, kTagGauss}));
  const JumpEventStream stream = sample_jump_stream(e.driver, e.t, jumps);
  const double comp = stream.small_compensator(0);
  // Primitives of b, sigma and sigma^2.
  auto B = [&](double s) { return e.drift0 * s + 0.5 * e.drift1 * s * s; };
  auto S = [&](double s) { return e.sigma0 * s + 0.5 * e.sigma1 * s * s; };
  auto Q = [&](double s) {
    return e.sigma0 * e.sigma0 * s + e.sigma0 * e.sigma1 * s * s + e.sigma1 * e.sigma1 * s * s * s / 3.0;
  };
  double x = p.x0, prev = 0.0;
  std::size_t next = 0;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    const double to = checkpoints[c];
    x += B(to) - B(prev) + comp * (S(to) - S(prev));
    if (gauss_var > 0.0) x += std::sqrt(gauss_var * (Q(to) - Q(prev))) * gauss.normal();
    while (next < stream.events.size() && stream.events[next].time < to) {
      x += e.sigma(stream.events[next].time) * stream.events[next].mark(0);
      ++next;
    }
    p.at[c] = x;
    prev = to;
  }
  return p;
}

std::uint64_t ensemble_root(std::uint64_t seed, std::uint64_t which) { return derive_seed(seed, {which, kTagMisc}); }

Estimate bootstrap_estimate(const std::vector<double>& xs, const ItoExperiment& e, std::uint64_t seed) {
  Estimate est;
  est.value = mean(xs);
  est.ci = bootstrap_mean_ci(xs, e.resamples, e.level, seed);
  return est;
}

std::vector<double> lhs_samples(const ItoExperiment& e, std::uint64_t root) {
  const ScalarDerivative f(e.u);
  std::vector<double> out(e.paths);
  const std::vector<double> end = {e.t};
  const double var = make_rules(e, e.radial).gauss_var;
  for (std::size_t i = 0; i < e.paths; ++i) {
    const PathSample p = simulate_path(e, root, i, end, var);
    out[i] = f.value(p.at.back()) - f.value(p.x0);
  }
  return out;
}

struct RhsPass {
  std::vector<double> per_path;  // h sum_k g(s_k, X(s_k))
  std::vector<double> lhs;       // phi(X_t) - phi(X_0) on the same paths
  RhsEstimate est;
};

RhsPass rhs_pass(const ItoExperiment& e, std::uint64_t root) {
  const ScalarDerivative f(e.u);
  const JumpRules rules = make_rules(e, e.radial);
  RadialRuleOptions fine_opt = e.radial;
  fine_opt.nodes_per_panel *= 2;
  fine_opt.panel_width *= 0.5;
  const JumpRules fine = make_rules(e, fine_opt);
  const Rule below = radial_rule(e.driver.alpha, 0.0, e.driver.eps, e.radial);

  const Rule time = midpoint_rule(e.time_nodes, e.t);
  std::vector<double> checkpoints = time.nodes;
  checkpoints.push_back(e.t);
  const std::size_t n = time.size();

  RhsPass out;
  out.per_path.resize(e.paths);
  out.lhs.resize(e.paths);
  std::vector<double> node_sum(n, 0.0);
  Terms parts;
  double sub_coarse = 0.0, sub_fine = 0.0, surrogate = 0.0, holder = 0.0;
  const std::size_t sub = std::min(e.refine_paths, e.paths);

  for (std::size_t i = 0; i < e.paths; ++i) {
    const PathSample p = simulate_path(e, root, i, checkpoints, rules.gauss_var);
    out.lhs[i] = f.value(p.at.back()) - f.value(p.x0);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double s = time.nodes[k], x = p.at[k];
      const Terms g = integrand(e, f, rules, s, x);
      const double w = time.weights[k];
      acc += w * g.total();
      node_sum[k] += g.total();
      parts.drift += w * g.drift;
      parts.small += w * g.small;
      parts.big += w * g.big;
      parts.gaussian += w * g.gaussian;
      if (i < sub) {
        sub_coarse += w * g.total();
        sub_fine += w * integrand(e, f, fine, s, x).total();
        const double sg = e.sigma(s), f0 = f.value(x), f1 = f.deriv(x);
        double tiny = 0.0;
        for (const auto& atom : e.driver.spectral.atoms())
          for (std::size_t r = 0; r < below.size(); ++r) {
            const double h = sg * below.nodes[r] * atom.theta(0);
            const double rem = f.value(x + h) - f0 - f1 * h;
            tiny += atom.weight * below.weights[r] * rem;
            if (h != 0.0) holder = std::max(holder, std::abs(rem) / std::pow(std::abs(h), 1.0 + e.gamma));
          }
        for (const auto& atom : e.driver.spectral.atoms())
          for (double r : rules.small.nodes) {
            const double h = sg * r * atom.theta(0);
            if (h != 0.0)
              holder = std::max(holder, std::abs(f.value(x + h) - f0 - f1 * h) / std::pow(std::abs(h), 1.0 + e.gamma));
          }
        surrogate += w * (tiny - 0.5 * sg * sg * rules.gauss_var * f.deriv2(x));
      }
    }
    out.per_path[i] = acc;
  }

  const double m = static_cast<double>(e.paths);
  out.est.drift = parts.drift / m;
  out.est.small = parts.small / m;
  out.est.big = parts.big / m;
  out.est.gaussian = parts.gaussian / m;
  // Midpoint error <= t h^2 max|g''| / 24 with g'' from second differences of node means.
  double d2 = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k)
    d2 = std::max(d2, std::abs(node_sum[k + 1] - 2.0 * node_sum[k] + node_sum[k - 1]) / m);
  out.est.time_error = e.t * d2 / 24.0;
  if (sub > 0) {
    out.est.radial_change = std::abs(sub_fine - sub_coarse) / static_cast<double>(sub);
    out.est.surrogate_gap = surrogate / static_cast<double>(sub);
  }
  out.est.holder_constant = holder;
  return out;
}

}  // namespace

Estimate ito_lhs(const ItoExperiment& e, std::uint64_t seed) {
  validate(e);
  if (e.t == 0.0) return {};
  return bootstrap_estimate(lhs_samples(e, ensemble_root(seed, 1)), e, derive_seed(seed, {1}));
}

RhsEstimate ito_rhs(const ItoExperiment& e, std::uint64_t seed) {
  validate(e);
  if (e.t == 0.0) return {};
  RhsPass pass = rhs_pass(e, ensemble_root(seed, 2));
  pass.est.total = bootstrap_estimate(pass.per_path, e, derive_seed(seed, {2}));
  return pass.est;
}

ItoResult ito_residual(const ItoExperiment& e, std::uint64_t seed) {
  validate(e);
  ItoResult r;
  r.regime = check_regime(e);
  if (e.t == 0.0) {
    r.pass = true;
    return r;
  }
  RhsPass pass = rhs_pass(e, ensemble_root(seed, 2));
  pass.est.total = bootstrap_estimate(pass.per_path, e, derive_seed(seed, {2}));
  r.rhs = pass.est;
  if (e.correlated) {
    r.lhs = bootstrap_estimate(pass.lhs, e, derive_seed(seed, {1}));
    std::vector<double> diff(e.paths);
    for (std::size_t i = 0; i < e.paths; ++i) diff[i] = pass.lhs[i] - pass.per_path[i];
    r.mc_tolerance = bootstrap_estimate(diff, e, derive_seed(seed, {3})).half_width();
  } else {
    r.lhs = bootstrap_estimate(lhs_samples(e, ensemble_root(seed, 1)), e, derive_seed(seed, {1}));
    r.mc_tolerance = std::hypot(r.lhs.half_width(), r.rhs.total.half_width());
  }
  r.residual = std::abs(r.lhs.value - r.rhs.total.value);
  r.tolerance = r.mc_tolerance + r.rhs.time_error + r.rhs.radial_change;
  r.pass = r.residual <= r.tolerance;
  return r;
}

}  // namespace levy
