#include "levy/stable_noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "levy/errors.hpp"
#include "levy/linflow.hpp"
#include "levy/quadrature.hpp"

namespace levy {

namespace {

constexpr double kAnchor = 4.0;      // series below, tail integrals above
constexpr double kAsymptotic = 40.0; // asymptotic expansion of the tail above

// int_0^x u^{-alpha} du over [a, x], possibly infinite.
double power_integral(double alpha, double a, double x) {
  if (std::isinf(x)) return alpha > 1.0 ? std::pow(a, 1.0 - alpha) / (alpha - 1.0) : kInf;
  if (alpha == 1.0) return std::log(x / a);
  return (std::pow(x, 1.0 - alpha) - std::pow(a, 1.0 - alpha)) / (1.0 - alpha);
}

double series_cos(double alpha, double x) {
  double sum = 0.0, fact = 1.0, xp = 1.0;  // fact = (2k)!, xp = x^{2k}
  for (int k = 1; k < 200; ++k) {
    fact *= (2.0 * k - 1.0) * (2.0 * k);
    xp *= x * x;
    double term = (k % 2 ? -1.0 : 1.0) * xp / (fact * (2.0 * k - alpha));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum * std::pow(x, -alpha);
}

double series_sin(double alpha, double x) {
  double sum = 0.0, fact = 1.0, xp = x;  // fact = (2k+1)!, xp = x^{2k+1}
  for (int k = 1; k < 200; ++k) {
    fact *= (2.0 * k) * (2.0 * k + 1.0);
    xp *= x * x;
    double term = (k % 2 ? -1.0 : 1.0) * xp / (fact * (2.0 * k + 1.0 - alpha));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum * std::pow(x, -alpha);
}

// int_x^inf e^{iu} u^{-s} du for x >= kAnchor.
cplx oscillatory_tail(double s, double x) {
  const cplx I(0.0, 1.0);
  if (x >= kAsymptotic) {
    cplx sum = 0.0, term = 1.0;
    double prev = kInf;
    for (int k = 0; k < 200; ++k) {
      double mag = std::abs(term);
      if (mag > prev) break;
      sum += term;
      if (mag < 1e-18 * std::abs(sum)) break;
      prev = mag;
      term *= -I * (s + k) / x;
    }
    return I * std::exp(I * x) * std::pow(x, -s) * sum;
  }
  // Rotating the contour to u = x + iy gives i e^{ix} int_0^inf e^{-y} (x+iy)^{-s} dy.
  static const Rule lag = gauss_laguerre(64);
  cplx acc = 0.0;
  for (std::size_t j = 0; j < lag.size(); ++j) acc += lag.weights[j] * std::pow(cplx(x, lag.nodes[j]), -s);
  return I * std::exp(I * x) * acc;
}

}  // namespace

// ---------------------------------------------------------------- spectral

SpectralMeasure::SpectralMeasure(int dim, std::vector<SpectralAtom> atoms) : dim_(dim), atoms_(std::move(atoms)) {
  require(dim >= 1, "SpectralMeasure: dimension must be positive");
  for (const auto& a : atoms_) {
    require(a.theta.size() == dim, "SpectralMeasure: direction has wrong dimension");
    require(std::abs(a.theta.norm() - 1.0) <= 1e-12, "SpectralMeasure: directions must be unit vectors");
    require(a.weight > 0.0 && std::isfinite(a.weight), "SpectralMeasure: weights must be positive");
  }
}

SpectralMeasure SpectralMeasure::symmetric_1d(double total_weight) {
  return SpectralMeasure(1, {{Vec::Constant(1, 1.0), 0.5 * total_weight}, {Vec::Constant(1, -1.0), 0.5 * total_weight}});
}

SpectralMeasure SpectralMeasure::isotropic(int dim, int directions, double total_weight) {
  if (dim == 1) return symmetric_1d(total_weight);
  require(dim == 2, "SpectralMeasure::isotropic: only d = 1, 2");
  require(directions >= 2 && directions % 2 == 0, "SpectralMeasure::isotropic: need an even direction count");
  std::vector<SpectralAtom> atoms;
  for (int k = 0; k < directions; ++k) {
    double a = 2.0 * std::numbers::pi * k / directions;
    Vec th(2);
    th << std::cos(a), std::sin(a);
    th.normalize();
    atoms.push_back({th, total_weight / directions});
  }
  return SpectralMeasure(2, std::move(atoms));
}

double SpectralMeasure::total_weight() const {
  double w = 0.0;
  for (const auto& a : atoms_) w += a.weight;
  return w;
}

Mat SpectralMeasure::second_moment() const {
  Mat m = Mat::Zero(dim_, dim_);
  for (const auto& a : atoms_) m += a.weight * a.theta * a.theta.transpose();
  return m;
}

double SpectralMeasure::nondegeneracy() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(second_moment());
  return es.eigenvalues()(0);
}

bool SpectralMeasure::is_symmetric(double tol) const {
  for (const auto& a : atoms_) {
    bool found = false;
    for (const auto& b : atoms_) {
      if ((a.theta + b.theta).norm() <= tol && std::abs(a.weight - b.weight) <= tol * a.weight) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

void SpectralMeasure::require_nondegenerate(double eta) const {
  require(nondegeneracy() >= eta, "SpectralMeasure: non-degeneracy condition fails");
}

StableSpec::StableSpec(double alpha_, SpectralMeasure spectral_, double eps_, double trunc_, bool symmetric_)
    : alpha(alpha_), spectral(std::move(spectral_)), eps(eps_), trunc(trunc_), symmetric(symmetric_) {
  require(alpha > 0.0 && alpha < 2.0, "StableSpec: alpha must lie in (0,2)");
  require(eps > 0.0, "StableSpec: eps must be positive");
  require(trunc >= eps, "StableSpec: trunc must be at least eps");
  if (symmetric) require(spectral.is_symmetric(), "StableSpec: symmetric flag set but atoms are not paired");
}

StableSpec StableSpec::with_trunc(double level) const {
  return StableSpec(alpha, spectral, eps, level, symmetric);
}

StableSpec StableSpec::with_eps(double e) const { return StableSpec(alpha, spectral, e, trunc, symmetric); }

// ---------------------------------------------------------------- masses

double levy_annulus_mass(const StableSpec& spec, double r0, double r1) {
  require(r0 > 0.0, "levy_annulus_mass: r0 must be positive");
  require(r1 >= r0, "levy_annulus_mass: need r0 <= r1");
  if (r1 == r0) return 0.0;
  const double a = spec.alpha;
  const double tail1 = std::isinf(r1) ? 0.0 : std::pow(r1, -a);
  return spec.spectral.total_weight() * (std::pow(r0, -a) - tail1) / a;
}

Vec levy_annulus_drift(const StableSpec& spec, double r0, double r1) {
  require(r0 > 0.0 && r1 >= r0, "levy_annulus_drift: need 0 < r0 <= r1");
  Vec out = Vec::Zero(spec.dim());
  if (r1 == r0 || spec.symmetric) return out;
  const double radial = power_integral(spec.alpha, r0, r1);
  for (const auto& a : spec.spectral.atoms()) out += a.weight * radial * a.theta;
  return out;
}

double stable_kappa(double alpha) {
  require(alpha > 0.0 && alpha < 2.0, "stable_kappa: alpha must lie in (0,2)");
  if (alpha == 1.0) return std::numbers::pi / 2.0;
  return std::tgamma(1.0 - alpha) * std::cos(std::numbers::pi * alpha / 2.0) / alpha;
}

// ---------------------------------------------------------------- symbol

RadialSymbol::RadialSymbol(double alpha) : alpha_(alpha) {
  require(alpha > 0.0 && alpha < 2.0, "RadialSymbol: alpha must lie in (0,2)");
  c_anchor_ = series_cos(alpha, kAnchor);
  s_anchor_ = series_sin(alpha, kAnchor);
  e_anchor_ = oscillatory_tail(1.0 + alpha, kAnchor);
}

double RadialSymbol::cos_part(double x) const {
  if (x <= 0.0) return 0.0;
  if (x <= kAnchor) return series_cos(alpha_, x);
  const cplx ex = std::isinf(x) ? cplx(0.0) : oscillatory_tail(1.0 + alpha_, x);
  const double xpow = std::isinf(x) ? 0.0 : std::pow(x, -alpha_);
  return c_anchor_ + (e_anchor_ - ex).real() - (std::pow(kAnchor, -alpha_) - xpow) / alpha_;
}

double RadialSymbol::sin_part(double x) const {
  if (x <= 0.0) return 0.0;
  if (x <= kAnchor) return series_sin(alpha_, x);
  const double lin = power_integral(alpha_, kAnchor, x);
  if (std::isinf(lin)) return -kInf;
  const cplx ex = std::isinf(x) ? cplx(0.0) : oscillatory_tail(1.0 + alpha_, x);
  return s_anchor_ + (e_anchor_ - ex).imag() - lin;
}

cplx truncated_symbol(const StableSpec& spec, const RadialSymbol& rs, const Vec& lambda, double delta) {
  require(delta > 0.0, "truncated_symbol: delta must be positive");
  require(lambda.size() == spec.dim(), "truncated_symbol: dimension mismatch");
  double re = 0.0, im = 0.0;
  for (const auto& a : spec.spectral.atoms()) {
    const double c = lambda.dot(a.theta);
    if (c == 0.0) continue;
    const double ac = std::abs(c);
    const double x = std::isinf(delta) ? kInf : delta * ac;
    const double scale = a.weight * std::pow(ac, rs.alpha());
    re += scale * rs.cos_part(x);
    if (!spec.symmetric) {
      const double s = rs.sin_part(x);
      require(std::isfinite(s), "truncated_symbol: compensated symbol diverges for alpha <= 1 without truncation");
      im += scale * (c > 0 ? s : -s);
    }
  }
  return {std::min(re, 0.0), im};
}

cplx truncated_symbol(const StableSpec& spec, const Vec& lambda, double delta) {
  RadialSymbol rs(spec.alpha);
  return truncated_symbol(spec, rs, lambda, delta);
}

// ---------------------------------------------------------------- sampling

double sample_radius(double alpha, double r0, double r1, double u) {
  const double a0 = std::pow(r0, -alpha);
  const double a1 = std::isinf(r1) ? 0.0 : std::pow(r1, -alpha);
  double r = std::pow(a0 - u * (a0 - a1), -1.0 / alpha);
  if (r >= r1) r = std::nextafter(r1, 0.0);
  return std::max(r, r0);
}

JumpDraw sample_jump_draw(const StableSpec& spec, Rng& rng) {
  const auto& atoms = spec.spectral.atoms();
  std::size_t idx = 0;
  if (atoms.size() > 1) {
    double target = rng.uniform() * spec.spectral.total_weight();
    double acc = 0.0;
    for (idx = 0; idx + 1 < atoms.size(); ++idx) {
      acc += atoms[idx].weight;
      if (target < acc) break;
    }
  }
  return {idx, sample_radius(spec.alpha, spec.eps, spec.trunc, rng.uniform())};
}

Vec sample_jump_mark(const StableSpec& spec, Rng& rng) {
  const JumpDraw j = sample_jump_draw(spec, rng);
  return j.radius * spec.spectral.atoms()[j.atom].theta;
}

JumpEventStream sample_jump_stream(const StableSpec& spec, double T, Rng& rng) {
  require(T > 0.0, "sample_jump_stream: horizon must be positive");
  JumpEventStream s;
  const int d = spec.dim();
  s.small_compensator = Vec::Zero(d);
  s.big_compensator = Vec::Zero(d);
  if (spec.trunc <= spec.eps || spec.spectral.atoms().empty()) return s;

  const double small_hi = std::min(1.0, spec.trunc);
  if (small_hi > spec.eps) s.small_compensator = -levy_annulus_drift(spec, spec.eps, small_hi);
  const double big_lo = std::max(1.0, spec.eps);
  if (spec.trunc > big_lo && !spec.symmetric) {
    if (std::isinf(spec.trunc) && spec.alpha <= 1.0)
      s.big_compensator = Vec::Constant(d, std::numeric_limits<double>::quiet_NaN());
    else
      s.big_compensator = -levy_annulus_drift(spec, big_lo, spec.trunc);
  }

  const std::uint64_t n = rng.poisson(T * levy_annulus_mass(spec, spec.eps, spec.trunc));
  s.events.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    const double t = T * rng.uniform();
    s.events.push_back({t, sample_jump_mark(spec, rng)});
  }
  std::stable_sort(s.events.begin(), s.events.end(),
                   [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });
  return s;
}

Mat small_jump_gaussian_cov(const StableSpec& spec) {
  return std::pow(spec.eps, 2.0 - spec.alpha) / (2.0 - spec.alpha) * spec.spectral.second_moment();
}

Vec sample_increment(const StableSpec& spec, double T, Compensation mode, Rng& rng) {
  const int d = spec.dim();
  Vec z = Vec::Zero(d);
  if (spec.spectral.atoms().empty()) return z;
  const std::uint64_t n = rng.poisson(T * levy_annulus_mass(spec, spec.eps, spec.trunc));
  for (std::uint64_t k = 0; k < n; ++k) z += sample_jump_mark(spec, rng);
  if (!spec.symmetric) {
    const double small_hi = std::min(1.0, spec.trunc);
    if (small_hi > spec.eps) z -= T * levy_annulus_drift(spec, spec.eps, small_hi);
    const double big_lo = std::max(1.0, spec.eps);
    if (mode == Compensation::Full && spec.trunc > big_lo) {
      require(!(std::isinf(spec.trunc) && spec.alpha <= 1.0),
              "sample_increment: full compensation diverges for alpha <= 1");
      z -= T * levy_annulus_drift(spec, big_lo, spec.trunc);
    }
  }
  const Mat root = psd_factor(T * small_jump_gaussian_cov(spec));
  Vec g(d);
  for (int i = 0; i < d; ++i) g(i) = rng.normal();
  z += root * g;
  return z;
}

std::vector<double> sample_stable_oracle_1d(double alpha, double scale, std::size_t n, Rng& rng) {
  require(alpha > 0.0 && alpha < 2.0, "sample_stable_oracle_1d: alpha must lie in (0,2)");
  require(scale > 0.0, "sample_stable_oracle_1d: scale must be positive");
  std::vector<double> out(n);
  const double pi = std::numbers::pi;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = pi * (rng.uniform() - 0.5);
    const double w = rng.exponential();
    double x;
    if (alpha == 1.0) {
      x = std::tan(v);
    } else {
      x = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
          std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
    }
    out[k] = scale * x;
  }
  return out;
}

double stable_scale_1d(const StableSpec& spec, double t) {
  require(spec.dim() == 1, "stable_scale_1d: one-dimensional spec required");
  return std::pow(t * spec.spectral.total_weight() * stable_kappa(spec.alpha), 1.0 / spec.alpha);
}

}  // namespace levy
