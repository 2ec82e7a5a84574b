#include "levy/density_fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "levy/errors.hpp"
#include "levy/quadrature.hpp"
#include "levy/stats.hpp"

namespace levy {

namespace {

StableSpec spec_at_level(const StableSpec& base, double trunc) {
  const double level = std::min(trunc, base.trunc);
  return StableSpec(base.alpha, base.spectral, std::min(base.eps, level), level, base.symmetric);
}

}  // namespace

CharFunction::CharFunction(const OUModel& model, double trunc, double t, int s_nodes)
    : spec_(spec_at_level(model.noise, trunc)), rs_(model.noise.alpha), t_(t) {
  require(t > 0.0, "CharFunction: t must be positive");
  require(s_nodes >= 2, "CharFunction: need at least two time nodes");
  const Rule r = gauss_legendre(s_nodes, 0.0, t);
  for (std::size_t k = 0; k < r.size(); ++k) {
    maps_.push_back((expm(r.nodes[k] * model.flow.A) * model.flow.B).transpose());
    weights_.push_back(r.weights[k]);
  }
}

cplx CharFunction::operator()(const Vec& lambda) const {
  require(lambda.size() == dim(), "CharFunction: dimension mismatch");
  if (lambda.isZero(0.0)) return 1.0;
  cplx acc = 0.0;
  for (std::size_t k = 0; k < maps_.size(); ++k) acc += weights_[k] * truncated_symbol(spec_, rs_, maps_[k] * lambda, spec_.trunc);
  return std::exp(acc);
}

cplx CharFunction::at(double lambda) const {
  require(dim() == 1, "CharFunction::at: one-dimensional model required");
  return (*this)(Vec::Constant(1, lambda));
}

double fit_decay_rate(const CharFunction& cf, double alpha, double lo, double hi, int points) {
  require(lo > 0.0 && hi > lo && points >= 2, "fit_decay_rate: need 0 < lo < hi and two points");
  double eta = kInf;
  for (int k = 0; k < points; ++k) {
    const double lam = lo * std::pow(hi / lo, static_cast<double>(k) / (points - 1));
    const double mod = std::abs(cf.at(lam));
    const double rate = -std::log(mod) / (cf.t() * std::min(std::pow(lam, alpha), lam * lam));
    eta = std::min(eta, rate);
  }
  return eta;
}

namespace {

// Tail constants of the untruncated law.
TailModel stable_tail(const OUModel& model, double t) {
  require(model.dim() == 1, "tail_model: one-dimensional model required");
  TailModel tm;
  tm.alpha = model.noise.alpha;
  const double a = model.flow.A(0, 0), b = model.flow.B(0, 0), al = model.noise.alpha;
  // int_0^t |e^{sa} b|^alpha ds
  const double flow_mass =
      std::abs(a) < 1e-14 ? t * std::pow(std::abs(b), al) : std::pow(std::abs(b), al) * std::expm1(al * a * t) / (al * a);
  for (const auto& atom : model.noise.spectral.atoms()) {
    const double dir = b * atom.theta(0);
    (dir > 0.0 ? tm.c_plus : tm.c_minus) += atom.weight * flow_mass;
  }
  return tm;
}

}  // namespace

TailModel tail_model(const OUModel& model, double trunc, double t) {
  if (std::isfinite(std::min(trunc, model.noise.trunc))) {
    TailModel light;
    light.alpha = model.noise.alpha;
    return light;
  }
  return stable_tail(model, t);
}

// ---------------------------------------------------------------- grid

struct DensityGrid::Splines {
  boost::math::interpolators::cardinal_cubic_b_spline<double> p, dp;
};

DensityGrid::DensityGrid(double t, double half_width, std::vector<double> p, std::vector<double> dp,
                         std::vector<double> d2p, TailModel tail)
    : t_(t),
      half_width_(half_width),
      dx_(2.0 * half_width / static_cast<double>(p.size())),
      p_(std::move(p)),
      dp_(std::move(dp)),
      d2p_(std::move(d2p)),
      tail_(tail) {
  require(p_.size() >= 8 && dp_.size() == p_.size() && d2p_.size() == p_.size(), "DensityGrid: inconsistent sizes");
  splines_ = std::make_shared<const Splines>(
      Splines{{p_.data(), p_.size(), -half_width_, dx_}, {dp_.data(), dp_.size(), -half_width_, dx_}});
}

double DensityGrid::mass() const { return dx_ * pairwise_sum(p_.data(), p_.size()); }

double DensityGrid::value(double y) const {
  if (y < -half_width_ || y > x(size() - 1)) return 0.0;
  return splines_->p(y);
}

double DensityGrid::deriv(double y) const {
  if (y < -half_width_ || y > x(size() - 1)) return 0.0;
  return splines_->dp(y);
}

double DensityGrid::expect_on_grid(const std::function<double(double)>& f, double shift) const {
  std::vector<double> terms(size());
  for (std::size_t j = 0; j < size(); ++j) terms[j] = f(shift + x(j)) * p_[j];
  return dx_ * pairwise_sum(terms.data(), terms.size());
}

double DensityGrid::expect(const std::function<double(double)>& f, double shift) const {
  const double base = expect_on_grid(f, shift);
  if (!tail_.heavy()) return base;
  constexpr int kPeriods = 64;
  const double L = half_width_, al = tail_.alpha;
  const Rule panel = gauss_legendre(24, -1.0, 1.0);
  const Rule unit = gauss_legendre(64, 0.0, 1.0);
  double corr = 0.0;
  for (int sign : {1, -1}) {
    const double c = sign > 0 ? tail_.c_plus : tail_.c_minus;
    if (c == 0.0) continue;
    auto g = [&](double x) { return f(shift + sign * x); };
    // Mass at x in (L(2m-1), L(2m+1)] sits on the grid at x - 2Lm.
    double side = 0.0;
    for (int m = 1; m <= kPeriods; ++m) {
      const double mid = 2.0 * L * m;
      // Halves split at the fold of the grid centre, where f may have a kink.
      for (double half : {-0.5, 0.5})
        for (std::size_t k = 0; k < panel.size(); ++k) {
          const double x = mid + L * (half + 0.5 * panel.nodes[k]);
          side += 0.5 * L * panel.weights[k] * (g(x) - g(x - mid)) * std::pow(x, -1.0 - al);
        }
    }
    // Beyond X the folded value averages out to the period mean of g.
    const double X = L * (2.0 * kPeriods + 1.0);
    double gbar = 0.0;
    for (std::size_t j = 0; j < size(); ++j) gbar += g(x(j));
    gbar /= static_cast<double>(size());
    // x = X v^{-1/alpha}, v = w^q smooths the v^{-1/alpha} growth of linear g.
    const double q = 2.0 / (1.0 - 1.0 / al);
    double rest = 0.0;
    for (std::size_t k = 0; k < unit.size(); ++k) {
      const double w = unit.nodes[k];
      const double v = std::pow(w, q);
      rest += unit.weights[k] * q * std::pow(w, q - 1.0) * (g(X * std::pow(v, -1.0 / al)) - gbar);
    }
    side += rest * std::pow(X, -al) / al;
    corr += c * side;
  }
  return base + corr;
}

double DensityGrid::weighted_abs_integral(double gamma, int order) const {
  require(order >= 0 && order <= 2, "weighted_abs_integral: derivative order must be 0, 1 or 2");
  const std::vector<double>& v = order == 0 ? p_ : order == 1 ? dp_ : d2p_;
  std::vector<double> terms(size());
  for (std::size_t j = 0; j < size(); ++j) {
    const double ax = std::abs(x(j));
    terms[j] = (gamma == 0.0 ? 1.0 : std::pow(ax, gamma)) * std::abs(v[j]);
  }
  return dx_ * pairwise_sum(terms.data(), terms.size());
}

// ---------------------------------------------------------------- inversion

namespace {

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

struct FftwPlan {
  FftwPlan(int n, fftw_complex* buf)
      // FFTW_ESTIMATE keeps the plan, hence the rounding, independent of timing.
      : plan(fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE)) {}
  ~FftwPlan() { fftw_destroy_plan(plan); }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
  fftw_plan plan;
};

// (C / (alpha 1e-4))^{1/alpha}: the 0.9999 quantile of |Y| from its tail constant.
double tail_quantile(const OUModel& model, double t) {
  const TailModel tm = stable_tail(model, t);
  const double C = tm.c_plus + tm.c_minus;
  require(C > 0.0, "invert_density: the noise has no jumps");
  return std::pow(C / (tm.alpha * 1e-4), 1.0 / tm.alpha);
}

}  // namespace

DensityGrid invert_density(const OUModel& model, double trunc, double t, const GridParams& params) {
  require(model.dim() == 1, "invert_density: one-dimensional model required");
  require(t > 0.0, "invert_density: t must be positive");
  const CharFunction cf(model, trunc, t, params.s_nodes);
  double q = tail_quantile(model, t);
  const double level = std::min(trunc, model.noise.trunc);
  if (std::isfinite(level)) {
    // Truncated noise has all moments; 8 standard deviations bound the bulk.
    const double a = model.flow.A(0, 0), b = model.flow.B(0, 0), al = model.noise.alpha;
    const double flow2 = std::abs(a) < 1e-14 ? t * b * b : b * b * std::expm1(2.0 * a * t) / (2.0 * a);
    const double var = flow2 * model.noise.spectral.total_weight() * std::pow(level, 2.0 - al) / (2.0 - al);
    q = std::min(q, 8.0 * std::sqrt(var));
  }
  const double L = params.half_width > 0.0 ? params.half_width : params.extent_factor * (q + params.shift_cover);

  // Frequency beyond which |phi| is negligible.
  const double scale = tail_quantile(model, t) * std::pow(1e-4 * model.noise.alpha, 1.0 / model.noise.alpha);
  double cut = 0.5 / scale;
  for (int it = 0; it < 4000 && std::abs(cf.at(cut)) > 1e-17; ++it) cut *= 1.1;
  int log2n = params.log2_n;
  if (log2n == 0) {
    const double need = params.oversample * 2.0 * L * cut / std::numbers::pi;
    log2n = std::max(10, static_cast<int>(std::ceil(std::log2(need))));
  }
  if (log2n > 24) throw GridTooSmall("invert_density: required resolution exceeds 2^24 points", L);
  const int n = 1 << log2n;
  const double dl = std::numbers::pi / L;

  std::vector<cplx> phi(n / 2 + 1, 0.0);
  for (int k = 0; k <= n / 2; ++k) {
    const double lam = k * dl;
    if (lam > 1.5 * cut) break;
    phi[k] = cf.at(lam);
  }

  FftwBuffer buf(n);
  FftwPlan plan(n, buf.data);
  std::vector<double> out[3];
  for (int order = 0; order < 3; ++order) {
    for (int k = 0; k < n; ++k) {
      const int kk = k <= n / 2 ? k : k - n;
      const double lam = kk * dl;
      // phi(-lambda) = conj phi(lambda) for a real law.
      cplx v = kk >= 0 ? phi[kk] : std::conj(phi[-kk]);
      for (int r = 0; r < order; ++r) v *= cplx(0.0, -lam);
      if (kk % 2 != 0) v = -v;
      buf.data[k][0] = v.real();
      buf.data[k][1] = v.imag();
    }
    fftw_execute(plan.plan);
    out[order].resize(n);
    for (int j = 0; j < n; ++j) out[order][j] = buf.data[j][0] / (2.0 * L);
  }

  const double peak = *std::max_element(out[0].begin(), out[0].end());
  const double boundary = std::max(std::abs(out[0].front()), std::abs(out[0].back()));
  if (boundary > params.alias_threshold * peak) {
    const double grow = std::pow(boundary / (params.alias_threshold * peak), 1.0 / (1.0 + model.noise.alpha));
    const double suggest = 1.5 * L * grow;
    std::ostringstream os;
    os << "invert_density: boundary density " << boundary << " exceeds " << params.alias_threshold
       << " x peak; use half_width >= " << suggest;
    throw GridTooSmall(os.str(), suggest);
  }
  return DensityGrid(t, L, std::move(out[0]), std::move(out[1]), std::move(out[2]), tail_model(model, trunc, t));
}

std::vector<double> density_time_derivative(const OUModel& model, double trunc, const DensityGrid& at, double h,
                                            const GridParams& params) {
  require(h > 0.0 && at.t() - h > 0.0, "density_time_derivative: need 0 < h < t");
  GridParams fixed = params;
  fixed.half_width = at.half_width();
  fixed.log2_n = static_cast<int>(std::lround(std::log2(static_cast<double>(at.size()))));
  const DensityGrid up = invert_density(model, trunc, at.t() + h, fixed);
  const DensityGrid down = invert_density(model, trunc, at.t() - h, fixed);
  std::vector<double> out(at.size());
  for (std::size_t j = 0; j < at.size(); ++j) out[j] = (up.p()[j] - down.p()[j]) / (2.0 * h);
  return out;
}

MomentFit moment_estimate_check(const std::vector<DensityGrid>& grids, double alpha, double gamma, int order,
                                double tol) {
  require(gamma >= 0.0 && gamma < alpha, "moment_estimate_check: gamma must lie in [0, alpha)");
  require(grids.size() >= 2, "moment_estimate_check: need at least two times");
  MomentFit fit;
  fit.expected = (gamma - order) / alpha;
  std::vector<double> lx, ly, w;
  for (const auto& g : grids) {
    fit.times.push_back(g.t());
    fit.integrals.push_back(g.weighted_abs_integral(gamma, order));
    lx.push_back(std::log(g.t()));
    ly.push_back(std::log(fit.integrals.back()));
    w.push_back(1.0);
  }
  fit.slope = weighted_slope(lx, ly, w).slope;
  fit.min_ratio = kInf;
  fit.max_ratio = 0.0;
  for (std::size_t k = 0; k < grids.size(); ++k) {
    const double r = fit.integrals[k] / std::pow(fit.times[k], fit.expected);
    fit.min_ratio = std::min(fit.min_ratio, r);
    fit.max_ratio = std::max(fit.max_ratio, r);
  }
  fit.pass = fit.slope >= fit.expected - tol && std::isfinite(fit.max_ratio);
  return fit;
}

std::vector<double> flow_density(const DensityGrid& grid, const OUModel& model, const EmpiricalMeasure& mu,
                                 const std::vector<double>& ys) {
  require(model.dim() == 1 && mu.dim() == 1, "flow_density: one-dimensional model required");
  const double t = grid.t();
  const double eA = std::exp(model.flow.A(0, 0) * t);
  const double km = coupling_kernel(model.flow, t)(0, 0) * mu.mean()(0);
  std::vector<double> shifts(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    shifts[k] = eA * mu.atom(k)(0) + km;
    if (std::abs(shifts[k]) > 0.5 * grid.half_width())
      throw GridTooSmall("flow_density: shift exceeds the grid coverage", 2.0 * std::abs(shifts[k]) + grid.half_width());
  }
  std::vector<double> out(ys.size(), 0.0);
  for (std::size_t j = 0; j < ys.size(); ++j)
    for (std::size_t k = 0; k < mu.size(); ++k) out[j] += mu.weight(k) * grid.value(ys[j] - shifts[k]);
  return out;
}

}  // namespace levy
