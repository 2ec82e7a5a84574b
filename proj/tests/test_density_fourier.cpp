#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "levy/density_fourier.hpp"
#include "levy/errors.hpp"
#include "levy/quadrature.hpp"

using namespace levy;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

OUModel ou(double a, double ap, double b, double alpha, double trunc = kInf, double weight = 1.0) {
  return OUModel(MatrixFlow::scalar(a, ap, b), StableSpec(alpha, SpectralMeasure::symmetric_1d(weight), 0.01, trunc, true),
                 InitialLaw::point_mass(v1(0.0)));
}

// Symmetric stable with E e^{i lambda X} = exp(-c |lambda|^alpha).
double stable_density_oracle(double alpha, double c, double x) {
  auto f = [&](double l) { return std::cos(l * x) * std::exp(-c * std::pow(l, alpha)) / std::numbers::pi; };
  const double top = std::pow(60.0 / c, 1.0 / alpha);
  double acc = 0.0;
  const int panels = 40;
  for (int k = 0; k < panels; ++k) acc += integrate_adaptive(f, top * k / panels, top * (k + 1) / panels, 1e-13);
  return acc;
}

}  // namespace

TEST(CharFunction, ValueAtZeroAndModulusBound) {
  const auto model = ou(-0.8, 0.3, 1.2, 1.5, 5.0);
  const CharFunction cf(model, kInf, 1.0);
  EXPECT_EQ(cf.at(0.0), cplx(1.0, 0.0));
  for (double l : {-30.0, -2.0, 0.01, 0.7, 3.0, 40.0}) EXPECT_LE(std::abs(cf.at(l)), 1.0);
}

TEST(CharFunction, IdentityFlowGivesTheTimeScaledSymbol) {
  const auto model = ou(0.0, 0.0, 1.0, 1.3, 2.0, 0.7);
  const CharFunction cf(model, kInf, 0.6);
  for (double l : {0.3, 1.0, 4.0}) {
    const cplx expect = std::exp(0.6 * truncated_symbol(model.noise, v1(l), 2.0));
    EXPECT_NEAR(std::abs(cf.at(l) - expect), 0.0, 1e-13);
  }
}

TEST(CharFunction, ClosedFormForThePureStableOU) {
  // int_0^t psi(e^{sa} b lambda) ds = -W kappa |b lambda|^alpha (e^{alpha a t} - 1) / (alpha a).
  const double a = -0.8, b = 1.2, al = 1.5, t = 1.3, W = 1.0;
  const auto model = ou(a, 0.3, b, al);
  const CharFunction cf(model, kInf, t);
  for (double l : {0.2, 1.0, 3.0, 9.0}) {
    const double expo = -W * stable_kappa(al) * std::pow(b * l, al) * std::expm1(al * a * t) / (al * a);
    EXPECT_NEAR(cf.at(l).real() / std::exp(expo), 1.0, 1e-10) << l;
    EXPECT_NEAR(cf.at(l).imag(), 0.0, 1e-15);
  }
}

TEST(CharFunction, SelfSimilarityOfThePureStableLaw) {
  const auto model = ou(0.0, 0.0, 1.0, 1.5);
  const CharFunction one(model, kInf, 1.0);
  for (double t : {0.25, 4.0}) {
    const CharFunction cf(model, kInf, t);
    for (double l : {0.1, 0.9, 2.5}) EXPECT_NEAR(std::abs(cf.at(l) - one.at(std::pow(t, 1.0 / 1.5) * l)), 0.0, 1e-14);
  }
}

TEST(CharFunction, QuadratureRefinementAndTruncatedSkewedNoise) {
  SpectralMeasure sm(1, {{v1(1.0), 0.8}, {v1(-1.0), 0.3}});
  const OUModel model(MatrixFlow::scalar(-1.1, 0.4, 0.9), StableSpec(1.4, sm, 0.01, 4.0), InitialLaw::point_mass(v1(0)));
  const CharFunction coarse(model, kInf, 1.5, 48), fine(model, kInf, 1.5, 128);
  for (double l : {-5.0, -0.4, 0.4, 2.0, 11.0}) EXPECT_LT(std::abs(coarse.at(l) - fine.at(l)), 1e-8 * std::abs(fine.at(l)));
  EXPECT_GT(std::abs(fine.at(2.0).imag()), 1e-4);
}

TEST(CharFunction, DecayRateIsPositive) {
  for (double trunc : {kInf, 3.0}) {
    const auto model = ou(-0.5, 0.2, 1.0, 1.5, trunc);
    const CharFunction cf(model, kInf, 1.0);
    EXPECT_GT(fit_decay_rate(cf, 1.5), 0.0);
  }
}

TEST(Density, MatchesTheFourierIntegralOracle) {
  const double al = 1.5;
  const auto model = ou(0.0, 0.0, 1.0, al);
  const auto grid = invert_density(model, kInf, 1.0);
  const double c = stable_kappa(al);
  // p(0) = Gamma(1 + 1/alpha) / (pi c^{1/alpha}).
  EXPECT_NEAR(grid.value(0.0), std::tgamma(1.0 + 1.0 / al) / (std::numbers::pi * std::pow(c, 1.0 / al)), 1e-8);
  for (double x : {0.37, 1.5, 4.0, 12.0}) EXPECT_NEAR(grid.value(x), stable_density_oracle(al, c, x), 1e-7) << x;
}

TEST(Density, GridInvariants) {
  for (const auto& model : {ou(0.0, 0.0, 1.0, 1.5), ou(-0.7, 0.4, 1.3, 1.7, 6.0), ou(0.0, 0.0, 1.0, 1.2)}) {
    const auto g = invert_density(model, kInf, 1.0);
    EXPECT_NEAR(g.mass(), 1.0, 1e-6);
    double neg = 0.0, dpsum = 0.0, sym = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      neg = std::min(neg, g.p()[j]);
      dpsum += g.dx() * g.dp()[j];
      // x_{n-j} = -x_j for j >= 1.
      if (j >= 1) sym = std::max(sym, std::abs(g.p()[j] - g.p()[g.size() - j]));
    }
    EXPECT_GE(neg, -1e-8);
    EXPECT_NEAR(dpsum, 0.0, 1e-6);
    EXPECT_LE(sym, 1e-8);
    // Fourth-order centred differences of p against the spectral derivative.
    double dev = 0.0;
    const std::size_t n = g.size();
    for (std::size_t j = n / 4; j < 3 * n / 4; ++j) {
      const auto& p = g.p();
      const double fd = (-p[j + 2] + 8 * p[j + 1] - 8 * p[j - 1] + p[j - 2]) / (12 * g.dx());
      dev = std::max(dev, std::abs(fd - g.dp()[j]));
    }
    EXPECT_LE(dev, 1e-5);
  }
}

TEST(Density, SelfSimilarity) {
  const double al = 1.5;
  const auto model = ou(0.0, 0.0, 1.0, al);
  const auto one = invert_density(model, kInf, 1.0);
  for (double t : {0.25, 1.0, 4.0}) {
    const auto g = invert_density(model, kInf, t);
    const double s = std::pow(t, -1.0 / al);
    double dev = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) dev = std::max(dev, std::abs(g.p()[j] - s * one.value(s * g.x(j))));
    EXPECT_LE(dev, 1e-4) << t;
  }
}

TEST(Density, MomentExponentsInTheSelfSimilarCase) {
  const double al = 1.5;
  const auto model = ou(0.0, 0.0, 1.0, al);
  std::vector<DensityGrid> grids;
  for (double t : {0.25, 0.5, 1.0, 2.0, 4.0}) grids.push_back(invert_density(model, kInf, t));
  const auto mass = moment_estimate_check(grids, al, 0.0, 0);
  EXPECT_NEAR(mass.slope, 0.0, 1e-6);
  for (auto [gamma, order] : {std::pair{1.0, 0}, std::pair{0.0, 1}, std::pair{0.0, 2}, std::pair{0.5, 1}}) {
    const auto fit = moment_estimate_check(grids, al, gamma, order);
    EXPECT_NEAR(fit.slope, (gamma - order) / al, 0.05);
    EXPECT_TRUE(fit.pass);
  }
  EXPECT_THROW(moment_estimate_check(grids, al, 1.6, 0), InvalidArgument);
}

TEST(Density, TailCorrectionRecoversTheFirstAbsoluteMoment) {
  const double al = 1.5;
  const auto model = ou(0.0, 0.0, 1.0, al);
  const auto g = invert_density(model, kInf, 1.0);
  // E|X| = (2/pi) Gamma(1 - 1/alpha) c^{1/alpha}.
  const double expect = 2.0 / std::numbers::pi * std::tgamma(1.0 - 1.0 / al) * std::pow(stable_kappa(al), 1.0 / al);
  auto absf = [](double x) { return std::abs(x); };
  // The kink of |x| at a grid node costs O(dx^2) in the rectangle rule.
  EXPECT_NEAR(g.expect(absf), expect, 5e-5 * expect);
  EXPECT_GT(std::abs(g.expect_on_grid(absf) - expect), 1e-3);
}

TEST(Density, TimeDerivativeOfThePeak) {
  const double al = 1.5;
  const auto model = ou(0.0, 0.0, 1.0, al);
  const auto g = invert_density(model, kInf, 1.0);
  const auto dt = density_time_derivative(model, kInf, g, 1e-3);
  // p(t, 0) is proportional to t^{-1/alpha}.
  EXPECT_NEAR(dt[g.size() / 2], -g.p()[g.size() / 2] / al, 1e-6);
}

TEST(Density, AliasingIsDetected) {
  const auto model = ou(0.0, 0.0, 1.0, 1.5);
  GridParams small;
  small.half_width = 5.0;
  try {
    invert_density(model, kInf, 1.0, small);
    FAIL() << "expected GridTooSmall";
  } catch (const GridTooSmall& e) {
    EXPECT_GT(e.suggested_extent, 5.0);
  }
}

TEST(FlowDensity, PointMassAndMixtures) {
  const auto flat = ou(0.0, 0.0, 1.0, 1.5);
  const auto g = invert_density(flat, kInf, 1.0);
  const std::vector<double> ys = {-3.0, -0.2, 0.0, 1.1, 7.5};
  const auto q = flow_density(g, flat, EmpiricalMeasure::dirac(v1(0.0)), ys);
  for (std::size_t k = 0; k < ys.size(); ++k) EXPECT_DOUBLE_EQ(q[k], g.value(ys[k]));

  // Light tails: the mean of q is e^{tA} M + K_t M.
  const auto model = ou(-0.6, 0.4, 1.0, 1.5, 3.0);
  GridParams gp;
  gp.shift_cover = 3.0;
  const double t = 0.8;
  const auto gt = invert_density(model, 3.0, t, gp);
  const auto mu = EmpiricalMeasure::from_values({-1.0, 0.5, 2.0, 2.5});
  std::vector<double> ys2;
  for (std::size_t j = 0; j < gt.size(); ++j) ys2.push_back(gt.x(j));
  const auto q2 = flow_density(gt, model, mu, ys2);
  double mass = 0.0, first = 0.0;
  for (std::size_t j = 0; j < ys2.size(); ++j) {
    mass += gt.dx() * q2[j];
    first += gt.dx() * ys2[j] * q2[j];
  }
  const double M = mu.mean()(0);
  EXPECT_NEAR(mass, 1.0, 1e-5);
  EXPECT_NEAR(first, std::exp(-0.6 * t) * M + coupling_kernel(model.flow, t)(0, 0) * M, 1e-6);
}
