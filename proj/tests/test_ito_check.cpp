#include <gtest/gtest.h>

#include <cmath>

#include "levy/errors.hpp"
#include "levy/ito_check.hpp"

using namespace levy;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

ItoExperiment power_case(double alpha, double beta, double gamma, std::size_t paths, int nodes) {
  SpectralMeasure sm(1, {{v1(1.0), 0.6}, {v1(-1.0), 0.4}});
  ItoExperiment e(StableSpec(alpha, sm, 1e-2, 10.0), InitialLaw::uniform(1, -1.0, 2.0), make_smoothed_power(beta, 0.1));
  e.beta = beta;
  e.gamma = gamma;
  e.drift0 = 0.3;
  e.drift1 = -0.4;
  e.sigma0 = 0.8;
  e.sigma1 = 0.5;
  e.paths = paths;
  e.time_nodes = nodes;
  e.refine_paths = 500;
  return e;
}

}  // namespace

TEST(ItoCheck, ZeroHorizon) {
  auto e = power_case(1.5, 1.2, 0.8, 100, 4);
  e.t = 0.0;
  const auto r = ito_residual(e, 3);
  EXPECT_EQ(r.residual, 0.0);
  EXPECT_EQ(ito_lhs(e, 3).value, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(ItoCheck, Validation) {
  auto e = power_case(1.5, 1.2, 0.8, 100, 4);
  EXPECT_NO_THROW(validate(e));
  auto heavy = e;
  heavy.driver = heavy.driver.with_trunc(kInf);
  EXPECT_THROW(validate(heavy), InvalidExperiment);
  auto rough = e;
  rough.gamma = 0.4;  // 1 + gamma <= alpha
  EXPECT_THROW(validate(rough), InvalidExperiment);
  auto growth = e;
  growth.beta = 1.0;
  EXPECT_THROW(validate(growth), InvalidExperiment);
  auto pareto = e;
  pareto.mu0 = InitialLaw::pareto(1, 1.1);
  EXPECT_THROW(validate(pareto), InvalidExperiment);
  auto quad = e;
  quad.u = make_quadratic(1, 1.0);
  EXPECT_THROW(validate(quad), UnsupportedFunctional);
}

TEST(ItoCheck, RegimeClassification) {
  EXPECT_TRUE(check_regime(power_case(1.5, 1.2, 0.8, 2, 1)).ok);
  EXPECT_FALSE(check_regime(power_case(1.5, 1.6, 0.8, 2, 1)).ok);
  EXPECT_FALSE(check_regime(power_case(1.5, 1.2, 0.4, 2, 1)).ok);
  EXPECT_TRUE(check_regime(power_case(0.7, 0.5, 0.0, 2, 1)).ok);
  EXPECT_FALSE(check_regime(power_case(0.7, 0.5, 0.3, 2, 1)).ok);
  EXPECT_EQ(check_regime(power_case(1.0, 0.5, 0.5, 2, 1)).regime, "alpha=1");
  EXPECT_TRUE(check_regime(power_case(1.0, 0.5, 0.5, 2, 1)).ok);
}

TEST(ItoCheck, SymmetricOddCaseVanishes) {
  ItoExperiment e(StableSpec(1.5, SpectralMeasure::symmetric_1d(1.0), 1e-2, 5.0, true), InitialLaw::uniform(1, -1.0, 1.0),
                  make_linear(ScalarField::affine(v1(1.0))));
  e.beta = 1.2;
  e.gamma = 1.0;
  e.paths = 20000;
  e.time_nodes = 8;
  const auto r = ito_residual(e, 1);
  EXPECT_NEAR(r.rhs.total.value, 0.0, 1e-12);
  EXPECT_LE(r.lhs.ci.lo, 0.0);
  EXPECT_GE(r.lhs.ci.hi, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(ItoCheck, DeterministicPathMatchesTheOde) {
  ItoExperiment e(StableSpec(1.5, SpectralMeasure::symmetric_1d(1.0), 1e-2, 5.0, true), InitialLaw::point_mass(v1(0.2)),
                  make_linear(ScalarField::sine(1.0, 2.0)));
  e.beta = 1.2;
  e.sigma0 = 0.0;
  e.drift0 = 0.5;
  e.drift1 = -0.3;
  e.t = 1.5;
  e.paths = 4;
  e.time_nodes = 32;
  // X_t = x0 + b0 t + b1 t^2 / 2 and phi(x) = sin(2x) / 2.
  const double xt = 0.2 + 0.5 * 1.5 - 0.15 * 1.5 * 1.5;
  const double exact = 0.5 * (std::sin(2 * xt) - std::sin(0.4));
  const auto r = ito_residual(e, 1);
  EXPECT_NEAR(r.lhs.value, exact, 1e-14);
  EXPECT_NEAR(r.rhs.total.value, exact, r.rhs.time_error);
  EXPECT_LT(r.rhs.time_error, 1e-3);
  EXPECT_TRUE(r.pass);
}

TEST(ItoCheck, RadialRefinementIsStable) {
  auto e = power_case(1.5, 1.2, 0.8, 2000, 16);
  const auto rhs = ito_rhs(e, 4);
  EXPECT_TRUE(std::isfinite(rhs.total.value));
  EXPECT_LE(rhs.radial_change, 1e-3 * std::abs(rhs.total.value));
  EXPECT_TRUE(std::isfinite(rhs.holder_constant));
  EXPECT_GT(rhs.holder_constant, 0.0);
}

TEST(ItoCheck, ResidualWithinToleranceInBothRegimes) {
  for (auto e : {power_case(1.5, 1.2, 0.8, 20000, 16), power_case(0.7, 0.5, 0.0, 20000, 16)}) {
    const auto r = ito_residual(e, 21);
    EXPECT_TRUE(r.regime.ok) << r.regime.reason;
    EXPECT_LE(r.residual, r.tolerance) << e.driver.alpha;
    e.correlated = true;
    const auto c = ito_residual(e, 21);
    EXPECT_LE(c.residual, c.tolerance) << e.driver.alpha;
    EXPECT_GT(c.mc_tolerance, 0.0);
  }
}

TEST(ItoCheck, DroppedSmallJumpsAreConsistentToo) {
  auto e = power_case(1.5, 1.2, 0.8, 20000, 16);
  e.small_jumps = SmallJumps::Drop;
  e.driver = e.driver.with_eps(0.05);
  const auto r = ito_residual(e, 5);
  EXPECT_EQ(r.rhs.gaussian, 0.0);
  EXPECT_LE(r.residual, r.tolerance);
}

TEST(ItoCheck, RefinementShrinksTheTolerance) {
  auto coarse = power_case(1.5, 1.2, 0.8, 5000, 8);
  auto fine = coarse;
  fine.paths *= 4;
  fine.time_nodes *= 2;
  const auto a = ito_residual(coarse, 6), b = ito_residual(fine, 6);
  EXPECT_LT(b.tolerance, a.tolerance);
  EXPECT_TRUE(b.residual <= a.residual || b.residual <= b.tolerance);
}
