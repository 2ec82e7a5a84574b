#include <gtest/gtest.h>

#include <cmath>

#include "levy/errors.hpp"
#include "levy/functionals.hpp"
#include "levy/rng.hpp"

using namespace levy;

namespace {

Mat random_atoms(int d, int n, Rng& rng) {
  Mat m(d, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < d; ++i) m(i, j) = rng.normal();
  return m;
}

double projection(const Functional& u, const Mat& x) { return u.eval(EmpiricalMeasure(x)); }

// Central differences of the empirical projection; the finite-difference oracle.
double fd_grad(const Functional& u, Mat x, int i, int k, double h) {
  x(k, i) += h;
  const double up = projection(u, x);
  x(k, i) -= 2 * h;
  return (up - projection(u, x)) / (2 * h);
}

double fd_hess(const Functional& u, Mat x, int i, int a, int j, int b, double h) {
  auto f = [&](double si, double sj) {
    Mat y = x;
    y(a, i) += si * h;
    y(b, j) += sj * h;
    return projection(u, y);
  };
  return (f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1)) / (4 * h * h);
}

}  // namespace

TEST(ScalarField, GradientAndHessianMatchDifferences) {
  Rng rng(1);
  Vec c(2);
  c << 0.3, -0.7;
  for (const auto& f : {ScalarField::soft_abs(2, 0.8, c), ScalarField::affine(c)}) {
    Vec x(2);
    x << rng.normal(), rng.normal();
    for (int k = 0; k < 2; ++k) {
      Vec e = Vec::Unit(2, k) * 1e-5;
      EXPECT_NEAR(f.grad(x)(k), (f.value(x + e) - f.value(x - e)) / 2e-5, 1e-8);
      Vec gd = (f.grad(x + e) - f.grad(x - e)) / 2e-5;
      for (int a = 0; a < 2; ++a) EXPECT_NEAR(f.hess(x)(a, k), gd(a), 1e-7);
    }
  }
  // The cancellation-free form is exact at the centre.
  EXPECT_EQ(ScalarField::soft_abs(1).value(Vec::Zero(1)), 0.0);
}

TEST(FlatIdentity, Examples) {
  Rng rng(2);
  EmpiricalMeasure mu(random_atoms(1, 5, rng)), nu(random_atoms(1, 5, rng));
  auto lin = make_linear(ScalarField::soft_abs(1));
  auto quad = make_quadratic(1, 0.5);
  EXPECT_LE(flat_derivative_identity_residual(*quad, mu, mu, 4), 1e-15);
  EXPECT_LE(flat_derivative_identity_residual(*lin, mu, nu, 1), 1e-14);
  EXPECT_LE(flat_derivative_identity_residual(*quad, mu, nu, 8), 1e-12);
  auto sp = make_smoothed_power(1.2, 0.1);
  EXPECT_LE(flat_derivative_identity_residual(*sp, mu, nu, 2), 1e-14);
}

TEST(FlatIdentity, QuadraticInTwoDimensionsWithShift) {
  Rng rng(3);
  Vec s(2);
  s << 0.4, -0.1;
  auto quad = make_quadratic(2, 0.5, s);
  Vec wa(4), wb(6);
  wa << 0.1, 0.2, 0.3, 0.4;
  wb << 0.05, 0.15, 0.2, 0.2, 0.3, 0.1;
  EmpiricalMeasure mu(random_atoms(2, 4, rng), wa), nu(random_atoms(2, 6, rng), wb);
  EXPECT_LE(flat_derivative_identity_residual(*quad, mu, nu, 8), 1e-12);
}

TEST(Quadratic, FlatDerivativesMatchDefinitions) {
  Rng rng(4);
  auto q = std::make_shared<QuadraticFunctional>(1, 0.5);
  EmpiricalMeasure mu(random_atoms(1, 6, rng));
  Vec v = Vec::Constant(1, 0.37), w = Vec::Constant(1, -1.2);
  double want = 0;
  for (std::size_t j = 0; j < mu.size(); ++j)
    want += mu.weight(j) * (q->psi(v - mu.atom(j)) + q->psi(mu.atom(j) - v));
  EXPECT_NEAR(q->flat_d1(mu, v), want, 1e-15);
  EXPECT_NEAR(q->flat_d2(mu, v, w), q->psi(v - w) + q->psi(w - v), 1e-15);
  EXPECT_EQ(q->flat_d2(mu, v, w), q->flat_d2(mu, w, v));
  // Moving one atom agrees with two full evaluations.
  Mat x = mu.atoms();
  Vec target = Vec::Constant(1, 2.5);
  EXPECT_NEAR(q->eval_moved(mu, 2, target), q->eval(mu.with_atom(2, target)) - q->eval(mu), 1e-14);
}

TEST(Quadratic, CrossDerivativeIsMixedDerivativeOfFlatD2) {
  Rng rng(5);
  auto q = make_quadratic(2, 0.5);
  EmpiricalMeasure mu(random_atoms(2, 3, rng));
  Vec v(2), w(2);
  v << 0.2, -0.4;
  w << -0.9, 0.6;
  const double h = 1e-4;
  Mat cross = q->cross_d2(mu, v, w);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Vec ea = Vec::Unit(2, a) * h, eb = Vec::Unit(2, b) * h;
      const double fd = (q->flat_d2(mu, v + ea, w + eb) - q->flat_d2(mu, v + ea, w - eb) -
                         q->flat_d2(mu, v - ea, w + eb) + q->flat_d2(mu, v - ea, w - eb)) /
                        (4 * h * h);
      EXPECT_NEAR(cross(a, b), fd, 1e-6);
    }
}

TEST(ClassC, LipschitzFlagsHoldOnSamples) {
  Rng rng(6);
  std::vector<FunctionalPtr> us = {make_linear(ScalarField::soft_abs(1)), make_quadratic(1, 0.35),
                                   make_smoothed_power(0.5, 10.0), make_linear(ScalarField::sine(1.0, 2.0))};
  for (const auto& u : us) {
    ASSERT_TRUE(u->class_c()) << u->name();
    for (int trial = 0; trial < 200; ++trial) {
      EmpiricalMeasure mu(random_atoms(1, 4, rng));
      Vec x = Vec::Constant(1, 3 * rng.normal()), y = Vec::Constant(1, 3 * rng.normal());
      EXPECT_LE(std::abs(u->flat_d1(mu, x) - u->flat_d1(mu, y)), u->lipschitz_d1() * std::abs(x(0) - y(0)) + 1e-14);
      if (u->has_second_order()) {
        Vec x2 = Vec::Constant(1, rng.normal()), y2 = Vec::Constant(1, rng.normal());
        const double dist = std::hypot(x(0) - y(0), x2(0) - y2(0));
        EXPECT_LE(std::abs(u->flat_d2(mu, x, x2) - u->flat_d2(mu, y, y2)), u->lipschitz_d2() * dist + 1e-14);
      }
    }
  }
  EXPECT_FALSE(make_smoothed_power(1.2, 0.1)->class_c());
}

TEST(SmoothedPower, CutoffShapeAndDerivatives) {
  const double eps = 0.2;
  SmoothedPowerFunctional sp(1.3, eps);
  EXPECT_EQ(sp.value(0.15), 0.0);
  EXPECT_EQ(sp.value(-0.2), 0.0);
  EXPECT_DOUBLE_EQ(sp.value(0.5), std::pow(0.5, 1.3));
  EXPECT_DOUBLE_EQ(sp.value(-0.4), std::pow(0.4, 1.3));
  // C^2 across the joins at eps and 2 eps.
  for (double knot : {eps, 2 * eps, -eps, -2 * eps}) {
    EXPECT_NEAR(SmoothedPowerFunctional::chi_d1(knot - 1e-9, eps), SmoothedPowerFunctional::chi_d1(knot + 1e-9, eps), 1e-6);
    EXPECT_NEAR(SmoothedPowerFunctional::chi_d2(knot - 1e-9, eps), SmoothedPowerFunctional::chi_d2(knot + 1e-9, eps), 1e-5);
  }
  for (double v : {-0.9, -0.33, -0.25, 0.21, 0.3, 0.39, 1.7}) {
    const double h = 1e-6;
    EXPECT_NEAR(sp.deriv(v), (sp.value(v + h) - sp.value(v - h)) / (2 * h), 1e-7) << v;
    EXPECT_NEAR(sp.deriv2(v), (sp.deriv(v + h) - sp.deriv(v - h)) / (2 * h), 1e-5) << v;
  }
}

TEST(SmoothedPower, SubLinearLipschitzConstantIsAnUpperBound) {
  SmoothedPowerFunctional sp(0.5, 0.3);
  double sup = 0;
  for (int k = 0; k < 20000; ++k) sup = std::max(sup, std::abs(sp.deriv(-2.0 + 4.0 * k / 19999.0)));
  EXPECT_LE(sup, sp.lipschitz_d1());
  EXPECT_GE(sup, 0.99 * sp.lipschitz_d1());
}

TEST(ProjectionGrad, LinearAndConstantCases) {
  Rng rng(7);
  Mat x = random_atoms(2, 5, rng);
  auto lin = make_linear(ScalarField::soft_abs(2));
  Vec g = empirical_projection_grad(*lin, x, 3);
  Vec want = ScalarField::soft_abs(2).grad(x.col(3)) / 5.0;
  EXPECT_NEAR((g - want).norm(), 0.0, 1e-15);
  auto con = make_linear(ScalarField::constant_value(2, 4.0));
  EXPECT_EQ(empirical_projection_grad(*con, x, 1).norm(), 0.0);
  EXPECT_THROW(empirical_projection_grad(*lin, x, 5), InvalidArgument);
}

TEST(ProjectionGrad, MatchesFiniteDifferences) {
  Rng rng(8);
  Mat x = random_atoms(2, 6, rng);
  auto q = make_quadratic(2, 0.5);
  for (int i = 0; i < 6; ++i) {
    Vec g = empirical_projection_grad(*q, x, i);
    for (int k = 0; k < 2; ++k) {
      const double fd = fd_grad(*q, x, i, k, 1e-5);
      EXPECT_NEAR(g(k), fd, 1e-5 * std::max(std::abs(fd), 1e-3));
    }
  }
}

TEST(ProjectionHess, LinearCases) {
  Rng rng(9);
  Mat x = random_atoms(1, 4, rng);
  auto lin = make_linear(ScalarField::soft_abs(1));
  EXPECT_EQ(empirical_projection_hess(*lin, x, 0, 2).norm(), 0.0);
  Mat h = empirical_projection_hess(*lin, x, 2, 2);
  EXPECT_NEAR(h(0, 0), ScalarField::soft_abs(1).hess(x.col(2))(0, 0) / 4.0, 1e-15);
}

TEST(ProjectionHess, QuadraticMatchesFiniteDifferences) {
  Rng rng(10);
  Mat x = random_atoms(2, 4, rng);
  auto q = make_quadratic(2, 0.5);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Mat h = empirical_projection_hess(*q, x, i, j);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const double fd = fd_hess(*q, x, i, a, j, b, 1e-4);
          EXPECT_NEAR(h(a, b), fd, 1e-4 * std::max(std::abs(fd), 1e-2)) << i << j << a << b;
        }
    }
}

namespace {
struct FirstOrderOnly : Functional {
  std::string name() const override { return "first_order"; }
  double eval(const EmpiricalMeasure& mu) const override { return mu.mean()(0); }
  double flat_d1(const EmpiricalMeasure&, const Vec& v) const override { return v(0); }
  Vec grad_d1(const EmpiricalMeasure&, const Vec& v) const override { return Vec::Ones(v.size()); }
  double lipschitz_d1() const override { return 1.0; }
  double growth_order() const override { return 1.0; }
};
}  // namespace

TEST(ProjectionHess, MissingSecondOrderThrows) {
  FirstOrderOnly u;
  EXPECT_THROW(empirical_projection_hess(u, Mat::Zero(1, 3), 0, 0), UnsupportedFunctional);
}
