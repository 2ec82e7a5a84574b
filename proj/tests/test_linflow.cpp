#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "levy/errors.hpp"
#include "levy/linflow.hpp"
#include "levy/quadrature.hpp"

using namespace levy;

namespace {

// Truncated power series after scaling by 2^-s, then repeated squaring.
Mat series_expm(const Mat& m) {
  int s = 0;
  double nrm = m.norm();
  while (nrm > 0.5) {
    nrm /= 2;
    ++s;
  }
  const Mat x = m / std::pow(2.0, s);
  Mat term = Mat::Identity(m.rows(), m.cols()), sum = term;
  for (int k = 1; k < 40; ++k) {
    term = term * x / k;
    sum += term;
  }
  for (int k = 0; k < s; ++k) sum = sum * sum;
  return sum;
}

Mat random_matrix(int d, double norm, std::mt19937_64& gen) {
  std::normal_distribution<double> n;
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = n(gen);
  return m * (norm / m.norm());
}

// Adaptive quadrature of int_0^t e^{(t-s)A} A' e^{s(A+A')} ds, entry by entry.
Mat kernel_by_quadrature(const MatrixFlow& f, double t) {
  const int d = f.dim();
  Mat k(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      k(i, j) = integrate_adaptive(
          [&](double s) { return (expm((t - s) * f.A) * f.Aprime * expm(s * (f.A + f.Aprime)))(i, j); }, 0.0, t,
          1e-13);
  return k;
}

}  // namespace

TEST(Expm, ZeroIsIdentity) { EXPECT_TRUE(expm(Mat::Zero(3, 3)).isApprox(Mat::Identity(3, 3))); }

TEST(Expm, ScalarIsExp) { EXPECT_NEAR(expm(Mat::Constant(1, 1, 1.0))(0, 0), 2.718281828459045, 1e-15); }

TEST(Expm, NilpotentMatchesSeries) {
  Mat n(2, 2);
  n << 0, 1, 0, 0;
  Mat expected(2, 2);
  expected << 1, 1, 0, 1;
  EXPECT_LE((expm(n) - expected).norm(), 1e-15);
  EXPECT_LE((series_expm(n) - expected).norm(), 1e-15);
}

TEST(Expm, RejectsNonFinite) {
  Mat m = Mat::Zero(2, 2);
  m(0, 1) = std::nan("");
  EXPECT_THROW(expm(m), InvalidArgument);
}

TEST(Expm, MatchesSeriesOnRandomMatrices) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat m = random_matrix(3, 5.0, gen);
    const Mat ref = series_expm(m);
    EXPECT_LE((expm(m) - ref).norm() / ref.norm(), 1e-12);
  }
}

TEST(Expm, LargeSymmetricMatchesSpectralOracle) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 10; ++trial) {
    Mat m = random_matrix(4, 50.0, gen);
    m = (0.5 * (m + m.transpose())).eval();
    m *= 50.0 / m.norm();
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    const Mat ref = es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
                    es.eigenvectors().transpose();
    EXPECT_LE((expm(m) - ref).norm() / ref.norm(), 1e-12);
  }
}

TEST(Expm, SemigroupProperty) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat m = random_matrix(3, 5.0, gen);
    const double s = 0.3 + 0.05 * trial, t = 0.7;
    const Mat lhs = expm((s + t) * m);
    EXPECT_LE((lhs - expm(s * m) * expm(t * m)).norm() / lhs.norm(), 1e-10);
  }
}

TEST(MatrixFlow, RequiresInvertibleNoise) {
  EXPECT_THROW(MatrixFlow(Mat::Zero(2, 2), Mat::Zero(2, 2), Mat::Zero(2, 2)), InvalidArgument);
  EXPECT_NO_THROW(MatrixFlow::scalar(0.0, 0.0, 1.0));
}

TEST(CouplingKernel, VanishesWithoutMeanField) {
  MatrixFlow f(Mat::Constant(2, 2, 0.3), Mat::Zero(2, 2), Mat::Identity(2, 2));
  EXPECT_LE(coupling_kernel(f, 1.7).norm(), 1e-15);
}

TEST(CouplingKernel, ZeroAtTimeZeroAndRejectsNegativeTime) {
  auto f = MatrixFlow::scalar(-0.4, 0.9, 1.0);
  EXPECT_EQ(coupling_kernel(f, 0.0)(0, 0), 0.0);
  EXPECT_THROW(coupling_kernel(f, -0.1), InvalidArgument);
}

TEST(CouplingKernel, ScalarPureMeanField) {
  auto f = MatrixFlow::scalar(0.0, 0.7, 1.0);
  const double k = coupling_kernel(f, 1.3)(0, 0);
  EXPECT_NEAR(kernel_by_quadrature(f, 1.3)(0, 0), 1.4843225333848165, 1e-12);
  EXPECT_NEAR(k, 1.4843225333848165, 1e-12);
}

TEST(CouplingKernel, EqualDriftsOnDiagonal) {
  const double a = 0.4, t = 1.5;
  MatrixFlow f(a * Mat::Identity(2, 2), a * Mat::Identity(2, 2), Mat::Identity(2, 2));
  const Mat k = coupling_kernel(f, t);
  const Mat oracle = kernel_by_quadrature(f, t);
  EXPECT_NEAR(oracle(0, 0), 1.4979981223460388, 1e-12);
  EXPECT_LE((k - 1.4979981223460388 * Mat::Identity(2, 2)).norm(), 1e-12);
}

TEST(CouplingKernel, MatchesQuadratureForNonCommutingMatrices) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 5; ++trial) {
    MatrixFlow f(random_matrix(3, 1.5, gen), random_matrix(3, 1.0, gen), Mat::Identity(3, 3));
    const Mat k = coupling_kernel(f, 1.2);
    EXPECT_LE((k - kernel_by_quadrature(f, 1.2)).norm(), 1e-10);
  }
}

TEST(CouplingKernel, SatisfiesItsOde) {
  std::mt19937_64 gen(9);
  MatrixFlow f(random_matrix(2, 1.0, gen), random_matrix(2, 0.8, gen), Mat::Identity(2, 2));
  const double t = 0.9, h = 1e-4;
  const Mat fd = (coupling_kernel(f, t + h) - coupling_kernel(f, t - h)) / (2 * h);
  const Mat rhs = f.A * coupling_kernel(f, t) + f.Aprime * expm(t * (f.A + f.Aprime));
  EXPECT_LE((fd - rhs).norm(), 1e-8);
}

TEST(MeanFlow, Examples) {
  auto f = MatrixFlow::scalar(0.2, 0.3, 1.0);
  EXPECT_NEAR(mean_flow(f, Vec::Constant(1, 1.0), 1.0)(0), 1.6487212707001282, 1e-14);
  EXPECT_EQ(mean_flow(f, Vec::Zero(1), 1.0)(0), 0.0);
  auto still = MatrixFlow::scalar(0.5, -0.5, 1.0);
  EXPECT_NEAR(mean_flow(still, Vec::Constant(1, 2.5), 3.0)(0), 2.5, 1e-15);
}

TEST(MeanFlow, SolvesLinearOde) {
  std::mt19937_64 gen(13);
  MatrixFlow f(random_matrix(3, 1.0, gen), random_matrix(3, 1.0, gen), Mat::Identity(3, 3));
  Vec m0(3);
  m0 << 1.0, -2.0, 0.5;
  const double t = 0.6, h = 1e-4;
  const Vec fd = (mean_flow(f, m0, t + h) - mean_flow(f, m0, t - h)) / (2 * h);
  EXPECT_LE((fd - (f.A + f.Aprime) * mean_flow(f, m0, t)).norm(), 1e-7);
}

TEST(FlowCache, StoresPropagators) {
  auto f = MatrixFlow::scalar(-0.3, 0.5, 1.0);
  FlowCache c(f, {0.0, 0.5, 1.0});
  EXPECT_EQ(c.expA(0)(0, 0), 1.0);
  EXPECT_EQ(c.kernel(0)(0, 0), 0.0);
  EXPECT_NEAR(c.kernel(2)(0, 0), kernel_by_quadrature(f, 1.0)(0, 0), 1e-12);
  EXPECT_NEAR(c.expAAp(1)(0, 0), std::exp(0.1), 1e-15);
}

TEST(IntegratedMaps, MatchQuadrature) {
  Mat m(2, 2);
  m << -0.5, 0.3, 0.1, -0.2;
  Mat q(2, 2);
  q << 1.0, 0.2, 0.2, 0.5;
  const double t = 0.8;
  const Mat phi = integrated_expm(m, t);
  const Mat cov = integrated_congruence(m, q, t);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(phi(i, j), integrate_adaptive([&](double s) { return expm(s * m)(i, j); }, 0, t), 1e-13);
      EXPECT_NEAR(cov(i, j),
                  integrate_adaptive([&](double s) { return (expm(s * m) * q * expm(s * m).transpose())(i, j); }, 0, t),
                  1e-13);
    }
}
