#include "levy/linflow.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "levy/errors.hpp"

namespace levy {

Mat expm(const Mat& m) {
  require(m.rows() == m.cols(), "expm: matrix must be square");
  require(m.allFinite(), "expm: non-finite entries");
  if (m.rows() == 1) return Mat::Constant(1, 1, std::exp(m(0, 0)));
  return m.exp();
}

MatrixFlow::MatrixFlow(Mat a, Mat aprime, Mat b, double det_tol)
    : A(std::move(a)), Aprime(std::move(aprime)), B(std::move(b)) {
  const auto d = A.rows();
  require(d >= 1, "MatrixFlow: dimension must be at least 1");
  require(A.cols() == d && Aprime.rows() == d && Aprime.cols() == d && B.rows() == d && B.cols() == d,
          "MatrixFlow: A, A', B must be d x d");
  require(A.allFinite() && Aprime.allFinite() && B.allFinite(), "MatrixFlow: non-finite entries");
  require(std::abs(B.determinant()) > det_tol, "MatrixFlow: B must be invertible");
}

MatrixFlow MatrixFlow::scalar(double a, double aprime, double b) {
  return MatrixFlow(Mat::Constant(1, 1, a), Mat::Constant(1, 1, aprime), Mat::Constant(1, 1, b));
}

Mat coupling_kernel(const MatrixFlow& flow, double t) {
  require(t >= 0.0, "coupling_kernel: t must be nonnegative");
  // K and e^{t(A+A')} - e^{tA} solve K' = AK + A'e^{t(A+A')} with K_0 = 0.
  return expm(t * (flow.A + flow.Aprime)) - expm(t * flow.A);
}

Vec mean_flow(const MatrixFlow& flow, const Vec& m0, double t) {
  require(t >= 0.0, "mean_flow: t must be nonnegative");
  require(m0.size() == flow.dim(), "mean_flow: dimension mismatch");
  return expm(t * (flow.A + flow.Aprime)) * m0;
}

Mat integrated_expm(const Mat& m, double t) {
  const auto d = m.rows();
  Mat big = Mat::Zero(2 * d, 2 * d);
  big.topLeftCorner(d, d) = m * t;
  big.topRightCorner(d, d) = Mat::Identity(d, d) * t;
  return expm(big).topRightCorner(d, d);
}

Mat integrated_congruence(const Mat& m, const Mat& q, double t) {
  // Van Loan: exp([[-M, Q],[0, M^T]] t) = [[*, F12],[0, F22]], result = F22^T F12.
  const auto d = m.rows();
  Mat big = Mat::Zero(2 * d, 2 * d);
  big.topLeftCorner(d, d) = -m * t;
  big.topRightCorner(d, d) = q * t;
  big.bottomRightCorner(d, d) = m.transpose() * t;
  Mat e = expm(big);
  Mat r = e.bottomRightCorner(d, d).transpose() * e.topRightCorner(d, d);
  return 0.5 * (r + r.transpose());
}

Mat psd_factor(const Mat& q) {
  if (q.rows() == 1) return Mat::Constant(1, 1, std::sqrt(std::max(q(0, 0), 0.0)));
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (q + q.transpose()));
  Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

FlowCache::FlowCache(const MatrixFlow& flow, std::vector<double> times) : times_(std::move(times)) {
  for (std::size_t k = 0; k < times_.size(); ++k) {
    require(times_[k] >= 0.0 && (k == 0 || times_[k] >= times_[k - 1]), "FlowCache: times must be sorted, >= 0");
    const double t = times_[k];
    expA_.push_back(expm(t * flow.A));
    expAAp_.push_back(expm(t * (flow.A + flow.Aprime)));
    K_.push_back(expAAp_.back() - expA_.back());
  }
}

}  // namespace levy
