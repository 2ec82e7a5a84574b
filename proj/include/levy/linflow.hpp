#pragma once

#include <vector>

#include "levy/types.hpp"

namespace levy {

// Matrix exponential; throws InvalidArgument on non-finite entries.
Mat expm(const Mat& m);

// Drift A, mean-field drift A', noise loading B of dX = (AX + A'E X)dt + B dZ.
struct MatrixFlow {
  Mat A;
  Mat Aprime;
  Mat B;

  MatrixFlow(Mat a, Mat aprime, Mat b, double det_tol = 1e-12);
  static MatrixFlow scalar(double a, double aprime, double b);
  int dim() const { return static_cast<int>(A.rows()); }
};

// K_t = int_0^t e^{(t-s)A} A' e^{s(A+A')} ds.
Mat coupling_kernel(const MatrixFlow& flow, double t);

// e^{t(A+A')} m0.
Vec mean_flow(const MatrixFlow& flow, const Vec& m0, double t);

// int_0^t e^{sM} ds.
Mat integrated_expm(const Mat& m, double t);

// int_0^t e^{sM} Q e^{sM^T} ds for symmetric Q.
Mat integrated_congruence(const Mat& m, const Mat& q, double t);

// Symmetric square root of a positive semidefinite matrix; negative eigenvalues are clipped.
Mat psd_factor(const Mat& q);

// Precomputed propagators on a sorted time grid starting at 0.
class FlowCache {
 public:
  FlowCache(const MatrixFlow& flow, std::vector<double> times);

  const std::vector<double>& times() const { return times_; }
  const Mat& expA(std::size_t k) const { return expA_[k]; }
  const Mat& expAAp(std::size_t k) const { return expAAp_[k]; }
  const Mat& kernel(std::size_t k) const { return K_[k]; }

 private:
  std::vector<double> times_;
  std::vector<Mat> expA_, expAAp_, K_;
};

}  // namespace levy
