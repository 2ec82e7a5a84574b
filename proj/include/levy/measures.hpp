#pragma once

#include <iosfwd>
#include <vector>

#include "levy/types.hpp"

namespace levy {

// Weighted atoms in R^d, stored column-wise (d x N).
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  explicit EmpiricalMeasure(Mat atoms);
  EmpiricalMeasure(Mat atoms, Vec weights);

  static EmpiricalMeasure from_values(const std::vector<double>& xs);
  static EmpiricalMeasure dirac(const Vec& x);
  // t * a + (1 - t) * b, atoms concatenated.
  static EmpiricalMeasure mixture(const EmpiricalMeasure& a, double t, const EmpiricalMeasure& b);

  int dim() const { return static_cast<int>(atoms_.rows()); }
  std::size_t size() const { return static_cast<std::size_t>(atoms_.cols()); }
  const Mat& atoms() const { return atoms_; }
  const Vec& weights() const { return weights_; }
  auto atom(std::size_t k) const { return atoms_.col(static_cast<Eigen::Index>(k)); }
  double weight(std::size_t k) const { return weights_(static_cast<Eigen::Index>(k)); }
  bool uniform_weights() const { return uniform_; }

  Vec mean() const;
  double moment(double beta) const;
  EmpiricalMeasure translated(const Vec& c) const;
  EmpiricalMeasure with_atom(std::size_t k, const Vec& x) const;
  EmpiricalMeasure reweighted(Vec weights) const;

 private:
  Mat atoms_;
  Vec weights_;
  bool uniform_ = true;
};

struct MeasureMoment {
  double beta;
  double value;
};
MeasureMoment measure_moment(const EmpiricalMeasure& mu, double beta);

inline constexpr std::size_t kAssignmentLimit = 2048;
inline constexpr std::size_t kFlowLimit = 512;

double w1_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);
double w1_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);
double w_beta(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double beta);

// Minimal cost of a perfect matching; cost is n x n.
double assignment_cost(const Mat& cost);
// Minimal transport cost between weight vectors a (rows) and b (cols).
double transport_cost(const Mat& cost, const Vec& a, const Vec& b);

// CSV with a header "w,x0,...,x{d-1}" and one atom per row.
void write_csv(std::ostream& os, const EmpiricalMeasure& mu);
EmpiricalMeasure read_csv(std::istream& is);

}  // namespace levy
