#pragma once

#include <cstdint>
#include <vector>

#include "levy/types.hpp"

namespace levy {

// Pairwise summation; the result depends only on the order of xs.
double pairwise_sum(const double* xs, std::size_t n);
double mean(const std::vector<double>& xs);
double variance(const std::vector<double>& xs);  // unbiased
double std_error(const std::vector<double>& xs);

struct KsResult {
  double statistic;
  double p_value;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct ChiSquareResult {
  double statistic;
  int dof;
  double p_value;
};
// Counts against Poisson(mean), bins pooled until the expected count is >= 5.
ChiSquareResult chi_square_poisson(const std::vector<std::uint64_t>& counts, double mean);

struct Interval {
  double lo;
  double hi;
};
// Percentile bootstrap interval for the mean.
Interval bootstrap_mean_ci(const std::vector<double>& xs, int resamples, double level, std::uint64_t seed);

struct SlopeFit {
  double slope;
  double intercept;
  double slope_se;
  std::size_t points;
};
// Weighted least squares of y on x; weights are inverse variances.
SlopeFit weighted_slope(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w);

double normal_quantile(double p);

}  // namespace levy
