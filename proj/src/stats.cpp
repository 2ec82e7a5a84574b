#include "levy/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <cmath>

#include "levy/errors.hpp"
#include "levy/rng.hpp"

namespace levy {

double pairwise_sum(const double* xs, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += xs[k];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(xs, h) + pairwise_sum(xs + h, n - h);
}

double mean(const std::vector<double>& xs) {
  require(!xs.empty(), "mean: empty sample");
  return pairwise_sum(xs.data(), xs.size()) / static_cast<double>(xs.size());
}

double variance(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  std::vector<double> sq(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) sq[k] = (xs[k] - m) * (xs[k] - m);
  return pairwise_sum(sq.data(), sq.size()) / static_cast<double>(xs.size() - 1);
}

double std_error(const std::vector<double>& xs) {
  return xs.size() < 2 ? 0.0 : std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  // Asymptotic Kolmogorov distribution with the Stephens small-sample correction.
  const double ne = na * nb / (na + nb);
  const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double q = 0.0;
  if (lam < 0.2) {
    q = 1.0;
  } else {
    for (int k = 1; k <= 200; ++k) {
      const double term = std::exp(-2.0 * k * k * lam * lam);
      q += (k % 2 ? 2.0 : -2.0) * term;
      if (term < 1e-16) break;
    }
    q = std::clamp(q, 0.0, 1.0);
  }
  return {d, q};
}

ChiSquareResult chi_square_poisson(const std::vector<std::uint64_t>& counts, double lambda) {
  require(!counts.empty() && lambda > 0.0, "chi_square_poisson: need counts and positive mean");
  const boost::math::poisson_distribution<double> pois(lambda);
  const double n = static_cast<double>(counts.size());
  const std::uint64_t kmax = *std::max_element(counts.begin(), counts.end());
  std::vector<double> observed(kmax + 1, 0.0);
  for (auto c : counts) observed[c] += 1.0;

  // Pool from the left until each bin expects >= 5 draws; the last bin takes the upper tail.
  std::vector<double> obs_bins, exp_bins;
  double o = 0.0, e = 0.0;
  for (std::uint64_t k = 0; k <= kmax; ++k) {
    o += observed[k];
    e += n * boost::math::pdf(pois, static_cast<double>(k));
    if (e >= 5.0) {
      obs_bins.push_back(o);
      exp_bins.push_back(e);
      o = e = 0.0;
    }
  }
  const double tail = n * boost::math::cdf(boost::math::complement(pois, static_cast<double>(kmax)));
  o += 0.0;
  e += tail;
  if (!obs_bins.empty()) {
    obs_bins.back() += o;
    exp_bins.back() += e;
  } else {
    obs_bins.push_back(o);
    exp_bins.push_back(e);
  }
  double stat = 0.0;
  for (std::size_t k = 0; k < obs_bins.size(); ++k) stat += std::pow(obs_bins[k] - exp_bins[k], 2) / exp_bins[k];
  const int dof = std::max(1, static_cast<int>(obs_bins.size()) - 1);
  const boost::math::chi_squared_distribution<double> chi(dof);
  return {stat, dof, boost::math::cdf(boost::math::complement(chi, stat))};
}

Interval bootstrap_mean_ci(const std::vector<double>& xs, int resamples, double level, std::uint64_t seed) {
  require(!xs.empty() && resamples >= 10, "bootstrap_mean_ci: need data and resamples");
  Rng rng(derive_seed(seed, {kTagBootstrap}));
  std::vector<double> means(static_cast<std::size_t>(resamples));
  std::vector<double> draw(xs.size());
  for (auto& m : means) {
    for (auto& v : draw) v = xs[rng.index(xs.size())];
    m = mean(draw);
  }
  std::sort(means.begin(), means.end());
  const double a = 0.5 * (1.0 - level);
  auto pick = [&](double q) {
    const double pos = q * (means.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, means.size() - 1);
    return means[lo] + (pos - lo) * (means[hi] - means[lo]);
  };
  return {pick(a), pick(1.0 - a)};
}

SlopeFit weighted_slope(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
  require(x.size() == y.size() && x.size() == w.size(), "weighted_slope: size mismatch");
  require(x.size() >= 2, "weighted_slope: need at least two points");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sw += w[k];
    sx += w[k] * x[k];
    sy += w[k] * y[k];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += w[k] * (x[k] - mx) * (x[k] - mx);
    sxy += w[k] * (x[k] - mx) * (y[k] - my);
  }
  require(sxx > 0.0, "weighted_slope: degenerate abscissae");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx, std::sqrt(1.0 / sxx), x.size()};
}

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

}  // namespace levy
