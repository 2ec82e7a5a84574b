#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "levy/config.hpp"
#include "levy/stats.hpp"

namespace levy {

struct Reference {
  double value = 0.0;      // u(mu_T) used by the sweep
  double tolerance = 0.0;  // its own error bound
  std::string backend;     // "density" or "mc"
  double density = 0.0, density_tolerance = 0.0;
  double mc = 0.0, mc_tolerance = 0.0;
  bool has_density = false, has_mc = false;
};

// u(mu_T) by the density backend (d = 1, linear u, point-mass mu0) and by M samples of
// the limit law; with "both" the two must agree or ReferenceInconsistency is thrown.
Reference compute_reference(const OUModel& model, const Functional& u, const SweepConfig& cfg, std::uint64_t seed);

struct RatePoint {
  int N = 0;
  double weak = 0.0;  // |mean u(empirical) - reference|
  Interval weak_ci{0.0, 0.0};
  double weak_noise = 0.0;  // standard error of the mean plus the reference error
  double strong = 0.0;      // mean |u(empirical) - reference|
  Interval strong_ci{0.0, 0.0};
  double strong_se = 0.0;
  double signal_to_noise = 0.0;
  bool weak_used = true;  // false when dropped by the noise floor
};

struct SlopeSummary {
  bool fitted = false;
  double slope = 0.0;
  double slope_se = 0.0;
  Interval ci{0.0, 0.0};
  double theory = 0.0;     // exponent of the upper bound
  double threshold = 0.0;  // theory + margin
  std::size_t points = 0;
  bool pass = false;  // slope <= threshold
};

struct RateReport {
  std::string functional;
  double alpha = 0.0;
  int dim = 1;
  int replications = 0;
  std::uint64_t seed = 0;
  Reference reference;
  std::vector<RatePoint> points;
  SlopeSummary weak, strong;
  bool jensen_ok = true;  // weak <= strong + 3 (CI half-widths) at every N
  bool pass = false;
};

// Weak and strong propagation-of-chaos errors over the N grid.
RateReport run_sweep(const OUModel& model, const FunctionalPtr& u, const SweepConfig& cfg, std::uint64_t seed);

// |d/dv du/dm| <= 1 on random pairs; the functional's own constants are not trusted.
bool class_c_sampler_check(const Functional& u, int dim, std::uint64_t seed, int pairs = 2000);

// W_1 between the empirical law of xs and a one-dimensional law, exactly.
double w1_to_law(std::vector<double> xs, const InitialLaw& law);

struct InitialRatePoint {
  int N = 0;
  double mean = 0.0;
  double std_error = 0.0;
  Interval ci{0.0, 0.0};
};
struct InitialRateReport {
  std::vector<InitialRatePoint> points;
  SlopeSummary slope;  // two-sided: |slope - expected| <= tolerance
  double expected = 0.0;
  bool pass = false;
};
InitialRateReport initial_data_rate(const InitialRateConfig& cfg, std::uint64_t seed);

// CSV tables and JSON summaries; numbers use 17 significant digits so that parsing
// the output reproduces the report.
std::string rate_csv(const RateReport& r);
std::string rate_json(const RateReport& r);
RateReport parse_rate_json(const std::string& text);
std::string initial_rate_csv(const InitialRateReport& r);
std::string initial_rate_json(const InitialRateReport& r);

// Writes the files for one report into dir (created if needed); throws std::runtime_error
// naming the path on IO failure.
void write_text(const std::string& dir, const std::string& name, const std::string& content);

}  // namespace levy
