#pragma once

#include <optional>
#include <string>
#include <vector>

#include "levy/density_fourier.hpp"
#include "levy/functionals.hpp"
#include "levy/ito_check.hpp"
#include "levy/mckv_sim.hpp"

namespace levy {

struct FunctionalConfig {
  std::string kind = "linear";  // linear | smoothed_power | quadratic
  ScalarField field = ScalarField::soft_abs(1);
  double beta = 1.2, eps = 0.1;  // smoothed_power
  double scale = 1.0;            // quadratic
  Vec shift;                     // quadratic
  bool class_c = false;          // require the class-C Lipschitz bounds

  FunctionalPtr make() const;
};

struct SimulateConfig {
  int particles = 256;
  std::string scheme = "exact";  // exact | euler
  int euler_steps = 16;
  SimOptions options;
};

struct SweepConfig {
  std::vector<int> n = {16, 32, 64, 128, 256, 512, 1024};
  int replications = 2000;
  std::size_t reference_samples = 2000000;
  std::string reference = "both";  // density | mc | both
  bool common_random_numbers = true;
  int resamples = 1000;
  double level = 0.95;
  double slope_margin = 0.15;
  double min_signal_to_noise = 3.0;
};

struct InitialRateConfig {
  InitialLaw law = InitialLaw::uniform(1, 0.0, 1.0);
  std::vector<int> n = {32, 64, 128, 256, 512, 1024, 2048, 4096};
  int replications = 500;
  double expected_slope = -0.5;
  double slope_tolerance = 0.1;
};

struct DensityConfig {
  std::vector<double> times = {0.25, 1.0, 4.0};
  double trunc = kInf;
  GridParams grid;
};

struct PdeConfig {
  std::vector<double> times = {0.2, 0.35, 0.5, 0.65, 0.8};
  int measures = 4;
  int atoms = 5;
  double atom_scale = 1.0;
  double h = 0.02;
  double trunc = 3.0;
  int constancy_points = 16;
};

struct GapConfig {
  std::vector<int> n = {8, 16, 32, 64, 128, 256};
  double trunc = 4.0;
  double atom_scale = 1.0;
  double slope_tolerance = 0.2;
};

// Parsed TOML experiment file (schema = 1). Sections are optional; each command
// requires its own.
struct Config {
  int schema = 1;
  std::string source;
  std::optional<OUModel> model;
  std::optional<FunctionalConfig> functional;
  std::optional<SimulateConfig> simulate;
  std::optional<SweepConfig> sweep;
  std::optional<InitialRateConfig> initial_rate;
  std::optional<DensityConfig> density;
  std::optional<ItoExperiment> ito;
  std::optional<PdeConfig> pde;
  std::optional<GapConfig> generator_gap;
};

// Throws ConfigError with the offending key on any unknown key or bad value.
Config load_config(const std::string& path);
Config parse_config(const std::string& text, const std::string& source = "<string>");

}  // namespace levy
