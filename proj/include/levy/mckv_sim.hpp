#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "levy/linflow.hpp"
#include "levy/measures.hpp"
#include "levy/rng.hpp"
#include "levy/stable_noise.hpp"
#include "levy/types.hpp"

namespace levy {

// Initial laws with closed-form moments. Pareto is symmetric per coordinate with
// |X| = scale (U^{-1/tail} - 1), so moments of order q exist iff q < tail.
struct InitialLaw {
  enum class Kind { PointMass, Uniform, Gaussian, Pareto };
  Kind kind = Kind::PointMass;
  Vec location;  // point mass position or Gaussian mean; fixes the dimension
  double lo = 0.0, hi = 1.0;
  double scale = 1.0;  // Gaussian standard deviation or Pareto scale
  double tail = 2.0;

  static InitialLaw point_mass(Vec x);
  static InitialLaw uniform(int dim, double lo, double hi);
  static InitialLaw gaussian(Vec mean, double sd);
  static InitialLaw pareto(int dim, double tail, double scale = 1.0);

  int dim() const { return static_cast<int>(location.size()); }
  Vec sample(Rng& rng) const;
  Vec mean() const;
  // Supremum of the orders q with a finite q-moment.
  double moment_order_bound() const;
  std::string describe() const;

  // One-dimensional laws: F, F^{-1}, and H(x) = E (x - X)_+ = int_{-inf}^x F.
  double cdf(double x) const;
  double quantile(double p) const;
  double cdf_integral(double x) const;
};

struct OUModel {
  MatrixFlow flow;
  StableSpec noise;
  InitialLaw mu0;
  double T = 1.0;
  double beta = 1.0;  // moment order for the chaos experiments

  OUModel(MatrixFlow flow, StableSpec noise, InitialLaw mu0, double T = 1.0, double beta = 1.0);
  int dim() const { return flow.dim(); }
  // alpha in (1,2), beta in [1, alpha), and a finite beta-moment of mu0, both analytic
  // and on a pilot sample.
  void validate_chaos_regime(std::uint64_t pilot_seed = 1) const;
};

struct SimOptions {
  int steps = 64;             // micro-grid for the Gaussian stand-in and for snapshots
  bool trunc_at_N = true;     // truncation level equals the particle count
  double trunc_level = kInf;  // used when trunc_at_N is false; capped by the model's own level
  bool snapshots = false;
};

struct ParticlePath {
  int N = 0;
  double trunc_level = kInf;
  std::uint64_t seed = 0;
  Mat terminal;  // d x N
  std::vector<double> times;
  std::vector<Mat> snapshots;  // d x N per time when requested

  EmpiricalMeasure terminal_law() const { return EmpiricalMeasure(terminal); }
  Vec terminal_mean() const;
};

// Per-particle randomness. Jumps are drawn at the model's own truncation level and
// thinned to lower levels by |z| < level, so every level shares one stream.
struct ParticleNoise {
  std::vector<JumpEvent> jumps;  // time-sorted
  Mat normals;                   // 3d x steps standard normals for (dW, I_A, I_{A+A'})
};
ParticleNoise particle_noise(const OUModel& model, std::uint64_t seed, std::uint64_t key, int steps);
Vec particle_initial_state(const OUModel& model, std::uint64_t seed, std::uint64_t key);

// Compensator drift -int_{eps <= |z| < level} z dnu of the fully compensated noise.
Vec compensator_drift(const StableSpec& spec, double level);

// Truncation level used by a run with N particles.
double effective_level(const OUModel& model, int N, const SimOptions& opt);

ParticlePath simulate_particles_exact(const OUModel& model, int N, const SimOptions& opt, std::uint64_t seed);
// Particle k draws its randomness under keys[k]; permuting keys permutes the particles.
ParticlePath simulate_particles_exact(const OUModel& model, const std::vector<std::uint64_t>& keys,
                                      const SimOptions& opt, std::uint64_t seed);

// Jump-adapted Euler on `steps` steps; opt.steps must be a multiple of it so that the
// Brownian increments are sums of the exact solver's.
ParticlePath simulate_particles_euler(const OUModel& model, int N, int steps, const SimOptions& opt,
                                      std::uint64_t seed);

// M draws of e^{TA} xi + K_T m0 + Y_T with the noise truncated at `level`.
EmpiricalMeasure sample_limit_law(const OUModel& model, double level, std::size_t M, std::uint64_t seed);

// Terminal states of nested systems sharing particle streams: system l uses particles
// 0..sizes[l]-1 and truncation level levels[l]. One micro-step (exact terminal law).
std::vector<Mat> simulate_nested_terminal(const OUModel& model, const std::vector<int>& sizes,
                                          const std::vector<double>& levels, std::uint64_t seed);

struct GapEstimate {
  int level;
  double mean;
  double std_error;
};
// E W_1 between N-particle runs truncated at N and untruncated, coupled through the
// same streams; replications use nested particles across the levels.
std::vector<GapEstimate> truncation_gap(const OUModel& model, const std::vector<int>& levels, int M,
                                        std::uint64_t seed);

}  // namespace levy
