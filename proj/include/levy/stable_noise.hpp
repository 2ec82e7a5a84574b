#pragma once

#include <limits>
#include <vector>

#include "levy/rng.hpp"
#include "levy/types.hpp"

namespace levy {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct SpectralAtom {
  Vec theta;  // unit direction
  double weight;
};

// Discrete spherical part of nu(dz) = dmu(theta) dr / r^{1+alpha}.
class SpectralMeasure {
 public:
  SpectralMeasure(int dim, std::vector<SpectralAtom> atoms);

  // Atoms at +1 and -1 in d=1, each carrying half of the total weight.
  static SpectralMeasure symmetric_1d(double total_weight);
  // 2k equally spaced directions on the unit circle (d=2), or the pair in d=1.
  static SpectralMeasure isotropic(int dim, int directions, double total_weight);

  int dim() const { return dim_; }
  const std::vector<SpectralAtom>& atoms() const { return atoms_; }
  double total_weight() const;
  Mat second_moment() const;      // sum_i w_i theta_i theta_i^T
  double nondegeneracy() const;   // smallest eigenvalue of second_moment()
  bool is_symmetric(double tol = 1e-12) const;
  void require_nondegenerate(double eta) const;

 private:
  int dim_;
  std::vector<SpectralAtom> atoms_;
};

struct StableSpec {
  double alpha;
  SpectralMeasure spectral;
  double eps = 1e-2;     // jumps below eps are replaced by a Gaussian
  double trunc = kInf;   // jumps of size >= trunc are removed
  bool symmetric = false;

  StableSpec(double alpha, SpectralMeasure spectral, double eps = 1e-2, double trunc = kInf,
             bool symmetric = false);
  StableSpec with_trunc(double level) const;
  StableSpec with_eps(double e) const;
  int dim() const { return spectral.dim(); }
};

// nu({r0 <= |z| < r1}).
double levy_annulus_mass(const StableSpec& spec, double r0, double r1);
// int_{r0 <= |z| < r1} z dnu(z); exactly zero for symmetric specs.
Vec levy_annulus_drift(const StableSpec& spec, double r0, double r1);
// int_0^infinity (1 - cos u) u^{-1-alpha} du.
double stable_kappa(double alpha);

// Evaluates int_0^X (cos u - 1) u^{-1-alpha} du and int_0^X (sin u - u) u^{-1-alpha} du.
class RadialSymbol {
 public:
  explicit RadialSymbol(double alpha);
  double cos_part(double x) const;
  double sin_part(double x) const;  // +inf magnitude when it diverges
  double alpha() const { return alpha_; }

 private:
  double alpha_;
  double c_anchor_, s_anchor_;
  cplx e_anchor_;
};

// psi_delta(lambda) = int_{|z|<delta} [e^{i<lambda,z>} - 1 - i<lambda,z>] dnu(z).
cplx truncated_symbol(const StableSpec& spec, const Vec& lambda, double delta);
cplx truncated_symbol(const StableSpec& spec, const RadialSymbol& rs, const Vec& lambda, double delta);

struct JumpEvent {
  double time;
  Vec mark;
};

struct JumpEventStream {
  std::vector<JumpEvent> events;    // eps <= |mark| < trunc, time-sorted
  Vec small_compensator;            // -int_{eps<=|z|<min(1,trunc)} z dnu, always applied
  Vec big_compensator;              // -int_{max(1,eps)<=|z|<trunc} z dnu, NaN if divergent
  Vec total_compensator() const { return small_compensator + big_compensator; }
};

JumpEventStream sample_jump_stream(const StableSpec& spec, double T, Rng& rng);

// One mark with eps <= |z| < trunc, as atom index and radius; the mark is radius * theta[atom].
struct JumpDraw {
  std::size_t atom;
  double radius;
};
JumpDraw sample_jump_draw(const StableSpec& spec, Rng& rng);
Vec sample_jump_mark(const StableSpec& spec, Rng& rng);
double sample_radius(double alpha, double r0, double r1, double u);

// int_{|z|<eps} z z^T dnu.
Mat small_jump_gaussian_cov(const StableSpec& spec);

enum class Compensation { Full, LevyIto };

// Z_T in one shot: big jumps, compensator drift, and the Gaussian stand-in.
Vec sample_increment(const StableSpec& spec, double T, Compensation mode, Rng& rng);

// Symmetric alpha-stable draws with E e^{i lambda X} = exp(-scale^alpha |lambda|^alpha).
std::vector<double> sample_stable_oracle_1d(double alpha, double scale, std::size_t n, Rng& rng);

// Scale of Z_t for a symmetric one-dimensional untruncated spec.
double stable_scale_1d(const StableSpec& spec, double t);

}  // namespace levy
