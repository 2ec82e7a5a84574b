#include "levy/mckv_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "levy/errors.hpp"
#include "levy/stats.hpp"

namespace levy {

// ---------------------------------------------------------------- initial laws

InitialLaw InitialLaw::point_mass(Vec x) {
  InitialLaw l;
  l.kind = Kind::PointMass;
  l.location = std::move(x);
  require(l.location.size() >= 1, "InitialLaw: empty location");
  return l;
}

InitialLaw InitialLaw::uniform(int dim, double lo, double hi) {
  require(dim >= 1 && hi > lo, "InitialLaw::uniform: need dim >= 1 and lo < hi");
  InitialLaw l;
  l.kind = Kind::Uniform;
  l.location = Vec::Zero(dim);
  l.lo = lo;
  l.hi = hi;
  return l;
}

InitialLaw InitialLaw::gaussian(Vec mean, double sd) {
  require(sd > 0.0, "InitialLaw::gaussian: sd must be positive");
  InitialLaw l;
  l.kind = Kind::Gaussian;
  l.location = std::move(mean);
  l.scale = sd;
  return l;
}

InitialLaw InitialLaw::pareto(int dim, double tail, double scale) {
  require(dim >= 1 && tail > 0.0 && scale > 0.0, "InitialLaw::pareto: need dim >= 1, tail > 0, scale > 0");
  InitialLaw l;
  l.kind = Kind::Pareto;
  l.location = Vec::Zero(dim);
  l.tail = tail;
  l.scale = scale;
  return l;
}

Vec InitialLaw::sample(Rng& rng) const {
  const int d = dim();
  Vec x(d);
  switch (kind) {
    case Kind::PointMass:
      return location;
    case Kind::Uniform:
      for (int i = 0; i < d; ++i) x(i) = lo + (hi - lo) * rng.uniform();
      return x;
    case Kind::Gaussian:
      for (int i = 0; i < d; ++i) x(i) = location(i) + scale * rng.normal();
      return x;
    case Kind::Pareto:
      for (int i = 0; i < d; ++i) {
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        x(i) = sign * scale * std::expm1(-std::log(rng.uniform()) / tail);
      }
      return x;
  }
  return x;
}

Vec InitialLaw::mean() const {
  switch (kind) {
    case Kind::PointMass:
    case Kind::Gaussian:
      return location;
    case Kind::Uniform:
      return Vec::Constant(dim(), 0.5 * (lo + hi));
    case Kind::Pareto:
      require(tail > 1.0, "InitialLaw: Pareto mean needs tail > 1");
      return Vec::Zero(dim());
  }
  return location;
}

double InitialLaw::moment_order_bound() const { return kind == Kind::Pareto ? tail : kInf; }

std::string InitialLaw::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::PointMass:
      os << "point_mass";
      break;
    case Kind::Uniform:
      os << "uniform(" << lo << "," << hi << ")";
      break;
    case Kind::Gaussian:
      os << "gaussian(sd=" << scale << ")";
      break;
    case Kind::Pareto:
      os << "pareto(tail=" << tail << ",scale=" << scale << ")";
      break;
  }
  return os.str();
}

double InitialLaw::cdf(double x) const {
  require(dim() == 1, "InitialLaw::cdf: one-dimensional law required");
  switch (kind) {
    case Kind::PointMass:
      return x >= location(0) ? 1.0 : 0.0;
    case Kind::Uniform:
      return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
    case Kind::Gaussian:
      return 0.5 * std::erfc(-(x - location(0)) / (scale * std::numbers::sqrt2));
    case Kind::Pareto: {
      const double t = 0.5 * std::pow(1.0 + std::abs(x) / scale, -tail);
      return x < 0.0 ? t : 1.0 - t;
    }
  }
  return 0.0;
}

double InitialLaw::quantile(double p) const {
  require(dim() == 1, "InitialLaw::quantile: one-dimensional law required");
  require(p > 0.0 && p < 1.0, "InitialLaw::quantile: p must lie in (0,1)");
  switch (kind) {
    case Kind::PointMass:
      return location(0);
    case Kind::Uniform:
      return lo + p * (hi - lo);
    case Kind::Gaussian:
      return location(0) + scale * normal_quantile(p);
    case Kind::Pareto:
      if (p < 0.5) return -scale * std::expm1(-std::log(2.0 * p) / tail);
      return scale * std::expm1(-std::log(2.0 * (1.0 - p)) / tail);
  }
  return 0.0;
}

double InitialLaw::cdf_integral(double x) const {
  require(dim() == 1, "InitialLaw::cdf_integral: one-dimensional law required");
  switch (kind) {
    case Kind::PointMass:
      return std::max(0.0, x - location(0));
    case Kind::Uniform:
      if (x <= lo) return 0.0;
      if (x >= hi) return 0.5 * (hi - lo) + (x - hi);
      return 0.5 * (x - lo) * (x - lo) / (hi - lo);
    case Kind::Gaussian: {
      const double z = (x - location(0)) / scale;
      const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
      return scale * (z * 0.5 * std::erfc(-z / std::numbers::sqrt2) + pdf);
    }
    case Kind::Pareto: {
      require(tail > 1.0, "InitialLaw::cdf_integral: Pareto needs tail > 1");
      const double g = std::pow(1.0 + std::abs(x) / scale, 1.0 - tail);
      const double c = 0.5 * scale / (tail - 1.0);
      if (x <= 0.0) return c * g;
      return c + x - c * (1.0 - g);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------- model

OUModel::OUModel(MatrixFlow flow_, StableSpec noise_, InitialLaw mu0_, double T_, double beta_)
    : flow(std::move(flow_)), noise(std::move(noise_)), mu0(std::move(mu0_)), T(T_), beta(beta_) {
  require(noise.dim() == flow.dim() && mu0.dim() == flow.dim(), "OUModel: dimension mismatch");
  require(T > 0.0, "OUModel: horizon must be positive");
  require(beta > 0.0, "OUModel: beta must be positive");
}

void OUModel::validate_chaos_regime(std::uint64_t pilot_seed) const {
  require(noise.alpha > 1.0 && noise.alpha < 2.0, "OUModel: chaos experiments need alpha in (1,2)");
  require(beta >= 1.0 && beta < noise.alpha, "OUModel: beta must lie in [1, alpha)");
  require(mu0.moment_order_bound() > beta, "OUModel: initial law lacks a finite beta-moment");
  Rng rng(derive_seed(pilot_seed, {kTagInitial, kTagMisc}));
  double acc = 0.0;
  for (int k = 0; k < 4096; ++k) acc += std::pow(mu0.sample(rng).norm(), beta);
  require(std::isfinite(acc), "OUModel: pilot beta-moment is not finite");
}

Vec ParticlePath::terminal_mean() const { return terminal.rowwise().mean(); }

// ---------------------------------------------------------------- noise

Vec compensator_drift(const StableSpec& spec, double level) {
  const double hi = std::min(level, spec.trunc);
  if (spec.symmetric || spec.spectral.atoms().empty() || hi <= spec.eps) return Vec::Zero(spec.dim());
  require(!(std::isinf(hi) && spec.alpha <= 1.0), "compensator_drift: diverges for alpha <= 1 without truncation");
  return -levy_annulus_drift(spec, spec.eps, hi);
}

double effective_level(const OUModel& model, int N, const SimOptions& opt) {
  return std::min(opt.trunc_at_N ? static_cast<double>(N) : opt.trunc_level, model.noise.trunc);
}

ParticleNoise particle_noise(const OUModel& model, std::uint64_t seed, std::uint64_t key, int steps) {
  require(steps >= 1, "particle_noise: steps must be positive");
  ParticleNoise pn;
  Rng jr(derive_seed(seed, {key, kTagJumps}));
  pn.jumps = sample_jump_stream(model.noise, model.T, jr).events;
  Rng gr(derive_seed(seed, {key, kTagGauss}));
  pn.normals.resize(3 * model.dim(), steps);
  for (int k = 0; k < steps; ++k)
    for (int r = 0; r < 3 * model.dim(); ++r) pn.normals(r, k) = gr.normal();
  return pn;
}

Vec particle_initial_state(const OUModel& model, std::uint64_t seed, std::uint64_t key) {
  Rng rng(derive_seed(seed, {key, kTagInitial}));
  return model.mu0.sample(rng);
}

namespace {

// Exact one-step maps for a micro-step of length h.
struct StepKernels {
  Mat eA, eAA;          // e^{hA}, e^{h(A+A')}
  Mat phiA_B, phiAA_B;  // int_0^h e^{sM} ds B
  Mat rootW;            // square root of h Sigma_eps
  Mat gain;             // E[(I_A, I_AA) | dW] = gain dW
  Mat resid;            // factor of the conditional covariance
};

Mat pseudo_inverse_psd(const Mat& q) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (q + q.transpose()));
  const Vec& ev = es.eigenvalues();
  const double cut = 1e-13 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  Vec inv = Vec::Zero(ev.size());
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i) > cut) inv(i) = 1.0 / ev(i);
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

StepKernels make_step(const OUModel& model, double h) {
  const int d = model.dim();
  const Mat& A = model.flow.A;
  const Mat AA = model.flow.A + model.flow.Aprime;
  const Mat& B = model.flow.B;
  StepKernels k;
  k.eA = expm(h * A);
  k.eAA = expm(h * AA);
  k.phiA_B = integrated_expm(A, h) * B;
  k.phiAA_B = integrated_expm(AA, h) * B;

  // Joint covariance of (dW, int e^{(h-s)A} B dW, int e^{(h-s)(A+A')} B dW).
  const Mat sigma = model.noise.spectral.atoms().empty() ? Mat::Zero(d, d) : small_jump_gaussian_cov(model.noise);
  Mat big = Mat::Zero(3 * d, 3 * d);
  big.block(d, d, d, d) = A;
  big.block(2 * d, 2 * d, d, d) = AA;
  Mat load(3 * d, d);
  load << Mat::Identity(d, d), B, B;
  const Mat C = integrated_congruence(big, load * sigma * load.transpose(), h);
  const Mat Cww = C.topLeftCorner(d, d);
  const Mat Ciw = C.bottomLeftCorner(2 * d, d);
  const Mat Cii = C.bottomRightCorner(2 * d, 2 * d);
  k.rootW = psd_factor(Cww);
  k.gain = Ciw * pseudo_inverse_psd(Cww);
  k.resid = psd_factor(Cii - k.gain * Ciw.transpose());
  return k;
}

// e^{dt M} v with a scalar shortcut.
inline Vec propagate(const Mat& M, double dt, const Vec& v) {
  if (M.rows() == 1) return Vec::Constant(1, std::exp(M(0, 0) * dt) * v(0));
  return expm(dt * M) * v;
}

Vec column_mean(const Mat& x) {
  Vec m = Vec::Zero(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) m += x.col(j);
  return m / static_cast<double>(x.cols());
}

}  // namespace

// ---------------------------------------------------------------- exact solver

ParticlePath simulate_particles_exact(const OUModel& model, const std::vector<std::uint64_t>& keys,
                                      const SimOptions& opt, std::uint64_t seed) {
  const int N = static_cast<int>(keys.size());
  require(N >= 1, "simulate_particles_exact: need at least one particle");
  require(opt.steps >= 1, "simulate_particles_exact: steps must be positive");
  const int d = model.dim();
  const int K = opt.steps;
  const double T = model.T, h = T / K;
  const double level = effective_level(model, N, opt);
  const Vec c = compensator_drift(model.noise, level);
  const StepKernels sk = make_step(model, h);
  const Mat& A = model.flow.A;
  const Mat AA = model.flow.A + model.flow.Aprime;
  const Mat& B = model.flow.B;
  const Vec driftA = sk.phiA_B * c, driftAA = sk.phiAA_B * c;

  Mat X0(d, N), Y = Mat::Zero(d, N), U = Mat::Zero(d, N);
  std::vector<Mat> Ysnap, Usnap;
  if (opt.snapshots) {
    Ysnap.assign(K + 1, Mat::Zero(d, N));
    Usnap.assign(K + 1, Mat::Zero(d, N));
  }
  for (int i = 0; i < N; ++i) {
    X0.col(i) = particle_initial_state(model, seed, keys[i]);
    const ParticleNoise pn = particle_noise(model, seed, keys[i], K);
    Vec y = Vec::Zero(d), u = Vec::Zero(d);
    std::size_t next = 0;
    for (int k = 0; k < K; ++k) {
      const Vec g = pn.normals.col(k);
      const Vec dW = sk.rootW * g.head(d);
      const Vec I = sk.gain * dW + sk.resid * g.tail(2 * d);
      y = sk.eA * y + I.head(d) + driftA;
      u = sk.eAA * u + I.tail(d) + driftAA;
      const double t1 = k + 1 == K ? T : (k + 1) * h;
      for (; next < pn.jumps.size() && pn.jumps[next].time <= t1; ++next) {
        const JumpEvent& ev = pn.jumps[next];
        if (ev.mark.norm() >= level) continue;
        const Vec bz = B * ev.mark;
        y += propagate(A, t1 - ev.time, bz);
        u += propagate(AA, t1 - ev.time, bz);
      }
      if (opt.snapshots) {
        Ysnap[k + 1].col(i) = y;
        Usnap[k + 1].col(i) = u;
      }
    }
    Y.col(i) = y;
    U.col(i) = u;
  }

  const Vec S0 = column_mean(X0);
  auto assemble = [&](double t, const Mat& y, const Mat& u) {
    const Mat eAt = expm(t * A);
    const Vec shift = coupling_kernel(model.flow, t) * S0 + column_mean(u) - column_mean(y);
    Mat x = eAt * X0 + y;
    x.colwise() += shift;
    return x;
  };

  ParticlePath path;
  path.N = N;
  path.trunc_level = level;
  path.seed = seed;
  path.terminal = assemble(T, Y, U);
  if (opt.snapshots) {
    for (int k = 0; k <= K; ++k) {
      const double t = k == K ? T : k * h;
      path.times.push_back(t);
      path.snapshots.push_back(k == K ? path.terminal : assemble(t, Ysnap[k], Usnap[k]));
    }
  }
  return path;
}

ParticlePath simulate_particles_exact(const OUModel& model, int N, const SimOptions& opt, std::uint64_t seed) {
  require(N >= 1, "simulate_particles_exact: need at least one particle");
  std::vector<std::uint64_t> keys(N);
  for (int i = 0; i < N; ++i) keys[i] = static_cast<std::uint64_t>(i);
  return simulate_particles_exact(model, keys, opt, seed);
}

// ---------------------------------------------------------------- Euler solver

ParticlePath simulate_particles_euler(const OUModel& model, int N, int steps, const SimOptions& opt,
                                      std::uint64_t seed) {
  require(N >= 1, "simulate_particles_euler: need at least one particle");
  require(steps >= 1 && opt.steps >= steps && opt.steps % steps == 0,
          "simulate_particles_euler: steps must divide the micro-step count");
  const int d = model.dim();
  const int ratio = opt.steps / steps;
  const double T = model.T, H = T / steps;
  const double level = effective_level(model, N, opt);
  const Vec c = compensator_drift(model.noise, level);
  const StepKernels sk = make_step(model, T / opt.steps);
  const Mat& A = model.flow.A;
  const Mat& Ap = model.flow.Aprime;
  const Mat& B = model.flow.B;
  const Vec Bc = B * c;

  struct Event {
    double time;
    int particle;
    Vec mark;
  };
  std::vector<Event> events;
  Mat X(d, N);
  std::vector<Mat> dW(N, Mat::Zero(d, steps));
  for (int i = 0; i < N; ++i) {
    X.col(i) = particle_initial_state(model, seed, static_cast<std::uint64_t>(i));
    const ParticleNoise pn = particle_noise(model, seed, static_cast<std::uint64_t>(i), opt.steps);
    for (const auto& ev : pn.jumps)
      if (ev.mark.norm() < level) events.push_back({ev.time, i, ev.mark});
    for (int k = 0; k < opt.steps; ++k) dW[i].col(k / ratio) += sk.rootW * pn.normals.col(k).head(d);
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.time < b.time; });

  auto drift_step = [&](double dt) {
    if (dt <= 0.0) return;
    const Vec S = column_mean(X);
    Mat f = A * X;
    f.colwise() += Ap * S + Bc;
    X += dt * f;
  };

  ParticlePath path;
  path.N = N;
  path.trunc_level = level;
  path.seed = seed;
  if (opt.snapshots) {
    path.times.push_back(0.0);
    path.snapshots.push_back(X);
  }
  std::size_t next = 0;
  double t = 0.0;
  for (int j = 0; j < steps; ++j) {
    const double t1 = j + 1 == steps ? T : (j + 1) * H;
    for (; next < events.size() && events[next].time <= t1; ++next) {
      drift_step(events[next].time - t);
      t = events[next].time;
      X.col(events[next].particle) += B * events[next].mark;
    }
    drift_step(t1 - t);
    t = t1;
    for (int i = 0; i < N; ++i) X.col(i) += B * dW[i].col(j);
    if (opt.snapshots) {
      path.times.push_back(t1);
      path.snapshots.push_back(X);
    }
  }
  path.terminal = X;
  return path;
}

// ---------------------------------------------------------------- limit law

EmpiricalMeasure sample_limit_law(const OUModel& model, double level, std::size_t M, std::uint64_t seed) {
  require(M >= 1, "sample_limit_law: need at least one sample");
  const int d = model.dim();
  const double T = model.T;
  level = std::min(level, model.noise.trunc);
  const Vec c = compensator_drift(model.noise, level);
  const StepKernels sk = make_step(model, T);
  const Mat eAT = expm(T * model.flow.A);
  const Vec base = coupling_kernel(model.flow, T) * model.mu0.mean() + sk.phiA_B * c;
  Mat out(d, static_cast<Eigen::Index>(M));
  for (std::size_t k = 0; k < M; ++k) {
    const ParticleNoise pn = particle_noise(model, seed, k, 1);
    const Vec g = pn.normals.col(0);
    const Vec dW = sk.rootW * g.head(d);
    Vec y = (sk.gain * dW + sk.resid * g.tail(2 * d)).head(d);
    for (const auto& ev : pn.jumps)
      if (ev.mark.norm() < level) y += propagate(model.flow.A, T - ev.time, model.flow.B * ev.mark);
    out.col(static_cast<Eigen::Index>(k)) = eAT * particle_initial_state(model, seed, k) + base + y;
  }
  return EmpiricalMeasure(out);
}

// ---------------------------------------------------------------- nested systems

std::vector<Mat> simulate_nested_terminal(const OUModel& model, const std::vector<int>& sizes,
                                          const std::vector<double>& levels, std::uint64_t seed) {
  require(!sizes.empty() && sizes.size() == levels.size(), "simulate_nested_terminal: sizes and levels must match");
  const int d = model.dim();
  const double T = model.T;
  const int Nmax = *std::max_element(sizes.begin(), sizes.end());
  require(*std::min_element(sizes.begin(), sizes.end()) >= 1, "simulate_nested_terminal: sizes must be positive");

  std::vector<double> distinct;
  for (double L : levels) distinct.push_back(std::min(L, model.noise.trunc));
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const int q = static_cast<int>(distinct.size());
  std::vector<int> level_index(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l)
    level_index[l] = static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), std::min(levels[l], model.noise.trunc)) -
                                      distinct.begin());

  const StepKernels sk = make_step(model, T);
  const Mat& A = model.flow.A;
  const Mat AA = model.flow.A + model.flow.Aprime;
  const Mat& B = model.flow.B;
  std::vector<Vec> driftA(q), driftAA(q);
  for (int b = 0; b < q; ++b) {
    const Vec c = compensator_drift(model.noise, distinct[b]);
    driftA[b] = sk.phiA_B * c;
    driftAA[b] = sk.phiAA_B * c;
  }
  const auto& atoms = model.noise.spectral.atoms();
  const bool has_jumps = !atoms.empty() && model.noise.trunc > model.noise.eps;
  const double rate = has_jumps ? T * levy_annulus_mass(model.noise, model.noise.eps, model.noise.trunc) : 0.0;

  Mat X0(d, Nmax);
  // Y[b], U[b]: d x Nmax at level distinct[b].
  std::vector<Mat> Y(q, Mat(d, Nmax)), U(q, Mat(d, Nmax));
  std::vector<Vec> bucketY(q), bucketU(q);
  for (int i = 0; i < Nmax; ++i) {
    const auto key = static_cast<std::uint64_t>(i);
    X0.col(i) = particle_initial_state(model, seed, key);
    for (int b = 0; b < q; ++b) {
      bucketY[b] = Vec::Zero(d);
      bucketU[b] = Vec::Zero(d);
    }
    // Same draws, in the same order, as sample_jump_stream.
    Rng jr(derive_seed(seed, {key, kTagJumps}));
    if (has_jumps) {
      const std::uint64_t n = jr.poisson(rate);
      for (std::uint64_t e = 0; e < n; ++e) {
        const double tau = T * jr.uniform();
        const JumpDraw jd = sample_jump_draw(model.noise, jr);
        const int b = static_cast<int>(std::upper_bound(distinct.begin(), distinct.end(), jd.radius) - distinct.begin());
        if (b >= q) continue;
        const Vec bz = jd.radius * (B * atoms[jd.atom].theta);
        bucketY[b] += propagate(A, T - tau, bz);
        bucketU[b] += propagate(AA, T - tau, bz);
      }
    }
    Rng gr(derive_seed(seed, {key, kTagGauss}));
    Vec g(3 * d);
    for (int r = 0; r < 3 * d; ++r) g(r) = gr.normal();
    const Vec dW = sk.rootW * g.head(d);
    const Vec I = sk.gain * dW + sk.resid * g.tail(2 * d);
    Vec accY = I.head(d), accU = I.tail(d);
    for (int b = 0; b < q; ++b) {
      accY += bucketY[b];
      accU += bucketU[b];
      Y[b].col(i) = accY + driftA[b];
      U[b].col(i) = accU + driftAA[b];
    }
  }

  const Mat eAT = expm(T * A);
  const Mat KT = coupling_kernel(model.flow, T);
  std::vector<Mat> out;
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    const int N = sizes[l], b = level_index[l];
    const Mat x0 = X0.leftCols(N);
    const Vec shift = KT * column_mean(x0) + column_mean(U[b].leftCols(N)) - column_mean(Y[b].leftCols(N));
    Mat x = eAT * x0 + Y[b].leftCols(N);
    x.colwise() += shift;
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<GapEstimate> truncation_gap(const OUModel& model, const std::vector<int>& levels, int M,
                                        std::uint64_t seed) {
  require(M >= 2, "truncation_gap: need at least two replications");
  require(!levels.empty(), "truncation_gap: empty level list");
  std::vector<int> sizes;
  std::vector<double> lv;
  for (int N : levels) {
    require(N >= 1, "truncation_gap: levels must be positive");
    sizes.push_back(N);
    lv.push_back(static_cast<double>(N));
    sizes.push_back(N);
    lv.push_back(model.noise.trunc);
  }
  std::vector<std::vector<double>> gaps(levels.size());
  for (int r = 0; r < M; ++r) {
    const auto xs = simulate_nested_terminal(model, sizes, lv, derive_seed(seed, {static_cast<std::uint64_t>(r), kTagMisc}));
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const EmpiricalMeasure a(xs[2 * l]), b(xs[2 * l + 1]);
      gaps[l].push_back(model.dim() == 1 ? w1_1d(a, b) : w1_exact(a, b));
    }
  }
  std::vector<GapEstimate> out;
  for (std::size_t l = 0; l < levels.size(); ++l) out.push_back({levels[l], mean(gaps[l]), std_error(gaps[l])});
  return out;
}

}  // namespace levy
