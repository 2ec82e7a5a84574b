// Runs the twelve acceptance criteria and prints one PASS/FAIL line for each.
// Usage: acceptance --cli <path to levy-chaos> [--only 3,4] [--work <dir>]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "levy/chaos_harness.hpp"
#include "levy/density_fourier.hpp"
#include "levy/errors.hpp"
#include "levy/ito_check.hpp"
#include "levy/kolmogorov.hpp"
#include "levy/linflow.hpp"
#include "levy/quadrature.hpp"
#include "levy/stats.hpp"

using namespace levy;
namespace fs = std::filesystem;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

OUModel scalar_ou(double a, double ap, double b, double alpha, double eps, double trunc, InitialLaw mu0) {
  return OUModel(MatrixFlow::scalar(a, ap, b), StableSpec(alpha, SpectralMeasure::symmetric_1d(1.0), eps, trunc, true),
                 std::move(mu0), 1.0, 1.2);
}

// 1. Decomposition sampler against the Chambers-Mallows-Stuck oracle.
Outcome sampler_fidelity() {
  Outcome o{true, "KS p-values"};
  const std::size_t n = 100000;
  for (double alpha : {1.3, 1.5, 1.7}) {
    const StableSpec spec(alpha, SpectralMeasure::symmetric_1d(1.0), 1e-2, kInf, true);
    Rng rng(derive_seed(101, {static_cast<std::uint64_t>(alpha * 10), kTagJumps}));
    std::vector<double> a(n);
    for (auto& x : a) x = sample_increment(spec, 1.0, Compensation::Full, rng)(0);
    Rng orng(derive_seed(101, {static_cast<std::uint64_t>(alpha * 10), kTagOracle}));
    const auto b = sample_stable_oracle_1d(alpha, stable_scale_1d(spec, 1.0), n, orng);
    const double p = ks_two_sample(a, b).p_value;
    o.detail += fmt(" %.3f", p);
    o.pass = o.pass && p > 0.01;
  }
  return o;
}

// 2. Mean of the particle average against e^{T(A+A')} m0.
Outcome mean_flow_identity() {
  const auto model = scalar_ou(-0.5, 0.3, 1.0, 1.5, 0.05, kInf, InitialLaw::uniform(1, 0.0, 1.0));
  const int N = 200, M = 10000;
  SimOptions opt;
  opt.steps = 1;
  std::vector<double> means(M);
  for (int r = 0; r < M; ++r)
    means[r] = simulate_particles_exact(model, N, opt, derive_seed(202, {static_cast<std::uint64_t>(r), kTagMisc}))
                   .terminal_mean()(0);
  const double exact = mean_flow(model.flow, v1(0.5), model.T)(0);
  const double dev = std::abs(mean(means) - exact), se = std_error(means);
  return {dev <= 3.0 * se, fmt("|mean - e^{T(A+A')}m0| = %.3g", dev) + fmt(", 3 sigma = %.3g", 3.0 * se)};
}

// 3. p(t, x) = t^{-1/alpha} p(1, t^{-1/alpha} x) and unit mass.
Outcome self_similarity() {
  const double alpha = 1.5;
  const auto model = scalar_ou(0.0, 0.0, 1.0, alpha, 1e-2, kInf, InitialLaw::point_mass(v1(0.0)));
  const auto one = invert_density(model, kInf, 1.0);
  Outcome o{true, "sup deviation / mass error"};
  for (double t : {0.25, 1.0, 4.0}) {
    const auto g = invert_density(model, kInf, t);
    const double s = std::pow(t, -1.0 / alpha);
    double dev = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) dev = std::max(dev, std::abs(g.p()[j] - s * one.value(s * g.x(j))));
    const double mass_err = std::abs(g.mass() - 1.0);
    o.detail += fmt(" %.2g", dev) + fmt("/%.2g", mass_err);
    o.pass = o.pass && dev <= 1e-4 && mass_err <= 1e-6;
  }
  return o;
}

// 4. Slopes of int |x|^gamma |d^k p| dx in t equal (gamma - k)/alpha.
Outcome moment_exponents() {
  const double alpha = 1.5;
  const auto model = scalar_ou(0.0, 0.0, 1.0, alpha, 1e-2, kInf, InitialLaw::point_mass(v1(0.0)));
  std::vector<DensityGrid> grids;
  for (double t : {0.25, 0.5, 1.0, 2.0, 4.0}) grids.push_back(invert_density(model, kInf, t));
  Outcome o{true, "slope - expected"};
  for (auto [gamma, order] : {std::pair{1.0, 0}, std::pair{0.0, 1}, std::pair{0.0, 2}}) {
    const auto fit = moment_estimate_check(grids, alpha, gamma, order);
    const double err = fit.slope - fit.expected;
    o.detail += fmt(" %+.4f", err);
    o.pass = o.pass && std::abs(err) <= 0.05;
  }
  return o;
}

ItoExperiment power_case(double alpha, double beta, double gamma) {
  SpectralMeasure sm(1, {{v1(1.0), 0.6}, {v1(-1.0), 0.4}});
  ItoExperiment e(StableSpec(alpha, sm, 1e-2, 10.0), InitialLaw::uniform(1, -1.0, 2.0), make_smoothed_power(beta, 0.1));
  e.beta = beta;
  e.gamma = gamma;
  e.drift0 = 0.3;
  e.drift1 = -0.4;
  e.sigma0 = 0.8;
  e.sigma1 = 0.5;
  e.paths = 100000;
  e.time_nodes = 64;
  return e;
}

// 5. Ito formula for the flow of measures in both regimes.
Outcome ito_formula() {
  Outcome o{true, ""};
  for (const auto& e : {power_case(1.5, 1.2, 0.8), power_case(0.7, 0.5, 0.0)}) {
    const auto r = ito_residual(e, 1);
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += fmt("alpha=%.1f residual ", e.driver.alpha) + fmt("%.3g", r.residual) + fmt(" vs tolerance %.3g", r.tolerance);
    o.pass = o.pass && r.regime.ok && r.pass;
  }
  return o;
}

std::vector<EmpiricalMeasure> five_atom_measures(int count, std::uint64_t seed) {
  std::vector<EmpiricalMeasure> out;
  for (int m = 0; m < count; ++m) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(m), kTagMisc}));
    std::vector<double> xs(5);
    for (auto& x : xs) x = 2.0 * rng.normal();
    out.push_back(EmpiricalMeasure::from_values(xs));
  }
  return out;
}

// 6. Backward Kolmogorov residual and constancy along the flow.
Outcome kolmogorov_pde() {
  const double trunc = 3.0;
  const auto model = scalar_ou(-0.7, 0.4, 1.0, 1.5, 1e-2, trunc, InitialLaw::point_mass(v1(0.0)));
  const Semigroup sg(model, trunc, make_linear(ScalarField::soft_abs(1, 1.0, v1(0.2))));
  const auto quad = GeneratorQuadrature::make(1.5, trunc);
  const auto measures = five_atom_measures(4, 303);
  const auto rep = pde_residual(sg, quad, {0.2, 0.35, 0.5, 0.65, 0.8}, measures, 0.02);
  double tol = 0.0, worst = 0.0;
  for (const auto& p : rep.points) {
    tol = std::max(tol, p.tolerance);
    worst = std::max(worst, p.residual / p.tolerance);
  }
  double tv = 0.0;
  bool constant = true;
  for (const auto& mu : measures) {
    const auto c = flow_constancy(sg, mu, 16, model.T * tol);
    tv = std::max(tv, c.total_variation);
    constant = constant && c.pass;
  }
  return {rep.pass && constant && rep.points.size() == 20,
          fmt("max residual/tolerance = %.3f", worst) + fmt(", constancy variation %.2g", tv) +
              fmt(" <= %.2g", model.T * tol)};
}

// int_0^R r^2 h(r) r^{-1-alpha} dr with r = u^{1/(2-alpha)} on (0, 1).
double radial_oracle(const std::function<double(double)>& h, double alpha, double R) {
  const double p = 1.0 / (2.0 - alpha);
  double acc = integrate_adaptive([&](double u) { return p * h(std::pow(u, p)); }, 0.0, 1.0, 1e-12);
  if (R > 1.0) acc += integrate_adaptive([&](double r) { return std::pow(r, 1.0 - alpha) * h(r); }, 1.0, R, 1e-12);
  return acc;
}

// 7. Generator gap O(1/N) and the N = 1 second-order oracle.
Outcome generator_gap_rate() {
  const double alpha = 1.5, R = 8.0;
  const auto model = scalar_ou(-0.5, 0.3, 1.0, alpha, 1e-2, R, InitialLaw::point_mass(v1(0.0)));
  const auto quad = GeneratorQuadrature::make(alpha, R);
  const QuadraticFunctional u(1, 0.4, v1(0.3));
  std::vector<double> lx, ly, w;
  for (int N : {8, 16, 32, 64, 128, 256}) {
    Rng rng(derive_seed(404, {static_cast<std::uint64_t>(N), kTagMisc}));
    Mat x(1, N);
    for (int k = 0; k < N; ++k) x(0, k) = rng.normal();
    lx.push_back(std::log(N));
    ly.push_back(std::log(std::abs(generator_gap(model, R, quad, u, x).gap)));
    w.push_back(1.0);
  }
  const double slope = weighted_slope(lx, ly, w).slope;

  // N = 1: the gap is int nu(dz) of d^2/2 int int cross_d2(x + a z, x + b z) da db.
  const double x0 = 0.4;
  const EmpiricalMeasure mu = EmpiricalMeasure::dirac(v1(x0));
  const Rule gl = gauss_legendre(64, 0.0, 1.0);
  double oracle = 0.0;
  for (const auto& atom : model.noise.spectral.atoms()) {
    const double dir = atom.theta(0);
    auto h = [&](double r) {
      const double d = r * dir;
      double acc = 0.0;
      for (std::size_t i = 0; i < gl.size(); ++i)
        for (std::size_t j = 0; j < gl.size(); ++j)
          acc += gl.weights[i] * gl.weights[j] * u.cross_d2(mu, v1(x0 + gl.nodes[i] * d), v1(x0 + gl.nodes[j] * d))(0, 0);
      return 0.5 * dir * dir * acc;
    };
    oracle += atom.weight * radial_oracle(h, alpha, R);
  }
  Mat x(1, 1);
  x(0, 0) = x0;
  const double err = std::abs(generator_gap(model, R, quad, u, x).gap - oracle);
  return {std::abs(slope + 1.0) <= 0.2 && err <= 1e-6, fmt("slope %.4f", slope) + fmt(", N=1 oracle error %.2g", err)};
}

// 8. E W1 between N-particle runs with and without the cutoff at N.
Outcome truncation_gap_rate() {
  const auto model = scalar_ou(-1.0, 0.5, 1.0, 1.5, 0.05, kInf, InitialLaw::gaussian(v1(0.0), 1.0));
  const auto gaps = truncation_gap(model, {4, 8, 16, 32, 64, 128, 256}, 5000, 505);
  std::vector<double> lx, ly, w;
  for (const auto& g : gaps) {
    lx.push_back(std::log(g.level));
    ly.push_back(std::log(g.mean));
    w.push_back(std::pow(g.mean / g.std_error, 2));
  }
  const auto fit = weighted_slope(lx, ly, w);
  return {fit.slope <= -(1.5 - 1.0) + 0.15, fmt("slope %.4f", fit.slope) + fmt(" (se %.3f) <= -0.35", fit.slope_se)};
}

// 9 and 10 share one sweep.
RateReport chaos_sweep() {
  const auto model = scalar_ou(-0.5, 0.3, 1.0, 1.5, 1e-2, kInf, InitialLaw::point_mass(v1(0.0)));
  SweepConfig cfg;
  cfg.n = {16, 32, 64, 128, 256, 512, 1024};
  cfg.replications = 2000;
  cfg.reference = "density";
  return run_sweep(model, make_linear(ScalarField::soft_abs(1)), cfg, 606);
}

Outcome weak_rate(const RateReport& r) {
  const RatePoint& top = r.points.back();
  return {r.weak.pass && top.weak_used && top.N == 1024,
          fmt("slope %.4f", r.weak.slope) + fmt(" <= %.3f", r.weak.threshold) +
              fmt(", S/N at N=1024 %.2f", top.signal_to_noise)};
}

Outcome strong_rate(const RateReport& r) {
  return {r.strong.pass && r.jensen_ok,
          fmt("slope %.4f", r.strong.slope) + fmt(" <= %.3f", r.strong.threshold) +
              (r.jensen_ok ? ", weak <= strong at every N" : ", Jensen check failed")};
}

// 11. Initial-data rate for Uniform[0,1].
Outcome initial_rate() {
  InitialRateConfig cfg;
  const auto r = initial_data_rate(cfg, 707);
  return {r.pass && std::abs(r.slope.slope + 0.5) <= 0.1, fmt("slope %.4f", r.slope.slope) + " (expected -0.5 +- 0.1)"};
}

// 12. Every CLI command twice with the same config and seed, byte for byte.
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kModel = R"(schema = 1
[model]
A = -0.5
Aprime = 0.3
B = 1.0
alpha = 1.5
eps = 0.05
trunc = 6.0
beta = 1.2
[model.mu0]
kind = "uniform"
lo = 0.0
hi = 1.0
)";

Outcome determinism(const std::string& cli, const fs::path& work) {
  struct Case {
    std::string command, body;
  };
  const std::vector<Case> cases = {
      {"simulate", std::string(kModel) + "[simulate]\nparticles = 64\nsteps = 8\n"},
      {"rate-fit", R"(schema = 1
[model]
A = -0.5
Aprime = 0.3
B = 1.0
alpha = 1.5
eps = 0.05
beta = 1.2
[functional]
kind = "linear"
field = "soft_abs"
[sweep]
n = [8, 16]
replications = 20
reference = "both"
reference_samples = 20000
resamples = 100
[initial_rate]
n = [32, 64]
replications = 20
)"},
      {"density", std::string(kModel) + "[density]\ntimes = [0.5, 1.0]\n"},
      {"ito-check", R"(schema = 1
[ito]
alpha = 1.5
trunc = 10.0
drift = [0.3, -0.4]
sigma = [0.8, 0.5]
beta = 1.2
gamma = 0.8
paths = 2000
time_nodes = 8
refine_paths = 200
[ito.mu0]
kind = "uniform"
lo = -1.0
hi = 2.0
[ito.functional]
kind = "smoothed_power"
beta = 1.2
)"},
      {"pde-residual", std::string(kModel) +
                           "[functional]\nkind = \"linear\"\n[pde]\ntimes = [0.5]\nmeasures = 2\nconstancy_points = 4\n"},
      {"generator-gap", std::string(kModel) +
                            "[functional]\nkind = \"quadratic\"\nscale = 0.4\n[generator_gap]\nn = [8, 16, 32]\ntrunc = 6.0\n"},
  };
  Outcome o{true, ""};
  std::size_t files = 0;
  for (const auto& c : cases) {
    const fs::path dir = work / c.command;
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path cfg = dir / "config.toml";
    std::ofstream(cfg) << c.body;
    for (const char* run : {"a", "b"}) {
      const std::string cmd = "\"" + cli + "\" " + c.command + " --config \"" + cfg.string() + "\" --seed 17 --out \"" +
                              (dir / run).string() + "\" > \"" + (dir / (std::string(run) + ".log")).string() + "\" 2>&1";
      const int rc = std::system(cmd.c_str());
      // Exit code 1 only reports failed checks; anything else is an error.
      if (rc != 0 && !(WIFEXITED(rc) && WEXITSTATUS(rc) == 1)) {
        o.pass = false;
        o.detail += c.command + " exited with " + std::to_string(rc) + "; ";
      }
    }
    std::set<std::string> names;
    for (const char* run : {"a", "b"})
      if (fs::exists(dir / run))
        for (const auto& f : fs::directory_iterator(dir / run)) names.insert(f.path().filename().string());
    if (names.empty()) {
      o.pass = false;
      o.detail += c.command + " wrote nothing; ";
    }
    for (const auto& n : names) {
      ++files;
      if (!fs::exists(dir / "a" / n) || !fs::exists(dir / "b" / n) || slurp(dir / "a" / n) != slurp(dir / "b" / n)) {
        o.pass = false;
        o.detail += c.command + "/" + n + " differs; ";
      }
    }
  }
  o.detail += std::to_string(cases.size()) + " commands, " + std::to_string(files) + " files compared";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string cli, only;
  std::string work = (fs::temp_directory_path() / "levy_acceptance").string();
  app.add_option("--cli", cli, "path to the levy-chaos binary")->required();
  app.add_option("--only", only, "comma-separated criterion numbers");
  app.add_option("--work", work, "scratch directory for criterion 12");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected;
  std::stringstream ss(only);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) selected.insert(std::stoi(tok));
  auto wanted = [&](int k) { return selected.empty() || selected.count(k) > 0; };

  int failures = 0;
  auto run = [&](int k, const char* name, const std::function<Outcome()>& f) {
    if (!wanted(k)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s %2d %s: %s [%.0f s]\n", o.pass ? "PASS" : "FAIL", k, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  run(1, "sampler fidelity", sampler_fidelity);
  run(2, "mean flow identity", mean_flow_identity);
  run(3, "self-similarity and mass", self_similarity);
  run(4, "moment-estimate exponents", moment_exponents);
  run(5, "Ito formula residual", ito_formula);
  run(6, "backward Kolmogorov residual", kolmogorov_pde);
  run(7, "generator gap O(1/N)", generator_gap_rate);
  run(8, "truncation gap rate", truncation_gap_rate);
  if (wanted(9) || wanted(10)) {
    std::optional<RateReport> sweep;
    std::string error;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      sweep = chaos_sweep();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("     (shared N-sweep for 9 and 10: %.0f s)\n", secs);
    auto from_sweep = [&](Outcome (*f)(const RateReport&)) {
      return [&, f]() -> Outcome {
        if (!sweep) throw std::runtime_error(error);
        return f(*sweep);
      };
    };
    run(9, "weak propagation-of-chaos rate", from_sweep(weak_rate));
    run(10, "strong propagation-of-chaos rate", from_sweep(strong_rate));
  }
  run(11, "initial-data rate", initial_rate);
  run(12, "CLI determinism", [&] { return determinism(cli, work); });
  return failures == 0 ? 0 : 1;
}
