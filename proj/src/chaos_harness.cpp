#include "levy/chaos_harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "levy/errors.hpp"
#include "levy/kolmogorov.hpp"

namespace levy {

namespace {

constexpr int kReferenceBatches = 20;

double density_reference(const OUModel& model, const FunctionalPtr& u, double& tolerance) {
  GridParams fine = Semigroup::default_grid();
  fine.oversample *= 2.0;
  fine.extent_factor *= 2.0;
  const EmpiricalMeasure start = EmpiricalMeasure::dirac(model.mu0.location);
  const Semigroup coarse(model, kInf, u);
  const Semigroup refined(model, kInf, u, Backend::Density, fine);
  const double a = coarse.phi(model.T, start).value, b = refined.phi(model.T, start).value;
  tolerance = 2.0 * std::abs(a - b) + 1e-9;
  return b;
}

// Batch means of a measure-independent u over the limit-law sample.
double mc_reference(const OUModel& model, const Functional& u, std::size_t M, std::uint64_t seed, double& tolerance) {
  const EmpiricalMeasure ys = sample_limit_law(model, kInf, M, derive_seed(seed, {kTagOracle}));
  std::vector<double> vals(M);
  for (std::size_t j = 0; j < M; ++j) vals[j] = u.flat_d1(ys, ys.atom(j));
  std::vector<double> batch;
  const std::size_t per = M / kReferenceBatches;
  for (int b = 0; b < kReferenceBatches; ++b) batch.push_back(mean(std::vector<double>(vals.begin() + b * per, vals.begin() + (b + 1) * per)));
  // Heavy tails make the batch spread a rough scale; four of them keep false alarms rare.
  tolerance = 4.0 * std_error(batch);
  return mean(vals);
}

Interval abs_interval(Interval ci) {
  if (ci.lo <= 0.0 && ci.hi >= 0.0) return {0.0, std::max(-ci.lo, ci.hi)};
  const double a = std::abs(ci.lo), b = std::abs(ci.hi);
  return {std::min(a, b), std::max(a, b)};
}

SlopeSummary fit_slope(const std::vector<double>& n, const std::vector<double>& err, const std::vector<double>& w,
                       double theory, double margin) {
  SlopeSummary s;
  s.theory = theory;
  s.threshold = theory + margin;
  std::vector<double> x, y, ww;
  for (std::size_t k = 0; k < n.size(); ++k)
    if (err[k] > 0.0 && w[k] > 0.0 && std::isfinite(w[k])) {
      x.push_back(std::log(n[k]));
      y.push_back(std::log(err[k]));
      ww.push_back(w[k]);
    }
  s.points = x.size();
  if (x.size() < 2) return s;
  const SlopeFit f = weighted_slope(x, y, ww);
  s.fitted = true;
  s.slope = f.slope;
  s.slope_se = f.slope_se;
  s.ci = {f.slope - 1.96 * f.slope_se, f.slope + 1.96 * f.slope_se};
  s.pass = s.slope <= s.threshold;
  return s;
}

}  // namespace

Reference compute_reference(const OUModel& model, const Functional& u, const SweepConfig& cfg, std::uint64_t seed) {
  if (!u.measure_independent()) throw UnsupportedFunctional("compute_reference: needs a linear-type functional");
  Reference r;
  const auto* lin = dynamic_cast<const LinearFunctional*>(&u);
  const bool density_ok = model.dim() == 1 && lin != nullptr && model.mu0.kind == InitialLaw::Kind::PointMass;
  if (cfg.reference == "density" && !density_ok)
    throw InvalidArgument("compute_reference: the density backend needs d = 1, linear u and a point-mass start");
  if (cfg.reference != "mc" && density_ok) {
    auto shared = std::make_shared<LinearFunctional>(*lin);
    r.density = density_reference(model, shared, r.density_tolerance);
    r.has_density = true;
  }
  if (cfg.reference != "density") {
    r.mc = mc_reference(model, u, cfg.reference_samples, seed, r.mc_tolerance);
    r.has_mc = true;
  }
  if (r.has_density && r.has_mc && std::abs(r.density - r.mc) > r.density_tolerance + r.mc_tolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "reference backends disagree: density " << r.density << " +- " << r.density_tolerance << ", mc " << r.mc
       << " +- " << r.mc_tolerance;
    throw ReferenceInconsistency(os.str());
  }
  if (r.has_density) {
    r.value = r.density;
    r.tolerance = r.density_tolerance;
    r.backend = "density";
  } else {
    r.value = r.mc;
    r.tolerance = r.mc_tolerance;
    r.backend = "mc";
  }
  return r;
}

RateReport run_sweep(const OUModel& model, const FunctionalPtr& u, const SweepConfig& cfg, std::uint64_t seed) {
  require(u != nullptr, "run_sweep: null functional");
  model.validate_chaos_regime(derive_seed(seed, {kTagMisc}));
  RateReport rep;
  rep.functional = u->name();
  rep.alpha = model.noise.alpha;
  rep.dim = model.dim();
  rep.replications = cfg.replications;
  rep.seed = seed;
  rep.reference = compute_reference(model, *u, cfg, seed);
  const double ref = rep.reference.value;

  const std::size_t nN = cfg.n.size();
  std::vector<double> levels(nN);
  SimOptions opt;
  for (std::size_t k = 0; k < nN; ++k) levels[k] = effective_level(model, cfg.n[k], opt);
  const auto M = static_cast<std::size_t>(cfg.replications);
  std::vector<std::vector<double>> diffs(nN, std::vector<double>(M));
  for (std::size_t r = 0; r < M; ++r) {
    if (cfg.common_random_numbers) {
      const auto terminals = simulate_nested_terminal(model, cfg.n, levels, derive_seed(seed, {r, kTagMisc}));
      for (std::size_t k = 0; k < nN; ++k) diffs[k][r] = u->eval(EmpiricalMeasure(terminals[k])) - ref;
    } else {
      for (std::size_t k = 0; k < nN; ++k) {
        const auto one = simulate_nested_terminal(model, {cfg.n[k]}, {levels[k]},
                                                  derive_seed(seed, {static_cast<std::uint64_t>(cfg.n[k]), r, kTagMisc}));
        diffs[k][r] = u->eval(EmpiricalMeasure(one[0])) - ref;
      }
    }
  }

  const double ref_se = rep.reference.tolerance / 3.0;
  std::vector<double> ns, weak, weak_w, strong, strong_w;
  for (std::size_t k = 0; k < nN; ++k) {
    RatePoint p;
    p.N = cfg.n[k];
    const auto& d = diffs[k];
    const std::uint64_t bseed = derive_seed(seed, {static_cast<std::uint64_t>(p.N), kTagBootstrap});
    p.weak = std::abs(mean(d));
    p.weak_ci = abs_interval(bootstrap_mean_ci(d, cfg.resamples, cfg.level, bseed));
    p.weak_noise = std::hypot(std_error(d), ref_se);
    p.signal_to_noise = p.weak_noise > 0.0 ? p.weak / p.weak_noise : 0.0;
    p.weak_used = p.signal_to_noise >= cfg.min_signal_to_noise;
    std::vector<double> a(d.size());
    for (std::size_t r = 0; r < d.size(); ++r) a[r] = std::abs(d[r]);
    p.strong = mean(a);
    p.strong_ci = bootstrap_mean_ci(a, cfg.resamples, cfg.level, derive_seed(bseed, {1}));
    p.strong_se = std_error(a);
    const double slack = 3.0 * (0.5 * (p.weak_ci.hi - p.weak_ci.lo) + 0.5 * (p.strong_ci.hi - p.strong_ci.lo));
    if (p.weak > p.strong + slack) rep.jensen_ok = false;
    ns.push_back(p.N);
    weak.push_back(p.weak_used ? p.weak : 0.0);
    weak_w.push_back(p.weak_noise > 0.0 ? std::pow(p.weak / p.weak_noise, 2) : 0.0);
    strong.push_back(p.strong);
    strong_w.push_back(p.strong_se > 0.0 ? std::pow(p.strong / p.strong_se, 2) : 0.0);
    rep.points.push_back(p);
  }
  const double alpha = model.noise.alpha;
  rep.weak = fit_slope(ns, weak, weak_w, -(alpha - 1.0), cfg.slope_margin);
  rep.strong = fit_slope(ns, strong, strong_w, -(1.0 - 1.0 / alpha), cfg.slope_margin);
  const bool top_resolved = !rep.points.empty() && rep.points.back().weak_used;
  rep.pass = rep.weak.pass && rep.strong.pass && rep.jensen_ok && top_resolved;
  return rep;
}

bool class_c_sampler_check(const Functional& u, int dim, std::uint64_t seed, int pairs) {
  if (!u.class_c()) return false;
  Rng rng(derive_seed(seed, {kTagMisc}));
  for (int k = 0; k < pairs; ++k) {
    Mat atoms(dim, 4);
    for (Eigen::Index j = 0; j < atoms.size(); ++j) atoms.data()[j] = 3.0 * rng.normal();
    const EmpiricalMeasure mu(atoms);
    Vec v(dim), w(dim);
    for (int i = 0; i < dim; ++i) {
      v(i) = 3.0 * rng.normal();
      w(i) = v(i) + std::exp(2.0 * rng.normal() - 2.0) * rng.normal();
    }
    const double gap = (v - w).norm();
    if (gap == 0.0) continue;
    if (std::abs(u.flat_d1(mu, v) - u.flat_d1(mu, w)) > (1.0 + 1e-9) * gap) return false;
    if (u.grad_d1(mu, v).norm() > 1.0 + 1e-9) return false;
  }
  return true;
}

double w1_to_law(std::vector<double> xs, const InitialLaw& law) {
  require(!xs.empty(), "w1_to_law: empty sample");
  require(law.dim() == 1, "w1_to_law: one-dimensional law required");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  if (law.kind == InitialLaw::Kind::PointMass) {
    double acc = 0.0;
    for (double x : xs) acc += std::abs(x - law.location(0));
    return acc / n;
  }
  auto H = [&](double x) { return law.cdf_integral(x); };
  // Left of the first atom F_n = 0; right of the last, int (1 - F) = E(X - x)_+ = mean - x + H(x).
  double acc = H(xs.front()) + (law.mean()(0) - xs.back() + H(xs.back()));
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const double a = xs[k], b = xs[k + 1];
    if (b <= a) continue;
    const double level = static_cast<double>(k + 1) / n;
    // F crosses the level at c, clamped to [a, b].
    const double c = std::clamp(law.quantile(level), a, b);
    acc += level * (c - a) - (H(c) - H(a)) + (H(b) - H(c)) - level * (b - c);
  }
  return acc;
}

InitialRateReport initial_data_rate(const InitialRateConfig& cfg, std::uint64_t seed) {
  require(cfg.replications >= 2, "initial_data_rate: need at least two replications");
  InitialRateReport rep;
  rep.expected = cfg.expected_slope;
  std::vector<double> ns, means, weights;
  for (int N : cfg.n) {
    std::vector<double> w(static_cast<std::size_t>(cfg.replications));
    for (int r = 0; r < cfg.replications; ++r) {
      Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(r), kTagInitial}));
      std::vector<double> xs(static_cast<std::size_t>(N));
      for (auto& x : xs) x = cfg.law.sample(rng)(0);
      w[static_cast<std::size_t>(r)] = w1_to_law(std::move(xs), cfg.law);
    }
    InitialRatePoint p;
    p.N = N;
    p.mean = mean(w);
    p.std_error = std_error(w);
    p.ci = bootstrap_mean_ci(w, 1000, 0.95, derive_seed(seed, {static_cast<std::uint64_t>(N), kTagBootstrap}));
    rep.points.push_back(p);
    ns.push_back(N);
    means.push_back(p.mean);
    weights.push_back(p.std_error > 0.0 ? std::pow(p.mean / p.std_error, 2) : 0.0);
  }
  rep.slope = fit_slope(ns, means, weights, cfg.expected_slope, cfg.slope_tolerance);
  rep.slope.pass = rep.slope.fitted && std::abs(rep.slope.slope - cfg.expected_slope) <= cfg.slope_tolerance;
  rep.pass = rep.slope.pass;
  return rep;
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

using ojson = nlohmann::ordered_json;

ojson slope_json(const SlopeSummary& s) {
  return ojson{{"fitted", s.fitted},       {"slope", s.slope},       {"slope_se", s.slope_se},
               {"ci", {s.ci.lo, s.ci.hi}}, {"theory", s.theory},     {"threshold", s.threshold},
               {"points", s.points},       {"pass", s.pass}};
}

SlopeSummary slope_from(const ojson& j) {
  SlopeSummary s;
  s.fitted = j.at("fitted").get<bool>();
  s.slope = j.at("slope").get<double>();
  s.slope_se = j.at("slope_se").get<double>();
  s.ci = {j.at("ci").at(0).get<double>(), j.at("ci").at(1).get<double>()};
  s.theory = j.at("theory").get<double>();
  s.threshold = j.at("threshold").get<double>();
  s.points = j.at("points").get<std::size_t>();
  s.pass = j.at("pass").get<bool>();
  return s;
}

}  // namespace

std::string rate_csv(const RateReport& r) {
  std::ostringstream os;
  os << "N,weak,weak_lo,weak_hi,weak_noise,signal_to_noise,weak_used,strong,strong_lo,strong_hi,strong_se\n";
  for (const auto& p : r.points)
    os << p.N << ',' << num(p.weak) << ',' << num(p.weak_ci.lo) << ',' << num(p.weak_ci.hi) << ','
       << num(p.weak_noise) << ',' << num(p.signal_to_noise) << ',' << (p.weak_used ? 1 : 0) << ','
       << num(p.strong) << ',' << num(p.strong_ci.lo) << ',' << num(p.strong_ci.hi) << ',' << num(p.strong_se)
       << '\n';
  return os.str();
}

std::string rate_json(const RateReport& r) {
  ojson pts = ojson::array();
  for (const auto& p : r.points)
    pts.push_back({{"N", p.N},
                   {"weak", p.weak},
                   {"weak_ci", {p.weak_ci.lo, p.weak_ci.hi}},
                   {"weak_noise", p.weak_noise},
                   {"signal_to_noise", p.signal_to_noise},
                   {"weak_used", p.weak_used},
                   {"strong", p.strong},
                   {"strong_ci", {p.strong_ci.lo, p.strong_ci.hi}},
                   {"strong_se", p.strong_se}});
  const auto& ref = r.reference;
  ojson j{{"functional", r.functional},
          {"alpha", r.alpha},
          {"dim", r.dim},
          {"replications", r.replications},
          {"seed", r.seed},
          {"reference",
           {{"value", ref.value},
            {"tolerance", ref.tolerance},
            {"backend", ref.backend},
            {"has_density", ref.has_density},
            {"density", ref.density},
            {"density_tolerance", ref.density_tolerance},
            {"has_mc", ref.has_mc},
            {"mc", ref.mc},
            {"mc_tolerance", ref.mc_tolerance}}},
          {"theoretical_exponents", {{"weak", -(r.alpha - 1.0)}, {"strong", -(1.0 - 1.0 / r.alpha)}}},
          {"weak_slope", slope_json(r.weak)},
          {"strong_slope", slope_json(r.strong)},
          {"jensen_ok", r.jensen_ok},
          {"points", pts},
          {"pass", r.pass}};
  return j.dump(2) + "\n";
}

RateReport parse_rate_json(const std::string& text) {
  const ojson j = ojson::parse(text);
  RateReport r;
  r.functional = j.at("functional").get<std::string>();
  r.alpha = j.at("alpha").get<double>();
  r.dim = j.at("dim").get<int>();
  r.replications = j.at("replications").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  const auto& ref = j.at("reference");
  r.reference.value = ref.at("value").get<double>();
  r.reference.tolerance = ref.at("tolerance").get<double>();
  r.reference.backend = ref.at("backend").get<std::string>();
  r.reference.has_density = ref.at("has_density").get<bool>();
  r.reference.density = ref.at("density").get<double>();
  r.reference.density_tolerance = ref.at("density_tolerance").get<double>();
  r.reference.has_mc = ref.at("has_mc").get<bool>();
  r.reference.mc = ref.at("mc").get<double>();
  r.reference.mc_tolerance = ref.at("mc_tolerance").get<double>();
  r.weak = slope_from(j.at("weak_slope"));
  r.strong = slope_from(j.at("strong_slope"));
  r.jensen_ok = j.at("jensen_ok").get<bool>();
  for (const auto& p : j.at("points")) {
    RatePoint q;
    q.N = p.at("N").get<int>();
    q.weak = p.at("weak").get<double>();
    q.weak_ci = {p.at("weak_ci").at(0).get<double>(), p.at("weak_ci").at(1).get<double>()};
    q.weak_noise = p.at("weak_noise").get<double>();
    q.signal_to_noise = p.at("signal_to_noise").get<double>();
    q.weak_used = p.at("weak_used").get<bool>();
    q.strong = p.at("strong").get<double>();
    q.strong_ci = {p.at("strong_ci").at(0).get<double>(), p.at("strong_ci").at(1).get<double>()};
    q.strong_se = p.at("strong_se").get<double>();
    r.points.push_back(q);
  }
  r.pass = j.at("pass").get<bool>();
  return r;
}

std::string initial_rate_csv(const InitialRateReport& r) {
  std::ostringstream os;
  os << "N,mean_w1,std_error,ci_lo,ci_hi\n";
  for (const auto& p : r.points)
    os << p.N << ',' << num(p.mean) << ',' << num(p.std_error) << ',' << num(p.ci.lo) << ',' << num(p.ci.hi) << '\n';
  return os.str();
}

std::string initial_rate_json(const InitialRateReport& r) {
  ojson pts = ojson::array();
  for (const auto& p : r.points)
    pts.push_back({{"N", p.N}, {"mean_w1", p.mean}, {"std_error", p.std_error}, {"ci", {p.ci.lo, p.ci.hi}}});
  ojson j{{"expected_slope", r.expected}, {"slope", slope_json(r.slope)}, {"points", pts}, {"pass", r.pass}};
  return j.dump(2) + "\n";
}

void write_text(const std::string& dir, const std::string& name, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
  const fs::path path = fs::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace levy
