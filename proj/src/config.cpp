#include "levy/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "levy/errors.hpp"

namespace levy {

FunctionalPtr FunctionalConfig::make() const {
  FunctionalPtr u;
  if (kind == "linear")
    u = make_linear(field);
  else if (kind == "smoothed_power")
    u = make_smoothed_power(beta, eps);
  else if (kind == "quadratic")
    u = make_quadratic(shift.size() > 0 ? static_cast<int>(shift.size()) : field.dim(), scale, shift);
  else
    throw ConfigError("functional: unknown kind '" + kind + "'");
  if (class_c && !u->class_c()) throw ConfigError("functional: class_c requested but the Lipschitz bounds exceed 1");
  return u;
}

namespace {

// Reads one table, remembering which keys were consumed so leftovers can be rejected.
class Section {
 public:
  Section(const toml::table& t, std::string path) : t_(t), path_(std::move(path)) {}

  bool has(const std::string& k) const { return t_.contains(k); }
  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  double num(const std::string& k, double def) {
    used_.insert(k);
    const auto* n = t_.get(k);
    if (!n) return def;
    if (auto v = n->value<double>()) return *v;
    throw ConfigError(key(k) + ": expected a number");
  }
  int integer(const std::string& k, int def) {
    used_.insert(k);
    const auto* n = t_.get(k);
    if (!n) return def;
    if (auto v = n->as_integer()) return static_cast<int>(v->get());
    throw ConfigError(key(k) + ": expected an integer");
  }
  bool flag(const std::string& k, bool def) {
    used_.insert(k);
    const auto* n = t_.get(k);
    if (!n) return def;
    if (auto v = n->value<bool>()) return *v;
    throw ConfigError(key(k) + ": expected a boolean");
  }
  std::string str(const std::string& k, const std::string& def) {
    used_.insert(k);
    const auto* n = t_.get(k);
    if (!n) return def;
    if (auto v = n->value<std::string>()) return *v;
    throw ConfigError(key(k) + ": expected a string");
  }
  std::vector<double> nums(const std::string& k, std::vector<double> def) {
    used_.insert(k);
    const auto* n = t_.get(k);
    if (!n) return def;
    const auto* a = n->as_array();
    if (!a) throw ConfigError(key(k) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : *a) {
      auto v = e.value<double>();
      if (!v) throw ConfigError(key(k) + ": expected an array of numbers");
      out.push_back(*v);
    }
    return out;
  }
  std::vector<int> ints(const std::string& k, std::vector<int> def) {
    used_.insert(k);
    const auto* n = t_.get(k);
    if (!n) return def;
    const auto* a = n->as_array();
    if (!a) throw ConfigError(key(k) + ": expected an array of integers");
    std::vector<int> out;
    for (const auto& e : *a) {
      const auto* v = e.as_integer();
      if (!v) throw ConfigError(key(k) + ": expected an array of integers");
      out.push_back(static_cast<int>(v->get()));
    }
    return out;
  }
  // A number (1 x 1) or an array of rows.
  Mat matrix(const std::string& k, const Mat& def) {
    used_.insert(k);
    const auto* n = t_.get(k);
    if (!n) return def;
    if (auto v = n->value<double>()) return Mat::Constant(1, 1, *v);
    const auto* rows = n->as_array();
    if (!rows || rows->empty()) throw ConfigError(key(k) + ": expected a number or an array of rows");
    Mat m;
    for (std::size_t i = 0; i < rows->size(); ++i) {
      const auto* row = (*rows)[i].as_array();
      if (!row) throw ConfigError(key(k) + ": expected an array of rows");
      if (i == 0) m.resize(static_cast<Eigen::Index>(rows->size()), static_cast<Eigen::Index>(row->size()));
      if (static_cast<Eigen::Index>(row->size()) != m.cols()) throw ConfigError(key(k) + ": ragged rows");
      for (std::size_t j = 0; j < row->size(); ++j) {
        auto v = (*row)[j].value<double>();
        if (!v) throw ConfigError(key(k) + ": non-numeric entry");
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *v;
      }
    }
    return m;
  }
  std::optional<Section> sub(const std::string& k) {
    used_.insert(k);
    const auto* n = t_.get(k);
    if (!n) return std::nullopt;
    const auto* t = n->as_table();
    if (!t) throw ConfigError(key(k) + ": expected a table");
    return Section(*t, key(k));
  }
  const toml::array* array_of_tables(const std::string& k) {
    used_.insert(k);
    const auto* n = t_.get(k);
    if (!n) return nullptr;
    const auto* a = n->as_array();
    if (!a) throw ConfigError(key(k) + ": expected an array of tables");
    return a;
  }
  void finish() const {
    for (const auto& [k, v] : t_)
      if (!used_.count(std::string(k.str()))) throw ConfigError("unknown key '" + key(std::string(k.str())) + "'");
  }

 private:
  const toml::table& t_;
  std::string path_;
  std::set<std::string> used_;
};

Vec to_vec(const std::vector<double>& xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t k = 0; k < xs.size(); ++k) v(static_cast<Eigen::Index>(k)) = xs[k];
  return v;
}

int guard_dim(int d, const std::string& where) {
  if (d < 1) throw ConfigError(where + ": dimension must be positive");
  return d;
}

InitialLaw parse_initial(Section s, int d) {
  const std::string kind = s.str("kind", "point_mass");
  InitialLaw law;
  if (kind == "point_mass") {
    const auto loc = s.nums("location", std::vector<double>(static_cast<std::size_t>(d), 0.0));
    law = InitialLaw::point_mass(to_vec(loc));
  } else if (kind == "uniform") {
    law = InitialLaw::uniform(d, s.num("lo", 0.0), s.num("hi", 1.0));
  } else if (kind == "gaussian") {
    const auto loc = s.nums("location", std::vector<double>(static_cast<std::size_t>(d), 0.0));
    law = InitialLaw::gaussian(to_vec(loc), s.num("sd", 1.0));
  } else if (kind == "pareto") {
    law = InitialLaw::pareto(d, s.num("tail", 2.0), s.num("scale", 1.0));
  } else {
    throw ConfigError(s.key("kind") + ": unknown initial law '" + kind + "'");
  }
  if (law.dim() != d) throw ConfigError(s.key("location") + ": dimension mismatch");
  s.finish();
  return law;
}

SpectralMeasure parse_spectral(Section& s, int d) {
  if (const auto* atoms = s.array_of_tables("atoms")) {
    std::vector<SpectralAtom> out;
    for (std::size_t k = 0; k < atoms->size(); ++k) {
      const auto* t = (*atoms)[k].as_table();
      if (!t) throw ConfigError(s.key("atoms") + ": expected tables");
      Section a(*t, s.key("atoms[" + std::to_string(k) + "]"));
      Vec theta = to_vec(a.nums("theta", {}));
      out.push_back({theta, a.num("weight", 1.0)});
      a.finish();
    }
    return SpectralMeasure(d, std::move(out));
  }
  const double w = s.num("weight", 1.0);
  const std::string kind = s.str("spectral", d == 1 ? "symmetric" : "isotropic");
  if (kind == "symmetric") return SpectralMeasure::symmetric_1d(w);
  if (kind == "isotropic") return SpectralMeasure::isotropic(d, s.integer("directions", 4), w);
  if (kind == "none") return SpectralMeasure(d, {});
  throw ConfigError(s.key("spectral") + ": unknown spectral measure '" + kind + "'");
}

StableSpec parse_stable(Section& s, int d) {
  const double alpha = s.num("alpha", 1.5);
  SpectralMeasure sm = parse_spectral(s, d);
  const bool sym = s.flag("symmetric", sm.is_symmetric());
  return StableSpec(alpha, std::move(sm), s.num("eps", 1e-2), s.num("trunc", kInf), sym);
}

OUModel parse_model(Section s) {
  const Mat A = s.matrix("A", Mat::Constant(1, 1, -0.5));
  const int d = guard_dim(static_cast<int>(A.rows()), s.key("A"));
  const Mat Ap = s.matrix("Aprime", Mat::Zero(d, d));
  const Mat B = s.matrix("B", Mat::Identity(d, d));
  StableSpec noise = parse_stable(s, d);
  auto mu = s.sub("mu0");
  InitialLaw mu0 = mu ? parse_initial(*mu, d) : InitialLaw::point_mass(Vec::Zero(d));
  OUModel m(MatrixFlow(A, Ap, B), std::move(noise), std::move(mu0), s.num("T", 1.0), s.num("beta", 1.2));
  s.finish();
  return m;
}

FunctionalConfig parse_functional(Section s, int d) {
  FunctionalConfig f;
  f.kind = s.str("kind", "linear");
  f.class_c = s.flag("class_c", false);
  if (f.kind == "linear") {
    const std::string field = s.str("field", "soft_abs");
    if (field == "soft_abs") {
      const auto c = s.nums("center", std::vector<double>(static_cast<std::size_t>(d), 0.0));
      f.field = ScalarField::soft_abs(d, s.num("scale", 1.0), to_vec(c));
    } else if (field == "affine") {
      f.field = ScalarField::affine(to_vec(s.nums("slope", std::vector<double>(static_cast<std::size_t>(d), 1.0))));
    } else if (field == "sine") {
      f.field = ScalarField::sine(s.num("scale", 1.0), s.num("freq", 1.0));
    } else if (field == "constant") {
      f.field = ScalarField::constant_value(d, s.num("value", 1.0));
    } else {
      throw ConfigError(s.key("field") + ": unknown field '" + field + "'");
    }
  } else if (f.kind == "smoothed_power") {
    f.beta = s.num("beta", 1.2);
    f.eps = s.num("eps", 0.1);
  } else if (f.kind == "quadratic") {
    f.scale = s.num("scale", 1.0);
    f.shift = to_vec(s.nums("shift", std::vector<double>(static_cast<std::size_t>(d), 0.0)));
    f.field = ScalarField::soft_abs(d);
  } else {
    throw ConfigError(s.key("kind") + ": unknown functional '" + f.kind + "'");
  }
  s.finish();
  f.make();
  return f;
}

SimulateConfig parse_simulate(Section s) {
  SimulateConfig c;
  c.particles = s.integer("particles", c.particles);
  c.scheme = s.str("scheme", c.scheme);
  c.euler_steps = s.integer("euler_steps", c.euler_steps);
  c.options.steps = s.integer("steps", c.options.steps);
  c.options.trunc_at_N = s.flag("trunc_at_N", c.options.trunc_at_N);
  c.options.trunc_level = s.num("trunc_level", c.options.trunc_level);
  c.options.snapshots = s.flag("snapshots", false);
  if (c.scheme != "exact" && c.scheme != "euler") throw ConfigError(s.key("scheme") + ": exact or euler");
  if (c.particles < 1) throw ConfigError(s.key("particles") + ": must be positive");
  s.finish();
  return c;
}

void require_increasing(const std::vector<int>& n, const std::string& where) {
  if (n.empty()) throw ConfigError(where + ": empty grid");
  for (std::size_t k = 0; k < n.size(); ++k) {
    if (n[k] < 1) throw ConfigError(where + ": entries must be positive");
    if (k > 0 && n[k] <= n[k - 1]) throw ConfigError(where + ": grid must be strictly increasing");
  }
}

SweepConfig parse_sweep(Section s) {
  SweepConfig c;
  c.n = s.ints("n", c.n);
  require_increasing(c.n, s.key("n"));
  c.replications = s.integer("replications", c.replications);
  c.reference_samples = static_cast<std::size_t>(s.integer("reference_samples", static_cast<int>(c.reference_samples)));
  c.reference = s.str("reference", c.reference);
  if (c.reference != "density" && c.reference != "mc" && c.reference != "both")
    throw ConfigError(s.key("reference") + ": density, mc or both");
  c.common_random_numbers = s.flag("common_random_numbers", c.common_random_numbers);
  c.resamples = s.integer("resamples", c.resamples);
  c.level = s.num("level", c.level);
  c.slope_margin = s.num("slope_margin", c.slope_margin);
  c.min_signal_to_noise = s.num("min_signal_to_noise", c.min_signal_to_noise);
  if (c.replications < 2) throw ConfigError(s.key("replications") + ": need at least two");
  s.finish();
  return c;
}

InitialRateConfig parse_initial_rate(Section s) {
  InitialRateConfig c;
  if (auto law = s.sub("law")) c.law = parse_initial(*law, 1);
  c.n = s.ints("n", c.n);
  require_increasing(c.n, s.key("n"));
  c.replications = s.integer("replications", c.replications);
  c.expected_slope = s.num("expected_slope", c.expected_slope);
  c.slope_tolerance = s.num("slope_tolerance", c.slope_tolerance);
  s.finish();
  return c;
}

DensityConfig parse_density(Section s) {
  DensityConfig c;
  c.times = s.nums("times", c.times);
  c.trunc = s.num("trunc", c.trunc);
  c.grid.log2_n = s.integer("log2_n", c.grid.log2_n);
  c.grid.oversample = s.num("oversample", c.grid.oversample);
  c.grid.half_width = s.num("half_width", c.grid.half_width);
  c.grid.extent_factor = s.num("extent_factor", c.grid.extent_factor);
  c.grid.alias_threshold = s.num("alias_threshold", c.grid.alias_threshold);
  for (double t : c.times)
    if (!(t > 0.0)) throw ConfigError(s.key("times") + ": times must be positive");
  s.finish();
  return c;
}

ItoExperiment parse_ito(Section s) {
  StableSpec driver = parse_stable(s, 1);
  auto mu = s.sub("mu0");
  InitialLaw mu0 = mu ? parse_initial(*mu, 1) : InitialLaw::point_mass(Vec::Zero(1));
  auto fs = s.sub("functional");
  if (!fs) throw ConfigError(s.key("functional") + ": missing");
  ItoExperiment e(std::move(driver), std::move(mu0), parse_functional(*fs, 1).make());
  const auto drift = s.nums("drift", {0.0, 0.0});
  const auto sigma = s.nums("sigma", {1.0, 0.0});
  if (drift.size() != 2 || sigma.size() != 2) throw ConfigError(s.key("drift") + ": expected [constant, slope]");
  e.drift0 = drift[0];
  e.drift1 = drift[1];
  e.sigma0 = sigma[0];
  e.sigma1 = sigma[1];
  e.t = s.num("t", e.t);
  e.beta = s.num("beta", e.beta);
  e.gamma = s.num("gamma", e.gamma);
  e.paths = static_cast<std::size_t>(s.integer("paths", static_cast<int>(e.paths)));
  e.time_nodes = s.integer("time_nodes", e.time_nodes);
  const std::string small = s.str("small_jumps", "gaussian");
  if (small == "gaussian")
    e.small_jumps = SmallJumps::Gaussian;
  else if (small == "drop")
    e.small_jumps = SmallJumps::Drop;
  else
    throw ConfigError(s.key("small_jumps") + ": gaussian or drop");
  e.correlated = s.flag("correlated", e.correlated);
  e.level = s.num("level", e.level);
  e.resamples = s.integer("resamples", e.resamples);
  e.refine_paths = static_cast<std::size_t>(s.integer("refine_paths", static_cast<int>(e.refine_paths)));
  s.finish();
  try {
    validate(e);
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("ito: ") + ex.what());
  }
  return e;
}

PdeConfig parse_pde(Section s) {
  PdeConfig c;
  c.times = s.nums("times", c.times);
  c.measures = s.integer("measures", c.measures);
  c.atoms = s.integer("atoms", c.atoms);
  c.atom_scale = s.num("atom_scale", c.atom_scale);
  c.h = s.num("h", c.h);
  c.trunc = s.num("trunc", c.trunc);
  c.constancy_points = s.integer("constancy_points", c.constancy_points);
  s.finish();
  return c;
}

GapConfig parse_gap(Section s) {
  GapConfig c;
  c.n = s.ints("n", c.n);
  require_increasing(c.n, s.key("n"));
  c.trunc = s.num("trunc", c.trunc);
  c.atom_scale = s.num("atom_scale", c.atom_scale);
  c.slope_tolerance = s.num("slope_tolerance", c.slope_tolerance);
  if (!std::isfinite(c.trunc)) throw ConfigError(s.key("trunc") + ": the generator gap needs a finite level");
  s.finish();
  return c;
}

}  // namespace

Config parse_config(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ": " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(os.str());
  }
  Section s(root, "");
  Config c;
  c.source = source;
  c.schema = s.integer("schema", 0);
  if (c.schema != 1) throw ConfigError(source + ": schema must be 1");
  try {
    if (auto m = s.sub("model")) c.model = parse_model(*m);
    const int d = c.model ? c.model->dim() : 1;
    if (auto f = s.sub("functional")) c.functional = parse_functional(*f, d);
    if (auto x = s.sub("simulate")) c.simulate = parse_simulate(*x);
    if (auto x = s.sub("sweep")) c.sweep = parse_sweep(*x);
    if (auto x = s.sub("initial_rate")) c.initial_rate = parse_initial_rate(*x);
    if (auto x = s.sub("density")) c.density = parse_density(*x);
    if (auto x = s.sub("ito")) c.ito = parse_ito(*x);
    if (auto x = s.sub("pde")) c.pde = parse_pde(*x);
    if (auto x = s.sub("generator_gap")) c.generator_gap = parse_gap(*x);
    s.finish();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), path);
}

}  // namespace levy
