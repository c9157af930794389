#pragma once

#include <array>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "b4nls/dynamics/evolve.hpp"
#include "b4nls/error.hpp"
#include "b4nls/gcc/geodesic.hpp"
#include "b4nls/hum/control.hpp"
#include "b4nls/resonance/resonance.hpp"
#include "b4nls/spectral.hpp"

namespace b4nls::experiment {

/// Malformed configuration text: unknown keys, unparsable numbers, bad enums.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind {
  simulate,
  stabilize,
  control_linear,
  control_nonlinear,
  observability_sweep,
  gcc_check,
  resonance_sweep,
  bourgain_probe
};

struct KindInfo {
  Kind kind;
  const char* name;
  const char* summary;
  const char* sections;  // config sections the experiment reads besides [experiment]
};

inline const std::vector<KindInfo>& kinds() {
  static const std::vector<KindInfo> table{
      {Kind::simulate, "simulate", "Undamped forced-free evolution; writes the trace and conservation drift.",
       "manifold solver data run"},
      {Kind::stabilize, "stabilize",
       "Damped evolution with the localized damping profile; writes the ledger and the fitted decay rate, plus an "
       "undamped control run.",
       "manifold solver data region damping run"},
      {Kind::control_linear, "control-linear", "HUM control of the linear equation; writes the certificate and trajectory.",
       "manifold data region control"},
      {Kind::control_nonlinear, "control-nonlinear",
       "Fixed-point control of the nonlinear equation for small data; writes the certificate and trajectory.",
       "manifold solver data region control"},
      {Kind::observability_sweep, "observability-sweep",
       "Smallest Gramian eigenvalue on dyadic frequency bands h = 2^-j.", "manifold region observability"},
      {Kind::gcc_check, "gcc-check", "Geometric control check by sampling geodesics; writes per-geodesic hit times.",
       "region gcc"},
      {Kind::resonance_sweep, "resonance-sweep", "Dyadic counting of resonant pairs with the two-squares cross-check.",
       "resonance"},
      {Kind::bourgain_probe, "bourgain-probe",
       "Trilinear constant probe on random tapered fields and the Duhamel time-gain fit.", "manifold bourgain"},
  };
  return table;
}

inline const KindInfo& kind_info(Kind k) {
  for (const auto& i : kinds())
    if (i.kind == k) return i;
  throw ConfigError("unknown experiment kind");
}

inline std::optional<Kind> parse_kind(const std::string& name) {
  for (const auto& i : kinds())
    if (name == i.name) return i.kind;
  return std::nullopt;
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

/// Decimal number with an optional trailing "pi" factor: "1.5pi", "pi", "-0.25".
inline double parse_number(const std::string& token) {
  std::string t = trim(token);
  double scale = 1.0;
  if (t.size() >= 2 && t.compare(t.size() - 2, 2, "pi") == 0) {
    scale = M_PI;
    t = t.substr(0, t.size() - 2);
    if (t.empty() || t == "+") return scale;
    if (t == "-") return -scale;
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + token + "'");
  }
  if (used != t.size()) throw ConfigError("not a number: '" + token + "'");
  return v * scale;
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split(s, ','))
    if (!trim(tok).empty()) out.push_back(parse_number(tok));
  return out;
}

}  // namespace detail

/// Region syntax: parts separated by ';', each one of
/// `full`, `strip lo hi axis`, `ball x y radius`, `cap cx cy cz radius`.
inline Region parse_region(const std::string& text) {
  std::vector<RegionPart> parts;
  for (const auto& raw : detail::split(text, ';')) {
    const std::string part = detail::trim(raw);
    if (part.empty()) continue;
    std::istringstream is(part);
    std::string shape, tok;
    is >> shape;
    std::vector<double> v;
    while (is >> tok) v.push_back(detail::parse_number(tok));
    const auto want = [&](std::size_t n) {
      if (v.size() != n) throw ConfigError("region part '" + part + "' needs " + std::to_string(n) + " numbers");
    };
    if (shape == "full") {
      want(0);
      parts.emplace_back(region::Full{});
    } else if (shape == "strip") {
      want(3);
      parts.emplace_back(region::Strip{v[0], v[1], static_cast<int>(v[2])});
    } else if (shape == "ball") {
      want(3);
      parts.emplace_back(region::Ball{{v[0], v[1]}, v[2]});
    } else if (shape == "cap") {
      want(4);
      parts.emplace_back(region::Cap{{v[0], v[1], v[2]}, v[3]});
    } else {
      throw ConfigError("unknown region shape '" + shape + "'");
    }
  }
  return Region(std::move(parts));
}

/// Typed view over the parsed INI tree. Every key read is recorded so that
/// misspelled keys are reported instead of silently ignored.
class Reader {
 public:
  explicit Reader(boost::property_tree::ptree tree) : tree_(std::move(tree)) {}

  std::optional<std::string> raw(const std::string& key) {
    seen_[key] = true;
    const auto v = tree_.get_optional<std::string>(boost::property_tree::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    return detail::trim(*v);
  }
  std::string text(const std::string& key, const std::string& fallback) { return raw(key).value_or(fallback); }
  double real(const std::string& key, double fallback) {
    const auto v = raw(key);
    return v ? detail::parse_number(*v) : fallback;
  }
  int integer(const std::string& key, int fallback) {
    const double v = real(key, fallback);
    if (v != std::floor(v) || std::abs(v) > 2e9) throw ConfigError(key + " must be an integer");
    return static_cast<int>(v);
  }
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    const auto v = raw(key);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      const auto s = std::stoull(*v, &used);
      if (used != v->size()) throw ConfigError(key + " must be a nonnegative integer");
      return s;
    } catch (const std::logic_error&) {
      throw ConfigError(key + " must be a nonnegative integer");
    }
  }
  bool flag(const std::string& key, bool fallback) {
    const auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(key + " must be true or false");
  }
  std::vector<double> list(const std::string& key, std::vector<double> fallback) {
    const auto v = raw(key);
    return v ? detail::parse_list(*v) : fallback;
  }

  /// Keys present in the file but never read.
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [section, body] : tree_) {
      if (body.empty()) {
        if (!seen_.count(section)) out.push_back(section);
        continue;
      }
      for (const auto& [key, _] : body) {
        const std::string full = section + "." + key;
        if (!seen_.count(full)) out.push_back(full);
      }
    }
    return out;
  }

 private:
  boost::property_tree::ptree tree_;
  std::map<std::string, bool> seen_;
};

struct DataConfig {
  std::string kind = "random";  // random | plane_wave | zero
  int band = 5;
  double norm = 1.0;  // H^s norm of random data
  double s = 2.0;
  double decay = 2.0;
  std::array<int, 2> mode{1, 0};  // plane wave
  double amplitude = 0.5;
};

struct ControlConfig {
  double T = 1.0;
  double cg_tol = 1e-10;
  int max_cg = 2000;
  double fixedpoint_tol = 1e-8;
  int max_fixedpoint = 20;
  double smallness = 0.1;
  double dt = 1e-3;
  int record_every = 10;
  std::string quadrature = "exact";
  double dt_quad = 1e-3;
};

struct ObservabilityConfig {
  double T = 1.0;
  int j_min = 2;
  int j_max = 6;
  int oversample = 8;
  double quadrature_dt = 0.0;
};

struct GccConfig {
  std::string surface = "torus2";
  double t_max = 20.0;
  gcc::SamplingPlan plan{};
};

struct ResonanceConfig {
  std::int64_t K_max = 1024;
  std::int64_t p = 0, q = 1;
  std::int64_t cross_check_max_K = 256;
};

struct BourgainConfig {
  double s = 2.0;
  double b_prime = 0.3;
  int samples = 50;
  int band = 5;
  int time_samples = 8192;
  int time_modes = 2;
  double duhamel_b = 0.6;
  double duhamel_b_prime = 0.3;
  std::vector<double> duhamel_T{1.0, 0.5, 0.25};
  int duhamel_signals = 4;
};

struct ExperimentConfig {
  Kind kind = Kind::simulate;
  std::uint64_t seed = 1;
  std::filesystem::path output = "out";

  int dim = 1;
  int N = 64;
  double beta = 1.0;

  dynamics::SolverConfig solver{};
  DataConfig data{};
  Region region{region::Strip{M_PI / 2, 3 * M_PI / 2, 0}};
  double region_width = -1.0;  // negative selects the default smoothing width

  std::string damping = "region";  // region | constant | none
  double damping_strength = 1.0;
  bool control_run = true;  // undamped comparison run for `stabilize`
  double T = 1.0;

  ControlConfig control{};
  ObservabilityConfig observability{};
  GccConfig gcc{};
  ResonanceConfig resonance{};
  BourgainConfig bourgain{};

  ManifoldSpec manifold() const { return make_torus(dim, N, beta); }
};

namespace detail {

inline dynamics::Nonlinearity parse_nonlinearity(const std::string& s) {
  if (s == "defocusing") return dynamics::Nonlinearity::defocusing;
  if (s == "focusing") return dynamics::Nonlinearity::focusing;
  if (s == "off") return dynamics::Nonlinearity::off;
  throw ConfigError("solver.nonlinearity must be defocusing, focusing or off");
}

inline dynamics::Scheme parse_scheme(const std::string& s) {
  if (s == "etdrk4") return dynamics::Scheme::etdrk4;
  if (s == "strang") return dynamics::Scheme::strang;
  throw ConfigError("solver.scheme must be etdrk4 or strang");
}

}  // namespace detail

inline gcc::Surface parse_surface(const std::string& s) {
  if (s == "torus1") return gcc::Surface::torus1;
  if (s == "torus2") return gcc::Surface::torus2;
  if (s == "sphere2") return gcc::Surface::sphere2;
  throw ConfigError("gcc.surface must be torus1, torus2 or sphere2");
}

/// Parses INI text. Semantic validation is separate (see validate()).
inline ExperimentConfig parse_config(std::istream& is) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  Reader r(std::move(tree));
  ExperimentConfig c;

  const auto kind_name = r.raw("experiment.kind");
  if (!kind_name) throw ConfigError("experiment.kind is required");
  const auto kind = parse_kind(*kind_name);
  if (!kind) throw ConfigError("unknown experiment '" + *kind_name + "'");
  c.kind = *kind;
  c.seed = r.seed("experiment.seed", c.seed);
  c.output = r.text("experiment.output", c.output.string());

  c.dim = r.integer("manifold.dim", c.dim);
  c.N = r.integer("manifold.N", c.N);
  c.beta = r.real("manifold.beta", c.beta);

  auto& s = c.solver;
  s.dt = r.real("solver.dt", s.dt);
  s.scheme = detail::parse_scheme(r.text("solver.scheme", "etdrk4"));
  s.k_nl = r.integer("solver.k_nl", s.k_nl);
  s.nonlinearity = detail::parse_nonlinearity(r.text("solver.nonlinearity", "defocusing"));
  s.damping_tol = r.real("solver.damping_tol", s.damping_tol);
  s.max_inner = r.integer("solver.max_inner", s.max_inner);
  s.dealias = r.flag("solver.dealias", s.dealias);
  s.record_every = r.integer("solver.record_every", s.record_every);

  auto& d = c.data;
  d.kind = r.text("data.kind", d.kind);
  d.band = r.integer("data.band", d.band);
  d.norm = r.real("data.norm", d.norm);
  d.s = r.real("data.s", d.s);
  d.decay = r.real("data.decay", d.decay);
  d.mode = {r.integer("data.mode_x", d.mode[0]), r.integer("data.mode_y", d.mode[1])};
  d.amplitude = r.real("data.amplitude", d.amplitude);

  if (const auto parts = r.raw("region.parts")) c.region = parse_region(*parts);
  c.region_width = r.real("region.width", c.region_width);

  c.damping = r.text("damping.profile", c.damping);
  c.damping_strength = r.real("damping.strength", c.damping_strength);
  c.control_run = r.flag("damping.control_run", c.control_run);
  c.T = r.real("run.T", c.T);

  auto& h = c.control;
  h.T = r.real("control.T", h.T);
  h.cg_tol = r.real("control.cg_tol", h.cg_tol);
  h.max_cg = r.integer("control.max_cg", h.max_cg);
  h.fixedpoint_tol = r.real("control.fixedpoint_tol", h.fixedpoint_tol);
  h.max_fixedpoint = r.integer("control.max_fixedpoint", h.max_fixedpoint);
  h.smallness = r.real("control.smallness", h.smallness);
  h.dt = r.real("control.dt", h.dt);
  h.record_every = r.integer("control.record_every", h.record_every);
  h.quadrature = r.text("control.quadrature", h.quadrature);
  h.dt_quad = r.real("control.dt_quad", h.dt_quad);

  auto& o = c.observability;
  o.T = r.real("observability.T", o.T);
  o.j_min = r.integer("observability.j_min", o.j_min);
  o.j_max = r.integer("observability.j_max", o.j_max);
  o.oversample = r.integer("observability.oversample", o.oversample);
  o.quadrature_dt = r.real("observability.quadrature_dt", o.quadrature_dt);

  auto& g = c.gcc;
  g.surface = r.text("gcc.surface", g.surface);
  g.t_max = r.real("gcc.t_max", g.t_max);
  g.plan.start_points = r.integer("gcc.start_points", g.plan.start_points);
  g.plan.farey_order = r.integer("gcc.farey_order", g.plan.farey_order);
  g.plan.angles = r.integer("gcc.angles", g.plan.angles);
  g.plan.eps_t = r.real("gcc.eps_t", g.plan.eps_t);

  auto& z = c.resonance;
  z.K_max = r.integer("resonance.K_max", static_cast<int>(z.K_max));
  z.p = r.integer("resonance.p", static_cast<int>(z.p));
  z.q = r.integer("resonance.q", static_cast<int>(z.q));
  z.cross_check_max_K = r.integer("resonance.cross_check_max_K", static_cast<int>(z.cross_check_max_K));

  auto& b = c.bourgain;
  b.s = r.real("bourgain.s", b.s);
  b.b_prime = r.real("bourgain.b_prime", b.b_prime);
  b.samples = r.integer("bourgain.samples", b.samples);
  b.band = r.integer("bourgain.band", b.band);
  b.time_samples = r.integer("bourgain.time_samples", b.time_samples);
  b.time_modes = r.integer("bourgain.time_modes", b.time_modes);
  b.duhamel_b = r.real("bourgain.duhamel_b", b.duhamel_b);
  b.duhamel_b_prime = r.real("bourgain.duhamel_b_prime", b.duhamel_b_prime);
  b.duhamel_T = r.list("bourgain.duhamel_T", b.duhamel_T);
  b.duhamel_signals = r.integer("bourgain.duhamel_signals", b.duhamel_signals);

  const auto extra = r.unused();
  if (!extra.empty()) {
    std::string msg = "unknown config key";
    for (const auto& k : extra) msg += " '" + k + "'";
    throw ConfigError(msg);
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open config " + path.string());
  return parse_config(is);
}

/// Checks every numeric field against the owning module's preconditions
/// before anything runs; throws PreconditionError with the violated one.
inline void validate(const ExperimentConfig& c) {
  const auto uses = [&](const char* section) {
    const std::string list = std::string(" ") + kind_info(c.kind).sections + " ";
    return list.find(std::string(" ") + section + " ") != std::string::npos;
  };
  std::optional<ManifoldSpec> spec;
  if (uses("manifold")) spec = c.manifold();
  if (uses("solver")) c.solver.validate();
  if (uses("data")) {
    require(c.data.kind == "random" || c.data.kind == "plane_wave" || c.data.kind == "zero",
            "data.kind must be random, plane_wave or zero");
    require(c.data.band >= 0 && c.data.band < c.N / 2, "data.band must lie inside the lattice");
    require(c.data.norm >= 0.0 && std::isfinite(c.data.norm), "data.norm must be nonnegative");
    if (c.data.kind == "plane_wave") require(spec->on_lattice({c.data.mode[0], c.data.mode[1]}), "plane-wave mode is off the lattice");
  }
  if (uses("region")) {
    require(!c.region.empty(), "region.parts must describe a nonempty region");
    if (spec) make_damping_profile(*spec, c.region, c.region_width);
  }
  if (uses("damping")) {
    require(c.damping == "region" || c.damping == "constant" || c.damping == "none",
            "damping.profile must be region, constant or none");
    require(c.damping_strength >= 0.0 && std::isfinite(c.damping_strength), "damping.strength must be nonnegative");
  }
  if (uses("run")) require(c.T > 0.0 && std::isfinite(c.T), "run.T must be positive");
  if (uses("control")) {
    const auto& h = c.control;
    require(h.T > 0.0 && std::isfinite(h.T), "control.T must be positive");
    require(h.cg_tol > 0.0 && h.fixedpoint_tol > 0.0, "control tolerances must be positive");
    require(h.max_cg >= 1 && h.max_fixedpoint >= 1, "control iteration caps must be positive");
    require(h.dt > 0.0 && h.record_every >= 1, "control.dt and control.record_every must be positive");
    require(h.quadrature == "exact" || (h.quadrature == "trapezoid" && h.dt_quad > 0.0),
            "control.quadrature must be exact or trapezoid with dt_quad > 0");
    require(h.smallness > 0.0, "control.smallness must be positive");
  }
  if (uses("observability")) {
    const auto& o = c.observability;
    require(o.T >= 0.0 && std::isfinite(o.T), "observability.T must be nonnegative");
    require(o.j_min >= 0 && o.j_min <= o.j_max, "observability needs 0 <= j_min <= j_max");
    require(o.oversample >= 1 && o.quadrature_dt >= 0.0, "observability.oversample must be >= 1");
    for (int j = o.j_min; j <= o.j_max; ++j)
      require(!band_indices(*spec, std::ldexp(1.0, -j)).empty(),
              "frequency band h = 2^-" + std::to_string(j) + " is empty on this lattice");
  }
  if (uses("gcc")) {
    parse_surface(c.gcc.surface);
    require(c.gcc.t_max > 0.0 && c.gcc.plan.eps_t > 0.0, "gcc.t_max and gcc.eps_t must be positive");
    require(c.gcc.plan.start_points >= 1, "gcc.start_points must be >= 1");
  }
  if (uses("resonance")) {
    const auto& z = c.resonance;
    require(z.K_max >= 1 && (z.K_max & (z.K_max - 1)) == 0, "resonance.K_max must be a power of two");
    require(z.q >= 1, "resonance.q must be positive");
    resonance::Beta{z.p, z.q}.validate();
  }
  if (uses("bourgain")) {
    const auto& b = c.bourgain;
    require(b.b_prime > 0.0 && b.b_prime < 0.5, "bourgain.b_prime must lie in (0, 1/2)");
    require(b.samples >= 1 && b.duhamel_signals >= 0, "bourgain sample counts must be positive");
    require(b.duhamel_b_prime > 0.0 && b.duhamel_b_prime < 0.5 && b.duhamel_b > 0.5 &&
                b.duhamel_b + b.duhamel_b_prime <= 1.0,
            "Duhamel exponents need 0 < b' < 1/2 < b and b + b' <= 1");
    for (double T : b.duhamel_T) require(T > 0.0 && T <= 1.0, "bourgain.duhamel_T values must lie in (0, 1]");
  }
}

}  // namespace b4nls::experiment
