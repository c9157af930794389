#pragma once

#include <fftw3.h>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "b4nls/bourgain/xsb.hpp"
#include "b4nls/dynamics/audit.hpp"
#include "b4nls/dynamics/trace_io.hpp"
#include "b4nls/experiment/config.hpp"
#include "b4nls/gcc/geodesic.hpp"
#include "b4nls/hum/control.hpp"
#include "b4nls/observability/gramian.hpp"
#include "b4nls/resonance/resonance.hpp"

#define B4NLS_VERSION "0.1.0"

namespace b4nls::experiment {

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

/// Key-value results of one run, in the order they were produced.
struct RunReport {
  Kind kind = Kind::simulate;
  std::filesystem::path output;
  std::vector<std::string> artifacts;  // paths relative to the output directory
  std::vector<std::pair<std::string, std::string>> summary;
  double wall_seconds = 0.0;

  std::string value(const std::string& key) const {
    for (const auto& [k, v] : summary)
      if (k == key) return v;
    throw std::out_of_range("no summary entry '" + key + "'");
  }
  double number(const std::string& key) const { return std::stod(value(key)); }
};

namespace detail {

class Artifacts {
 public:
  Artifacts(std::filesystem::path root, RunReport& report) : root_(std::move(root)), report_(report) {}

  std::ofstream open(const std::string& name) {
    std::ofstream os(root_ / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (root_ / name).string());
    report_.artifacts.push_back(name);
    return os;
  }
  void trace(const std::string& name, const dynamics::EvolutionTrace& t) {
    dynamics::write_trace(root_ / name, t);
    report_.artifacts.push_back(name + "/");
  }
  void note(const std::string& key, const std::string& value) { report_.summary.emplace_back(key, value); }
  void note(const std::string& key, double value) { note(key, format_real(value)); }
  void note_int(const std::string& key, long long value) { note(key, std::to_string(value)); }

  /// summary.txt mirrors the report's key-value list.
  void write_summary() {
    auto os = open("summary.txt");
    for (const auto& [k, v] : report_.summary) os << k << " = " << v << '\n';
  }

 private:
  std::filesystem::path root_;
  RunReport& report_;
};

inline SpectralField initial_datum(const ExperimentConfig& c, const ManifoldSpec& spec, Rng& rng) {
  if (c.data.kind == "zero") return SpectralField(spec);
  if (c.data.kind == "plane_wave") return SpectralField::basis(spec, {c.data.mode[0], c.data.mode[1]}, c.data.amplitude);
  return random_band_limited(spec, c.data.band, rng, c.data.norm, c.data.s, c.data.decay);
}

inline DampingProfile region_profile(const ExperimentConfig& c, const ManifoldSpec& spec, double strength = 1.0) {
  auto a = make_damping_profile(spec, c.region, c.region_width);
  a.values *= strength;
  return a;
}

inline hum::ControlProblem control_problem(const ExperimentConfig& c, const SpectralField& u0) {
  hum::ControlProblem p;
  p.u0 = u0;
  p.T = c.control.T;
  p.phi = region_profile(c, u0.spec());
  p.k_nl = c.solver.k_nl;
  p.nonlinearity = c.solver.nonlinearity;
  p.cg_tol = c.control.cg_tol;
  p.fixedpoint_tol = c.control.fixedpoint_tol;
  p.max_cg = c.control.max_cg;
  p.max_fixedpoint = c.control.max_fixedpoint;
  p.smallness = c.control.smallness;
  p.dt = c.control.dt;
  p.record_every = c.control.record_every;
  p.dealias = c.solver.dealias;
  p.quadrature = c.control.quadrature == "trapezoid" ? hum::Quadrature::trapezoid : hum::Quadrature::exact;
  p.dt_quad = c.control.dt_quad;
  return p;
}

inline void run_simulate(const ExperimentConfig& c, Artifacts& out) {
  const auto spec = c.manifold();
  Rng rng(c.seed);
  const auto u0 = initial_datum(c, spec, rng);
  const auto trace = dynamics::evolve_nonlinear(u0, c.T, c.solver);
  out.trace("trace", trace);
  const auto& L = trace.ledger;
  const auto rel = [](double a, double b) { return b != 0.0 ? std::abs(a - b) / std::abs(b) : std::abs(a - b); };
  out.note("mass_drift", rel(L.back().mass, L.front().mass));
  out.note("energy_drift", rel(L.back().energy, L.front().energy));
  out.note("final_mass", L.back().mass);
  out.note("final_energy", L.back().energy);
}

inline void run_stabilize(const ExperimentConfig& c, Artifacts& out) {
  const auto spec = c.manifold();
  Rng rng(c.seed);
  const auto u0 = initial_datum(c, spec, rng);
  const auto a = c.damping == "region"     ? region_profile(c, spec, c.damping_strength)
                 : c.damping == "constant" ? constant_profile(spec, c.damping_strength)
                                           : constant_profile(spec, 0.0);
  const auto trace = dynamics::evolve_damped(u0, a, c.T, c.solver);
  out.trace("trace", trace);
  const auto fit = dynamics::fit_decay_rate(trace);
  const auto audit = dynamics::audit_dissipation(trace);
  auto csv = out.open("decay_fit.csv");
  csv << "run,gamma,r_squared\n" << "damped," << format_real(fit.gamma) << ',' << format_real(fit.r_squared) << '\n';
  out.note("gamma", fit.gamma);
  out.note("r_squared", fit.r_squared);
  out.note("dissipation_mismatch", audit.mismatch);
  out.note("energy_initial", trace.ledger.front().energy);
  out.note("energy_final", trace.ledger.back().energy);
  if (c.control_run) {
    const auto free = dynamics::evolve_damped(u0, constant_profile(spec, 0.0), c.T, c.solver);
    out.trace("undamped", free);
    const auto g = dynamics::fit_decay_rate(free);
    csv << "undamped," << format_real(g.gamma) << ',' << format_real(g.r_squared) << '\n';
    out.note("undamped_gamma", g.gamma);
  }
}

inline void write_control(const hum::ControlCertificate& cert, Artifacts& out) {
  auto csv = out.open("certificate.csv");
  hum::write_certificate_csv(csv, cert);
  out.trace("trajectory", cert.trajectory);
  int cg = 0;
  for (int i : cert.cg_iterations) cg += i;
  out.note_int("cg_iterations", cg);
  out.note("terminal_residual", cert.terminal_residual);
  out.note("relative_residual", cert.relative_residual());
  out.note("stored_residual", cert.stored_residual);
  out.note("initial_norm", cert.initial_norm);
  out.note("verified", cert.verified ? "true" : "false");
}

inline void run_control(const ExperimentConfig& c, Artifacts& out, bool nonlinear) {
  const auto spec = c.manifold();
  Rng rng(c.seed);
  const auto prob = control_problem(c, initial_datum(c, spec, rng));
  const auto cert = nonlinear ? hum::solve_nonlinear_control(prob) : hum::solve_linear_control(prob);
  write_control(cert, out);
  if (nonlinear) {
    out.note_int("fixedpoint_iterations", cert.fixedpoint_iterations);
    double worst = 0.0;
    for (double r : cert.contraction_ratios) worst = std::max(worst, r);
    out.note("max_contraction_ratio", worst);
  }
}

inline void run_observability(const ExperimentConfig& c, Artifacts& out) {
  const auto spec = c.manifold();
  observability::GramianOptions opt;
  opt.width = c.region_width;
  opt.oversample = c.observability.oversample;
  opt.quadrature_dt = c.observability.quadrature_dt;
  opt.seed = c.seed;
  std::vector<observability::GramianReport> rows;
  double floor = std::numeric_limits<double>::infinity();
  for (int j = c.observability.j_min; j <= c.observability.j_max; ++j) {
    rows.push_back(observability::band_gramian_min_eig(spec, c.region, c.observability.T, std::ldexp(1.0, -j), opt));
    floor = std::min(floor, rows.back().min_eig);
  }
  auto csv = out.open("gramian.csv");
  observability::write_gramian_csv(csv, rows);
  out.note("min_eig_floor", floor);
}

inline void run_gcc(const ExperimentConfig& c, Artifacts& out) {
  const auto res = gcc::gcc_time(parse_surface(c.gcc.surface), c.region, c.gcc.t_max, c.gcc.plan);
  {
    auto csv = out.open("gcc.csv");
    gcc::write_gcc_csv(csv, res);
  }
  {
    auto os = out.open("gcc_summary.txt");
    gcc::write_gcc_summary(os, res);
  }
  out.note("holds", res.holds() ? "true" : "false");
  if (res.holds()) out.note("T0", *res.T0);
  out.note_int("geodesics", static_cast<long long>(res.samples.size()));
}

inline void run_resonance(const ExperimentConfig& c, Artifacts& out) {
  const auto& z = c.resonance;
  const auto res = resonance::counting_sweep(z.K_max, z.p, z.q, {z.cross_check_max_K});
  {
    auto csv = out.open("resonance.csv");
    resonance::write_sweep_csv(csv, res);
  }
  {
    auto os = out.open("resonance_summary.txt");
    resonance::write_sweep_summary(os, res);
  }
  out.note("growth_exponent", res.exponent);
  out.note_int("cross_checked_up_to", res.cross_checked_up_to);
}

inline void run_bourgain(const ExperimentConfig& c, Artifacts& out) {
  const auto spec = c.manifold();
  const auto& b = c.bourgain;
  Rng rng(c.seed);
  bourgain::TrilinearOptions opt;
  opt.band = b.band;
  opt.time_samples = b.time_samples;
  opt.time_modes = b.time_modes;
  bourgain::check_trilinear_grid(spec, opt);
  auto tri = out.open("trilinear.csv");
  tri << "sample,ratio\n";
  double sup = 0.0;
  for (int i = 0; i < b.samples; ++i) {
    const auto r = bourgain::trilinear_ratio(bourgain::random_space_time_field(spec, rng, opt), b.s, b.b_prime);
    tri << i << ',' << (r ? format_real(*r) : std::string("skip")) << '\n';
    if (r) sup = std::max(sup, *r);
  }
  out.note("trilinear_sup", sup);

  auto duh = out.open("duhamel.csv");
  duh << "signal,T,ratio\n";
  double worst_gap = 0.0;
  for (int i = 0; i < b.duhamel_signals; ++i) {
    const auto g = bourgain::random_time_signal(rng, 3, -4, 4);
    const auto p = bourgain::duhamel_gain_probe(g, b.duhamel_b, b.duhamel_b_prime, b.duhamel_T);
    for (const auto& pt : p.points) duh << i << ',' << format_real(pt.T) << ',' << format_real(pt.ratio) << '\n';
    if (p.points.size() >= 2) worst_gap = std::max(worst_gap, std::abs(p.exponent - p.expected_exponent()));
  }
  out.note("duhamel_expected_exponent", 1.0 - b.duhamel_b - b.duhamel_b_prime);
  out.note("duhamel_max_exponent_gap", worst_gap);
}

inline std::string versions() {
  std::ostringstream os;
  os << "b4nls " << B4NLS_VERSION << "; eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
     << EIGEN_MINOR_VERSION << "; " << fftw_version << "; boost " << BOOST_LIB_VERSION << "; " << OPENSSL_VERSION_TEXT
     << "; compiler " << __VERSION__;
  return os.str();
}

}  // namespace detail

/// Runs one experiment from the config text. The config bytes are copied
/// into the output directory and hashed into the manifest, which is written last.
inline RunReport run_config_text(const std::string& text, std::optional<std::filesystem::path> output_override = {}) {
  std::istringstream is(text);
  const ExperimentConfig cfg = parse_config(is);
  validate(cfg);
  RunReport report;
  report.kind = cfg.kind;
  report.output = output_override ? *output_override : cfg.output;
  std::error_code ec;
  std::filesystem::create_directories(report.output, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + report.output.string() + ": " + ec.message());

  const auto start = std::chrono::steady_clock::now();
  detail::Artifacts out(report.output, report);
  {
    auto os = out.open("config.ini");
    os << text;
  }
  switch (cfg.kind) {
    case Kind::simulate: detail::run_simulate(cfg, out); break;
    case Kind::stabilize: detail::run_stabilize(cfg, out); break;
    case Kind::control_linear: detail::run_control(cfg, out, false); break;
    case Kind::control_nonlinear: detail::run_control(cfg, out, true); break;
    case Kind::observability_sweep: detail::run_observability(cfg, out); break;
    case Kind::gcc_check: detail::run_gcc(cfg, out); break;
    case Kind::resonance_sweep: detail::run_resonance(cfg, out); break;
    case Kind::bourgain_probe: detail::run_bourgain(cfg, out); break;
  }
  out.write_summary();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ofstream m(report.output / "manifest.txt", std::ios::binary);
  if (!m) throw std::runtime_error("cannot write manifest in " + report.output.string());
  m << "experiment = " << kind_info(cfg.kind).name << '\n'
    << "config_sha256 = " << sha256_hex(text) << '\n'
    << "seed = " << cfg.seed << '\n'
    << "versions = " << detail::versions() << '\n'
    << "wall_time_seconds = " << format_real(report.wall_seconds) << '\n';
  for (const auto& a : report.artifacts) m << "artifact = " << a << '\n';
  return report;
}

inline RunReport run_config_file(const std::filesystem::path& path,
                                 std::optional<std::filesystem::path> output_override = {}) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return run_config_text(text, std::move(output_override));
}

}  // namespace b4nls::experiment
