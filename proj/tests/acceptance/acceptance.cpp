// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Experiments driven by configs/ run through the same runner as the CLI, into
// ./acceptance_runs relative to the working directory.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>

#include "b4nls/bourgain/xsb.hpp"
#include "b4nls/dynamics/audit.hpp"
#include "b4nls/experiment/runner.hpp"
#include "b4nls/gcc/geodesic.hpp"
#include "b4nls/hum/control.hpp"
#include "b4nls/resonance/resonance.hpp"

#ifndef B4NLS_CONFIG_DIR
#define B4NLS_CONFIG_DIR "configs"
#endif

using namespace b4nls;
namespace fs = std::filesystem;

namespace {

// Regression values pinned from the first full run.
constexpr int kLinearControlCgIterations = 194;
constexpr double kObservabilityFloor = 0.46150457929966321;

const fs::path kRuns = "acceptance_runs";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

experiment::RunReport run(const std::string& config, const std::string& tag = "a") {
  const fs::path out = kRuns / tag / fs::path(config).stem();
  fs::remove_all(out);
  return experiment::run_config_file(fs::path(B4NLS_CONFIG_DIR) / config, out);
}

// ---------------------------------------------------------------------------

Outcome conservation() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run("simulate.ini");
  const double secs = seconds_since(t0);
  const double dm = r.number("mass_drift"), de = r.number("energy_drift");
  return {dm <= 1e-8 && de <= 1e-6 && secs < 10.0,
          "mass drift " + num(dm) + " (<= 1e-8), energy drift " + num(de) + " (<= 1e-6), " + num(secs) + " s"};
}

Outcome plane_wave() {
  // A e_m solves the cubic equation with coefficient A exp(i (lambda_m + |A|^2 / (2pi)^d) t).
  const auto spec = make_torus(1, 64, 1.0);
  const Wavevector m{3, 0};
  const Complex A(0.8, 0.6);
  dynamics::SolverConfig cfg;
  cfg.record_every = 1000;
  const auto trace = dynamics::evolve_nonlinear(SpectralField::basis(spec, m, A), 1.0, cfg);
  const double rate = 81.0 + 9.0 + std::norm(A) / (2.0 * M_PI);
  const auto exact = SpectralField::basis(spec, m, A * std::polar(1.0, rate));
  const double err = (trace.final_state().coeffs() - exact.coeffs()).norm() / exact.coeffs().norm();
  return {err <= 1e-6, "relative L2 error " + num(err) + " (<= 1e-6)"};
}

Outcome dissipation_identity() {
  Rng rng(21);
  const auto spec = make_torus(1, 64, 1.0);
  const auto u0 = random_band_limited(spec, 15, rng);
  const auto trace = dynamics::evolve_damped(u0, constant_profile(spec, 1.0), 1.0, dynamics::SolverConfig{});
  const auto audit = dynamics::audit_dissipation(trace);
  return {audit.lhs < 0.0 && audit.mismatch <= 1e-4,
          "E(T)-E(0) = " + num(audit.lhs) + ", mismatch " + num(audit.mismatch) + " (<= 1e-4)"};
}

Outcome stabilization() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run("stabilize.ini");
  const double secs = seconds_since(t0);
  const double g = r.number("gamma"), r2 = r.number("r_squared"), g0 = r.number("undamped_gamma");
  return {g > 0.0 && r2 >= 0.95 && std::abs(g0) <= 1e-3 && secs < 120.0,
          "gamma " + num(g) + ", r^2 " + num(r2) + ", undamped gamma " + num(g0) + ", " + num(secs) + " s"};
}

Outcome hum_closed_form() {
  double worst = 0.0;
  for (int d : {1, 2}) {
    const auto spec = make_torus(d, d == 1 ? 64 : 16, 1.0);
    const double T = 0.9;
    const hum::HumOperator lam(constant_profile(spec, 1.0), T);
    Rng rng(500 + d);
    for (int i = 0; i < 20; ++i) {
      const auto v = random_band_limited(spec, d == 1 ? 20 : 5, rng, 1.0, 0.0);
      CVector expected = v.coeffs();
      for (std::size_t k = 0; k < spec.size(); ++k)
        expected[static_cast<Eigen::Index>(k)] *= T / std::pow(1.0 + spec.k2(k), 2.0);
      worst = std::max(worst, (lam.apply(v).coeffs() - expected).norm());
    }
  }
  return {worst <= 1e-10, "max deviation " + num(worst) + " over 40 vectors (<= 1e-10)"};
}

Outcome linear_control() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run("control_linear.ini");
  const double secs = seconds_since(t0);
  const double res = r.number("relative_residual");
  const int iters = static_cast<int>(r.number("cg_iterations"));
  return {res <= 1e-6 && iters == kLinearControlCgIterations && secs < 60.0,
          "relative H2 residual " + num(res) + ", CG iterations " + std::to_string(iters) + " (pinned " +
              std::to_string(kLinearControlCgIterations) + "), " + num(secs) + " s"};
}

Outcome nonlinear_control() {
  const auto r = run("control_nonlinear.ini");
  const double norm = r.number("initial_norm"), ratio = r.number("max_contraction_ratio");
  const double res = r.number("terminal_residual");
  const int it = static_cast<int>(r.number("fixedpoint_iterations"));
  return {std::abs(norm - 1e-2) <= 1e-14 && it <= 10 && ratio < 0.5 && res <= 1e-7 && r.value("verified") == "true",
          "iterations " + std::to_string(it) + ", max contraction " + num(ratio) + ", terminal residual " + num(res)};
}

Outcome observability_floor() {
  const auto r = run("observability.ini");
  std::ifstream is(kRuns / "a" / "observability" / "gramian.csv");
  std::string line;
  std::getline(is, line);
  double lowest = std::numeric_limits<double>::infinity();
  int rows = 0;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string h, dim, T, mn;
    std::getline(ls, h, ',');
    std::getline(ls, dim, ',');
    std::getline(ls, T, ',');
    std::getline(ls, mn, ',');
    lowest = std::min(lowest, std::stod(mn));
    ++rows;
  }
  const double drift = std::abs(lowest - kObservabilityFloor) / kObservabilityFloor;
  return {rows == 5 && lowest > 0.0 && drift <= 0.05,
          "min eigenvalue over j = 2..6: " + num(lowest) + " (pinned floor " + num(kObservabilityFloor) +
              ", drift " + num(drift) + " <= 5%)"};
}

Outcome gcc_examples() {
  using namespace b4nls::gcc;
  const Region strip{region::Strip{M_PI / 2, 3 * M_PI / 2, 0}};
  const double eps = 1e-10;
  const auto across = first_hit_time({Surface::torus2, {0, 0, 0}, {1, 0, 0}, strip, 20.0, eps});
  const auto up = first_hit_time({Surface::torus2, {0, 0, 0}, {0, 1, 0}, strip, 100.0, eps});
  const bool a = across && std::abs(*across - M_PI / 2) <= eps && !up;

  const auto strips = run("gcc_two_strips.ini");
  const bool b = strips.value("holds") == "true" && strips.number("T0") <= 2 * M_PI * std::sqrt(2.0) + 1e-6;

  const auto ball_run = run("gcc_small_ball.ini");
  const region::Ball ball{{M_PI, M_PI}, 0.3};
  const auto res = gcc_time(Surface::torus2, Region{ball}, 20.0, {});
  bool c = ball_run.value("holds") == "false" && res.witness.has_value();
  if (c) {
    // The unwrapped witness segment stays outside every lattice image of the ball.
    const auto& w = *res.witness;
    for (int m = -10; m <= 10 && c; ++m)
      for (int n = -10; n <= 10 && c; ++n) {
        const double cx = ball.center[0] + 2 * M_PI * m - w.start[0], cy = ball.center[1] + 2 * M_PI * n - w.start[1];
        const double s = std::clamp(cx * w.direction[0] + cy * w.direction[1], 0.0, w.t_max);
        c = std::hypot(cx - s * w.direction[0], cy - s * w.direction[1]) >= ball.radius;
      }
    // The line x2 = 0 stays at distance pi from the centre row.
    c = c && !first_hit_time({Surface::torus2, {0, 0, 0}, {1, 0, 0}, Region{ball}, 100.0, eps});
  }
  return {a && b && c, std::string("strip hit/miss ") + (a ? "ok" : "wrong") + ", two-strip T0 " +
                           (strips.value("holds") == "true" ? num(strips.number("T0")) : "none") + " (<= " +
                           num(2 * M_PI * std::sqrt(2.0)) + "), small-ball witness " + (c ? "verified" : "missing")};
}

Outcome resonance_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;
  for (auto [p, q] : {std::pair<std::int64_t, std::int64_t>{0, 1}, {1, 2}}) {
    try {
      // Every tau in every dyadic box up to 2^8 is compared against the
      // two-squares reduction; the sweep throws on the first mismatch.
      const auto res = resonance::counting_sweep(256, p, q, {256});
      std::int64_t direct_mismatch = 0;
      for (const auto& row : res.rows)
        direct_mismatch += static_cast<std::int64_t>(resonance::enumerate_A(row.K, row.K, row.tau, p, q).size()) !=
                           static_cast<std::int64_t>(row.count);
      ok = ok && res.cross_checked_up_to == 256 && direct_mismatch == 0;
      detail += "beta " + std::to_string(p) + "/" + std::to_string(q) + ": 0 mismatches; ";
    } catch (const NumericalError& e) {
      ok = false;
      detail += std::string("mismatch: ") + e.what() + "; ";
    }
  }
  const auto r = run("resonance.ini");
  const double ex = r.number("growth_exponent");
  const double secs = seconds_since(t0);
  ok = ok && ex <= 0.5 && secs < 120.0;
  return {ok, detail + "growth exponent (K <= 1024) " + num(ex) + " (<= 0.5), " + num(secs) + " s"};
}

// Independent oracle: Simpson quadrature of the Fourier transform, then of
// (1/2pi) int <sigma>^{2b} |psi_hat|^2.
double hb_norm_quadrature(const std::function<double(double)>& g, double window, double b) {
  const int nt = 4000, ns = 6400;
  const double sigma_max = 160.0, ht = window / nt, hs = 2.0 * sigma_max / ns;
  std::vector<double> gv(nt + 1);
  for (int i = 0; i <= nt; ++i) gv[i] = g(i * ht);
  double acc = 0.0;
  for (int j = 0; j <= ns; ++j) {
    const double sigma = -sigma_max + j * hs;
    Complex ghat = 0.0;
    for (int i = 0; i <= nt; ++i)
      ghat += ((i == 0 || i == nt) ? 1.0 : (i % 2 ? 4.0 : 2.0)) * gv[i] * std::polar(1.0, sigma * i * ht);
    ghat *= ht / 3.0;
    acc += ((j == 0 || j == ns) ? 1.0 : (j % 2 ? 4.0 : 2.0)) * std::pow(1.0 + sigma * sigma, b) * std::norm(ghat);
  }
  return std::sqrt(acc * hs / 3.0 / (2.0 * M_PI));
}

Outcome bourgain_identities() {
  using namespace b4nls::bourgain;
  const double W = 2.0 * M_PI;
  const auto field = [&](const ManifoldSpec& spec, Rng& rng, int samples) {
    const auto a = random_band_limited(spec, 4, rng, 1.0, 0.0), b = random_band_limited(spec, 4, rng, 1.0, 0.0);
    return SpaceTimeField::sample(spec, W, samples, [&](double t) {
      CVector c = a.coeffs() + std::polar(1.0, 3.0 * t) * b.coeffs();
      propagate_in_place(spec, c, 0.5 * t);
      return c;
    });
  };

  const auto spec2 = make_torus(2, 16, 1.0);
  Rng rng(3);
  double plancherel = 0.0;
  for (int i = 0; i < 5; ++i) {
    const auto f = field(spec2, rng, 256);
    for (double s : {0.0, 2.0}) plancherel = std::max(plancherel, std::abs(xsb_norm(f, s, 0.0) / l2_hs_norm(f, s) - 1.0));
  }

  const auto spec1 = make_torus(1, 16, 1.0);
  const auto v0 = random_band_limited(spec1, 3, rng);
  const Taper taper;
  const auto free = SpaceTimeField::sample(spec1, W, 1024, [&](double t) {
    CVector c = v0.coeffs();
    propagate_in_place(spec1, c, t);
    return c;
  });
  double factor = 0.0;
  for (double b : {0.3, 0.7}) {
    const double expected = hb_norm_quadrature([&](double t) { return taper(t, W); }, W, b) * sobolev_norm(v0, 2.0);
    factor = std::max(factor, std::abs(xsb_norm(free, 2.0, b) / expected - 1.0));
  }

  const auto spec32 = make_torus(1, 32, 1.0);
  std::uniform_real_distribution<double> U(-1.0, 2.0);
  int violations = 0;
  for (int i = 0; i < 100; ++i) {
    const auto f = field(spec32, rng, 128);
    double s1 = U(rng), s2 = U(rng), b1 = U(rng), b2 = U(rng);
    if (s1 > s2) std::swap(s1, s2);
    if (b1 > b2) std::swap(b1, b2);
    violations += xsb_norm(f, s1, b1) > xsb_norm(f, s2, b2);
  }
  return {plancherel <= 1e-12 && factor <= 0.02 && violations == 0,
          "X^{s,0} vs L2H^s " + num(plancherel) + " (<= 1e-12), free-solution identity " + num(factor) +
              " (<= 2%), monotonicity violations " + std::to_string(violations) + "/100"};
}

std::map<std::string, std::string> csv_files(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    std::ifstream is(e.path(), std::ios::binary);
    out[fs::relative(e.path(), root).string()] = std::string(std::istreambuf_iterator<char>(is), {});
  }
  return out;
}

Outcome determinism() {
  const std::vector<std::string> configs{"stabilize.ini",  "control_linear.ini", "observability.ini",
                                         "gcc_small_ball.ini", "resonance_half.ini", "bourgain.ini"};
  int files = 0, differing = 0;
  for (const auto& c : configs) {
    const auto stem = fs::path(c).stem();
    if (!fs::exists(kRuns / "a" / stem)) run(c, "a");
    run(c, "b");
    const auto first = csv_files(kRuns / "a" / stem), second = csv_files(kRuns / "b" / stem);
    for (const auto& [name, bytes] : first) {
      ++files;
      const auto it = second.find(name);
      differing += it == second.end() || it->second != bytes;
    }
    differing += first.size() != second.size();
  }
  return {files > 0 && differing == 0,
          std::to_string(files) + " CSV files from " + std::to_string(configs.size()) + " experiments, " +
              std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"conservation", conservation},
      {"plane-wave oracle", plane_wave},
      {"dissipation identity", dissipation_identity},
      {"stabilization", stabilization},
      {"HUM closed form", hum_closed_form},
      {"linear exact controllability", linear_control},
      {"nonlinear local control", nonlinear_control},
      {"frequency-uniform observability", observability_floor},
      {"GCC checker", gcc_examples},
      {"resonance oracle equivalence", resonance_oracle},
      {"Bourgain identities", bourgain_identities},
      {"determinism", determinism},
  };
  fs::create_directories(kRuns);
  int failed = 0, index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << index << "] " << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
