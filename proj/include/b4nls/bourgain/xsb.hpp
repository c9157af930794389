#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <vector>

#include "b4nls/dynamics/evolve.hpp"
#include "b4nls/dynamics/trace_io.hpp"
#include "b4nls/spectral/fft.hpp"
#include "b4nls/spectral/field.hpp"
#include "b4nls/spectral/operators.hpp"
#include "b4nls/spectral/random.hpp"

namespace b4nls::bourgain {

/// Window taper: C-infinity ramps of length ramp_fraction * window at both
/// ends and 1 in between, built from the same smooth step as the band cutoff.
struct Taper {
  double ramp_fraction = 0.25;

  void validate() const { require(ramp_fraction > 0.0 && ramp_fraction <= 0.5, "taper ramp must lie in (0, 1/2]"); }
  double operator()(double t, double window) const {
    const double r = ramp_fraction * window;
    return smooth_step(t / r) * smooth_step((window - t) / r);
  }
};

/// Space-time samples u(t_j, .) in Fourier coefficients, t_j = j * window / M_t,
/// j = 0 .. M_t - 1, one row per time. The window is treated as periodic, which
/// is legitimate once the field vanishes at its ends.
class SpaceTimeField {
 public:
  SpaceTimeField(const ManifoldSpec& spec, double window, int samples, Taper taper = {})
      : spec_(spec), window_(window), taper_(taper) {
    require(window > 0.0 && std::isfinite(window), "time window must be positive");
    require(samples >= 8 && samples % 2 == 0, "time samples must be even and at least 8");
    taper.validate();
    values_ = Eigen::MatrixXcd::Zero(samples, static_cast<Eigen::Index>(spec.size()));
  }

  /// Samples taper(t) * profile(t), with profile returning coefficient vectors.
  template <class Profile>
  static SpaceTimeField sample(const ManifoldSpec& spec, double window, int samples, Profile&& profile,
                               Taper taper = {}) {
    SpaceTimeField f(spec, window, samples, taper);
    for (int j = 0; j < samples; ++j) {
      const double t = f.time(j);
      const double w = taper(t, window);
      if (w == 0.0) continue;
      const CVector c = profile(t);
      require(c.size() == f.values_.cols(), "profile returned the wrong number of coefficients");
      f.values_.row(j) = w * c.transpose();
    }
    return f;
  }

  const ManifoldSpec& spec() const { return spec_; }
  double window() const { return window_; }
  int samples() const { return static_cast<int>(values_.rows()); }
  double dt() const { return window_ / samples(); }
  double time(int j) const { return j * dt(); }
  const Taper& taper() const { return taper_; }
  Eigen::MatrixXcd& values() { return values_; }
  const Eigen::MatrixXcd& values() const { return values_; }
  CVector at(int j) const { return values_.row(j).transpose(); }

  /// Vanishing at the window end relative to the field's size.
  bool tapered(double tol = 1e-12) const {
    const double peak = values_.cwiseAbs().maxCoeff();
    return values_.row(0).cwiseAbs().maxCoeff() <= tol * peak;
  }

 private:
  ManifoldSpec spec_;
  double window_;
  Taper taper_;
  Eigen::MatrixXcd values_;
};

/// tau_m = 2 pi m / window for m in FFT order.
inline double time_frequency(const SpaceTimeField& f, int m) {
  const int M = f.samples();
  return 2.0 * M_PI * (m < M / 2 ? m : m - M) / f.window();
}

/// hat f_k(tau_m) = dt * sum_j f_k(t_j) exp(i tau_m t_j), one column per mode.
inline Eigen::MatrixXcd time_transform(const SpaceTimeField& f) {
  const int M = f.samples();
  Eigen::MatrixXcd out(M, f.values().cols());
  CVector in(M), res(M);
  for (Eigen::Index k = 0; k < f.values().cols(); ++k) {
    in = f.values().col(k);
    b4nls::detail::fft({M}, FFTW_BACKWARD, in, res);
    out.col(k) = f.dt() * res;
  }
  return out;
}

namespace detail {

inline double japanese(double x) { return std::sqrt(1.0 + x * x); }

/// sqrt( (1/2pi) sum_k (1+|k|^2)^s sum_m <tau_m + shift_k>^{2b} |hat f_k(tau_m)|^2 dtau ).
inline double weighted_norm(const SpaceTimeField& f, double s, double b, bool dispersive) {
  const auto F = time_transform(f);
  const auto& spec = f.spec();
  const double dtau = 2.0 * M_PI / f.window();
  double acc = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    const double shift = dispersive ? spec.dispersion(k) : 0.0;
    double mode = 0.0;
    for (int m = 0; m < f.samples(); ++m) {
      const double a2 = std::norm(F(m, col));
      if (a2 == 0.0) continue;
      mode += std::pow(japanese(time_frequency(f, m) + shift), 2.0 * b) * a2;
    }
    acc += std::pow(1.0 + spec.k2(k), s) * mode;
  }
  return std::sqrt(acc * dtau / (2.0 * M_PI));
}

}  // namespace detail

/// Discrete X^{s,b} norm with the dispersion weight <tau + |k|^4 + beta |k|^2>.
/// The transform uses exp(+i tau t), so a free wave exp(i t L) v0 sits on the
/// surface tau = -(|k|^4 + beta |k|^2) where the weight is 1. The 1 / (2 pi)
/// makes b = 0 the discrete L^2_t H^s_x norm exactly. The time grid has to
/// resolve every frequency present; content beyond pi / dt aliases.
inline double xsb_norm(const SpaceTimeField& f, double s, double b) {
  require(f.tapered(), "space-time field is not tapered at the window ends");
  return detail::weighted_norm(f, s, b, true);
}

/// H^b_t H^s_x norm without the dispersion shift.
inline double hb_hs_norm(const SpaceTimeField& f, double s, double b) {
  require(f.tapered(), "space-time field is not tapered at the window ends");
  return detail::weighted_norm(f, s, b, false);
}

/// sqrt(dt * sum_j ||f(t_j)||_{H^s}^2).
inline double l2_hs_norm(const SpaceTimeField& f, double s) {
  double acc = 0.0;
  for (int j = 0; j < f.samples(); ++j) acc += sobolev_norm_squared(f.spec(), f.at(j), s);
  return std::sqrt(acc * f.dt());
}

/// u^#(t) = exp(-i t L) u(t), sample by sample.
inline SpaceTimeField conjugate_free(const SpaceTimeField& f) {
  SpaceTimeField out = f;
  for (int j = 0; j < f.samples(); ++j) {
    CVector row = f.at(j);
    propagate_in_place(f.spec(), row, -f.time(j));
    out.values().row(j) = row.transpose();
  }
  return out;
}

/// The b = 1 characterization ||u||^2 = ||u||^2_{L^2 H^s} + ||(i d_t + L) u||^2_{L^2 H^s},
/// with d_t from fourth-order periodic central differences.
inline double xs1_norm_direct(const SpaceTimeField& f, double s) {
  require(f.tapered(), "space-time field is not tapered at the window ends");
  const int M = f.samples();
  const auto& spec = f.spec();
  const Complex I(0.0, 1.0);
  double acc = 0.0;
  for (int j = 0; j < M; ++j) {
    const auto row = [&](int i) { return f.at(((i % M) + M) % M); };
    const CVector ut = (8.0 * (row(j + 1) - row(j - 1)) - (row(j + 2) - row(j - 2))) / (12.0 * f.dt());
    CVector lu = f.at(j);
    for (std::size_t k = 0; k < spec.size(); ++k) lu[static_cast<Eigen::Index>(k)] *= spec.dispersion(k);
    acc += sobolev_norm_squared(spec, f.at(j), s) + sobolev_norm_squared(spec, CVector(I * ut + lu), s);
  }
  return std::sqrt(acc * f.dt());
}

/// phi(t) u(t) for a scalar time multiplier.
template <class Multiplier>
SpaceTimeField multiply_time(const SpaceTimeField& f, Multiplier&& phi) {
  SpaceTimeField out = f;
  for (int j = 0; j < f.samples(); ++j) out.values().row(j) *= phi(f.time(j));
  return out;
}

/// |u|^2 u at every time sample, by collocation.
inline SpaceTimeField cubic(const SpaceTimeField& f) {
  SpaceTimeField out = f;
  for (int j = 0; j < f.samples(); ++j) {
    CVector phys = to_physical(f.spec(), f.at(j));
    for (auto& v : phys) v *= std::norm(v);
    out.values().row(j) = from_physical_coeffs(f.spec(), phys).transpose();
  }
  return out;
}

/// Writes the samples in the trace layout plus a `taper.csv` record.
inline void write_space_time_field(const std::filesystem::path& dir, const SpaceTimeField& f) {
  dynamics::EvolutionTrace trace;
  trace.spec = f.spec();
  trace.dt = f.dt();
  for (int j = 0; j < f.samples(); ++j) {
    trace.times.push_back(f.time(j));
    trace.states.emplace_back(f.spec(), f.at(j));
  }
  dynamics::write_trace(dir, trace);
  std::ofstream os(dir / "taper.csv", std::ios::binary);
  os << "window,samples,ramp_fraction\n"
     << format_real(f.window()) << ',' << f.samples() << ',' << format_real(f.taper().ramp_fraction) << '\n';
}

// ---------------------------------------------------------------------------
// Scalar time signals

/// (1/2pi) sum_m <tau_m>^{2b} |hat g(tau_m)|^2 dtau for samples on a periodic window.
inline double hb_norm_scalar(const CVector& g, double dt, double b) {
  const auto M = static_cast<int>(g.size());
  CVector G;
  b4nls::detail::fft({M}, FFTW_BACKWARD, g, G);
  const double window = M * dt, dtau = 2.0 * M_PI / window;
  double acc = 0.0;
  for (int m = 0; m < M; ++m) {
    const double tau = 2.0 * M_PI * (m < M / 2 ? m : m - M) / window;
    acc += std::pow(detail::japanese(tau), 2.0 * b) * std::norm(dt * G[m]);
  }
  return std::sqrt(acc * dtau / (2.0 * M_PI));
}

/// g(x) = taper_[0,1](x) * sum_j a_j exp(i omega_j x).
struct TimeSignal {
  std::vector<std::pair<double, Complex>> modes;  // (omega, amplitude)
  Taper taper{};

  Complex operator()(double x) const {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    Complex acc = 0.0;
    for (const auto& [w, a] : modes) acc += a * std::polar(1.0, w * x);
    return taper(x, 1.0) * acc;
  }
  bool zero() const {
    for (const auto& m : modes)
      if (m.second != 0.0) return false;
    return true;
  }
};

/// Random signal with `count` modes at frequencies 2 pi m, m uniform in [lo, hi].
inline TimeSignal random_time_signal(Rng& rng, int count, int lo, int hi) {
  std::uniform_int_distribution<int> pick(lo, hi);
  std::normal_distribution<double> g;
  TimeSignal s;
  for (int i = 0; i < count; ++i) s.modes.emplace_back(2.0 * M_PI * pick(rng), Complex(g(rng), g(rng)));
  return s;
}

struct DuhamelOptions {
  double left = -1.0;  // sampling window [left, left + span]
  double span = 16.0;
  int samples = 1 << 16;
};

struct DuhamelPoint {
  double T = 0.0;
  double ratio = 0.0;
};

struct DuhamelProbe {
  double b = 0.0, b_prime = 0.0;
  bool skipped = false;  // zero forcing: the ratio is 0/0
  std::vector<DuhamelPoint> points;
  double exponent = 0.0;  // least-squares slope of log ratio against log T

  double expected_exponent() const { return 1.0 - b - b_prime; }
};

/// Cutoff Psi: 1 on [-1, 1], smooth decay to 0 on 1 <= |x| <= 2.
inline double duhamel_cutoff(double x) { return smooth_step(2.0 - std::abs(x)); }

/// For f_T(t) = g(t / T) measures ||Psi(t/T) int_0^t f_T||_{H^b} / ||f_T||_{H^{-b'}}
/// at each T and fits the power of T.
inline DuhamelProbe duhamel_gain_probe(const TimeSignal& g, double b, double b_prime, const std::vector<double>& Ts,
                                       const DuhamelOptions& opt = {}) {
  require(b_prime > 0.0 && b_prime < 0.5 && b > 0.5 && b + b_prime <= 1.0 + 1e-14,
          "Duhamel probe needs 0 < b' < 1/2 < b and b + b' <= 1");
  require(!Ts.empty(), "need at least one horizon T");
  for (double T : Ts) require(T > 0.0 && T <= 1.0, "horizons must lie in (0, 1]");
  require(opt.left < 0.0 && opt.left + opt.span > 2.0, "sampling window must contain [0, 2]");
  DuhamelProbe probe;
  probe.b = b;
  probe.b_prime = b_prime;
  if (g.zero()) {
    probe.skipped = true;
    return probe;
  }
  const int M = opt.samples;
  const double dt = opt.span / M;
  for (double T : Ts) {
    CVector f(M), F(M);
    for (int j = 0; j < M; ++j) f[j] = g((opt.left + j * dt) / T);
    Complex integral = 0.0;  // cumulative trapezoid from t = 0
    for (int j = 0; j < M; ++j) {
      const double t = opt.left + j * dt;
      if (t > 0.0 && j > 0) integral += 0.5 * dt * (f[j] + f[j - 1]);
      F[j] = t < 0.0 ? Complex(0.0) : duhamel_cutoff(t / T) * integral;
    }
    probe.points.push_back({T, hb_norm_scalar(F, dt, b) / hb_norm_scalar(f, dt, -b_prime)});
  }
  if (probe.points.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(probe.points.size());
    for (const auto& p : probe.points) {
      const double x = std::log(p.T), y = std::log(p.ratio);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    probe.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return probe;
}

// ---------------------------------------------------------------------------
// Trilinear probe

struct TrilinearOptions {
  double window = 2.0 * M_PI;
  int time_samples = 8192;
  int band = 5;        // spatial band of the random fields
  int time_modes = 2;  // temporal modulations exp(i m t), m = 0 .. time_modes
  Taper taper{};
};

/// psi(t) exp(itL) sum_m a_{k,m} exp(imt) on |k_i| <= band, Gaussian a with
/// (1 + |k|^2)^{-1} decay.
inline SpaceTimeField random_space_time_field(const ManifoldSpec& spec, Rng& rng, const TrilinearOptions& opt) {
  std::vector<SpectralField> layers;
  for (int m = 0; m <= opt.time_modes; ++m) layers.push_back(random_band_limited(spec, opt.band, rng, 1.0, 0.0));
  return SpaceTimeField::sample(
      spec, opt.window, opt.time_samples,
      [&](double t) {
        CVector c = CVector::Zero(static_cast<Eigen::Index>(spec.size()));
        for (int m = 0; m <= opt.time_modes; ++m) c += std::polar(1.0, m * t) * layers[static_cast<std::size_t>(m)].coeffs();
        propagate_in_place(spec, c, t);
        return c;
      },
      opt.taper);
}

/// ||u|^2 u||_{X^{s,-b'}} / ||u||^3_{X^{s,b'}}; empty for the zero field.
inline std::optional<double> trilinear_ratio(const SpaceTimeField& u, double s, double b_prime) {
  const double den = xsb_norm(u, s, b_prime);
  if (den == 0.0) return std::nullopt;
  return xsb_norm(cubic(u), s, -b_prime) / (den * den * den);
}

/// The band must cube onto the lattice and the time grid must resolve the
/// cubed phases, whose frequencies reach 3 (lambda_max + time_modes).
inline void check_trilinear_grid(const ManifoldSpec& spec, const TrilinearOptions& opt) {
  require(opt.band >= 0 && 6 * opt.band < spec.modes_per_dim(), "cubic products of the band must stay on the lattice");
  require(opt.time_modes >= 0, "time modulation count must be nonnegative");
  double lam_max = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const auto w = spec.wavevector(k);
    if (std::abs(w[0]) <= opt.band && std::abs(w[1]) <= opt.band) lam_max = std::max(lam_max, spec.dispersion(k));
  }
  const double nyquist = M_PI * opt.time_samples / opt.window;
  require(nyquist > 3.0 * (lam_max + opt.time_modes) + 64.0, "time grid does not resolve the cubic interaction");
}

struct TrilinearProbe {
  double sup_ratio = 0.0;
  int samples = 0;
  int skipped = 0;
};

inline TrilinearProbe trilinear_constant_probe(const ManifoldSpec& spec, double s, double b_prime, int samples, Rng& rng,
                                               const TrilinearOptions& opt = {}) {
  require(b_prime > 0.0 && b_prime < 0.5, "trilinear probe needs 0 < b' < 1/2");
  require(samples >= 1, "need at least one sample");
  check_trilinear_grid(spec, opt);
  TrilinearProbe probe;
  for (int i = 0; i < samples; ++i) {
    const auto r = trilinear_ratio(random_space_time_field(spec, rng, opt), s, b_prime);
    if (!r) {
      ++probe.skipped;
      continue;
    }
    probe.sup_ratio = std::max(probe.sup_ratio, *r);
    ++probe.samples;
  }
  return probe;
}

}  // namespace b4nls::bourgain
