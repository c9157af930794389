#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "b4nls/detail/krylov.hpp"
#include "b4nls/dynamics/etdrk4.hpp"
#include "b4nls/spectral/operators.hpp"
#include "b4nls/spectral/profile.hpp"

namespace b4nls::dynamics {

enum class Scheme { etdrk4, strang };

/// Sign of the power term in i u_t + L u + sigma |u|^{2k} u = h.
enum class Nonlinearity { defocusing, focusing, off };

inline double nonlinearity_sign(Nonlinearity n) {
  switch (n) {
    case Nonlinearity::defocusing: return 1.0;
    case Nonlinearity::focusing: return -1.0;
    case Nonlinearity::off: return 0.0;
  }
  return 0.0;
}

struct SolverConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::etdrk4;
  int k_nl = 1;  // power |u|^{2 k_nl} u, i.e. alpha = 2 k_nl + 1
  Nonlinearity nonlinearity = Nonlinearity::defocusing;
  double damping_tol = 1e-12;
  int max_inner = 200;
  bool dealias = true;
  int record_every = 1;

  void validate() const {
    require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
    require(k_nl >= 1, "nonlinearity exponent k_nl must be >= 1");
    require(damping_tol > 0.0 && damping_tol <= 1e-6, "damping tolerance must lie in (0, 1e-6]");
    require(max_inner >= 1, "max inner iterations must be >= 1");
    require(record_every >= 1, "record_every must be >= 1");
  }
};

struct LedgerRow {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double damping_flux = 0.0;
};

/// Recorded states at uniformly spaced times, with the conservation ledger.
struct EvolutionTrace {
  ManifoldSpec spec;
  double dt = 0.0;  // spacing between recorded times
  std::vector<double> times;
  std::vector<SpectralField> states;
  std::vector<SpectralField> controls;  // forcing at each recorded time, when forced
  std::vector<LedgerRow> ledger;
  bool damped = false;
  int max_inner_iterations = 0;

  const SpectralField& final_state() const { return states.back(); }
};

// ---------------------------------------------------------------------------
// Forcing

using FieldSource = std::function<SpectralField(double)>;

/// h(t) = W exp(i t L) dual0 for a fixed Hermitian matrix W on the lattice.
/// This is the shape of every HUM control; its contribution to the state is
/// integrated in closed form, which stays exact at any step size.
struct FreeFlowForcing {
  Eigen::MatrixXcd weight;
  SpectralField dual0;
};

using Forcing = std::variant<std::monostate, FieldSource, FreeFlowForcing>;

/// Response from zero data to a FreeFlowForcing:
/// c(t) = -i exp(itL) int_0^t exp(-isL) W exp(isL) dual0 ds, evaluated entrywise
/// from exact oscillatory integrals.
class FreeFlowResponse {
 public:
  FreeFlowResponse(const ManifoldSpec& spec, const Eigen::MatrixXcd& weight, const CVector& dual0)
      : spec_(spec), weight_(weight), dual0_(dual0) {
    require(weight.rows() == static_cast<Eigen::Index>(spec.size()) && weight.cols() == weight.rows(),
            "forcing weight must be N^d x N^d");
    for (Eigen::Index l = 0; l < dual0.size(); ++l)
      if (dual0[l] != Complex(0.0)) active_.push_back(l);
    lambda_.resize(static_cast<Eigen::Index>(spec.size()));
    for (std::size_t i = 0; i < spec.size(); ++i) lambda_[static_cast<Eigen::Index>(i)] = spec.dispersion(i);
  }

  CVector at(double t) const {
    const Eigen::Index n = dual0_.size();
    CVector w = CVector::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      Complex acc = 0.0;
      for (Eigen::Index l : active_)
        acc += weight_(k, l) * dual0_[l] * oscillatory_integral(lambda_[l] - lambda_[k], t);
      w[k] = acc;
    }
    propagate_in_place(spec_, w, t);
    return Complex(0.0, -1.0) * w;
  }

  CVector forcing(double t) const {
    CVector v = dual0_;
    propagate_in_place(spec_, v, t);
    return weight_ * v;
  }

 private:
  ManifoldSpec spec_;
  Eigen::MatrixXcd weight_;
  CVector dual0_;
  RVector lambda_;
  std::vector<Eigen::Index> active_;
};

// ---------------------------------------------------------------------------
// Functionals

inline double mass(const SpectralField& u) { return u.coeffs().squaredNorm(); }

/// sigma |u|^{2k} u in coefficient space, projected by the 2/3 rule when asked.
inline CVector power_term(const ManifoldSpec& spec, const CVector& c, const SolverConfig& cfg) {
  const double sigma = nonlinearity_sign(cfg.nonlinearity);
  if (sigma == 0.0) return CVector::Zero(c.size());
  CVector phys = to_physical(spec, c);
  for (Eigen::Index j = 0; j < phys.size(); ++j) phys[j] *= sigma * std::pow(std::norm(phys[j]), cfg.k_nl);
  CVector out = from_physical_coeffs(spec, phys);
  if (cfg.dealias)
    for (std::size_t i = 0; i < spec.size(); ++i)
      if (!spec.retained(i)) out[static_cast<Eigen::Index>(i)] = 0.0;
  return out;
}

/// E(u) = 1/2 |Delta u|^2 + beta/2 |grad u|^2 + sigma/(2k+2) int |u|^{2k+2}
/// (+ 1/2 |u|^2 when the mass term of the damped system is active). The
/// potential integral uses the collocation rule, which makes E the exact
/// Hamiltonian of the pseudo-spectral system.
inline double energy(const SpectralField& u, const SolverConfig& cfg, bool mass_term = false) {
  const auto& spec = u.spec();
  double kinetic = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) kinetic += spec.dispersion(i) * std::norm(u[i]);
  double e = 0.5 * kinetic;
  const double sigma = nonlinearity_sign(cfg.nonlinearity);
  if (sigma != 0.0) {
    const CVector phys = to_physical(u);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < phys.size(); ++j) acc += std::pow(std::norm(phys[j]), cfg.k_nl + 1);
    e += sigma / (2.0 * cfg.k_nl + 2.0) * spec.cell_volume() * acc;
  }
  if (mass_term) e += 0.5 * mass(u);
  return e;
}

namespace detail {

inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

inline int step_count(double T, double dt) {
  require(T > 0.0 && std::isfinite(T), "horizon T must be positive");
  return std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
}

inline void guard_blowup(const ManifoldSpec& spec, const CVector& c, double initial_h2, double t) {
  if (initial_h2 <= 0.0) return;
  const double h2 = std::sqrt(sobolev_norm_squared(spec, c, 2.0));
  if (!std::isfinite(h2) || h2 > 1e6 * initial_h2)
    throw NumericalError("blow-up guard: H^2 norm exceeded 1e6 x initial at t = " + sci(t));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Undamped evolution

/// Integrates i u_t + L u + sigma |u|^{2k} u = h(t) from u0 over [0, T].
inline EvolutionTrace evolve_nonlinear(const SpectralField& u0, double T, const SolverConfig& cfg,
                                       const Forcing& forcing = {}) {
  cfg.validate();
  const ManifoldSpec& spec = u0.spec();
  const int steps = detail::step_count(T, cfg.dt);
  const double dt = T / steps;
  const bool forced = !std::holds_alternative<std::monostate>(forcing);
  require(cfg.scheme == Scheme::etdrk4 || !forced, "strang splitting supports unforced runs only");

  std::optional<FreeFlowResponse> response;
  if (const auto* ff = std::get_if<FreeFlowForcing>(&forcing)) {
    require(ff->dual0.spec() == spec, "forcing and state live on different manifolds");
    response.emplace(spec, ff->weight, ff->dual0.coeffs());
  }
  const auto* source = std::get_if<FieldSource>(&forcing);

  EvolutionTrace trace;
  trace.spec = spec;
  trace.dt = dt * cfg.record_every;

  // With free-flow forcing the integrated variable is y = u - c(t).
  const auto full_state = [&](const CVector& y, double t) -> CVector {
    return response ? CVector(y + response->at(t)) : y;
  };
  const auto record = [&](const CVector& y, double t) {
    SpectralField u(spec, full_state(y, t));
    trace.ledger.push_back({t, mass(u), energy(u, cfg), 0.0});
    trace.times.push_back(t);
    if (forced) {
      if (response) trace.controls.emplace_back(spec, response->forcing(t));
      else trace.controls.push_back((*source)(t));
    }
    trace.states.push_back(std::move(u));
  };

  const Complex I(0.0, 1.0);
  const auto nonlinear = [&](const CVector& y, double t) -> CVector {
    CVector out;
    if (response) {
      out = I * power_term(spec, y + response->at(t), cfg);
    } else {
      out = I * power_term(spec, y, cfg);
    }
    if (source) {
      const SpectralField h = (*source)(t);
      require(h.spec() == spec, "forcing and state live on different manifolds");
      out -= I * h.coeffs();
    }
    return out;
  };

  const double initial_h2 = sobolev_norm(u0, 2.0);
  CVector y = u0.coeffs();
  record(y, 0.0);

  if (cfg.scheme == Scheme::etdrk4) {
    const Etdrk4 stepper(spec, dt);
    for (int n = 0; n < steps; ++n) {
      const double t = n * dt;
      y = stepper.step(y, t, nonlinear);
      detail::guard_blowup(spec, full_state(y, t + dt), initial_h2, t + dt);
      if ((n + 1) % cfg.record_every == 0 || n + 1 == steps) record(y, (n + 1) * dt);
    }
  } else {
    // Strang: half linear, exact pointwise phase rotation, half linear.
    const double sigma = nonlinearity_sign(cfg.nonlinearity);
    for (int n = 0; n < steps; ++n) {
      propagate_in_place(spec, y, 0.5 * dt);
      if (sigma != 0.0) {
        CVector phys = to_physical(spec, y);
        for (Eigen::Index j = 0; j < phys.size(); ++j)
          phys[j] *= std::polar(1.0, sigma * std::pow(std::norm(phys[j]), cfg.k_nl) * dt);
        y = from_physical_coeffs(spec, phys);
      }
      propagate_in_place(spec, y, 0.5 * dt);
      detail::guard_blowup(spec, y, initial_h2, (n + 1) * dt);
      if ((n + 1) % cfg.record_every == 0 || n + 1 == steps) record(y, (n + 1) * dt);
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Damped evolution

/// The damping operator D = a (1 - Delta)^{-2} a and the inner solve of
/// (1 - i D) w = r. With dealiasing on, D is compressed to the retained band
/// (P D P), so a band-limited state never leaves the band and the discrete
/// energy balance stays exact. Constant profiles are diagonal and solved
/// directly; otherwise CG on the normal equations (1 + D^2) w = (1 + i D) r.
class DampingSolver {
 public:
  DampingSolver(DampingProfile profile, double tol, int max_iter, bool project)
      : a_(std::move(profile)), tol_(tol), max_iter_(max_iter), project_(project) {
    const auto& spec = a_.spec;
    if (a_.is_constant()) {
      const double a0 = a_.values.size() ? a_.values[0] : 0.0;
      diagonal_ = RVector(static_cast<Eigen::Index>(spec.size()));
      for (std::size_t i = 0; i < spec.size(); ++i)
        diagonal_[static_cast<Eigen::Index>(i)] = in_band(i) ? a0 * a0 * std::pow(1.0 + spec.k2(i), -2.0) : 0.0;
    }
  }

  const DampingProfile& profile() const { return a_; }
  bool diagonal() const { return diagonal_.size() > 0; }
  bool in_band(std::size_t i) const { return !project_ || a_.spec.retained(i); }

  CVector apply_d(const CVector& v) const {
    if (diagonal()) return diagonal_.cast<Complex>().cwiseProduct(v);
    CVector w = project(v);
    w = apply_localized_smoothing(a_, w, 2.0);
    return project(w);
  }

  /// Exact diagonal entries <D e_k, e_k>.
  RVector diagonal_entries() const {
    if (diagonal()) return diagonal_;
    const auto n = static_cast<Eigen::Index>(a_.spec.size());
    RVector out(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      CVector e = CVector::Zero(n);
      e[k] = 1.0;
      out[k] = apply_d(e)[k].real();
    }
    return out;
  }

  CVector solve(const CVector& r) const {
    const Complex I(0.0, 1.0);
    if (diagonal()) {
      last_iterations_ = 1;
      return r.cwiseQuotient((CVector::Ones(r.size()) - I * diagonal_.cast<Complex>()));
    }
    const CVector rhs = r + I * apply_d(r);
    auto normal = [&](const CVector& v) -> CVector { return v + apply_d(apply_d(v)); };
    const double rnorm = r.norm();
    const auto true_residual = [&](const CVector& w) {
      return rnorm > 0.0 ? (w - I * apply_d(w) - r).norm() / rnorm : 0.0;
    };
    // Restarted CG: the recursive residual can drift from the true one near
    // round-off, so each cycle restarts from the current iterate.
    b4nls::detail::CgResult res;
    res.x = warm_;
    int total = 0;
    double true_res = 0.0;
    for (int cycle = 0; cycle < 4; ++cycle) {
      res = b4nls::detail::conjugate_gradient(normal, rhs, res.x, 0.1 * tol_, max_iter_ - total);
      total += res.iterations;
      true_res = true_residual(res.x);
      if (true_res <= tol_ || total >= max_iter_) break;
    }
    last_iterations_ = std::max(total, 1);
    if (!(true_res <= tol_))
      throw NumericalError("damping inner solve missed tolerance: residual " + detail::sci(true_res) + " after " +
                           std::to_string(total) + " iterations");
    warm_ = res.x;
    return res.x;
  }

  int last_iterations() const { return last_iterations_; }

  /// ||(1 - Delta)^{-1}(a P v)||^2 = <D v, v>.
  double flux(const CVector& v) const {
    if (diagonal()) return v.cwiseAbs2().dot(diagonal_);
    CVector w = multiply_profile(a_, project(v));
    smooth_in_place(a_.spec, w, 1.0);
    return w.squaredNorm();
  }

 private:
  CVector project(CVector v) const {
    if (project_)
      for (std::size_t i = 0; i < a_.spec.size(); ++i)
        if (!a_.spec.retained(i)) v[static_cast<Eigen::Index>(i)] = 0.0;
    return v;
  }

  DampingProfile a_;
  double tol_;
  int max_iter_;
  bool project_;
  RVector diagonal_;
  mutable CVector warm_;
  mutable int last_iterations_ = 0;
};

/// ||(1 - Delta)^{-1}(a v)||^2.
inline double damping_flux(const DampingProfile& a, const CVector& v) {
  CVector w = multiply_profile(a, v);
  smooth_in_place(a.spec, w, 1.0);
  return w.squaredNorm();
}

/// Largest number of coupled modes for which the damped linear generator is
/// exponentiated as a dense matrix.
inline constexpr std::size_t dense_damping_limit = 300;

/// Integrates the damped system
///   i u_t + L u + sigma |u|^{2k} u + u + a (1 - Delta)^{-2} (a u_t) = 0,
/// i.e. (i + D) u_t = -G with G = (L + 1) u + g(u), so u_t = (1 - i D)^{-1} i G.
///
/// The linear generator M = (1 - i D)^{-1} i (L + 1) couples modes with O(1)
/// strength at frequency gaps far beyond 1/dt, so it is never left in the
/// remainder: it is exponentiated exactly (diagonal for constant profiles,
/// dense up to `dense_damping_limit` coupled modes). Above that size only its
/// diagonal is exact and the off-diagonal part rides in the remainder, which
/// lowers the observed order. The remainder (1 - i D)^{-1} i g = i g - w with
/// (1 - i D) w = D g is resolved by the inner solve at every stage.
inline EvolutionTrace evolve_damped(const SpectralField& u0, const DampingProfile& a, double T,
                                    const SolverConfig& cfg) {
  cfg.validate();
  require(cfg.scheme == Scheme::etdrk4, "damped evolution requires the etdrk4 scheme");
  const ManifoldSpec& spec = u0.spec();
  require(a.spec == spec, "damping profile and state live on different manifolds");
  require(a.values.size() == 0 || a.values.minCoeff() >= 0.0, "damping profile must be nonnegative");
  const int steps = detail::step_count(T, cfg.dt);
  const double dt = T / steps;
  const Complex I(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(spec.size());

  DampingSolver solver(a, cfg.damping_tol, cfg.max_inner, cfg.dealias);
  EvolutionTrace trace;
  trace.spec = spec;
  trace.dt = dt * cfg.record_every;
  trace.damped = true;

  // Linear part.
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < n; ++i)
    if (solver.in_band(static_cast<std::size_t>(i))) active.push_back(i);
  const bool dense = !solver.diagonal() && active.size() <= dense_damping_limit;
  const RVector d_diag = dense ? RVector::Zero(n) : solver.diagonal_entries();
  CVector symbol(n);
  for (Eigen::Index i = 0; i < n; ++i)
    symbol[i] = I * (spec.dispersion(static_cast<std::size_t>(i)) + 1.0) / (1.0 - I * d_diag[i]);

  std::optional<Etdrk4> stepper;
  if (dense) {
    const auto m = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXcd Dm(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      CVector e = CVector::Zero(n);
      e[active[static_cast<std::size_t>(j)]] = 1.0;
      const CVector col = solver.apply_d(e);
      for (Eigen::Index i = 0; i < m; ++i) Dm(i, j) = col[active[static_cast<std::size_t>(i)]];
    }
    Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
      K(j, j) = I * (spec.dispersion(static_cast<std::size_t>(active[static_cast<std::size_t>(j)])) + 1.0);
    const Eigen::MatrixXcd block = (Eigen::MatrixXcd::Identity(m, m) - I * Dm).partialPivLu().solve(K);
    stepper.emplace(symbol, active, block, dt);
  } else {
    stepper.emplace(symbol, dt);
  }
  const bool exact_linear = dense || solver.diagonal();

  const auto full_generator = [&](const CVector& u, const CVector& g) -> CVector {
    CVector G = g + u;
    for (Eigen::Index i = 0; i < n; ++i) G[i] += spec.dispersion(static_cast<std::size_t>(i)) * u[i];
    return I * G - solver.solve(solver.apply_d(G));
  };
  const auto remainder = [&](const CVector& u, double) -> CVector {
    const CVector g = power_term(spec, u, cfg);
    CVector out;
    if (exact_linear) {
      out = I * g - solver.solve(solver.apply_d(g));
    } else {
      out = full_generator(u, g) - symbol.cwiseProduct(u);
    }
    trace.max_inner_iterations = std::max(trace.max_inner_iterations, solver.last_iterations());
    return out;
  };
  const auto record = [&](const CVector& u, double t) {
    const CVector ut = full_generator(u, power_term(spec, u, cfg));
    SpectralField f(spec, u);
    trace.ledger.push_back({t, mass(f), energy(f, cfg, true), solver.flux(ut)});
    trace.times.push_back(t);
    trace.states.push_back(std::move(f));
  };

  const double initial_h2 = sobolev_norm(u0, 2.0);
  CVector u = u0.coeffs();
  record(u, 0.0);
  for (int s = 0; s < steps; ++s) {
    u = stepper->step(u, s * dt, remainder);
    detail::guard_blowup(spec, u, initial_h2, (s + 1) * dt);
    if ((s + 1) % cfg.record_every == 0 || s + 1 == steps) record(u, (s + 1) * dt);
  }
  return trace;
}

}  // namespace b4nls::dynamics
