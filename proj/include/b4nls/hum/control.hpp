#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "b4nls/detail/krylov.hpp"
#include "b4nls/dynamics/evolve.hpp"
#include "b4nls/dynamics/trace_io.hpp"
#include "b4nls/spectral/operators.hpp"
#include "b4nls/spectral/profile.hpp"

namespace b4nls::hum {

using dynamics::EvolutionTrace;
using dynamics::Nonlinearity;

/// How the time integral defining Lambda is evaluated. `exact` integrates each
/// phase difference in closed form; `trapezoid` applies the composite rule on
/// ceil(T / dt_quad) intervals, kept for cross-checks and resolution studies.
enum class Quadrature { exact, trapezoid };

/// Dense matrix of A = phi (1 - Delta)^{-2} phi on the full lattice,
/// symmetrized so it is Hermitian to the last bit.
inline Eigen::MatrixXcd control_operator_matrix(const DampingProfile& phi) {
  const auto n = static_cast<Eigen::Index>(phi.spec.size());
  Eigen::MatrixXcd A(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    CVector e = CVector::Zero(n);
    e[j] = 1.0;
    A.col(j) = apply_localized_smoothing(phi, e, 2.0);
  }
  return 0.5 * (A + A.adjoint());
}

/// The HUM operator Lambda = int_0^T exp(-itL) A exp(itL) dt. In the Fourier
/// basis its entries are A_kl times the integral of exp(i (lambda_l - lambda_k) t).
class HumOperator {
 public:
  HumOperator(const DampingProfile& phi, double T, Quadrature quadrature = Quadrature::exact, double dt_quad = 1e-3)
      : spec_(phi.spec), T_(T), A_(control_operator_matrix(phi)) {
    require(T >= 0.0 && std::isfinite(T), "horizon T must be nonnegative");
    require(dt_quad > 0.0, "quadrature step must be positive");
    const auto n = A_.rows();
    const int intervals = std::max(1, static_cast<int>(std::ceil(T / dt_quad - 1e-9)));
    lambda_.resize(n, n);
    for (Eigen::Index l = 0; l < n; ++l) {
      for (Eigen::Index k = 0; k <= l; ++k) {
        const double w = spec_.dispersion(static_cast<std::size_t>(l)) - spec_.dispersion(static_cast<std::size_t>(k));
        const Complex om = quadrature == Quadrature::exact ? oscillatory_integral(w, T)
                                                           : trapezoid_oscillatory_integral(w, T, intervals);
        lambda_(k, l) = A_(k, l) * om;
        lambda_(l, k) = std::conj(lambda_(k, l));
      }
      lambda_(l, l) = lambda_(l, l).real();
    }
  }

  const ManifoldSpec& spec() const { return spec_; }
  double horizon() const { return T_; }
  const Eigen::MatrixXcd& control_matrix() const { return A_; }
  const Eigen::MatrixXcd& matrix() const { return lambda_; }

  CVector apply(const CVector& v) const { return lambda_ * v; }
  SpectralField apply(const SpectralField& v) const { return SpectralField(spec_, apply(v.coeffs())); }

 private:
  ManifoldSpec spec_;
  double T_;
  Eigen::MatrixXcd A_;
  Eigen::MatrixXcd lambda_;
};

inline SpectralField apply_lambda(const SpectralField& v0, double T, const DampingProfile& phi,
                                  Quadrature quadrature = Quadrature::exact, double dt_quad = 1e-3) {
  require(v0.spec() == phi.spec, "field and profile live on different manifolds");
  return HumOperator(phi, T, quadrature, dt_quad).apply(v0);
}

struct ControlProblem {
  SpectralField u0;
  std::optional<SpectralField> u_target;  // steer to zero when absent
  double T = 1.0;
  DampingProfile phi;
  int k_nl = 1;
  Nonlinearity nonlinearity = Nonlinearity::defocusing;
  double cg_tol = 1e-10;
  double fixedpoint_tol = 1e-8;
  int max_cg = 2000;
  int max_fixedpoint = 20;
  double smallness = 0.1;  // admissible ||u0||_{H^2} for the nonlinear iteration
  double dt = 1e-3;        // step of the forward and backward solves
  int record_every = 10;
  bool dealias = true;
  Quadrature quadrature = Quadrature::exact;
  double dt_quad = 1e-3;

  void validate() const {
    require(u0.spec().size() > 0, "control problem needs an initial state");
    require(T > 0.0 && std::isfinite(T), "horizon T must be positive");
    require(phi.spec == u0.spec(), "control profile and state live on different manifolds");
    require(phi.values.size() > 0 && phi.values.minCoeff() >= 0.0, "control profile must be nonnegative");
    if (u_target) require(u_target->spec() == u0.spec(), "target and state live on different manifolds");
    require(cg_tol > 0.0 && fixedpoint_tol > 0.0, "tolerances must be positive");
    require(max_cg >= 1 && max_fixedpoint >= 1, "iteration caps must be positive");
    require(k_nl >= 1, "nonlinearity exponent k_nl must be >= 1");
  }

  dynamics::SolverConfig solver_config(bool nonlinear) const {
    dynamics::SolverConfig cfg;
    cfg.dt = dt;
    cfg.k_nl = k_nl;
    cfg.nonlinearity = nonlinear ? nonlinearity : Nonlinearity::off;
    cfg.dealias = dealias;
    cfg.record_every = record_every;
    return cfg;
  }
};

struct CertificateRow {
  int iteration = 0;
  double residual = 0.0;
  std::optional<double> contraction_ratio;
};

struct ControlCertificate {
  SpectralField dual0;       // v0 (linear) or the fixed point Phi0 (nonlinear)
  EvolutionTrace trajectory;  // verification solve; `controls` holds h(t)
  double terminal_residual = 0.0;  // ||u(T) - u_target||_{H^2} from the verification solve
  double stored_residual = 0.0;    // the same quantity predicted by the solver itself
  double initial_norm = 0.0;       // ||u0||_{H^2}
  bool verified = false;
  std::vector<int> cg_iterations;  // one entry per Lambda inversion
  int fixedpoint_iterations = 0;
  std::vector<double> contraction_ratios;
  std::vector<CertificateRow> history;

  double relative_residual() const { return initial_norm > 0.0 ? terminal_residual / initial_norm : terminal_residual; }
};

inline void write_certificate_csv(std::ostream& os, const ControlCertificate& cert) {
  os << "iteration,residual,contraction_ratio\n";
  for (const auto& r : cert.history)
    os << r.iteration << ',' << format_real(r.residual) << ','
       << (r.contraction_ratio ? format_real(*r.contraction_ratio) : std::string()) << '\n';
}

namespace detail {

inline double h2(const ManifoldSpec& spec, const CVector& c) { return std::sqrt(sobolev_norm_squared(spec, c, 2.0)); }
inline double hm2(const ManifoldSpec& spec, const CVector& c) {
  return std::sqrt(sobolev_norm_squared(spec, c, -2.0));
}

/// Solves Lambda x = b by conjugate gradient in L2, stopping on the H^2 norm
/// of the residual (the terminal-state error of the control it defines).
inline b4nls::detail::CgResult invert_lambda(const HumOperator& lam, const CVector& b, double tol, int max_iter) {
  const auto& spec = lam.spec();
  auto res = b4nls::detail::conjugate_gradient([&](const CVector& v) { return lam.apply(v); }, b,
                                               CVector::Zero(b.size()), tol, max_iter,
                                               [&](const CVector& v) { return h2(spec, v); });
  if (!res.converged)
    throw NumericalError("HUM conjugate gradient stagnated at relative H^2 residual " +
                         dynamics::detail::sci(res.relative_residual) + " after " + std::to_string(res.iterations) +
                         " iterations; the control region may not observe the band");
  return res;
}

}  // namespace detail

/// Linear HUM: with h(t) = A exp(itL) v0 the controlled state of
/// i u_t + L u = h satisfies u(T) = exp(iTL)(u0 - i Lambda v0), so the target
/// is reached when Lambda v0 = -i (u0 - exp(-iTL) u_target).
inline ControlCertificate solve_linear_control(const ControlProblem& prob) {
  prob.validate();
  const auto& spec = prob.u0.spec();
  const HumOperator lam(prob.phi, prob.T, prob.quadrature, prob.dt_quad);
  const Complex I(0.0, 1.0);

  CVector transported = CVector::Zero(static_cast<Eigen::Index>(spec.size()));
  if (prob.u_target) {
    transported = prob.u_target->coeffs();
    propagate_in_place(spec, transported, -prob.T);
  }
  const CVector b = -I * (prob.u0.coeffs() - transported);

  ControlCertificate cert;
  cert.initial_norm = detail::h2(spec, prob.u0.coeffs());
  CVector v0 = CVector::Zero(b.size());
  if (b.norm() > 0.0) {
    const auto res = detail::invert_lambda(lam, b, prob.cg_tol, prob.max_cg);
    v0 = res.x;
    cert.cg_iterations.push_back(res.iterations);
    const double b2 = detail::h2(spec, b);
    double prev = 1.0;
    for (std::size_t i = 0; i < res.history.size(); ++i) {
      CertificateRow row{static_cast<int>(i + 1), res.history[i] * b2, std::nullopt};
      if (i > 0) row.contraction_ratio = res.history[i] / prev;
      prev = res.history[i];
      cert.history.push_back(row);
    }
  } else {
    cert.cg_iterations.push_back(0);
  }
  cert.dual0 = SpectralField(spec, v0);
  cert.stored_residual = detail::h2(spec, lam.apply(v0) - b);

  dynamics::FreeFlowForcing forcing{lam.control_matrix(), cert.dual0};
  cert.trajectory = dynamics::evolve_nonlinear(prob.u0, prob.T, prob.solver_config(false), forcing);
  CVector miss = cert.trajectory.final_state().coeffs();
  if (prob.u_target) miss -= prob.u_target->coeffs();
  cert.terminal_residual = detail::h2(spec, miss);
  const double scale = std::max(detail::h2(spec, b), cert.initial_norm);
  cert.verified = cert.terminal_residual <= prob.cg_tol * scale * (1.0 + 1e-6) + 1e-300;
  return cert;
}

/// Nonlinear local control by the fixed point Phi = B Phi = S^{-1}(u0 - K Phi).
/// S Phi = i Lambda Phi is the initial state of the linear controlled solution
/// ending at zero, and S Phi + K Phi is the initial state of the nonlinear
/// controlled solution ending at zero, both driven by h = A exp(itL) Phi.
inline ControlCertificate solve_nonlinear_control(const ControlProblem& prob) {
  prob.validate();
  const auto& spec = prob.u0.spec();
  require(!prob.u_target || prob.u_target->coeffs().norm() == 0.0,
          "nonlinear control steers to the zero state; transport nonzero targets first");
  const double u0_norm = detail::h2(spec, prob.u0.coeffs());
  require(u0_norm <= prob.smallness, "initial state exceeds the smallness threshold: ||u0||_{H^2} = " +
                                         dynamics::detail::sci(u0_norm) + " > " +
                                         dynamics::detail::sci(prob.smallness));
  const HumOperator lam(prob.phi, prob.T, prob.quadrature, prob.dt_quad);
  const Complex I(0.0, 1.0);
  const auto cfg = prob.solver_config(true);

  ControlCertificate cert;
  cert.initial_norm = u0_norm;

  // S^{-1} x solves i Lambda Phi = x.
  const auto s_inverse = [&](const CVector& x) -> CVector {
    if (x.norm() == 0.0) {
      cert.cg_iterations.push_back(0);
      return CVector::Zero(x.size());
    }
    const auto res = detail::invert_lambda(lam, CVector(-I * x), prob.cg_tol, prob.max_cg);
    cert.cg_iterations.push_back(res.iterations);
    return res.x;
  };
  // Backward solve from v(T) = 0: z(s) = conj(v(T - s)) solves the same
  // equation forward with forcing A exp(isL) conj(exp(iTL) Phi).
  const auto k_map = [&](const CVector& phi0) -> CVector {
    if (phi0.norm() == 0.0) return CVector::Zero(phi0.size());
    CVector dual = phi0;
    propagate_in_place(spec, dual, prob.T);
    dual = conjugate_coeffs(spec, dual);
    auto back_cfg = cfg;
    back_cfg.record_every = 1 << 30;
    dynamics::FreeFlowForcing forcing{lam.control_matrix(), SpectralField(spec, dual)};
    const auto trace = dynamics::evolve_nonlinear(SpectralField(spec), prob.T, back_cfg, forcing);
    const CVector v_start = conjugate_coeffs(spec, trace.final_state().coeffs());
    return v_start - I * lam.apply(phi0);
  };

  CVector phi = CVector::Zero(static_cast<Eigen::Index>(spec.size()));
  double prev_step = 0.0;
  bool converged = false;
  for (int it = 1; it <= prob.max_fixedpoint; ++it) {
    const CVector next = s_inverse(prob.u0.coeffs() - k_map(phi));
    const double step = detail::hm2(spec, next - phi);
    CertificateRow row{it, step, std::nullopt};
    if (it > 1) {
      const double ratio = prev_step > 0.0 ? step / prev_step : 0.0;
      row.contraction_ratio = ratio;
      cert.contraction_ratios.push_back(ratio);
      if (ratio >= 1.0)
        throw NumericalError("nonlinear control map is not contracting: measured ratio " + dynamics::detail::sci(ratio) +
                             " at iteration " + std::to_string(it) + "; reduce ||u0||");
    }
    cert.history.push_back(row);
    cert.fixedpoint_iterations = it;
    phi = next;
    prev_step = step;
    if (step <= prob.fixedpoint_tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericalError("nonlinear control fixed point not reached in " + std::to_string(prob.max_fixedpoint) +
                         " iterations");

  cert.dual0 = SpectralField(spec, phi);
  cert.stored_residual = detail::h2(spec, prob.u0.coeffs() - k_map(phi) - I * lam.apply(phi));
  dynamics::FreeFlowForcing forcing{lam.control_matrix(), cert.dual0};
  cert.trajectory = dynamics::evolve_nonlinear(prob.u0, prob.T, cfg, forcing);
  cert.terminal_residual = detail::h2(spec, cert.trajectory.final_state().coeffs());
  cert.verified = cert.terminal_residual <= 10.0 * prob.fixedpoint_tol;
  return cert;
}

}  // namespace b4nls::hum
