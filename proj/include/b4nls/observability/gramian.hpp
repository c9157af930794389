#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "b4nls/dynamics/trace_io.hpp"
#include "b4nls/spectral/operators.hpp"
#include "b4nls/spectral/profile.hpp"
#include "b4nls/spectral/region.hpp"

namespace b4nls::observability {

struct LanczosResult {
  double min_eig = 0.0;
  double max_eig = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Extreme eigenvalues of a Hermitian operator on C^n by Lanczos with full
/// reorthogonalization. Stops once both extreme Ritz pairs have residual
/// below tol times the spectral scale; at n steps the Krylov space is the
/// whole space and the Ritz values are exact.
inline LanczosResult lanczos_extremes(const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& apply,
                                      Eigen::Index n, double tol = 1e-8, std::uint64_t seed = 0x5eed) {
  require(n >= 1, "Lanczos needs a nonempty space");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const auto random_vector = [&] {
    Eigen::VectorXcd v(n);
    for (auto& x : v) x = Complex(g(rng), g(rng));
    return v;
  };

  Eigen::MatrixXcd V(n, 0);
  std::vector<double> alpha, beta;
  Eigen::VectorXcd v = random_vector();
  v.normalize();
  LanczosResult out;
  for (Eigen::Index j = 0; j < n; ++j) {
    V.conservativeResize(n, j + 1);
    V.col(j) = v;
    Eigen::VectorXcd w = apply(v);
    const double a = V.col(j).dot(w).real();
    alpha.push_back(a);
    // Full reorthogonalization, twice for safety.
    for (int pass = 0; pass < 2; ++pass) w -= V * (V.adjoint() * w);
    double b = w.norm();

    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd Tm = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      Tm(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) Tm(i, i + 1) = Tm(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tm);
    const auto& ev = es.eigenvalues();
    out.min_eig = ev[0];
    out.max_eig = ev[m - 1];
    out.iterations = static_cast<int>(m);
    const double scale = std::max({std::abs(ev[0]), std::abs(ev[m - 1]), 1e-300});
    const double r_min = std::abs(b * es.eigenvectors()(m - 1, 0));
    const double r_max = std::abs(b * es.eigenvectors()(m - 1, m - 1));
    if (m == n || (r_min <= tol * scale && r_max <= tol * scale)) {
      out.converged = true;
      break;
    }
    if (b <= 1e-12 * scale) {
      // Invariant subspace found: continue with a fresh direction orthogonal to it.
      w = random_vector();
      for (int pass = 0; pass < 2; ++pass) w -= V * (V.adjoint() * w);
      b = 0.0;
      v = w.normalized();
    } else {
      v = w / b;
    }
    beta.push_back(b);
  }
  return out;
}

/// Fourier coefficients of the smoothed indicator of `omega`, sampled on a
/// grid `oversample` times finer than the simulation lattice so that
/// products with band modes are resolved without aliasing.
inline CVector indicator_coefficients(const ManifoldSpec& spec, const Region& omega, double width, int oversample,
                                      ManifoldSpec& fine) {
  fine = make_torus(spec.dim(), spec.modes_per_dim() * oversample, spec.beta());
  b4nls::detail::validate_region(omega, width, spec.dim());
  CVector vals(static_cast<Eigen::Index>(fine.size()));
  for (std::size_t j = 0; j < fine.size(); ++j)
    vals[static_cast<Eigen::Index>(j)] =
        b4nls::detail::smoothed_indicator(omega, width, grid_point(fine, j), spec.dim());
  return from_physical_coeffs(fine, vals);
}

/// <m e_l, e_k> for k, l in `modes`: the coefficient of m at k - l divided by (2 pi)^{d/2}.
inline Eigen::MatrixXcd multiplier_matrix(const ManifoldSpec& spec, const Region& omega, double width,
                                          const std::vector<std::size_t>& modes, int oversample = 8) {
  ManifoldSpec fine;
  const CVector mu = indicator_coefficients(spec, omega, width, oversample, fine);
  const double norm = std::pow(2.0 * M_PI, -0.5 * spec.dim());
  const auto m = static_cast<Eigen::Index>(modes.size());
  Eigen::MatrixXcd M(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto ka = spec.wavevector(modes[static_cast<std::size_t>(a)]);
    for (Eigen::Index b = 0; b < m; ++b) {
      const auto kb = spec.wavevector(modes[static_cast<std::size_t>(b)]);
      const Wavevector diff{ka[0] - kb[0], ka[1] - kb[1]};
      M(a, b) = mu[static_cast<Eigen::Index>(fine.index_of(diff))] * norm;
    }
  }
  return 0.5 * (M + M.adjoint());
}

/// Time-integrated Gramian W_kl * int_0^T exp(i (lambda_l - lambda_k) t) dt on
/// the given modes, for any Hermitian weight W. `intervals` > 0 selects the
/// composite trapezoid rule instead of the closed form.
inline Eigen::MatrixXcd time_gramian(const ManifoldSpec& spec, const Eigen::MatrixXcd& W,
                                     const std::vector<std::size_t>& modes, double T, int intervals = 0) {
  const auto m = static_cast<Eigen::Index>(modes.size());
  Eigen::MatrixXcd G(m, m);
  for (Eigen::Index b = 0; b < m; ++b) {
    for (Eigen::Index a = 0; a <= b; ++a) {
      const double w = spec.dispersion(modes[static_cast<std::size_t>(b)]) - spec.dispersion(modes[static_cast<std::size_t>(a)]);
      const Complex om = intervals > 0 ? (T == 0.0 ? Complex(0.0) : trapezoid_oscillatory_integral(w, T, intervals))
                                       : oscillatory_integral(w, T);
      G(a, b) = W(a, b) * om;
      G(b, a) = std::conj(G(a, b));
    }
    G(b, b) = G(b, b).real();
  }
  return G;
}

struct GramianOptions {
  double width = -1.0;  // smoothing width of the indicator; negative selects five grid cells
  int oversample = 8;
  double quadrature_dt = 0.0;  // > 0 selects the trapezoid rule with this step
  double lanczos_tol = 1e-8;
  std::uint64_t seed = 0x5eed;
};

struct GramianReport {
  double h = 0.0;
  int band_dim = 0;
  double T = 0.0;
  std::string region;
  double min_eig = 0.0;
  double max_eig = 0.0;
  int iterations = 0;
  int quadrature_nodes = 0;  // 0 when the time integral is exact
  double dense_min_eig = 0.0;
  double dense_max_eig = 0.0;
};

/// Smallest eigenvalue of int_0^T exp(-itL) m_omega exp(itL) dt restricted to
/// the modes with h^2 |k|^2 inside the support of kappa.
inline GramianReport band_gramian_min_eig(const ManifoldSpec& spec, const Region& omega, double T, double h,
                                          const GramianOptions& opt = {}) {
  require(T >= 0.0 && std::isfinite(T), "horizon T must be nonnegative");
  const auto modes = band_indices(spec, h);
  require(!modes.empty(), "frequency band is empty for h = " + format_real(h));
  const double width = opt.width < 0.0 ? default_smoothing_width(spec) : opt.width;
  const Eigen::MatrixXcd M = multiplier_matrix(spec, omega, width, modes, opt.oversample);
  const int intervals = opt.quadrature_dt > 0.0 ? std::max(1, static_cast<int>(std::ceil(T / opt.quadrature_dt - 1e-9))) : 0;
  const Eigen::MatrixXcd G = time_gramian(spec, M, modes, T, intervals);

  GramianReport rep;
  rep.h = h;
  rep.band_dim = static_cast<int>(modes.size());
  rep.T = T;
  rep.region = describe(omega);
  rep.quadrature_nodes = intervals > 0 ? intervals + 1 : 0;
  const auto lz = lanczos_extremes([&](const Eigen::VectorXcd& v) { return Eigen::VectorXcd(G * v); }, G.rows(),
                                   opt.lanczos_tol, opt.seed);
  rep.min_eig = lz.min_eig;
  rep.max_eig = lz.max_eig;
  rep.iterations = lz.iterations;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> dense(G, Eigen::EigenvaluesOnly);
  rep.dense_min_eig = dense.eigenvalues()[0];
  rep.dense_max_eig = dense.eigenvalues()[G.rows() - 1];
  return rep;
}

inline void write_gramian_csv(std::ostream& os, const std::vector<GramianReport>& rows) {
  os << "h,band_dim,T,min_eig,max_eig,iters\n";
  for (const auto& r : rows)
    os << format_real(r.h) << ',' << r.band_dim << ',' << format_real(r.T) << ',' << format_real(r.min_eig) << ','
       << format_real(r.max_eig) << ',' << r.iterations << '\n';
}

}  // namespace b4nls::observability
