#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "b4nls/spectral/field.hpp"

namespace b4nls::dynamics {

/// phi_1, phi_2, phi_3 of the exponential integrator, phi_n(z) = sum z^j / (j + n)!.
/// Taylor series near the origin, closed forms elsewhere.
inline std::array<Complex, 3> phi_functions(Complex z) {
  if (std::abs(z) < 2.0) {
    std::array<Complex, 3> out{};
    for (int n = 1; n <= 3; ++n) {
      double fact = 1.0;
      for (int m = 2; m <= n; ++m) fact *= m;
      Complex term = 1.0 / fact;  // j = 0 term: 1 / n!
      Complex acc = term;
      for (int j = 1; j < 60; ++j) {
        term *= z / static_cast<double>(j + n);
        acc += term;
        if (std::abs(term) < 1e-18 * std::abs(acc)) break;
      }
      out[n - 1] = acc;
    }
    return out;
  }
  const Complex ez = std::exp(z);
  const Complex phi1 = (ez - 1.0) / z;
  const Complex phi2 = (ez - 1.0 - z) / (z * z);
  const Complex phi3 = (ez - 1.0 - z - 0.5 * z * z) / (z * z * z);
  return {phi1, phi2, phi3};
}

/// exp(A), phi_1(A), ..., phi_m(A) for a dense matrix from one exponential of
/// the block matrix [[A, I, 0..], [0, 0, I, ..], ..., [0 .. 0]].
inline std::vector<Eigen::MatrixXcd> matrix_phi_functions(const Eigen::MatrixXcd& A, int m) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero((m + 1) * n, (m + 1) * n);
  B.topLeftCorner(n, n) = A;
  for (int j = 0; j < m; ++j) B.block(j * n, (j + 1) * n, n, n).setIdentity();
  const Eigen::MatrixXcd E = B.exp();
  std::vector<Eigen::MatrixXcd> out;
  for (int j = 0; j <= m; ++j) out.push_back(E.block(0, j * n, n, n));
  return out;
}

/// Fourth-order exponential time differencing (Cox-Matthews) for
/// u' = M u + N(u, t). M is either diagonal (a complex symbol per mode) or a
/// dense matrix acting on a subset of modes, the rest staying diagonal.
class Etdrk4 {
 public:
  /// M = i L, the free dispersion.
  Etdrk4(const ManifoldSpec& spec, double dt) : dt_(dt) {
    CVector symbol(static_cast<Eigen::Index>(spec.size()));
    for (std::size_t i = 0; i < spec.size(); ++i)
      symbol[static_cast<Eigen::Index>(i)] = Complex(0.0, spec.dispersion(i));
    init_diagonal(symbol);
  }

  /// Diagonal M with the given complex symbol.
  Etdrk4(const CVector& symbol, double dt) : dt_(dt) { init_diagonal(symbol); }

  /// M equal to `block` on the modes `active` and to `symbol` elsewhere; the
  /// modes in `active` must be invariant under M.
  Etdrk4(const CVector& symbol, std::vector<Eigen::Index> active, const Eigen::MatrixXcd& block, double dt)
      : dt_(dt), active_(std::move(active)) {
    init_diagonal(symbol);
    const auto full = matrix_phi_functions(dt * block, 3);
    const auto half = matrix_phi_functions(0.5 * dt * block, 1);
    E_ = full[0];
    E2_ = half[0];
    Q_ = 0.5 * dt * half[1];
    F1_ = dt * (full[1] - 3.0 * full[2] + 4.0 * full[3]);
    F2_ = dt * (full[2] - 2.0 * full[3]);
    F3_ = dt * (4.0 * full[3] - full[2]);
  }

  double dt() const { return dt_; }
  bool dense() const { return !active_.empty(); }

  /// One step from (t, u); `nonlinear(v, s)` returns N(v, s).
  template <class Nonlinear>
  CVector step(const CVector& u, double t, Nonlinear&& nonlinear) const {
    const CVector nu = nonlinear(u, t);
    const CVector eu = apply(e2_, E2_, u);
    const CVector a = eu + apply(q_, Q_, nu);
    const CVector na = nonlinear(a, t + 0.5 * dt_);
    const CVector b = eu + apply(q_, Q_, na);
    const CVector nb = nonlinear(b, t + 0.5 * dt_);
    const CVector c = apply(e2_, E2_, a) + apply(q_, Q_, CVector(2.0 * nb - nu));
    const CVector nc = nonlinear(c, t + dt_);
    return apply(e_, E_, u) + apply(f1_, F1_, nu) + 2.0 * apply(f2_, F2_, CVector(na + nb)) + apply(f3_, F3_, nc);
  }

 private:
  void init_diagonal(const CVector& symbol) {
    const auto n = symbol.size();
    e_.resize(n);
    e2_.resize(n);
    q_.resize(n);
    f1_.resize(n);
    f2_.resize(n);
    f3_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Complex z = symbol[i] * dt_;
      const auto [p1, p2, p3] = phi_functions(z);
      const auto half = phi_functions(0.5 * z);
      e_[i] = std::exp(z);
      e2_[i] = std::exp(0.5 * z);
      q_[i] = 0.5 * dt_ * half[0];
      f1_[i] = dt_ * (p1 - 3.0 * p2 + 4.0 * p3);
      f2_[i] = dt_ * (p2 - 2.0 * p3);
      f3_[i] = dt_ * (4.0 * p3 - p2);
    }
  }

  CVector apply(const CVector& diag, const Eigen::MatrixXcd& block, const CVector& v) const {
    CVector out = diag.cwiseProduct(v);
    if (active_.empty()) return out;
    const auto m = static_cast<Eigen::Index>(active_.size());
    CVector sub(m);
    for (Eigen::Index j = 0; j < m; ++j) sub[j] = v[active_[static_cast<std::size_t>(j)]];
    const CVector res = block * sub;
    for (Eigen::Index j = 0; j < m; ++j) out[active_[static_cast<std::size_t>(j)]] = res[j];
    return out;
  }

  double dt_;
  CVector e_, e2_, q_, f1_, f2_, f3_;
  std::vector<Eigen::Index> active_;
  Eigen::MatrixXcd E_, E2_, Q_, F1_, F2_, F3_;
};

}  // namespace b4nls::dynamics
