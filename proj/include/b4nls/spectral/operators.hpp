#pragma once

#include <cmath>
#include <complex>
#include <variant>

#include "b4nls/spectral/field.hpp"

namespace b4nls {

// ---------------------------------------------------------------------------
// Smooth cutoffs

/// exp(-1/x) mollifier building block, zero for x <= 0.
inline double mollifier(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

/// C-infinity step: 0 for t <= 0, 1 for t >= 1.
inline double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = mollifier(t);
  const double b = mollifier(1.0 - t);
  return a / (a + b);
}

/// Band cutoff kappa: 1 on [1, 2], 0 outside (1/2, 5/2), C-infinity in between.
inline double kappa(double s) {
  if (s <= 0.5 || s >= 2.5) return 0.0;
  if (s < 1.0) return smooth_step((s - 0.5) / 0.5);
  if (s <= 2.0) return 1.0;
  return smooth_step((2.5 - s) / 0.5);
}

// ---------------------------------------------------------------------------
// Norms and inner products

/// L2 inner product <u, v> = integral of u conj(v).
inline Complex inner(const SpectralField& u, const SpectralField& v) {
  require(u.spec() == v.spec(), "fields live on different manifolds");
  return v.coeffs().dot(u.coeffs());
}

inline double l2_norm(const SpectralField& u) { return u.coeffs().norm(); }

/// Squared H^s norm with the weight (1 + |k|^2)^s.
inline double sobolev_norm_squared(const ManifoldSpec& spec, const CVector& c, double s) {
  require(std::isfinite(s), "Sobolev index must be finite");
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i)
    acc += std::pow(1.0 + spec.k2(i), s) * std::norm(c[static_cast<Eigen::Index>(i)]);
  return acc;
}

inline double sobolev_norm(const SpectralField& u, double s) {
  return std::sqrt(sobolev_norm_squared(u.spec(), u.coeffs(), s));
}

/// Integral of |grad u|^2 = sum |k|^2 |c_k|^2.
inline double gradient_norm_squared(const SpectralField& u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.spec().size(); ++i)
    acc += u.spec().k2(i) * std::norm(u[i]);
  return acc;
}

// ---------------------------------------------------------------------------
// Fourier multipliers

namespace op {
struct Laplacian {};      // Delta: -|k|^2
struct Bilaplacian {};    // Delta^2: |k|^4
struct Dispersion {};     // L = Delta^2 - beta Delta: |k|^4 + beta |k|^2
struct Smoothing {        // (1 - Delta)^{-order}
  double order = 2.0;
};
}  // namespace op

using SpatialOperator = std::variant<op::Laplacian, op::Bilaplacian, op::Dispersion, op::Smoothing>;

inline double symbol(const ManifoldSpec& spec, const SpatialOperator& o, std::size_t i) {
  const double k2 = spec.k2(i);
  return std::visit(
      [&](const auto& which) -> double {
        using T = std::decay_t<decltype(which)>;
        if constexpr (std::is_same_v<T, op::Laplacian>) return -k2;
        else if constexpr (std::is_same_v<T, op::Bilaplacian>) return k2 * k2;
        else if constexpr (std::is_same_v<T, op::Dispersion>) return spec.dispersion(i);
        else return std::pow(1.0 + k2, -which.order);
      },
      o);
}

inline SpectralField apply_operator(const SpectralField& u, const SpatialOperator& o) {
  SpectralField out = u;
  for (std::size_t i = 0; i < u.spec().size(); ++i)
    out.coeffs()[static_cast<Eigen::Index>(i)] *= symbol(u.spec(), o, i);
  return out;
}

/// (1 - Delta)^{-order} applied to a raw coefficient vector.
inline void smooth_in_place(const ManifoldSpec& spec, CVector& c, double order) {
  for (std::size_t i = 0; i < spec.size(); ++i)
    c[static_cast<Eigen::Index>(i)] *= std::pow(1.0 + spec.k2(i), -order);
}

/// Free group exp(i t L): c_k -> exp(i t (|k|^4 + beta |k|^2)) c_k.
inline void propagate_in_place(const ManifoldSpec& spec, CVector& c, double t) {
  for (std::size_t i = 0; i < spec.size(); ++i)
    c[static_cast<Eigen::Index>(i)] *= std::polar(1.0, t * spec.dispersion(i));
}

inline SpectralField propagate_free(const SpectralField& u, double t) {
  SpectralField out = u;
  propagate_in_place(u.spec(), out.coeffs(), t);
  return out;
}

/// Coefficients of the pointwise complex conjugate: c_k -> conj(c_{-k}),
/// with -k taken modulo the lattice.
inline CVector conjugate_coeffs(const ManifoldSpec& spec, const CVector& c) {
  CVector out(c.size());
  const int n = spec.modes_per_dim();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    Wavevector k = spec.wavevector(i);
    for (int a = 0; a < spec.dim(); ++a) k[a] = k[a] == -n / 2 ? k[a] : -k[a];
    out[static_cast<Eigen::Index>(spec.index_of(k))] = std::conj(c[static_cast<Eigen::Index>(i)]);
  }
  return out;
}

/// Semiclassical band projector kappa(-h^2 Delta).
inline SpectralField band_project(const SpectralField& u, double h) {
  require(h > 0.0, "band parameter h must be positive");
  SpectralField out = u;
  for (std::size_t i = 0; i < u.spec().size(); ++i)
    out.coeffs()[static_cast<Eigen::Index>(i)] *= kappa(h * h * u.spec().k2(i));
  return out;
}

/// Lattice indices inside the open support of kappa(h^2 |k|^2).
inline std::vector<std::size_t> band_indices(const ManifoldSpec& spec, double h) {
  require(h > 0.0, "band parameter h must be positive");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < spec.size(); ++i)
    if (kappa(h * h * spec.k2(i)) > 0.0) out.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// Oscillatory time integrals

/// Exact integral over [0, T] of exp(i omega t), stable as omega T -> 0:
/// T * (sinc(theta) + i (theta / 2) sinc^2(theta / 2)) with theta = omega T.
inline Complex oscillatory_integral(double omega, double T) {
  const auto sinc = [](double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; };
  const double theta = omega * T;
  const double half = sinc(0.5 * theta);
  return T * Complex(sinc(theta), 0.5 * theta * half * half);
}

/// Composite trapezoid rule for the same integral on M uniform intervals.
inline Complex trapezoid_oscillatory_integral(double omega, double T, int intervals) {
  if (T == 0.0) return 0.0;
  const double dt = T / intervals;
  // Geometric sum of exp(i omega j dt), endpoints half-weighted.
  Complex acc = 0.5 * (1.0 + std::polar(1.0, omega * T));
  const Complex step = std::polar(1.0, omega * dt);
  Complex z = step;
  for (int j = 1; j < intervals; ++j) {
    acc += z;
    z *= step;
  }
  return dt * acc;
}

}  // namespace b4nls
