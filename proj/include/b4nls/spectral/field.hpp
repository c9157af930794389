#pragma once

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <vector>

#include "b4nls/error.hpp"
#include "b4nls/spectral/fft.hpp"
#include "b4nls/spectral/manifold.hpp"

namespace b4nls {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// One complex field on the torus, held as coefficients c_k against the
/// orthonormal basis e_k(x) = exp(i k.x) / (2 pi)^{d/2}. With this
/// normalization the L2 norm is the Euclidean norm of the coefficients.
class SpectralField {
 public:
  SpectralField() = default;

  explicit SpectralField(ManifoldSpec spec) : spec_(std::move(spec)), coeffs_(CVector::Zero(spec_.size())) {}

  SpectralField(ManifoldSpec spec, CVector coeffs) : spec_(std::move(spec)), coeffs_(std::move(coeffs)) {
    require(static_cast<std::size_t>(coeffs_.size()) == spec_.size(),
            "coefficient count must equal N^d");
    require(coeffs_.allFinite(), "field coefficients must be finite");
  }

  static SpectralField basis(const ManifoldSpec& spec, const Wavevector& k, Complex amplitude = 1.0) {
    SpectralField f(spec);
    f.coeffs_[static_cast<Eigen::Index>(spec.index_of(k))] = amplitude;
    return f;
  }

  const ManifoldSpec& spec() const { return spec_; }
  const CVector& coeffs() const { return coeffs_; }
  CVector& coeffs() { return coeffs_; }
  Complex operator[](std::size_t i) const { return coeffs_[static_cast<Eigen::Index>(i)]; }

  Complex at(const Wavevector& k) const { return coeffs_[static_cast<Eigen::Index>(spec_.index_of(k))]; }

  SpectralField& operator+=(const SpectralField& o) {
    same_spec(o);
    coeffs_ += o.coeffs_;
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    same_spec(o);
    coeffs_ -= o.coeffs_;
    return *this;
  }
  SpectralField& operator*=(Complex s) {
    coeffs_ *= s;
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(Complex s, SpectralField a) { return a *= s; }
  friend SpectralField operator*(SpectralField a, Complex s) { return a *= s; }

 private:
  void same_spec(const SpectralField& o) const {
    require(spec_ == o.spec_, "fields live on different manifolds");
  }

  ManifoldSpec spec_;
  CVector coeffs_;
};

inline std::vector<int> grid_shape(const ManifoldSpec& spec) {
  return std::vector<int>(static_cast<std::size_t>(spec.dim()), spec.modes_per_dim());
}

/// Values on the collocation grid x_j = 2 pi j / N (row-major, last axis fastest).
inline CVector to_physical(const ManifoldSpec& spec, const CVector& coeffs) {
  CVector out;
  detail::fft(grid_shape(spec), +1, coeffs, out);
  out *= std::pow(2.0 * M_PI, -0.5 * spec.dim());
  return out;
}

inline CVector to_physical(const SpectralField& u) { return to_physical(u.spec(), u.coeffs()); }

inline CVector from_physical_coeffs(const ManifoldSpec& spec, const CVector& values) {
  CVector out;
  detail::fft(grid_shape(spec), -1, values, out);
  out *= std::pow(2.0 * M_PI, 0.5 * spec.dim()) / static_cast<double>(spec.size());
  return out;
}

inline SpectralField from_physical(const ManifoldSpec& spec, const CVector& values) {
  return SpectralField(spec, from_physical_coeffs(spec, values));
}

/// Coordinates of collocation point j.
inline std::array<double, 2> grid_point(const ManifoldSpec& spec, std::size_t j) {
  const double h = spec.grid_step();
  const auto n = static_cast<std::size_t>(spec.modes_per_dim());
  if (spec.dim() == 1) return {h * static_cast<double>(j), 0.0};
  return {h * static_cast<double>(j / n), h * static_cast<double>(j % n)};
}

}  // namespace b4nls
