#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "b4nls/error.hpp"

namespace b4nls {

enum class ManifoldKind : std::uint8_t { torus = 0, sphere_arith = 1 };

/// Integer wavevector; components beyond the manifold dimension are zero.
using Wavevector = std::array<int, 2>;

namespace detail {

struct LatticeTables {
  std::vector<Wavevector> wavevector;
  std::vector<double> k2;          // |k|^2, the -Laplacian eigenvalue
  std::vector<double> dispersion;  // |k|^4 + beta |k|^2
  std::vector<unsigned char> retained;  // 2/3-rule dealiasing mask
};

inline int wavenumber(int index, int N) { return index < N / 2 ? index : index - N; }

}  // namespace detail

/// Discretized spectral description of a flat torus T^d = [0, 2pi)^d with the
/// dispersion coefficient beta of L = Delta^2 - beta Delta.
///
/// Coefficients are stored in FFT order: along each axis the index i maps to
/// wavenumber i for i < N/2 and i - N otherwise, axes in row-major order with
/// the last axis fastest. The lattice is {-N/2, ..., N/2 - 1}^d.
class ManifoldSpec {
 public:
  ManifoldSpec() = default;

  ManifoldKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int modes_per_dim() const { return n_; }
  double beta() const { return beta_; }
  std::size_t size() const { return tables_ ? tables_->k2.size() : 0; }

  const Wavevector& wavevector(std::size_t i) const { return tables_->wavevector[i]; }
  double k2(std::size_t i) const { return tables_->k2[i]; }
  /// Symbol of L: |k|^4 + beta |k|^2.
  double dispersion(std::size_t i) const { return tables_->dispersion[i]; }
  bool retained(std::size_t i) const { return tables_->retained[i] != 0; }

  const std::vector<double>& k2_table() const { return tables_->k2; }
  const std::vector<double>& dispersion_table() const { return tables_->dispersion; }

  /// Index of wavevector k in FFT order; k must lie on the lattice.
  std::size_t index_of(const Wavevector& k) const {
    std::size_t idx = 0;
    for (int a = 0; a < dim_; ++a) {
      require(k[a] >= -n_ / 2 && k[a] < n_ / 2, "wavevector outside lattice");
      const int i = k[a] >= 0 ? k[a] : k[a] + n_;
      idx = idx * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
    }
    return idx;
  }

  bool on_lattice(const Wavevector& k) const {
    for (int a = 0; a < dim_; ++a)
      if (k[a] < -n_ / 2 || k[a] >= n_ / 2) return false;
    return true;
  }

  /// Physical grid spacing 2 pi / N.
  double grid_step() const { return 2.0 * M_PI / n_; }
  /// Quadrature weight of one collocation point, (2 pi / N)^d.
  double cell_volume() const { return std::pow(grid_step(), dim_); }

  friend bool operator==(const ManifoldSpec& a, const ManifoldSpec& b) {
    return a.kind_ == b.kind_ && a.dim_ == b.dim_ && a.n_ == b.n_ && a.beta_ == b.beta_;
  }

  friend ManifoldSpec make_torus(int d, int N, double beta);

 private:
  ManifoldKind kind_ = ManifoldKind::torus;
  int dim_ = 0;
  int n_ = 0;
  double beta_ = 0.0;
  std::shared_ptr<const detail::LatticeTables> tables_;
};

inline ManifoldSpec make_torus(int d, int N, double beta) {
  require(d == 1 || d == 2, "torus dimension must be 1 or 2");
  require(N % 2 == 0, "N must be even (got " + std::to_string(N) + ")");
  require(N >= 8, "N must be at least 8 (got " + std::to_string(N) + ")");
  require(std::isfinite(beta) && beta >= 0.0, "beta must be finite and nonnegative");

  auto tables = std::make_shared<detail::LatticeTables>();
  const std::size_t total = d == 1 ? static_cast<std::size_t>(N) : static_cast<std::size_t>(N) * N;
  tables->wavevector.resize(total);
  tables->k2.resize(total);
  tables->dispersion.resize(total);
  tables->retained.resize(total);
  const int cutoff = N / 3;
  for (std::size_t idx = 0; idx < total; ++idx) {
    Wavevector k{0, 0};
    if (d == 1) {
      k[0] = detail::wavenumber(static_cast<int>(idx), N);
    } else {
      k[0] = detail::wavenumber(static_cast<int>(idx / N), N);
      k[1] = detail::wavenumber(static_cast<int>(idx % N), N);
    }
    const double kk = static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1];
    tables->wavevector[idx] = k;
    tables->k2[idx] = kk;
    tables->dispersion[idx] = kk * kk + beta * kk;
    tables->retained[idx] = (std::abs(k[0]) <= cutoff && std::abs(k[1]) <= cutoff) ? 1 : 0;
  }

  ManifoldSpec spec;
  spec.kind_ = ManifoldKind::torus;
  spec.dim_ = d;
  spec.n_ = N;
  spec.beta_ = beta;
  spec.tables_ = std::move(tables);
  return spec;
}

}  // namespace b4nls
