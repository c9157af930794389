#pragma once

#include <cstdint>
#include <random>

#include "b4nls/spectral/operators.hpp"

namespace b4nls {

/// The single generator type used across the project; seeds flow explicitly.
using Rng = std::mt19937_64;

/// Random field with Gaussian coefficients on |k_i| <= band, damped by
/// (1 + |k|^2)^{-decay / 2}, then scaled to the requested H^s norm. Draws are
/// made in ascending wavevector order over the band only, so the same seed
/// gives the same field on every lattice that contains the band.
inline SpectralField random_band_limited(const ManifoldSpec& spec, int band, Rng& rng, double target_norm = 1.0,
                                         double s = 2.0, double decay = 2.0) {
  require(band >= 0 && band < spec.modes_per_dim() / 2, "band must lie inside the lattice");
  std::normal_distribution<double> gauss(0.0, 1.0);
  SpectralField u(spec);
  const int outer = spec.dim() == 2 ? band : 0;
  for (int k0 = -band; k0 <= band; ++k0) {
    for (int k1 = -outer; k1 <= outer; ++k1) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      const Wavevector k{k0, k1};
      const double kk = static_cast<double>(k0) * k0 + static_cast<double>(k1) * k1;
      u.coeffs()[static_cast<Eigen::Index>(spec.index_of(k))] = Complex(re, im) * std::pow(1.0 + kk, -0.5 * decay);
    }
  }
  const double n = sobolev_norm(u, s);
  if (n > 0.0) u *= target_norm / n;
  return u;
}

}  // namespace b4nls
