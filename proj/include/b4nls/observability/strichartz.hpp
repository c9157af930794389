#pragma once

#include <cmath>
#include <limits>

#include "b4nls/spectral/operators.hpp"
#include "b4nls/spectral/random.hpp"

namespace b4nls::observability {

/// gamma_{p,q} = d/2 - d/q - 4/p.
inline double strichartz_gamma(int d, double p, double q) { return 0.5 * d - d / q - 4.0 / p; }

/// Finite exponent pairs with 2 <= p, q, 2/p + d/q <= d/2. Infinite exponents
/// (and with them the excluded endpoint) are outside what the probe measures.
inline void require_admissible(int d, double p, double q) {
  require(std::isfinite(p) && std::isfinite(q), "Strichartz probe needs finite exponents");
  require(p >= 2.0 && q >= 2.0, "Strichartz exponents must be >= 2");
  require(2.0 / p + d / q <= 0.5 * d + 1e-14,
          "inadmissible Strichartz pair: 2/p + d/q = " + std::to_string(2.0 / p + d / q) + " exceeds d/2");
}

struct StrichartzOptions {
  int band = 8;            // random data live on |k_i| <= band
  int time_intervals = 2048;  // trapezoid intervals on [0, 1]
};

/// ||exp(itL) u0||_{L^p([0,1], L^q)} / ||u0||_{H^{gamma + 3/p}}, with the space
/// integral by collocation and the time integral by the trapezoid rule.
inline double strichartz_quotient(const SpectralField& u0, double p, double q, int time_intervals = 2048) {
  const auto& spec = u0.spec();
  require_admissible(spec.dim(), p, q);
  require(time_intervals >= 1, "need at least one time interval");
  const double denom = sobolev_norm(u0, strichartz_gamma(spec.dim(), p, q) + 3.0 / p);
  require(denom > 0.0, "Strichartz quotient of the zero field is undefined");
  const double dt = 1.0 / time_intervals;
  double acc = 0.0;
  CVector c = u0.coeffs();
  for (int j = 0; j <= time_intervals; ++j) {
    const CVector phys = to_physical(spec, c);
    double lq = 0.0;
    for (const auto& v : phys) lq += std::pow(std::abs(v), q);
    const double norm_q = std::pow(lq * spec.cell_volume(), 1.0 / q);
    const double w = (j == 0 || j == time_intervals) ? 0.5 : 1.0;
    acc += w * dt * std::pow(norm_q, p);
    propagate_in_place(spec, c, dt);
  }
  return std::pow(acc, 1.0 / p) / denom;
}

/// Largest quotient over `samples` random band-limited data.
inline double strichartz_ratio(const ManifoldSpec& spec, double p, double q, int samples, Rng& rng,
                               const StrichartzOptions& opt = {}) {
  require_admissible(spec.dim(), p, q);
  require(samples >= 1, "need at least one sample");
  double best = 0.0;
  for (int s = 0; s < samples; ++s)
    best = std::max(best, strichartz_quotient(random_band_limited(spec, opt.band, rng), p, q, opt.time_intervals));
  return best;
}

}  // namespace b4nls::observability
