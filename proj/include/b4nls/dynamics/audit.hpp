#pragma once

#include <cmath>
#include <vector>

#include "b4nls/dynamics/evolve.hpp"

namespace b4nls::dynamics {

struct DissipationAudit {
  double lhs = 0.0;       // E(T) - E(0)
  double rhs = 0.0;       // -int_0^T flux dt, trapezoid rule on the ledger
  double mismatch = 0.0;  // |lhs - rhs| / max(|lhs|, |rhs|), zero when both vanish
};

inline DissipationAudit audit_dissipation(const EvolutionTrace& trace) {
  require(trace.ledger.size() >= 2, "trace ledger missing or too short for a dissipation audit");
  const auto& L = trace.ledger;
  DissipationAudit out;
  out.lhs = L.back().energy - L.front().energy;
  double integral = 0.0;
  for (std::size_t i = 1; i < L.size(); ++i)
    integral += 0.5 * (L[i].t - L[i - 1].t) * (L[i].damping_flux + L[i - 1].damping_flux);
  out.rhs = -integral;
  const double scale = std::max(std::abs(out.lhs), std::abs(out.rhs));
  out.mismatch = scale > 0.0 ? std::abs(out.lhs - out.rhs) / scale : 0.0;
  return out;
}

struct DecayFit {
  double gamma = 0.0;
  double r_squared = 1.0;
};

/// Least-squares line through (t, log E); since E scales like ||u||^2 the
/// reported rate is gamma = -slope / 2. A series with no variance in log E
/// has r^2 = 1 by convention.
inline DecayFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& energies) {
  require(times.size() == energies.size() && times.size() >= 2, "decay fit needs at least two samples");
  const std::size_t n = times.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(energies[i] > 0.0 && std::isfinite(energies[i]), "decay fit needs positive energies");
    y[i] = std::log(energies[i]);
  }
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mt += times[i];
    my += y[i];
  }
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    stt += (times[i] - mt) * (times[i] - mt);
    sty += (times[i] - mt) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(stt > 0.0, "decay fit needs distinct sample times");
  // A flat series has no trend to fit; report exactly zero rather than rounding noise.
  const bool flat = syy <= 1e-28 * std::max(1.0, my * my) * n;
  const double slope = flat ? 0.0 : sty / stt;
  DecayFit fit;
  fit.gamma = -0.5 * slope;
  if (flat) {
    fit.r_squared = 1.0;
  } else {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - (my + slope * (times[i] - mt));
      ss_res += r * r;
    }
    fit.r_squared = 1.0 - ss_res / syy;
  }
  return fit;
}

inline DecayFit fit_decay_rate(const EvolutionTrace& trace) {
  std::vector<double> t, e;
  for (const auto& row : trace.ledger) {
    t.push_back(row.t);
    e.push_back(row.energy);
  }
  return fit_decay_rate(t, e);
}

}  // namespace b4nls::dynamics
