#pragma once

#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "b4nls/dynamics/trace_io.hpp"
#include "b4nls/spectral/region.hpp"

namespace b4nls::gcc {

enum class Surface { torus1, torus2, sphere2 };

inline int ambient_dim(Surface s) { return s == Surface::torus1 ? 1 : s == Surface::torus2 ? 2 : 3; }

/// A unit-speed geodesic and the region it should enter. Torus points use the
/// first one or two coordinates; sphere points and tangent directions are unit
/// vectors in R^3.
struct GeodesicQuery {
  Surface surface = Surface::torus2;
  std::array<double, 3> start{0.0, 0.0, 0.0};
  std::array<double, 3> direction{1.0, 0.0, 0.0};
  Region region;
  double t_max = 10.0;
  double eps_t = 1e-9;

  void validate() const {
    require(!region.empty(), "region must be nonempty");
    require(eps_t > 0.0 && std::isfinite(eps_t), "time resolution must be positive");
    require(t_max >= 0.0 && std::isfinite(t_max), "time cap must be nonnegative");
    const int n = ambient_dim(surface);
    double norm2 = 0.0;
    for (int a = 0; a < n; ++a) norm2 += direction[a] * direction[a];
    require(std::abs(std::sqrt(norm2) - 1.0) <= 1e-12, "geodesic direction must be a unit vector");
    if (surface == Surface::sphere2) {
      require(std::abs(std::sqrt(dot3(start, start)) - 1.0) <= 1e-12, "sphere start point must be a unit vector");
      require(std::abs(dot3(start, direction)) <= 1e-12, "sphere direction must be tangent at the start point");
    }
  }

  std::array<double, 3> point(double t) const {
    if (surface == Surface::sphere2) {
      const double c = std::cos(t), s = std::sin(t);
      return {c * start[0] + s * direction[0], c * start[1] + s * direction[1], c * start[2] + s * direction[2]};
    }
    return {start[0] + t * direction[0], start[1] + t * direction[1], 0.0};
  }

  bool inside(double t) const {
    const auto x = point(t);
    if (surface == Surface::sphere2) return sphere_contains(region, x);
    return torus_contains(region, {x[0], x[1]}, ambient_dim(surface));
  }
};

/// Smallest t in [0, t_max] with the geodesic inside the open region, to
/// within eps_t (the returned time is always a point inside). A coarse scan
/// with step min(feature / 4, 0.05) brackets the entry, bisection refines it.
/// Entries shallower than the scan step can be missed; that is the resolution
/// of the answer.
inline std::optional<double> first_hit_time(const GeodesicQuery& q) {
  q.validate();
  if (q.inside(0.0)) return 0.0;
  const double step = std::max(std::min(0.25 * feature_size(q.region), 0.05), q.eps_t);
  double prev = 0.0;
  while (prev < q.t_max) {
    const double t = std::min(prev + step, q.t_max);
    if (q.inside(t)) {
      double lo = prev, hi = t;
      while (hi - lo > q.eps_t) {
        const double mid = 0.5 * (lo + hi);
        (q.inside(mid) ? hi : lo) = mid;
      }
      return hi;
    }
    prev = t;
  }
  return std::nullopt;
}

struct SamplingPlan {
  int start_points = 8;  // per axis on tori; total points on the sphere
  int farey_order = 6;   // rational directions (a, b) with max(|a|, |b|) <= order
  int angles = 64;       // uniform angular grid
  double eps_t = 1e-6;
};

struct GeodesicSample {
  GeodesicQuery query;
  double theta = 0.0;  // direction angle (tangent-plane angle on the sphere)
  std::optional<double> hit;
};

struct GccResult {
  std::optional<double> T0;              // sup of sampled hit times, when every sample hits
  std::optional<GeodesicQuery> witness;  // first sampled geodesic that misses
  std::vector<GeodesicSample> samples;

  bool holds() const { return T0.has_value(); }
};

namespace detail {

/// Unit directions on T^2: every primitive lattice vector up to the order,
/// then a uniform angle grid.
inline std::vector<double> torus2_angles(const SamplingPlan& plan) {
  std::vector<double> out;
  for (int a = -plan.farey_order; a <= plan.farey_order; ++a)
    for (int b = -plan.farey_order; b <= plan.farey_order; ++b)
      if ((a != 0 || b != 0) && std::gcd(a, b) == 1) out.push_back(std::atan2(b, a));
  for (int j = 0; j < plan.angles; ++j) out.push_back(2.0 * M_PI * j / plan.angles);
  return out;
}

/// Roughly uniform points on S^2 (Fibonacci lattice).
inline std::vector<std::array<double, 3>> sphere_points(int n) {
  std::vector<std::array<double, 3>> pts;
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    pts.push_back({r * std::cos(golden * i), r * std::sin(golden * i), z});
  }
  return pts;
}

/// Orthonormal tangent frame at a unit vector x.
inline std::pair<std::array<double, 3>, std::array<double, 3>> tangent_frame(const std::array<double, 3>& x) {
  std::array<double, 3> helper = std::abs(x[2]) < 0.9 ? std::array<double, 3>{0, 0, 1} : std::array<double, 3>{1, 0, 0};
  const double d = dot3(helper, x);
  std::array<double, 3> e1{helper[0] - d * x[0], helper[1] - d * x[1], helper[2] - d * x[2]};
  const double n1 = std::sqrt(dot3(e1, e1));
  for (auto& v : e1) v /= n1;
  std::array<double, 3> e2{x[1] * e1[2] - x[2] * e1[1], x[2] * e1[0] - x[0] * e1[2], x[0] * e1[1] - x[1] * e1[0]};
  return {e1, e2};
}

}  // namespace detail

/// Samples geodesics per the plan and reports either the largest hit time or
/// the first geodesic that misses within t_max. A T0 is certified only on the
/// sampled family; a witness is a genuine counterexample up to the scan
/// resolution of `first_hit_time`.
inline GccResult gcc_time(Surface surface, const Region& region, double t_max, const SamplingPlan& plan) {
  require(!region.empty(), "region must be nonempty");
  require(plan.start_points >= 1 && plan.angles >= 0 && plan.farey_order >= 0, "sampling plan must be nonnegative");
  GccResult res;
  double sup = 0.0;
  const auto run = [&](const std::array<double, 3>& x0, const std::array<double, 3>& dir, double theta) {
    const GeodesicQuery q{surface, x0, dir, region, t_max, plan.eps_t};
    GeodesicSample s{q, theta, first_hit_time(q)};
    if (s.hit) {
      sup = std::max(sup, *s.hit);
    } else if (!res.witness) {
      res.witness = q;
    }
    res.samples.push_back(std::move(s));
  };

  const int n = plan.start_points;
  if (surface == Surface::torus1) {
    for (int i = 0; i < n; ++i)
      for (double dir : {1.0, -1.0}) run({2.0 * M_PI * i / n, 0.0, 0.0}, {dir, 0.0, 0.0}, dir > 0 ? 0.0 : M_PI);
  } else if (surface == Surface::torus2) {
    const auto angles = detail::torus2_angles(plan);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (double th : angles)
          run({2.0 * M_PI * i / n, 2.0 * M_PI * j / n, 0.0}, {std::cos(th), std::sin(th), 0.0}, th);
  } else {
    const int m = std::max(plan.angles, 1);
    for (const auto& x : detail::sphere_points(n)) {
      const auto [e1, e2] = detail::tangent_frame(x);
      for (int j = 0; j < m; ++j) {
        const double th = 2.0 * M_PI * j / m;
        const double c = std::cos(th), s = std::sin(th);
        run(x, {c * e1[0] + s * e2[0], c * e1[1] + s * e2[1], c * e1[2] + s * e2[2]}, th);
      }
    }
  }
  if (!res.witness) res.T0 = sup;
  return res;
}

inline std::string format_point(const GeodesicQuery& q) {
  std::string s;
  for (int a = 0; a < ambient_dim(q.surface); ++a) {
    if (a) s += ';';
    s += format_real(q.start[static_cast<std::size_t>(a)]);
  }
  return s;
}

/// One row per sampled geodesic: `x0,theta,hit_time|miss`, start coordinates
/// joined by semicolons.
inline void write_gcc_csv(std::ostream& os, const GccResult& res) {
  os << "x0,theta,hit_time\n";
  for (const auto& s : res.samples)
    os << format_point(s.query) << ',' << format_real(s.theta) << ',' << (s.hit ? format_real(*s.hit) : "miss") << '\n';
}

inline void write_gcc_summary(std::ostream& os, const GccResult& res) {
  if (res.T0) {
    os << "{ \"gcc\": \"holds-on-samples\", \"T0\": " << format_real(*res.T0) << ", \"samples\": " << res.samples.size()
       << " }\n";
  } else {
    const auto& w = *res.witness;
    os << "{ \"gcc\": \"fails\", \"witness_start\": \"" << format_point(w) << "\", \"witness_direction\": \""
       << format_real(w.direction[0]) << ';' << format_real(w.direction[1]) << ';' << format_real(w.direction[2])
       << "\", \"t_max\": " << format_real(w.t_max) << ", \"samples\": " << res.samples.size() << " }\n";
  }
}

}  // namespace b4nls::gcc
