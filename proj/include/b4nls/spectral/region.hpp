#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "b4nls/error.hpp"

namespace b4nls {

namespace region {

struct Full {};

/// {x : lo < x[axis] < hi} taken modulo 2 pi; requires 0 < hi - lo <= 2 pi.
struct Strip {
  double lo = 0.0;
  double hi = 0.0;
  int axis = 0;
};

/// Open geodesic ball on the flat torus.
struct Ball {
  std::array<double, 2> center{0.0, 0.0};
  double radius = 0.0;
};

/// Open spherical cap {x in S^2 : angle(x, center) < radius}.
struct Cap {
  std::array<double, 3> center{0.0, 0.0, 1.0};
  double radius = 0.0;
};

}  // namespace region

using RegionPart = std::variant<region::Full, region::Strip, region::Ball, region::Cap>;

/// Union of elementary open regions. An empty part list is the empty set.
struct Region {
  std::vector<RegionPart> parts;

  Region() = default;
  Region(std::initializer_list<RegionPart> p) : parts(p) {}
  explicit Region(std::vector<RegionPart> p) : parts(std::move(p)) {}

  bool empty() const { return parts.empty(); }
};

inline double wrap_2pi(double x) {
  const double two_pi = 2.0 * M_PI;
  double r = std::fmod(x, two_pi);
  if (r < 0.0) r += two_pi;
  return r;
}

/// Minimal-image distance on T^d.
inline double torus_distance(const std::array<double, 2>& x, const std::array<double, 2>& y, int dim) {
  double acc = 0.0;
  for (int a = 0; a < dim; ++a) {
    double d = wrap_2pi(x[a] - y[a]);
    d = std::min(d, 2.0 * M_PI - d);
    acc += d * d;
  }
  return std::sqrt(acc);
}

/// Signed depth of a torus point inside one part: positive inside, equal to
/// the distance to the boundary along the region's natural coordinate.
inline double torus_depth(const RegionPart& part, const std::array<double, 2>& x, int dim) {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, region::Full>) {
          return std::numeric_limits<double>::infinity();
        } else if constexpr (std::is_same_v<T, region::Strip>) {
          require(p.axis >= 0 && p.axis < dim, "strip axis out of range");
          const double w = p.hi - p.lo;
          const double t = wrap_2pi(x[p.axis] - p.lo);
          if (w >= 2.0 * M_PI) return std::numeric_limits<double>::infinity();
          if (t < w) return std::min(t, w - t);
          return -std::min(t - w, 2.0 * M_PI - t);
        } else if constexpr (std::is_same_v<T, region::Ball>) {
          return p.radius - torus_distance(x, p.center, dim);
        } else {
          throw PreconditionError("spherical cap is not a torus region");
        }
      },
      part);
}

inline bool torus_contains(const Region& r, const std::array<double, 2>& x, int dim) {
  return std::any_of(r.parts.begin(), r.parts.end(),
                     [&](const RegionPart& p) { return torus_depth(p, x, dim) > 0.0; });
}

inline double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline bool sphere_contains(const Region& r, const std::array<double, 3>& x) {
  for (const auto& part : r.parts) {
    if (std::holds_alternative<region::Full>(part)) return true;
    const auto* cap = std::get_if<region::Cap>(&part);
    require(cap != nullptr, "only caps and full regions are supported on the sphere");
    if (dot3(x, cap->center) > std::cos(cap->radius)) return true;
  }
  return false;
}

/// Smallest characteristic size of the parts, used to pick scan steps.
inline double feature_size(const Region& r) {
  double s = 2.0 * M_PI;
  for (const auto& part : r.parts) {
    if (const auto* st = std::get_if<region::Strip>(&part)) s = std::min(s, st->hi - st->lo);
    if (const auto* b = std::get_if<region::Ball>(&part)) s = std::min(s, 2.0 * b->radius);
    if (const auto* c = std::get_if<region::Cap>(&part)) s = std::min(s, 2.0 * c->radius);
  }
  return s;
}

inline std::string describe(const Region& r) {
  std::ostringstream os;
  os.precision(17);
  if (r.parts.empty()) return "empty";
  for (std::size_t i = 0; i < r.parts.size(); ++i) {
    if (i) os << " | ";
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, region::Full>) os << "full";
          else if constexpr (std::is_same_v<T, region::Strip>)
            os << "strip(" << p.lo << "," << p.hi << ",axis=" << p.axis << ")";
          else if constexpr (std::is_same_v<T, region::Ball>)
            os << "ball((" << p.center[0] << "," << p.center[1] << ")," << p.radius << ")";
          else
            os << "cap((" << p.center[0] << "," << p.center[1] << "," << p.center[2] << ")," << p.radius << ")";
        },
        r.parts[i]);
  }
  return os.str();
}

}  // namespace b4nls
