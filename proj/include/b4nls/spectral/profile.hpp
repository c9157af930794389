#pragma once

#include <cmath>
#include <string>

#include "b4nls/spectral/field.hpp"
#include "b4nls/spectral/operators.hpp"
#include "b4nls/spectral/region.hpp"

namespace b4nls {

/// Nonnegative smooth weight on the collocation grid, a C-infinity smoothing
/// of the indicator of a region: 1 on the region eroded by `width`, 0 outside.
struct DampingProfile {
  ManifoldSpec spec;
  RVector values;
  Region region;
  double width = 0.0;

  bool is_constant() const { return values.size() == 0 || values.maxCoeff() - values.minCoeff() <= 1e-15; }
  double max_value() const { return values.maxCoeff(); }
};

/// Default transition width: five grid cells.
inline double default_smoothing_width(const ManifoldSpec& spec) { return 5.0 * spec.grid_step(); }

namespace detail {

inline void validate_region(const Region& region, double width, int dim) {
  require(!region.empty(), "region must be nonempty");
  require(width > 0.0 && std::isfinite(width), "smoothing width must be positive");
  for (const auto& part : region.parts) {
    if (const auto* s = std::get_if<region::Strip>(&part)) {
      require(s->axis >= 0 && s->axis < dim, "strip axis out of range");
      require(s->hi > s->lo && s->hi - s->lo <= 2.0 * M_PI, "strip needs 0 < hi - lo <= 2 pi");
      require(s->hi - s->lo >= 2.0 * M_PI || s->hi - s->lo > 2.0 * width,
              "strip too narrow for the smoothing width");
    } else if (const auto* b = std::get_if<region::Ball>(&part)) {
      require(b->radius > width, "ball radius must exceed the smoothing width");
    } else if (std::holds_alternative<region::Cap>(part)) {
      throw PreconditionError("spherical cap cannot define a torus profile");
    }
  }
}

/// Smoothed indicator at a torus point. Union uses 1 - prod(1 - a_i) so the
/// result stays smooth and within [0, 1].
inline double smoothed_indicator(const Region& region, double width, const std::array<double, 2>& x, int dim) {
  double outside = 1.0;
  for (const auto& part : region.parts) {
    const double depth = torus_depth(part, x, dim);
    outside *= 1.0 - (std::isinf(depth) ? 1.0 : smooth_step(depth / width));
  }
  return 1.0 - outside;
}

}  // namespace detail

inline DampingProfile make_damping_profile(const ManifoldSpec& spec, const Region& region, double width = -1.0) {
  if (width < 0.0) width = default_smoothing_width(spec);
  detail::validate_region(region, width, spec.dim());
  DampingProfile p{spec, RVector(static_cast<Eigen::Index>(spec.size())), region, width};
  for (std::size_t j = 0; j < spec.size(); ++j)
    p.values[static_cast<Eigen::Index>(j)] = detail::smoothed_indicator(region, width, grid_point(spec, j), spec.dim());
  return p;
}

inline DampingProfile constant_profile(const ManifoldSpec& spec, double value) {
  require(value >= 0.0, "profile must be nonnegative");
  return DampingProfile{spec, RVector::Constant(static_cast<Eigen::Index>(spec.size()), value), Region{region::Full{}},
                        default_smoothing_width(spec)};
}

/// Pointwise product with the profile, computed on the collocation grid.
inline CVector multiply_profile(const DampingProfile& a, const CVector& coeffs) {
  CVector phys = to_physical(a.spec, coeffs);
  phys.array() *= a.values.array().cast<Complex>();
  return from_physical_coeffs(a.spec, phys);
}

/// a (1 - Delta)^{-order} (a v), the smoothed localization operator.
inline CVector apply_localized_smoothing(const DampingProfile& a, const CVector& coeffs, double order = 2.0) {
  CVector w = multiply_profile(a, coeffs);
  smooth_in_place(a.spec, w, order);
  return multiply_profile(a, w);
}

}  // namespace b4nls
