#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "b4nls/spectral.hpp"

using namespace b4nls;

namespace {

Complex brute_coefficient(const ManifoldSpec& spec, const CVector& phys, std::size_t idx) {
  // Direct quadrature of <u, e_k> on the collocation grid.
  const auto k = spec.wavevector(idx);
  Complex acc = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const auto x = grid_point(spec, j);
    acc += phys[static_cast<Eigen::Index>(j)] * std::polar(1.0, -(k[0] * x[0] + k[1] * x[1]));
  }
  return acc * spec.cell_volume() / std::pow(2.0 * M_PI, 0.5 * spec.dim());
}

}  // namespace

TEST(ManifoldSpec, TorusLattice) {
  const auto s1 = make_torus(1, 64, 1.0);
  EXPECT_EQ(s1.size(), 64u);
  EXPECT_EQ(s1.wavevector(0)[0], 0);
  EXPECT_EQ(s1.wavevector(32)[0], -32);
  EXPECT_EQ(s1.wavevector(31)[0], 31);
  const auto s2 = make_torus(2, 16, 0.0);
  EXPECT_EQ(s2.size(), 256u);
  const auto i = s2.index_of({2, -3});
  EXPECT_DOUBLE_EQ(s2.dispersion(i), 169.0);
}

TEST(ManifoldSpec, RejectsBadParameters) {
  try {
    make_torus(1, 7, 1.0);
    FAIL() << "odd N accepted";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("N must be even"), std::string::npos);
  }
  EXPECT_THROW(make_torus(1, 6, 1.0), PreconditionError);
  EXPECT_THROW(make_torus(1, 64, -0.5), PreconditionError);
  EXPECT_THROW(make_torus(3, 16, 0.0), PreconditionError);
}

TEST(SpectralField, RejectsNonFinite) {
  const auto s = make_torus(1, 8, 0.0);
  CVector c = CVector::Zero(8);
  c[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(SpectralField(s, c), PreconditionError);
  EXPECT_THROW(SpectralField(s, CVector::Zero(7)), PreconditionError);
}

TEST(Sobolev, Examples) {
  const auto s = make_torus(1, 16, 1.0);
  EXPECT_DOUBLE_EQ(sobolev_norm(SpectralField::basis(s, {1, 0}), 2.0), 2.0);
  const auto u = SpectralField::basis(s, {0, 0}) + SpectralField::basis(s, {2, 0});
  EXPECT_NEAR(sobolev_norm(u, 1.0), std::sqrt(6.0), 1e-15);
}

TEST(Sobolev, ParsevalWithPhysicalQuadrature) {
  Rng rng(7);
  for (int d : {1, 2}) {
    const auto s = make_torus(d, 16, 1.0);
    const auto u = random_band_limited(s, 5, rng);
    const CVector phys = to_physical(u);
    const double quad = phys.squaredNorm() * s.cell_volume();
    EXPECT_NEAR(sobolev_norm(u, 0.0) * sobolev_norm(u, 0.0), quad, 1e-12 * quad);
    EXPECT_NEAR(sobolev_norm(u, 0.0), l2_norm(u), 1e-15);
  }
}

TEST(Transforms, MatchDirectQuadrature) {
  Rng rng(11);
  for (int d : {1, 2}) {
    const auto s = make_torus(d, 8, 0.0);
    CVector phys(static_cast<Eigen::Index>(s.size()));
    std::normal_distribution<double> g;
    for (auto& v : phys) v = Complex(g(rng), g(rng));
    const CVector c = from_physical_coeffs(s, phys);
    for (std::size_t i = 0; i < s.size(); ++i)
      EXPECT_NEAR(std::abs(c[static_cast<Eigen::Index>(i)] - brute_coefficient(s, phys, i)), 0.0, 1e-12);
    EXPECT_NEAR((to_physical(s, c) - phys).norm(), 0.0, 1e-12);
  }
}

TEST(Operators, Examples) {
  const auto s = make_torus(1, 16, 1.0);
  const auto e1 = SpectralField::basis(s, {1, 0});
  EXPECT_NEAR(std::abs(apply_operator(e1, op::Dispersion{}).at({1, 0}) - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(apply_operator(e1, op::Smoothing{2.0}).at({1, 0}) - 0.25), 0.0, 1e-15);
  EXPECT_EQ(l2_norm(apply_operator(SpectralField::basis(s, {0, 0}), op::Dispersion{})), 0.0);
  EXPECT_NEAR(std::abs(apply_operator(e1, op::Laplacian{}).at({1, 0}) + 1.0), 0.0, 1e-15);
  EXPECT_NEAR(gradient_norm_squared(2.0 * e1), 4.0, 1e-15);
}

TEST(Operators, DispersionIsSelfAdjoint) {
  Rng rng(3);
  const auto s = make_torus(2, 16, 2.0);
  const auto u = random_band_limited(s, 6, rng), v = random_band_limited(s, 6, rng);
  const Complex a = inner(apply_operator(u, op::Dispersion{}), v);
  const Complex b = inner(u, apply_operator(v, op::Dispersion{}));
  EXPECT_NEAR(std::abs(a - b), 0.0, 1e-12 * std::abs(a));
}

TEST(Propagation, Examples) {
  const auto s0 = make_torus(1, 16, 0.0);
  const auto s1 = make_torus(1, 16, 1.0);
  EXPECT_NEAR(std::abs(propagate_free(SpectralField::basis(s0, {1, 0}), M_PI).at({1, 0}) + 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(propagate_free(SpectralField::basis(s1, {1, 0}), M_PI / 2).at({1, 0}) + 1.0), 0.0, 1e-15);
  Rng rng(5);
  const auto u = random_band_limited(s1, 7, rng);
  EXPECT_EQ((propagate_free(u, 0.0).coeffs() - u.coeffs()).norm(), 0.0);
}

TEST(Propagation, UnitaryAndGroupLaw) {
  Rng rng(9);
  const auto s = make_torus(2, 16, 1.5);
  const auto u = random_band_limited(s, 7, rng);
  const auto v = propagate_free(u, 0.37);
  EXPECT_NEAR(l2_norm(v), l2_norm(u), 1e-13 * l2_norm(u));
  const auto w = propagate_free(v, 0.21);
  const auto direct = propagate_free(u, 0.58);
  EXPECT_LE((w.coeffs() - direct.coeffs()).norm(), 1e-12 * l2_norm(u));
}

TEST(BandProjection, KappaShape) {
  EXPECT_EQ(kappa(0.0), 0.0);
  EXPECT_EQ(kappa(0.5), 0.0);
  EXPECT_EQ(kappa(1.0), 1.0);
  EXPECT_EQ(kappa(2.0), 1.0);
  EXPECT_EQ(kappa(2.5), 0.0);
  // Golden value: the transition is the exp(-1/x) step evaluated at its midpoint.
  EXPECT_DOUBLE_EQ(kappa(2.25), 0.5);
  EXPECT_DOUBLE_EQ(kappa(0.75), 0.5);
  EXPECT_NEAR(kappa(2.1), 1.0 / (1.0 + std::exp(-1.0 / 0.2 + 1.0 / 0.8)), 1e-15);
}

TEST(BandProjection, Examples) {
  const auto s = make_torus(1, 16, 0.0);
  const auto e1 = SpectralField::basis(s, {1, 0});
  EXPECT_EQ(band_project(e1, 1.0).at({1, 0}), Complex(1.0));
  EXPECT_EQ(band_project(SpectralField::basis(s, {0, 0}), 1.0).at({0, 0}), Complex(0.0));
  const Complex c = band_project(SpectralField::basis(s, {3, 0}), 0.5).at({3, 0});
  EXPECT_GT(c.real(), 0.0);
  EXPECT_LT(c.real(), 1.0);
  EXPECT_DOUBLE_EQ(c.real(), 0.5);
  EXPECT_THROW(band_project(e1, 0.0), PreconditionError);
}

TEST(BandProjection, IdempotentOnPlateau) {
  Rng rng(1);
  const auto s = make_torus(2, 32, 0.0);
  const auto u = random_band_limited(s, 15, rng);
  const double h = 0.125;
  const auto once = band_project(u, h), twice = band_project(once, h);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = h * h * s.k2(i);
    if (x >= 1.0 && x <= 2.0) {
      EXPECT_EQ(once[i], twice[i]);
    }
  }
}

TEST(OscillatoryIntegral, ClosedFormAgainstTrapezoid) {
  for (double w : {0.0, 1e-9, 0.3, 7.0, -12.5}) {
    // exp(i theta) - 1 written as -2 sin^2(theta / 2) + i sin(theta) to avoid cancellation.
    const double th = 2.0 * w;
    const Complex num(-2.0 * std::pow(std::sin(0.5 * th), 2), std::sin(th));
    const Complex exact = w == 0.0 ? Complex(2.0) : num / Complex(0.0, w);
    EXPECT_NEAR(std::abs(oscillatory_integral(w, 2.0) - exact), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(trapezoid_oscillatory_integral(w, 2.0, 20000) - exact), 0.0, 1e-6);
  }
  EXPECT_EQ(oscillatory_integral(5.0, 0.0), Complex(0.0));
}

TEST(DampingProfile, FullAndStrip) {
  const auto s = make_torus(1, 64, 1.0);
  const auto full = make_damping_profile(s, Region{region::Full{}});
  EXPECT_EQ(full.values.minCoeff(), 1.0);
  EXPECT_TRUE(full.is_constant());
  const auto strip = make_damping_profile(s, Region{region::Strip{M_PI / 2, 3 * M_PI / 2, 0}}, 0.1);
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double x = grid_point(s, j)[0];
    const double a = strip.values[static_cast<Eigen::Index>(j)];
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
    if (x >= M_PI / 2 + 0.1 && x <= 3 * M_PI / 2 - 0.1) {
      EXPECT_EQ(a, 1.0);
    }
    if (x <= M_PI / 2 || x >= 3 * M_PI / 2) {
      EXPECT_EQ(a, 0.0);
    }
  }
  EXPECT_FALSE(strip.is_constant());
}

TEST(DampingProfile, Rejections) {
  const auto s = make_torus(2, 32, 1.0);
  EXPECT_THROW(make_damping_profile(s, Region{}), PreconditionError);
  EXPECT_THROW(make_damping_profile(s, Region{region::Strip{1.0, 1.1, 0}}, 0.1), PreconditionError);
  EXPECT_THROW(make_damping_profile(s, Region{region::Ball{{1.0, 1.0}, 0.05}}, 0.1), PreconditionError);
  EXPECT_THROW(make_damping_profile(s, Region{region::Full{}}, 0.0), PreconditionError);
  EXPECT_THROW(make_damping_profile(s, Region{region::Cap{{0, 0, 1}, 0.5}}, 0.1), PreconditionError);
}

TEST(DampingProfile, UnionOfBalls) {
  const auto s = make_torus(2, 32, 0.0);
  const auto p = make_damping_profile(s, Region{region::Ball{{1.0, 1.0}, 0.8}, region::Ball{{4.0, 4.0}, 0.8}}, 0.2);
  const auto near = [&](double x, double y) {
    std::size_t best = 0;
    double bd = 1e9;
    for (std::size_t j = 0; j < s.size(); ++j) {
      const auto g = grid_point(s, j);
      const double d = std::hypot(g[0] - x, g[1] - y);
      if (d < bd) bd = d, best = j;
    }
    return p.values[static_cast<Eigen::Index>(best)];
  };
  EXPECT_EQ(near(1.0, 1.0), 1.0);
  EXPECT_EQ(near(4.0, 4.0), 1.0);
  EXPECT_EQ(near(1.0, 4.0), 0.0);
}

TEST(Random, StableAcrossResolution) {
  Rng a(42), b(42);
  const auto u = random_band_limited(make_torus(1, 32, 1.0), 6, a);
  const auto v = random_band_limited(make_torus(1, 64, 1.0), 6, b);
  for (int k = -6; k <= 6; ++k) EXPECT_EQ(u.at({k, 0}), v.at({k, 0}));
  EXPECT_NEAR(sobolev_norm(u, 2.0), 1.0, 1e-14);
}

TEST(Snapshot, RoundTripAndHeader) {
  Rng rng(2);
  const auto s = make_torus(2, 8, 0.75);
  const auto u = random_band_limited(s, 3, rng);
  std::stringstream ss;
  write_snapshot(ss, u);
  const std::string bytes = ss.str();
  EXPECT_EQ(bytes.substr(0, 6), "B4NLS1");
  EXPECT_EQ(bytes.size(), 6u + 1 + 1 + 4 + 8 + 16 * 64);
  EXPECT_EQ(static_cast<unsigned char>(bytes[7]), 2u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 8u);
  const auto v = read_snapshot(ss);
  EXPECT_TRUE(v.spec() == s);
  EXPECT_EQ((u.coeffs() - v.coeffs()).norm(), 0.0);
}

TEST(Snapshot, LatticeOrderIsAscending) {
  const auto s = make_torus(1, 8, 0.0);
  std::stringstream ss;
  write_snapshot(ss, SpectralField::basis(s, {-4, 0}, 3.0));
  const std::string bytes = ss.str();
  double first;
  std::memcpy(&first, bytes.data() + 20, 8);
  EXPECT_EQ(first, 3.0);
  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream in(bad);
  EXPECT_THROW(read_snapshot(in), std::exception);
}
