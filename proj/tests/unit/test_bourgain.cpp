#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "b4nls/bourgain/xsb.hpp"

using namespace b4nls;
using namespace b4nls::bourgain;

namespace {

constexpr double kWindow = 2.0 * M_PI;

// Pinned from the first run (measured sup of the modulation ratio: 0.9216).
constexpr double kTimeModulationBound = 0.93;
constexpr double kDuhamelExponentA = 0.01473977220387286;
constexpr double kDuhamelExponentB = 0.10817474835914011;
constexpr double kTrilinearSup50 = 0.013124907571468966;

SpaceTimeField free_solution(const SpectralField& v0, int samples, Taper taper = {}, double window = kWindow) {
  return SpaceTimeField::sample(
      v0.spec(), window, samples,
      [&](double t) {
        CVector c = v0.coeffs();
        propagate_in_place(v0.spec(), c, t);
        return c;
      },
      taper);
}

// A field that is not a free wave: each mode gets its own time modulation.
SpaceTimeField wobbly_field(const ManifoldSpec& spec, Rng& rng, int samples) {
  const auto a = random_band_limited(spec, 4, rng, 1.0, 0.0);
  const auto b = random_band_limited(spec, 4, rng, 1.0, 0.0);
  return SpaceTimeField::sample(spec, kWindow, samples, [&](double t) {
    CVector c = a.coeffs() + std::polar(1.0, 3.0 * t) * b.coeffs();
    propagate_in_place(spec, c, 0.5 * t);
    return c;
  });
}

// Simpson rule for psi_hat(sigma) = int_0^W g(t) e^{i sigma t} dt, then the
// (1/2pi) int <sigma>^{2b} |psi_hat|^2 dsigma integral by Simpson as well.
template <class G>
double hb_norm_quadrature(G&& g, double window, double b, double sigma_max = 160.0) {
  const int nt = 4000, ns = 6400;
  std::vector<double> gv(nt + 1);
  for (int i = 0; i <= nt; ++i) gv[i] = g(window * i / nt);
  const double ht = window / nt, hs = 2.0 * sigma_max / ns;
  double acc = 0.0;
  for (int j = 0; j <= ns; ++j) {
    const double sigma = -sigma_max + j * hs;
    Complex ghat = 0.0;
    for (int i = 0; i <= nt; ++i) {
      const double w = (i == 0 || i == nt) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      ghat += w * gv[i] * std::polar(1.0, sigma * i * ht);
    }
    ghat *= ht / 3.0;
    const double w = (j == 0 || j == ns) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    acc += w * std::pow(1.0 + sigma * sigma, b) * std::norm(ghat);
  }
  return std::sqrt(acc * hs / 3.0 / (2.0 * M_PI));
}

}  // namespace

TEST(XsbNorm, ZeroTimeWeightIsL2Hs) {
  const auto spec = make_torus(2, 16, 1.0);
  Rng rng(3);
  for (int i = 0; i < 5; ++i) {
    const auto f = wobbly_field(spec, rng, 256);
    for (double s : {0.0, 1.0, 2.0}) {
      EXPECT_NEAR(xsb_norm(f, s, 0.0), l2_hs_norm(f, s), 1e-12 * l2_hs_norm(f, s));
    }
  }
}

TEST(XsbNorm, ZeroFieldAndUntaperedField) {
  const auto spec = make_torus(1, 16, 1.0);
  SpaceTimeField zero(spec, kWindow, 64);
  EXPECT_EQ(xsb_norm(zero, 2.0, 0.7), 0.0);
  SpaceTimeField flat(spec, kWindow, 64);
  flat.values().setOnes();
  EXPECT_THROW(xsb_norm(flat, 2.0, 0.7), PreconditionError);
  EXPECT_THROW(SpaceTimeField(spec, kWindow, 7), PreconditionError);
  EXPECT_THROW(SpaceTimeField(spec, kWindow, 6), PreconditionError);
}

TEST(XsbNorm, FreeSolutionFactorizes) {
  const auto spec = make_torus(1, 16, 1.0);
  Rng rng(11);
  const auto v0 = random_band_limited(spec, 3, rng);
  const Taper taper;
  const auto f = free_solution(v0, 1024, taper);
  for (double b : {0.3, 0.5, 0.7, 1.0}) {
    const double psi = hb_norm_quadrature([&](double t) { return taper(t, kWindow); }, kWindow, b);
    const double expected = psi * sobolev_norm(v0, 2.0);
    EXPECT_NEAR(xsb_norm(f, 2.0, b), expected, 0.02 * expected) << "b = " << b;
  }
}

TEST(XsbNorm, ConjugationMatchesPlainNorm) {
  const auto spec = make_torus(2, 16, 2.0);
  Rng rng(5);
  const auto f = wobbly_field(spec, rng, 2048);
  const auto sharp = conjugate_free(f);
  for (double b : {-0.4, 0.3, 0.8}) {
    const double a = xsb_norm(f, 1.0, b), c = hb_hs_norm(sharp, 1.0, b);
    EXPECT_NEAR(a, c, 1e-12 * a);
  }
}

TEST(XsbNorm, EmbeddingMonotone) {
  const auto spec = make_torus(1, 32, 1.0);
  Rng rng(17);
  std::uniform_real_distribution<double> U(-1.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const auto f = wobbly_field(spec, rng, 128);
    double s1 = U(rng), s2 = U(rng), b1 = U(rng), b2 = U(rng);
    if (s1 > s2) std::swap(s1, s2);
    if (b1 > b2) std::swap(b1, b2);
    EXPECT_LE(xsb_norm(f, s1, b1), xsb_norm(f, s2, b2));
  }
}

TEST(XsbNorm, FirstOrderCharacterization) {
  const auto spec = make_torus(1, 16, 1.0);
  Rng rng(23);
  const auto f = wobbly_field(spec, rng, 4096);
  const double spectral = xsb_norm(f, 1.0, 1.0), direct = xs1_norm_direct(f, 1.0);
  EXPECT_NEAR(spectral, direct, 0.01 * spectral);
}

TEST(XsbNorm, TimeModulationBounded) {
  const auto spec = make_torus(1, 16, 1.0);
  const auto phi = [](double t) { return 1.0 + 0.5 * std::cos(t) + 0.25 * std::sin(2.0 * t); };
  Rng rng(29);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto f = wobbly_field(spec, rng, 512);
    for (double b : {0.3, 0.7}) worst = std::max(worst, xsb_norm(multiply_time(f, phi), 2.0, b) / xsb_norm(f, 2.0, b));
  }
  EXPECT_LE(worst, kTimeModulationBound);
}

TEST(XsbNorm, WritesTraceAndTaper) {
  const auto spec = make_torus(1, 8, 1.0);
  Rng rng(1);
  const auto f = free_solution(random_band_limited(spec, 2, rng), 16);
  const auto dir = std::filesystem::temp_directory_path() / "b4nls_xsb_field";
  std::filesystem::remove_all(dir);
  write_space_time_field(dir, f);
  EXPECT_TRUE(std::filesystem::exists(dir / "taper.csv"));
  std::filesystem::remove_all(dir);
}

TEST(DuhamelProbe, SingleModeExponents) {
  const TimeSignal g{{{2.0 * M_PI * 3.0, Complex(1.0, 0.0)}}};
  const std::vector<double> Ts{1.0, 0.5, 0.25};
  const auto p0 = duhamel_gain_probe(g, 0.55, 0.45, Ts);
  ASSERT_EQ(p0.points.size(), 3u);
  EXPECT_NEAR(p0.exponent, p0.expected_exponent(), 0.15);
  EXPECT_NEAR(p0.exponent, kDuhamelExponentA, 1e-6);
  const auto p1 = duhamel_gain_probe(g, 0.6, 0.3, Ts);
  EXPECT_NEAR(p1.exponent, p1.expected_exponent(), 0.15);
  EXPECT_NEAR(p1.exponent, kDuhamelExponentB, 1e-6);
}

TEST(DuhamelProbe, RandomSignals) {
  Rng rng(41);
  for (int i = 0; i < 4; ++i) {
    const auto g = random_time_signal(rng, 3, -4, 4);
    const auto p = duhamel_gain_probe(g, 0.6, 0.3, {1.0, 0.5, 0.25});
    EXPECT_NEAR(p.exponent, p.expected_exponent(), 0.15);
  }
}

TEST(DuhamelProbe, ZeroForcingSkipsAndRangeGuard) {
  const auto p = duhamel_gain_probe(TimeSignal{}, 0.6, 0.3, {1.0});
  EXPECT_TRUE(p.skipped);
  EXPECT_TRUE(p.points.empty());
  const TimeSignal g{{{1.0, Complex(1.0)}}};
  EXPECT_THROW(duhamel_gain_probe(g, 0.4, 0.3, {1.0}), PreconditionError);
  EXPECT_THROW(duhamel_gain_probe(g, 0.8, 0.3, {1.0}), PreconditionError);
  EXPECT_THROW(duhamel_gain_probe(g, 0.6, 0.3, {2.0}), PreconditionError);
}

TEST(Trilinear, SingleModeClosedForm) {
  const auto spec = make_torus(1, 32, 1.0);
  const Taper taper;
  const Wavevector m{2, 0};
  const auto v0 = SpectralField::basis(spec, m, Complex(0.7, -0.2));
  // A longer window refines the tau grid; Delta tau = 1 leaves a 1.5% quadrature error.
  const double window = 4.0 * kWindow;
  const auto u = free_solution(v0, 32768, taper, window);
  const double bp = 0.3, s = 2.0;
  const auto psi = [&](double t) { return taper(t, window); };
  const double num = hb_norm_quadrature([&](double t) { return std::pow(psi(t), 3); }, window, -bp, 40.0);
  const double den = std::pow(hb_norm_quadrature(psi, window, bp, 40.0), 3);
  // |e_m|^2 = 1/(2pi) on T^1, so cubing keeps the mode and the amplitude cancels.
  const double expected = num / (2.0 * M_PI * std::pow(1.0 + 4.0, s) * den);
  const auto got = trilinear_ratio(u, s, bp);
  ASSERT_TRUE(got.has_value());
  EXPECT_NEAR(*got, expected, 0.01 * expected);
}

TEST(Trilinear, ZeroFieldSkips) {
  const auto spec = make_torus(1, 32, 1.0);
  EXPECT_FALSE(trilinear_ratio(SpaceTimeField(spec, kWindow, 64), 2.0, 0.3).has_value());
}

TEST(Trilinear, StableUnderSampleDoubling) {
  const auto spec = make_torus(1, 32, 1.0);
  Rng a(2024), b(2024);
  const auto p50 = trilinear_constant_probe(spec, 2.0, 0.3, 50, a);
  const auto p100 = trilinear_constant_probe(spec, 2.0, 0.3, 100, b);
  EXPECT_EQ(p50.samples, 50);
  EXPECT_TRUE(std::isfinite(p50.sup_ratio));
  EXPECT_GT(p50.sup_ratio, 0.0);
  EXPECT_NEAR(p100.sup_ratio, p50.sup_ratio, 0.1 * p50.sup_ratio);
  EXPECT_NEAR(p50.sup_ratio, kTrilinearSup50, 1e-6 * kTrilinearSup50);
}

TEST(Trilinear, RejectsUnresolvedGrid) {
  const auto spec = make_torus(1, 32, 1.0);
  Rng rng(1);
  TrilinearOptions opt;
  opt.time_samples = 256;
  EXPECT_THROW(trilinear_constant_probe(spec, 2.0, 0.3, 1, rng, opt), PreconditionError);
  EXPECT_THROW(trilinear_constant_probe(spec, 2.0, 0.6, 1, rng), PreconditionError);
}
