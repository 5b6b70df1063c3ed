#include <gtest/gtest.h>

#include <algorithm>

#include <solitonforge/spectral.hpp>

using namespace solitonforge;
using std::numbers::pi;

namespace {

double distance_to(const std::vector<cplx>& set, cplx k) {
  double d = INFINITY;
  for (cplx e : set) d = std::min(d, std::abs(e - k));
  return d;
}

std::vector<double> reals(const std::vector<LinearMode>& modes) {
  std::vector<double> k;
  for (const auto& m : modes) k.push_back(m.k.real());
  return k;
}

}  // namespace

TEST(Stationary, ClosedForm) {
  auto s = stationary_map(1, identity(2));
  for (double x : {0.0, 0.7, 3.0}) {
    EXPECT_LE((s.eval(x, 1.3) - diag({std::exp(kI * x), std::exp(-kI * x)})).norm(), 1e-15);
    EXPECT_LE(wavemap_residual(s, x, 0.4), 1e-9);
  }
  ASSERT_TRUE(s.x_period);
  EXPECT_DOUBLE_EQ(*s.x_period, 2 * pi);
  auto h = stationary_map(1.5, identity(2));
  EXPECT_LE((h.eval(2 * pi, 0) + h.eval(0, 0)).norm(), 1e-12);
  EXPECT_DOUBLE_EQ(*h.x_period, 4 * pi);
}

TEST(Stationary, Preconditions) {
  EXPECT_THROW(stationary_map(0.3, identity(2)), PeriodViolation);
  EXPECT_THROW(stationary_map(1, 2.0 * identity(2)), OffGroupInput);
  EXPECT_THROW(stationary_map(1, identity(3)), ShapeMismatch);
}

TEST(LinearModes, MEqualsTwo) {
  auto s = linear_modes(2, 6);
  auto k = reals(s.real_pairs);
  std::sort(k.begin(), k.end());
  const double r3 = std::sqrt(3.0);
  std::vector<double> expect{-2, -r3, -r3, r3, r3, 2};
  ASSERT_EQ(k.size(), expect.size());
  for (std::size_t i = 0; i < k.size(); ++i) EXPECT_NEAR(k[i], expect[i], 1e-15);
  EXPECT_EQ(s.kernel_dim, 5);
  ASSERT_FALSE(s.imag_pairs.empty());
  EXPECT_EQ(s.imag_pairs.front().j, 3);
  EXPECT_NEAR(std::abs(s.imag_pairs.front().k.imag()), std::sqrt(5.0), 1e-15);
  EXPECT_EQ(s.imag_pairs.front().k.real(), 0.0);
}

TEST(LinearModes, MEqualsOne) {
  auto s = linear_modes(1, 4);
  auto k = reals(s.real_pairs);
  std::sort(k.begin(), k.end());
  EXPECT_EQ(k, (std::vector<double>{-1.0, 1.0}));
  EXPECT_EQ(s.imag_pairs.front().j, 2);
  EXPECT_NEAR(std::abs(s.imag_pairs.front().k), std::sqrt(3.0), 1e-15);
  EXPECT_THROW(linear_modes(0, 3), PreconditionViolation);
}

TEST(LinearModes, SpectrumClosedUnderNegationAndConjugation) {
  for (int m : {1, 2, 3}) {
    auto s = linear_modes(m, 8);
    std::vector<cplx> all;
    for (const auto& v : {s.real_pairs, s.imag_pairs})
      for (const auto& md : v) all.push_back(md.k);
    for (cplx k : all) {
      EXPECT_LE(distance_to(all, -k), 1e-15);
      EXPECT_LE(distance_to(all, std::conj(k)), 1e-15);
    }
  }
}

TEST(LinearModes, ShapesSolveTheLinearizedEquation) {
  for (auto [m, j] : {std::pair{2, 1}, std::pair{2, 0}, std::pair{3, -2}, std::pair{1, 3}})
    for (double x : {0.0, 0.4, 2.2, 5.9}) EXPECT_LE(mode_residual(m, j, cplx(0.3, -1.1), cplx(2.0, 0.5), x), 1e-9);
  // a wrong k^2 leaves a residual
  auto s = mode_shape(2, 1, 1.0, 0.0, 0.3);
  Matrix a = diag({2.0 * kI, -2.0 * kI});
  EXPECT_GE(fro(s.p_xx + commutator(a, s.p_x) - 4.0 * s.p), 1e-1);
}

TEST(NumericSpectrum, MatchesExactModes) {
  for (int m : {1, 2}) {
    auto num = numeric_spectrum(m, 256);
    for (const auto& mode : linear_modes(m, 4).real_pairs) EXPECT_LE(distance_to(num.eigenvalues, mode.k), 1e-3);
    for (cplx k : num.eigenvalues) EXPECT_LE(std::abs(k.real()), m + 1e-3);
    EXPECT_EQ(num.kernel_dim, 5);
  }
}

TEST(NumericSpectrum, FiniteDifferenceConvergesMonotonically) {
  const int m = 2;
  auto exact = linear_modes(m, 4).real_pairs;
  double prev = INFINITY;
  for (int n : {64, 128, 256}) {
    auto num = numeric_spectrum(m, n, SpectralScheme::CentralDifference);
    double worst = 0.0;
    for (const auto& mode : exact) worst = std::max(worst, distance_to(num.eigenvalues, mode.k));
    EXPECT_LT(worst, prev);
    prev = worst;
  }
  EXPECT_LE(prev, 1e-3);
}

TEST(NumericSpectrum, Preconditions) {
  EXPECT_THROW(numeric_spectrum(1, 32), PreconditionViolation);
  EXPECT_THROW(numeric_spectrum(1, 65), PreconditionViolation);
}

TEST(Asymptotics, TwoSolitonIsHomoclinic) {
  auto s = to_wavemap(periodic_soliton(1.0, {pi / 3, 2 * pi / 3}));
  auto r = asymptotic_analysis(s, 8.0);
  EXPECT_TRUE(r.homoclinic);
  EXPECT_FALSE(r.heteroclinic);
  double gap = 0.0;
  for (std::size_t i = 0; i < r.x_samples.size(); ++i)
    gap = std::max(gap, (r.limit_minus[i] - r.limit_plus[i]).cwiseAbs().maxCoeff());
  EXPECT_LE(gap, 1e-6);
  EXPECT_NEAR(r.expected_exponent, std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(r.decay_exponent_minus / r.expected_exponent, 1.0, 0.05);
  EXPECT_NEAR(r.decay_exponent_plus / r.expected_exponent, 1.0, 0.05);
  EXPECT_TRUE(r.modes_checked);
  EXPECT_FALSE(r.matched_modes.empty());
  for (auto [f, dir] : r.matched_modes)
    EXPECT_NE(std::find(r.predicted_frequencies.begin(), r.predicted_frequencies.end(), f), r.predicted_frequencies.end());
}

TEST(Asymptotics, OneSolitonIsHeteroclinic) {
  auto sol = periodic_soliton(1.0, {pi / 3});
  auto s = to_wavemap(sol);
  auto r = asymptotic_analysis(s, 8.0);
  EXPECT_TRUE(r.heteroclinic);
  EXPECT_FALSE(r.homoclinic);
  // twisted limit b e^{-ax} diag(1,-1) e^{-ax} c^{-1} at one end, its negative at the other
  const auto& rec = *sol.soliton;
  for (std::size_t i = 0; i < r.x_samples.size(); i += 7) {
    const double x = r.x_samples[i];
    Matrix e = diag({std::exp(-kI * x), std::exp(kI * x)});
    Matrix twisted = rec.b * e * diag({1.0, -1.0}) * e * mat_inv(rec.c);
    EXPECT_LE(std::min((r.limit_minus[i] - twisted).norm(), (r.limit_minus[i] + twisted).norm()), 1e-12);
    EXPECT_LE((r.limit_minus[i] + r.limit_plus[i]).norm(), 1e-12);
  }
  EXPECT_LE(std::max(r.residual_minus, r.residual_plus), 1e-5);
}

TEST(Asymptotics, DecayRateAcrossPoleHeights) {
  // mu = sin(theta) ranging over [0.3, 1]
  for (auto thetas : {std::vector<double>{std::asin(0.3), pi - std::asin(0.6)},
                      std::vector<double>{pi / 2, pi / 4}}) {
    auto r = asymptotic_analysis(to_wavemap(periodic_soliton(1.0, thetas)));
    EXPECT_NEAR(r.decay_exponent_minus / r.expected_exponent, 1.0, 0.05);
    EXPECT_NEAR(r.decay_exponent_plus / r.expected_exponent, 1.0, 0.05);
  }
}

TEST(Asymptotics, HomoclinicByTen) {
  auto s = to_wavemap(periodic_soliton(1.0, {pi / 3, 2 * pi / 3}));
  double worst = 0.0;
  for (int i = 0; i < 64; ++i) {
    const double x = 2 * pi * i / 64;
    worst = std::max(worst, (s.eval(x, 10) - s.eval(x, -10)).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(Asymptotics, RequiresSolitonRecord) {
  EXPECT_THROW(asymptotic_analysis(stationary_map(1, identity(2))), NotASoliton);
  auto generic = k_soliton(ConjugatedDiagonal::diagonal({cplx(0, 1), cplx(0, -2)}),
                           {{std::polar(1.0, 1.0), herm_proj(vec({1.0, 1.0}))}});
  EXPECT_THROW(asymptotic_analysis(to_wavemap(generic)), NotASoliton);
}
