#include <gtest/gtest.h>

#include <random>

#include <solitonforge/wavemaps.hpp>

using namespace solitonforge;
using std::numbers::pi;

namespace {

ConjugatedDiagonal su2_vacuum(double m) { return ConjugatedDiagonal::diagonal({cplx(0, m), cplx(0, -m)}); }

Smooth sech() {
  return {[](double x) { return 1.0 / std::cosh(x); }, [](double x) { return -std::tanh(x) / std::cosh(x); }};
}

Smooth bump() {
  return {[](double x) { return std::exp(-x * x); }, [](double x) { return -2 * x * std::exp(-x * x); }};
}

std::vector<std::array<double, 2>> random_xt(int n, unsigned seed, double r = 2.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-r, r);
  std::vector<std::array<double, 2>> p;
  for (int i = 0; i < n; ++i) p.push_back({U(rng), U(rng)});
  return p;
}

// coarse-grid error of the round trip s -> fields -> s
double round_trip_error(const WaveMap& s, const CharGrid& grid) {
  auto g = from_wavemap(s, grid);
  auto back = gridded_wavemap(g);
  double worst = 0.0;
  for (int i = 0; i < grid.n_xi; ++i)
    for (int j = 0; j < grid.n_eta; ++j) {
      const double xi = grid.xi(i), eta = grid.eta(j);
      worst = std::max(worst, (back[static_cast<std::size_t>(i) * grid.n_eta + j] - s.eval(xi + eta, xi - eta)).norm());
    }
  return worst;
}

}  // namespace

TEST(ToWavemap, VacuumIsExponential) {
  auto a = su2_vacuum(1.5);
  auto s = to_wavemap(vacuum_solution(a));
  for (auto [x, t] : random_xt(10, 1)) EXPECT_LE((s.eval(x, t) - mat_exp(a, -2.0 * x)).norm(), 1e-13);
  EXPECT_EQ(s.target_class, TargetClass::SU);
}

TEST(ToWavemap, CircleMapClosedForm) {
  auto h = sech(), k = bump();
  auto s = to_wavemap(circle_solution(h, k));
  for (auto [x, t] : random_xt(10, 2)) {
    auto p = CharPoint::from_xt(x, t);
    // normalized trivialization: profiles enter relative to their values at 0
    const double ph = h.f(p.xi) - h.f(0) + k.f(p.eta) - k.f(0);
    Matrix expect = diag({std::exp(-2.0 * kI * ph), std::exp(2.0 * kI * ph)});
    EXPECT_LE((s.eval(x, t) - expect).norm(), 1e-13);
  }
}

TEST(ToWavemap, OneSolitonColumnAtOrigin) {
  auto sol = periodic_soliton(1.0, {pi / 3});
  const Matrix b = sol.soliton->b, c = sol.soliton->c;
  // e^{-ax}(pi~ - pi~perp)e^{-ax} = b^{-1} s c at (0,0)
  Matrix core = mat_inv(b) * to_wavemap(sol).eval(0, 0) * c;
  EXPECT_LE((core.col(0) - vec({0.0, 1.0})).norm(), 1e-14);
}

TEST(ToWavemap, OneSolitonMatchesClosedForm) {
  // s = b e^{-ax} (pi~ - pi~perp) e^{-ax} c^{-1}; its first column after stripping b and c is
  // (-e^{-2imx} tanh(2mt sin th), e^{2imx cos th} sech(2mt sin th)) up to the e^{-imx} phase conventions
  const double m = 1.0, th = pi / 3;
  auto sol = periodic_soliton(m, {th});
  auto s = to_wavemap(sol);
  const Matrix b = sol.soliton->b, c = sol.soliton->c;
  for (auto [x, t] : random_xt(10, 3)) {
    Matrix S = mat_inv(b) * s.eval(x, t) * c;
    Matrix core = mat_exp(su2_vacuum(m), x) * S * mat_exp(su2_vacuum(m), x);
    const double sn = std::sin(th), cs = std::cos(th);
    const double ep = std::exp(2 * m * t * sn), em = std::exp(-2 * m * t * sn);
    Matrix pt(2, 2);
    pt << em, std::exp(-2.0 * kI * m * x * cs), std::exp(2.0 * kI * m * x * cs), ep;
    pt /= ep + em;
    Matrix expect = pt - (identity(2) - pt);
    EXPECT_LE((core - expect).norm(), 1e-12);
    // first column of e^{-ax}(pi~ - pi~perp)e^{-ax}
    Matrix col = (mat_exp(su2_vacuum(m), -x) * expect * mat_exp(su2_vacuum(m), -x)).col(0);
    EXPECT_LE((col - vec({-std::exp(-2.0 * kI * m * x) * std::tanh(2 * m * t * sn),
                          std::exp(2.0 * kI * m * x * cs) / std::cosh(2 * m * t * sn)}))
                  .norm(),
              1e-12);
  }
}

TEST(ToWavemap, RejectsPoleAtPlusMinusOne) {
  auto s = vacuum_solution(su2_vacuum(1.0));
  s.pole_set.push_back(1.0);
  EXPECT_THROW(to_wavemap(s), PoleHit);
}

TEST(ToWavemap, DerivativeIdentity) {
  auto sol = periodic_soliton(1.0, {pi / 3, 2 * pi / 3});
  auto s = to_wavemap(sol);
  for (auto [xi, eta] : random_xt(10, 4)) {
    CharPoint p{xi, eta};
    auto d = left_derivatives(s, p);
    Matrix phi = sol.E(p, 1.0), phinv = mat_inv(phi);
    EXPECT_LE((d.xi + 2.0 * phi * sol.a(p) * phinv).norm(), 1e-6);
    EXPECT_LE((d.eta + 2.0 * phi * sol.v(p) * phinv).norm(), 1e-6);
  }
}

TEST(ToWavemap, UnitaryWithUnitDeterminant) {
  auto s = to_wavemap(periodic_soliton(2.0, {pi / 3, 2 * pi / 3}));
  for (auto [x, t] : random_xt(20, 5, 4.0)) EXPECT_LE(group_drift(s.eval(x, t), TargetClass::SU), 1e-10);
}

TEST(FromWavemap, VacuumFields) {
  auto a = su2_vacuum(1.0);
  auto s = to_wavemap(vacuum_solution(a));
  CharGrid grid{-1, 1, 101, -1, 1, 101};
  auto g = from_wavemap(s, grid);
  const Matrix am = a.matrix();
  for (int i = 0; i < g.fine.n_xi; ++i) {
    EXPECT_LE((g.a[i] - am).norm(), 1e-8);
    for (int j = 0; j < g.fine.n_eta; ++j) {
      EXPECT_LE((g.u[g.idx(i, j)] + am).norm(), 1e-7);
      EXPECT_LE((g.v[g.idx(i, j)] - am).norm(), 1e-8);
      EXPECT_LE((g.psi[g.idx(i, j)] - mat_exp(a, -g.fine.eta(j))).norm(), 1e-8);
    }
  }
  // the fields are exact here, so the round trip error is the RK4 error of the reconstruction: fourth order
  EXPECT_LE(round_trip_error(s, grid), 1e-6);
  const double e41 = round_trip_error(s, CharGrid{-1, 1, 41, -1, 1, 41});
  const double e81 = round_trip_error(s, CharGrid{-1, 1, 81, -1, 1, 81});
  EXPECT_NEAR(e41 / e81, 16.0, 3.0);
}

TEST(FromWavemap, IdentityMapGivesZeroFields) {
  WaveMap s;
  s.eval = [](double, double) { return identity(2); };
  auto g = from_wavemap(s, CharGrid{-1, 1, 11, -1, 1, 11});
  for (std::size_t k = 0; k < g.u.size(); ++k) {
    EXPECT_LE(g.u[k].norm(), 1e-15);
    EXPECT_LE(g.v[k].norm(), 1e-15);
  }
}

TEST(FromWavemap, CircleMapWithoutEtaDependence) {
  auto s = to_wavemap(circle_solution(sech(), Smooth::zero()));
  const CharGrid grid{-2, 2, 101, -2, 2, 101};
  auto g = from_wavemap(s, grid);
  for (const auto& v : g.v) EXPECT_LE(v.norm(), 1e-12);
  EXPECT_LE(round_trip_error(s, grid), 1e-6);
}

TEST(FromWavemap, SolitonRoundTripAndFlow) {
  auto s = to_wavemap(periodic_soliton(1.0, {pi / 3}));
  CharGrid grid{-1, 1, 101, -1, 1, 101};
  EXPECT_LE(round_trip_error(s, grid), 1e-6);
  EXPECT_LE(gridded_flow_residual(from_wavemap(s, grid)), 1e-5);
}

TEST(FromWavemap, Preconditions) {
  WaveMap shifted;
  shifted.eval = [](double, double) { return Matrix(diag({kI, -kI})); };
  EXPECT_THROW(from_wavemap(shifted, CharGrid{}), PreconditionViolation);
  auto s = to_wavemap(vacuum_solution(su2_vacuum(1.0)));
  EXPECT_THROW(from_wavemap(s, CharGrid{-1, 1, 4, -1, 1, 11}), PreconditionViolation);
  EXPECT_THROW(from_wavemap(s, CharGrid{0.1, 1, 11, -1, 1, 11}), PreconditionViolation);
  WaveMap drifting;
  drifting.eval = [](double x, double) { return Matrix(identity(2) * (1.0 + x * x)); };
  EXPECT_THROW(from_wavemap(drifting, CharGrid{-1, 1, 11, -1, 1, 11}), OffGroupInput);
}

TEST(Residual, VacuumIsExact) {
  auto s = to_wavemap(vacuum_solution(su2_vacuum(1.0)));
  for (auto [x, t] : random_xt(10, 6)) EXPECT_LE(wavemap_residual(s, x, t, 1e-3), 1e-9);
}

TEST(Residual, SolitonsConvergeAtSecondOrder) {
  for (auto thetas : {std::vector<double>{pi / 3}, std::vector<double>{pi / 3, 2 * pi / 3}}) {
    auto s = to_wavemap(periodic_soliton(1.0, thetas));
    for (auto [x, t] : random_xt(20, 7)) {
      const double r1 = wavemap_residual(s, x, t, 2e-3), r2 = wavemap_residual(s, x, t, 1e-3);
      EXPECT_NEAR(r1 / r2, 4.0, 0.5);
      EXPECT_LE(wavemap_residual(s, x, t, 1e-3, 4), 1e-6);
    }
  }
}

TEST(Residual, DetectsNonSolution) {
  // x t solves the 1+1 wave equation, so exp(diag(i,-i) x t) is a wave map; x^2 is not
  WaveMap xt, xx;
  xt.eval = [](double x, double t) { return Matrix(diag({std::exp(kI * x * t), std::exp(-kI * x * t)})); };
  xx.eval = [](double x, double) { return Matrix(diag({std::exp(kI * x * x), std::exp(-kI * x * x)})); };
  for (auto [x, t] : random_xt(5, 8)) {
    EXPECT_LE(wavemap_residual(xt, x, t), 1e-6);
    EXPECT_GE(wavemap_residual(xx, x, t), 1e-1);
  }
}

TEST(Energy, IdentityMapHasNone) {
  WaveMap s;
  s.eval = [](double, double) { return identity(2); };
  EXPECT_EQ(energy(s, 0.0, 0, 1, 64).total(), 0.0);
  EXPECT_THROW(energy(s, 0.0, 0, 1, 32), PreconditionViolation);
}

TEST(Energy, CircleMapDensity) {
  auto h = sech();
  auto s = to_wavemap(circle_solution(h, Smooth::zero()));
  for (auto [xi, eta] : random_xt(10, 9)) {
    auto d = left_derivatives(s, {xi, eta});
    EXPECT_NEAR(std::sqrt(pairing(d.xi, d.xi)), 2 * std::sqrt(2.0) * std::abs(h.df(xi)), 1e-8);
  }
}

TEST(Energy, SolitonConservedOverPeriod) {
  auto s = to_wavemap(periodic_soliton(1.0, {pi / 3}));
  const double e0 = energy(s, 0.0, 0, 2 * pi, 512).total();
  EXPECT_GT(e0, 0.0);
  for (double t : {-1.0, 1.0}) EXPECT_NEAR(energy(s, t, 0, 2 * pi, 512).total() / e0, 1.0, 1e-6);
}

TEST(Cauchy, StationaryVacuum) {
  auto a = su2_vacuum(1.0);
  auto s = to_wavemap(vacuum_solution(a));
  const int nx = 128;
  auto data = cauchy_data_from(s, 0, 2 * pi, nx, Boundary::Periodic);
  auto r = integrate_cauchy(data, 1.0, data.dx / 4);
  double worst = 0.0;
  for (int i = 0; i < nx; ++i) worst = std::max(worst, (r.snapshots.back()[i] - s.eval(data.x(i), 1.0)).norm());
  EXPECT_LE(worst, 1e-6);
  EXPECT_NEAR(r.times.back(), 1.0, 1e-12);
}

TEST(Cauchy, OneSolitonMatchesAnalytic) {
  auto s = to_wavemap(periodic_soliton(1.0, {pi / 3}));
  const int nx = 512;
  auto data = cauchy_data_from(s, 0, 2 * pi, nx, Boundary::Periodic);
  auto r = integrate_cauchy(data, 0.5, data.dx / 4);
  double worst = 0.0;
  for (int i = 0; i < nx; ++i) worst = std::max(worst, (r.snapshots.back()[i] - s.eval(data.x(i), 0.5)).norm());
  EXPECT_LE(worst, 1e-4);
  EXPECT_LE(r.max_drift, 1e-6);
}

TEST(Cauchy, RejectsLargeStep) {
  auto s = to_wavemap(vacuum_solution(su2_vacuum(1.0)));
  auto data = cauchy_data_from(s, 0, 2 * pi, 64, Boundary::Periodic);
  EXPECT_THROW(integrate_cauchy(data, 1.0, data.dx), CFLViolation);
}

TEST(Cauchy, SnapshotsAreRecorded) {
  auto s = to_wavemap(vacuum_solution(su2_vacuum(1.0)));
  auto data = cauchy_data_from(s, 0, 2 * pi, 64, Boundary::Periodic);
  auto r = integrate_cauchy(data, 0.2, data.dx / 4, 5);
  ASSERT_EQ(r.times.size(), r.snapshots.size());
  EXPECT_GT(r.times.size(), 2u);
  EXPECT_DOUBLE_EQ(r.times.front(), 0.0);
}
