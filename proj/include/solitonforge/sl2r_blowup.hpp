#pragma once

#include <array>
#include <optional>

#include "dressing.hpp"
#include "parallel.hpp"
#include "wavemaps.hpp"

namespace solitonforge {

enum class DecayClass { L2_1, None };

struct RplusData {
  Smooth h = Smooth::zero();
  Smooth k = Smooth::zero();
  DecayClass decay_class = DecayClass::L2_1;
};

enum class ScenarioCase { SignPositive, SignNegative, Degenerate };

struct BlowupScenario {
  RplusData data;
  double alpha1 = 2.0;
  double alpha2 = 0.5;
  std::array<double, 2> y1{1.0, 1.0};  // (c1, d1)
  std::array<double, 2> y2{1.0, 1.0};  // (c2, d2)

  ScenarioCase scenario_case() const {
    const double num = y1[0] * y2[1], den = y2[0] * y1[1];
    if (den == 0.0 || num == 0.0) return ScenarioCase::Degenerate;
    return num / den > 0 ? ScenarioCase::SignPositive : ScenarioCase::SignNegative;
  }
};

inline Smooth gaussian_bump() {
  return {[](double x) { return std::exp(-x * x); }, [](double x) { return -2.0 * x * std::exp(-x * x); }};
}

/// W vanishes on a curve that misses t = 0 and is first reached at t* > 0.
inline BlowupScenario default_positive_scenario() {
  BlowupScenario s;
  s.data.h = gaussian_bump();
  s.data.k = gaussian_bump();
  s.alpha1 = 2.0;
  s.alpha2 = 0.5;
  s.y1 = {1.0, 1.0};
  s.y2 = {1.0, std::exp(1.5)};
  return s;
}

inline BlowupScenario default_negative_scenario() {
  BlowupScenario s = default_positive_scenario();
  s.y2 = {-1.0, 1.0};
  return s;
}

/// s = diag(e^{-2(h+k)}, e^{2(h+k)}).
inline WaveMap rplus_wavemap(const RplusData& d) {
  WaveMap w;
  w.eval = [d](double x, double t) {
    const CharPoint p = CharPoint::from_xt(x, t);
    const double e = 2.0 * (d.h.f(p.xi) + d.k.f(p.eta));
    return diag({std::exp(-e), std::exp(e)});
  };
  w.target_class = TargetClass::Rplus;
  w.dim = 2;
  return w;
}

/// W(xi, eta) with the two exponential terms kept apart for a scale-free zero test.
struct WValue {
  double w = 0.0;
  double scale = 0.0;

  bool singular() const { return !(std::abs(w) >= 1e-10 * scale); }
};

struct DressedRplus {
  WaveMap wavemap;
  std::function<WValue(double, double)> w_terms;
  std::function<double(double, double)> W_eval;
  FlowSolution flow;
};

namespace detail {

inline void check_scenario(const BlowupScenario& sc) {
  if (sc.alpha1 == 0.0 || sc.alpha2 == 0.0 || sc.alpha1 == sc.alpha2)
    throw PreconditionViolation("alpha1, alpha2 must be nonzero and distinct");
}

inline std::function<WValue(double, double)> w_terms(const BlowupScenario& sc) {
  const auto d = sc.data;
  const double h0 = d.h.f(0.0), k0 = d.k.f(0.0);
  const double a1 = sc.alpha1, a2 = sc.alpha2;
  const double c1 = sc.y1[0], d1 = sc.y1[1], c2 = sc.y2[0], d2 = sc.y2[1];
  return [d, h0, k0, a1, a2, c1, d1, c2, d2](double xi, double eta) {
    const double hh = d.h.f(xi) - h0, kk = d.k.f(eta) - k0;
    const double A1 = hh * a1 + kk / a1, A2 = hh * a2 + kk / a2;
    const double p = c1 * d2 * std::exp(-A1 + A2), q = c2 * d1 * std::exp(A1 - A2);
    return WValue{p - q, std::abs(p) + std::abs(q)};
  };
}

inline ObliqueProjection scenario_projection(const BlowupScenario& sc) {
  return oblique_proj({vec({sc.y1[0], sc.y1[1]})}, {vec({sc.y2[0], sc.y2[1]})});
}

}  // namespace detail

/// W alone; defined for alpha = +-1 as well, where the wave map itself is not.
inline std::function<double(double, double)> scenario_W(const BlowupScenario& sc) {
  detail::check_scenario(sc);
  auto terms = detail::w_terms(sc);
  return [terms](double xi, double eta) { return terms(xi, eta).w; };
}

/// Dressing of the R+ base by h_{alpha1,alpha2,pi} with pi onto y1 along y2; W is the determinant of the transported pair.
inline DressedRplus dressed_rplus(const BlowupScenario& sc) {
  detail::check_scenario(sc);
  if (std::abs(sc.alpha1) == 1.0 || std::abs(sc.alpha2) == 1.0)
    throw PreconditionViolation("alpha = +-1 makes the wave map frame singular");
  const auto& d = sc.data;
  const double h0 = d.h.f(0.0), k0 = d.k.f(0.0);
  const double a1 = sc.alpha1, a2 = sc.alpha2;
  const double c1 = sc.y1[0], d1 = sc.y1[1], c2 = sc.y2[0], d2 = sc.y2[1];

  auto terms = detail::w_terms(sc);

  DressedRplus out;
  out.w_terms = terms;
  out.W_eval = [terms](double xi, double eta) { return terms(xi, eta).w; };
  out.flow = dress_sl(rplus_solution(d.h, d.k), a1, a2, detail::scenario_projection(sc));

  const Matrix P = detail::scenario_projection(sc).matrix;
  const Matrix hm = detail::sl_simple(a1, a2, P, -1.0);
  const Matrix hp_inv = detail::sl_simple_inv(a1, a2, P, 1.0);
  const double kappa = (1 + a1) * (1 - a2) / ((1 + a2) * (1 - a1));
  const Eigen::Vector2d y1(c1, d1), y2(c2, d2);
  // s = h(-1) A0 (kappa I + (1 - kappa) pi~) A0 h(1)^{-1}, A0 = E(-1) = E(1)^{-1}
  out.wavemap.eval = [terms, d, h0, k0, a1, a2, hm, hp_inv, kappa, y1, y2](double x, double t) {
    const CharPoint p = CharPoint::from_xt(x, t);
    WValue w = terms(p.xi, p.eta);
    if (w.singular()) throw Singular(p.xi, p.eta);
    const double hh = d.h.f(p.xi) - h0, kk = d.k.f(p.eta) - k0;
    const double A1 = hh * a1 + kk / a1, A2 = hh * a2 + kk / a2;
    // image E(a1)^{-1} y1, kernel E(a2)^{-1} y2
    Eigen::Matrix2d B;
    B << y1(0) * std::exp(-A1), y2(0) * std::exp(-A2), y1(1) * std::exp(A1), y2(1) * std::exp(A2);
    Eigen::Matrix2d pt = B * Eigen::Vector2d(1.0, 0.0).asDiagonal() * B.inverse();
    const double e = hh + kk;
    Matrix A0 = diag({std::exp(-e), std::exp(e)});
    Matrix mid = kappa * identity(2) + (1.0 - kappa) * pt.cast<cplx>();
    return Matrix(hm * A0 * mid * A0 * hp_inv);
  };
  out.wavemap.target_class = TargetClass::SL2R;
  out.wavemap.dim = 2;
  return out;
}

struct BlowupPoint {
  double t = 0.0;
  double x = 0.0;
};

namespace detail {

// max over x of -sign0 * W on the slice t, refined around the best coarse node by golden section
inline std::pair<double, double> slice_peak(const std::function<double(double, double)>& W, double sign0, double x0,
                                            double x1, int n, double t) {
  auto F = [&](double x) { return -sign0 * W((x + t) / 2, (x - t) / 2); };
  const double h = (x1 - x0) / (n - 1);
  int best = 0;
  double fbest = -INFINITY;
  for (int i = 0; i < n; ++i) {
    double f = F(x0 + i * h);
    if (f > fbest) fbest = f, best = i;
  }
  double a = x0 + std::max(0, best - 1) * h, b = x0 + std::min(n - 1, best + 1) * h;
  const double g = (std::sqrt(5.0) - 1) / 2;
  double c = b - g * (b - a), d = a + g * (b - a), fc = F(c), fd = F(d);
  while (b - a > 1e-10) {
    if (fc > fd) {
      b = d, d = c, fd = fc, c = b - g * (b - a), fc = F(c);
    } else {
      a = c, c = d, fc = fd, d = a + g * (b - a), fd = F(d);
    }
  }
  double xm = (a + b) / 2, fm = F(xm);
  if (fbest > fm) return {fbest, x0 + best * h};
  return {fm, xm};
}

}  // namespace detail

/// First t > 0 at which W acquires a zero in the x-window, bisected to 1e-8.
inline std::optional<BlowupPoint> blowup_scan(const std::function<double(double, double)>& W,
                                              std::array<double, 2> x_window, double t_max, int resolution = 256) {
  if (resolution < 128) throw PreconditionViolation("resolution must be >= 128");
  const double x0 = x_window[0], x1 = x_window[1];
  const int nx = resolution;
  // the t = 0 slice must be zero-free with a single sign
  const double hx = (x1 - x0) / (nx - 1);
  double sign0 = 0.0;
  for (int i = 0; i < nx; ++i) {
    double w = W((x0 + i * hx) / 2, (x0 + i * hx) / 2);
    double sg = w > 0 ? 1.0 : (w < 0 ? -1.0 : 0.0);
    if (sg == 0.0 || (sign0 != 0.0 && sg != sign0)) throw BadCauchySlice("W vanishes on the t = 0 slice");
    sign0 = sg;
  }
  if (detail::slice_peak(W, sign0, x0, x1, nx, 0.0).first >= 0.0) throw BadCauchySlice("W vanishes on the t = 0 slice");

  std::vector<double> peak(resolution + 1);
  parallel_for(peak.size(), [&](std::size_t j) {
    peak[j] = detail::slice_peak(W, sign0, x0, x1, nx, t_max * j / resolution).first;
  });
  std::size_t first = 0;
  while (first < peak.size() && peak[first] < 0.0) ++first;
  if (first == peak.size()) return std::nullopt;
  double lo = t_max * (first - 1) / resolution, hi = t_max * first / resolution;
  while (hi - lo > 1e-9) {
    double mid = (lo + hi) / 2;
    (detail::slice_peak(W, sign0, x0, x1, nx, mid).first >= 0.0 ? hi : lo) = mid;
  }
  auto [f, x] = detail::slice_peak(W, sign0, x0, x1, nx, hi);
  return BlowupPoint{hi, x};
}

struct SlEnergy {
  double identity_route = 0.0;
  double finite_difference = 0.0;
};

/// Energy 1/2 int tr(X^2) + tr(T^2) dx, X = s^{-1}s_x, T = s^{-1}s_t, from the dressing identities and from differences of s.
inline SlEnergy energy_sl(const WaveMap& s, const BlowupScenario& sc, double t, double x0 = -20.0, double x1 = 20.0,
                          int n_samples = 2048) {
  if (n_samples < 64) throw PreconditionViolation("n_samples must be >= 64");
  const int n = n_samples % 2 ? n_samples + 1 : n_samples;
  const double h = (x1 - x0) / n;
  const auto& d = sc.data;
  // a zero of W between two nodes shows up as a sign change
  auto W = detail::w_terms(sc);
  double prev = 0.0;
  for (int i = 0; i <= n; ++i) {
    const CharPoint p = CharPoint::from_xt(x0 + i * h, t);
    WValue w = W(p.xi, p.eta);
    if (w.singular() || w.w * prev < 0.0) throw SingularSlice("slice t=" + std::to_string(t) + " meets a singularity");
    prev = w.w;
  }
  std::vector<double> id(n + 1), fd(n + 1);
  parallel_for(id.size(), [&](std::size_t i) {
    const double x = x0 + i * h;
    const CharPoint p = CharPoint::from_xt(x, t);
    // tr(s^{-1}s_xi)^2 = 8 h'^2 and tr(s^{-1}s_eta)^2 = 8 k'^2; the energy density is a quarter of their sum
    const double hp = d.h.df(p.xi), kp = d.k.df(p.eta);
    id[i] = 2.0 * (hp * hp + kp * kp);
    try {
      LeftDerivatives l = left_derivatives_xt(s, x, t, 1e-3);
      fd[i] = 0.5 * ((l.xi * l.xi).trace().real() + (l.eta * l.eta).trace().real());
    } catch (const Error&) {
      fd[i] = NAN;
    }
  });
  SlEnergy e;
  for (int i = 0; i <= n; ++i) {
    if (!std::isfinite(fd[i])) throw SingularSlice("slice t=" + std::to_string(t) + " meets a singularity");
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    e.identity_route += w * id[i];
    e.finite_difference += w * fd[i];
  }
  e.identity_route *= h / 3.0;
  e.finite_difference *= h / 3.0;
  return e;
}

}  // namespace solitonforge
