#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <numbers>
#include <utility>

#include "dressing.hpp"
#include "parallel.hpp"
#include "wavemaps.hpp"

namespace solitonforge {

/// Time-independent geodesic x -> c e^{ax}, a = diag(im, -im), 2m an integer.
inline WaveMap stationary_map(double m, const Matrix& c) {
  if (std::abs(2.0 * m - std::round(2.0 * m)) > 1e-12) throw PeriodViolation("e^{2 pi a} != I: 2m must be an integer");
  if (c.rows() != 2 || c.cols() != 2) throw ShapeMismatch("stationary map needs a 2x2 frame");
  if ((c.adjoint() * c - identity(2)).norm() > 1e-10) throw OffGroupInput("c is not unitary");
  WaveMap w;
  w.eval = [m, c](double x, double) { return Matrix(c * diag({std::exp(kI * m * x), std::exp(-kI * m * x)})); };
  w.target_class = TargetClass::SU;
  w.dim = 2;
  // half-integer m flips sign after 2 pi
  const bool integral = std::abs(m - std::round(m)) < 1e-12;
  w.x_period = (integral ? 2.0 : 4.0) * std::numbers::pi;
  return w;
}

struct LinearMode {
  cplx k;
  int j = 0;
};

struct ModeSpectrum {
  int m = 0;
  std::vector<LinearMode> real_pairs;
  std::vector<LinearMode> imag_pairs;
  int kernel_dim = 0;
};

/// Exact spectrum of p_tt = p_xx + [a, p_x] around x -> e^{ax}: k^2 = m^2 - j^2.
inline ModeSpectrum linear_modes(int m, int j_cutoff) {
  if (m == 0) throw PreconditionViolation("m must be nonzero");
  const int am = std::abs(m);
  ModeSpectrum s;
  s.m = m;
  for (int j = -(am - 1); j <= am - 1; ++j) {
    double k = std::sqrt(static_cast<double>(am * am - j * j));
    s.real_pairs.push_back({k, j});
    s.real_pairs.push_back({-k, j});
  }
  for (int j = am + 1; j <= j_cutoff; ++j) {
    double k = std::sqrt(static_cast<double>(j * j - am * am));
    s.imag_pairs.push_back({cplx(0.0, k), j});
    s.imag_pairs.push_back({cplx(0.0, -k), j});
  }
  // j = +-m off-diagonal (two complex dimensions) plus the constant diagonal direction
  s.kernel_dim = 5;
  return s;
}

/// Off-diagonal mode p = [[0, f], [-conj f, 0]] with f = c1 e^{-i(m+j)x} + c2 e^{-i(m-j)x}, and its x-derivatives.
struct ModeShape {
  Matrix p, p_x, p_xx;
};

inline ModeShape mode_shape(int m, int j, cplx c1, cplx c2, double x) {
  const double w1 = -(m + j), w2 = -(m - j);
  cplx e1 = std::exp(kI * w1 * x), e2 = std::exp(kI * w2 * x);
  cplx f = c1 * e1 + c2 * e2;
  cplx fx = kI * w1 * c1 * e1 + kI * w2 * c2 * e2;
  cplx fxx = -w1 * w1 * c1 * e1 - w2 * w2 * c2 * e2;
  auto off = [](cplx g) {
    Matrix p = Matrix::Zero(2, 2);
    p(0, 1) = g;
    p(1, 0) = -std::conj(g);
    return p;
  };
  return {off(f), off(fx), off(fxx)};
}

/// |p_xx + [a, p_x] - k^2 p| with k^2 = m^2 - j^2, from the analytic derivatives.
inline double mode_residual(int m, int j, cplx c1, cplx c2, double x) {
  ModeShape s = mode_shape(m, j, c1, c2, x);
  Matrix a = diag({kI * double(m), -kI * double(m)});
  double k2 = double(m) * m - double(j) * j;
  return fro(s.p_xx + commutator(a, s.p_x) - k2 * s.p);
}

enum class SpectralScheme { Fourier, CentralDifference };

struct NumericSpectrum {
  std::vector<cplx> eigenvalues;
  int kernel_dim = 0;
};

namespace detail {

// Periodic first and second derivative matrices on n equispaced nodes of [0, 2 pi).
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> periodic_derivatives(int n, SpectralScheme scheme) {
  Eigen::MatrixXd d1 = Eigen::MatrixXd::Zero(n, n), d2 = Eigen::MatrixXd::Zero(n, n);
  const double h = 2.0 * std::numbers::pi / n;
  if (scheme == SpectralScheme::CentralDifference) {
    for (int i = 0; i < n; ++i) {
      d1(i, (i + 1) % n) += 0.5 / h;
      d1(i, (i + n - 1) % n) -= 0.5 / h;
      d2(i, i) -= 2.0 / (h * h);
      d2(i, (i + 1) % n) += 1.0 / (h * h);
      d2(i, (i + n - 1) % n) += 1.0 / (h * h);
    }
    return {d1, d2};
  }
  // Fourier differentiation, even n; the Nyquist mode is dropped in d1 and kept in d2
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      if (i == k) {
        d2(i, k) = -std::numbers::pi * std::numbers::pi / (3.0 * h * h) - 1.0 / 6.0;
        continue;
      }
      double s = std::sin((i - k) * h / 2.0);
      double sign = ((i - k) % 2 == 0) ? 1.0 : -1.0;
      d1(i, k) = 0.5 * sign / std::tan((i - k) * h / 2.0);
      d2(i, k) = -0.5 * sign / (s * s);
    }
  return {d1, d2};
}

}  // namespace detail

/// Eigenvalues of the discretized first-order system p_t = q, q_t = p_xx + [a, p_x] on su(2)-valued fields.
inline NumericSpectrum numeric_spectrum(int m, int n_grid, SpectralScheme scheme = SpectralScheme::Fourier) {
  if (n_grid < 64) throw PreconditionViolation("n_grid must be >= 64");
  if (n_grid % 2) throw PreconditionViolation("n_grid must be even");
  const int n = n_grid, f = 3 * n;
  auto [d1, d2] = detail::periodic_derivatives(n, scheme);
  // su(2) coordinates in the basis (i s3, i s2, i s1); ad_a for a = m e1 maps (p1,p2,p3) -> (0, -2m p3, 2m p2)
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(f, f);
  for (int c = 0; c < 3; ++c) L.block(c * n, c * n, n, n) = d2;
  L.block(n, 2 * n, n, n) = -2.0 * m * d1;
  L.block(2 * n, n, n, n) = 2.0 * m * d1;

  // k is an eigenvalue of [[0, I], [L, 0]] iff k^2 is an eigenvalue of L, so the 3n problem suffices
  Eigen::EigenSolver<Eigen::MatrixXd> es(L, false);
  if (es.info() != Eigen::Success) throw EvaluationFailure("eigensolver did not converge");

  NumericSpectrum r;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    cplx k = std::sqrt(es.eigenvalues()(i));
    r.eigenvalues.push_back(k);
    r.eigenvalues.push_back(-k);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(L);
  const auto& sv = svd.singularValues();
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) < 1e-6) ++r.kernel_dim;
  return r;
}

struct AsymptoticReport {
  std::vector<double> x_samples;
  std::vector<Matrix> limit_minus, limit_plus;
  // sup-distance of s(., -+T) from the limits
  double residual_minus = 0.0, residual_plus = 0.0;
  double decay_exponent_minus = 0.0, decay_exponent_plus = 0.0;
  double expected_exponent = 0.0;
  double T = 0.0;
  bool homoclinic = false;
  bool heteroclinic = false;
  bool modes_checked = false;
  std::vector<std::pair<int, int>> matched_modes;  // (frequency, direction)
  std::vector<int> predicted_frequencies;
};

namespace detail {

inline double slope(const std::vector<double>& t, const std::vector<double>& y) {
  const double n = static_cast<double>(t.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  return (n * sty - st * sy) / (n * stt - st * st);
}

}  // namespace detail

/// Limits of a periodic k-soliton as t -> -+infinity, decay rates and the Fourier content of the leading correction.
inline AsymptoticReport asymptotic_analysis(const WaveMap& s, std::optional<double> T_opt = std::nullopt,
                                            int n_samples = 64) {
  if (!s.source || !s.source->soliton) throw NotASoliton("wave map has no soliton record");
  const SolitonRecord& rec = *s.source->soliton;
  if (rec.m == 0.0) throw NotASoliton("vacuum is not of the form diag(im, -im)");
  if (n_samples < 16) throw PreconditionViolation("n_samples must be >= 16");
  const double m = rec.m;
  double mu_min = INFINITY;
  std::vector<double> r;
  for (cplx z : rec.z) {
    if (std::abs(std::abs(z) - 1.0) > 1e-12) throw PreconditionViolation("poles must lie on the unit circle");
    mu_min = std::min(mu_min, std::abs(m * z.imag()));
    r.push_back(m * z.real());
  }

  AsymptoticReport rep;
  rep.T = T_opt.value_or(std::max(8.0, 6.0 / mu_min));
  rep.expected_exponent = 2.0 * mu_min;
  const double T = rep.T, two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < n_samples; ++i) rep.x_samples.push_back(two_pi * i / n_samples);

  const Matrix binv = mat_inv(rec.b), cinv = mat_inv(rec.c);
  auto eax = [m](double x, double sgn) { return diag({std::exp(sgn * kI * m * x), std::exp(-sgn * kI * m * x)}); };
  // s -> b e^{-ax} D e^{-ax} c^{-1} with D a diagonal of signs; D is read off at +-T
  auto limit_at = [&](double t) {
    Matrix D = Matrix::Zero(2, 2);
    for (double x : rep.x_samples) D += eax(x, 1) * binv * s.eval(x, t) * rec.c * eax(x, 1);
    D /= static_cast<double>(n_samples);
    Matrix sign = Matrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i) {
      if (std::abs(std::abs(D(i, i)) - 1.0) > 0.1) throw EvaluationFailure("limit is not a diagonal of signs; increase T");
      sign(i, i) = D(i, i).real() > 0 ? 1.0 : -1.0;
    }
    std::vector<Matrix> lim;
    for (double x : rep.x_samples) lim.push_back(rec.b * eax(x, -1) * sign * eax(x, -1) * cinv);
    return lim;
  };
  rep.limit_minus = limit_at(-T);
  rep.limit_plus = limit_at(T);

  auto sup_dev = [&](const std::vector<Matrix>& lim, double t) {
    std::vector<double> d(rep.x_samples.size());
    parallel_for(rep.x_samples.size(), [&](std::size_t i) {
      d[i] = (s.eval(rep.x_samples[i], t) - lim[i]).cwiseAbs().maxCoeff();
    });
    return *std::max_element(d.begin(), d.end());
  };
  rep.residual_minus = sup_dev(rep.limit_minus, -T);
  rep.residual_plus = sup_dev(rep.limit_plus, T);

  double gap = 0.0, anti = 0.0;
  for (std::size_t i = 0; i < rep.x_samples.size(); ++i) {
    gap = std::max(gap, (rep.limit_minus[i] - rep.limit_plus[i]).cwiseAbs().maxCoeff());
    anti = std::max(anti, (rep.limit_minus[i] + rep.limit_plus[i]).cwiseAbs().maxCoeff());
  }
  rep.homoclinic = gap <= 1e-6;
  rep.heteroclinic = !rep.homoclinic && anti <= 1e-6;

  // log-linear fit of the sup-distance on [-T, -T/2] and [T/2, T]
  std::vector<double> ts, lm, lp;
  for (int i = 0; i <= 8; ++i) {
    double t = T / 2 + (T / 2) * i / 8.0;
    ts.push_back(t);
    lm.push_back(std::log(sup_dev(rep.limit_minus, -t)));
    lp.push_back(std::log(sup_dev(rep.limit_plus, t)));
  }
  rep.decay_exponent_minus = -detail::slope(ts, lm);
  rep.decay_exponent_plus = -detail::slope(ts, lp);

  // leading correction s0^{-1}(s - s0) at -T carries e^{+-2i(m - r_j)x}
  for (double rj : r) {
    double f = 2.0 * (m - rj);
    if (std::abs(f - std::round(f)) > 1e-9) return rep;  // not x-periodic: no Fourier matching
    for (int sg : {1, -1}) {
      int fi = sg * static_cast<int>(std::lround(f));
      if (std::find(rep.predicted_frequencies.begin(), rep.predicted_frequencies.end(), fi) ==
          rep.predicted_frequencies.end())
        rep.predicted_frequencies.push_back(fi);
    }
  }
  rep.modes_checked = true;
  for (int dir : {-1, 1}) {
    const auto& lim = dir < 0 ? rep.limit_minus : rep.limit_plus;
    std::vector<Matrix> corr(rep.x_samples.size());
    parallel_for(rep.x_samples.size(), [&](std::size_t i) {
      corr[i] = mat_inv(lim[i]) * (s.eval(rep.x_samples[i], dir * T) - lim[i]);
    });
    std::vector<double> amp(n_samples);
    const int half = n_samples / 2;
    for (int f = -half + 1; f < half; ++f) {
      Matrix acc = Matrix::Zero(2, 2);
      for (int i = 0; i < n_samples; ++i) acc += corr[i] * std::exp(-kI * double(f) * rep.x_samples[i]);
      amp[f + half] = acc.norm() / n_samples;
    }
    double other = 0.0;
    for (int f = -half + 1; f < half; ++f)
      if (std::find(rep.predicted_frequencies.begin(), rep.predicted_frequencies.end(), f) ==
          rep.predicted_frequencies.end())
        other = std::max(other, amp[f + half]);
    for (int f : rep.predicted_frequencies)
      if (std::abs(f) < half && amp[f + half] > 1e3 * other) rep.matched_modes.emplace_back(f, dir);
  }
  return rep;
}

}  // namespace solitonforge
