#pragma once

#include <optional>

#include "dressing.hpp"
#include "parallel.hpp"

namespace solitonforge {

enum class TargetClass { SU, S2, CPn, Sn, SL2R, Rplus };

struct WaveMap {
  std::function<Matrix(double, double)> eval;
  TargetClass target_class = TargetClass::SU;
  int dim = 2;
  std::optional<double> x_period;
  std::shared_ptr<const FlowSolution> source;

  Matrix operator()(double x, double t) const { return eval(x, t); }
};

namespace detail {

inline TargetClass target_of(const FlowSolution& sol) {
  if (sol.group_class == GroupClass::SLR) return TargetClass::SL2R;
  if (sol.symmetry_tags.count(SymmetryTag::S2)) return TargetClass::S2;
  if (sol.symmetry_tags.count(SymmetryTag::CPn)) return TargetClass::CPn;
  if (sol.symmetry_tags.count(SymmetryTag::Sn)) return TargetClass::Sn;
  return TargetClass::SU;
}

// fourth-order central difference of f around 0
template <class F>
Matrix d1(F&& f, double h) {
  return (f(-2 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2 * h)) / (12.0 * h);
}

inline bool compact(TargetClass c) { return c != TargetClass::SL2R && c != TargetClass::Rplus; }

}  // namespace detail

inline WaveMap to_wavemap(const FlowSolution& sol) {
  if (sol.near_pole(1.0, 1e-12) || sol.near_pole(-1.0, 1e-12)) throw PoleHit("+-1 is a pole of the trivialization");
  auto src = std::make_shared<const FlowSolution>(sol);
  WaveMap w;
  w.eval = [src](double x, double t) {
    const CharPoint p = CharPoint::from_xt(x, t);
    return Matrix(src->triv(p.xi, p.eta, -1.0) * mat_inv(src->triv(p.xi, p.eta, 1.0)));
  };
  w.target_class = detail::target_of(sol);
  w.dim = sol.dim;
  w.source = src;
  return w;
}

/// s^{-1} s_xi and s^{-1} s_eta by fourth-order differences of step h.
struct LeftDerivatives {
  Matrix xi, eta;
};

inline LeftDerivatives left_derivatives(const WaveMap& s, const CharPoint& p, double h = 1e-3) {
  auto at = [&](double xi, double eta) { return s.eval(xi + eta, xi - eta); };
  Matrix sinv = mat_inv(at(p.xi, p.eta));
  Matrix sx = detail::d1([&](double d) { return at(p.xi + d, p.eta); }, h);
  Matrix se = detail::d1([&](double d) { return at(p.xi, p.eta + d); }, h);
  return {sinv * sx, sinv * se};
}

/// s^{-1} s_x and s^{-1} s_t.
inline LeftDerivatives left_derivatives_xt(const WaveMap& s, double x, double t, double h = 1e-3) {
  Matrix sinv = mat_inv(s.eval(x, t));
  Matrix sx = detail::d1([&](double d) { return s.eval(x + d, t); }, h);
  Matrix st = detail::d1([&](double d) { return s.eval(x, t + d); }, h);
  return {sinv * sx, sinv * st};
}

inline double wavemap_residual(const WaveMap& s, double x, double t, double step = kDefaultStep, int order = 2) {
  detail::check_stencil(step, order);
  return detail::guarded([&] {
    const CharPoint p = CharPoint::from_xt(x, t);
    auto at = [&](double xi, double eta) { return s.eval(xi + eta, xi - eta); };
    auto D = [&](auto&& f) { return detail::central(f, step, order); };
    auto P = [&](double xi, double eta) {
      return Matrix(mat_inv(at(xi, eta)) * D([&](double d) { return at(xi + d, eta); }));
    };
    auto Q = [&](double xi, double eta) {
      return Matrix(mat_inv(at(xi, eta)) * D([&](double d) { return at(xi, eta + d); }));
    };
    Matrix r = D([&](double d) { return P(p.xi, p.eta + d); }) + D([&](double d) { return Q(p.xi + d, p.eta); });
    detail::require_finite(r, "wave map residual");
    return fro(r);
  });
}

struct EnergyReport {
  double potential = 0.0;  // integral of |s^{-1}s_x|^2
  double kinetic = 0.0;    // integral of |s^{-1}s_t|^2
  double total() const { return potential + kinetic; }
};

/// Composite Simpson with |y|^2 = -tr(y^2).
inline EnergyReport energy(const WaveMap& s, double t, double x0, double x1, int n_samples = 256) {
  if (n_samples < 64) throw PreconditionViolation("n_samples must be >= 64");
  const int n = n_samples % 2 ? n_samples + 1 : n_samples;
  const double h = (x1 - x0) / n;
  std::vector<double> pot(n + 1), kin(n + 1);
  parallel_for(static_cast<std::size_t>(n + 1), [&](std::size_t i) {
    auto d = left_derivatives_xt(s, x0 + h * static_cast<double>(i), t);
    pot[i] = pairing(d.xi, d.xi);
    kin[i] = pairing(d.eta, d.eta);
  });
  EnergyReport r;
  for (int i = 0; i <= n; ++i) {
    double wgt = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    r.potential += wgt * pot[i];
    r.kinetic += wgt * kin[i];
  }
  r.potential *= h / 3.0;
  r.kinetic *= h / 3.0;
  return r;
}

inline double group_drift(const Matrix& s, TargetClass target) {
  const int n = static_cast<int>(s.rows());
  if (detail::compact(target)) return std::max((s.adjoint() * s - identity(n)).norm(), std::abs(s.determinant() - 1.0));
  return std::max(s.imag().norm(), std::abs(s.determinant() - 1.0));
}

/// Uniform characteristic rectangle; 0 must be a node in both directions.
struct CharGrid {
  double xi0 = -1, xi1 = 1;
  int n_xi = 101;
  double eta0 = -1, eta1 = 1;
  int n_eta = 101;

  double h_xi() const { return (xi1 - xi0) / (n_xi - 1); }
  double h_eta() const { return (eta1 - eta0) / (n_eta - 1); }
  double xi(int i) const { return xi0 + i * h_xi(); }
  double eta(int j) const { return eta0 + j * h_eta(); }
};

/// Fields of the converse construction on the 2x refined grid of a CharGrid.
struct GriddedFlow {
  CharGrid grid;   // the coarse grid requested by the caller
  CharGrid fine;   // refined grid; coarse node (i,j) is fine node (2i,2j)
  std::vector<Matrix> a;  // per fine xi, already the returned first component (-a)
  std::vector<Matrix> u, v, psi;  // fine nodes, index i * fine.n_eta + j
  std::vector<bool> edge;         // one-sided psi_xi used
  int dim = 2;

  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * fine.n_eta + j; }
};

namespace detail {

inline int origin_index(double lo, double h, int n, const char* what) {
  double r = -lo / h;
  int i = static_cast<int>(std::lround(r));
  if (std::abs(r - i) > 1e-9 || i < 0 || i >= n) throw PreconditionViolation(std::string("0 is not a node in ") + what);
  return i;
}

template <class F>
Matrix rk4_step(const Matrix& y, double h, F&& f) {
  Matrix k1 = f(0.0, y);
  Matrix k2 = f(h / 2, y + h / 2 * k1);
  Matrix k3 = f(h / 2, y + h / 2 * k2);
  Matrix k4 = f(h, y + h * k3);
  return y + h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// fourth-order first derivative on a uniform array, one-sided near the ends
inline Matrix diff_array(const std::vector<Matrix>& f, int i, double h, bool& one_sided) {
  const int n = static_cast<int>(f.size());
  one_sided = false;
  if (i >= 2 && i + 2 < n) return (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12 * h);
  one_sided = true;
  if (i < 2) return (-25.0 * f[i] + 48.0 * f[i + 1] - 36.0 * f[i + 2] + 16.0 * f[i + 3] - 3.0 * f[i + 4]) / (12 * h);
  return (25.0 * f[i] - 48.0 * f[i - 1] + 36.0 * f[i - 2] - 16.0 * f[i - 3] + 3.0 * f[i - 4]) / (12 * h);
}

}  // namespace detail

inline GriddedFlow from_wavemap(const WaveMap& s, const CharGrid& grid) {
  if (grid.n_xi < 5 || grid.n_eta < 5) throw PreconditionViolation("grid too small");
  if (group_drift(s.eval(0, 0), s.target_class) > 1e-6 || (s.eval(0, 0) - identity(s.dim)).norm() > 1e-10)
    throw PreconditionViolation("s(0,0) must be I");
  GriddedFlow g;
  g.grid = grid;
  g.fine = grid;
  g.fine.n_xi = 2 * grid.n_xi - 1;
  g.fine.n_eta = 2 * grid.n_eta - 1;
  g.dim = s.dim;
  const CharGrid& F = g.fine;
  const int nx = F.n_xi, ne = F.n_eta, n = s.dim;
  detail::origin_index(grid.xi0, grid.h_xi(), grid.n_xi, "xi");
  const int j0 = 2 * detail::origin_index(grid.eta0, grid.h_eta(), grid.n_eta, "eta");
  const double he = F.h_eta();
  const double fd = 1e-3;

  auto at = [&](double xi, double eta) {
    Matrix m = s.eval(xi + eta, xi - eta);
    if (group_drift(m, s.target_class) > 1e-6) throw OffGroupInput("wave map leaves the group");
    return m;
  };
  auto Q = [&](double xi, double eta) {
    return Matrix(mat_inv(at(xi, eta)) * detail::d1([&](double d) { return at(xi, eta + d); }, fd));
  };

  g.a.assign(nx, Matrix());
  g.u.assign(static_cast<std::size_t>(nx) * ne, Matrix());
  g.v = g.u;
  g.psi = g.u;
  g.edge.assign(static_cast<std::size_t>(nx) * ne, false);
  std::vector<Matrix> aconv(nx);

  parallel_for(static_cast<std::size_t>(nx), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    const double xi = F.xi(i);
    aconv[i] = 0.5 * mat_inv(at(xi, 0.0)) * detail::d1([&](double d) { return at(xi + d, 0.0); }, fd);
    auto rhs = [&](double eta0) {
      return [&, eta0](double off, const Matrix& psi) { return Matrix(0.5 * psi * Q(xi, eta0 + off)); };
    };
    g.psi[g.idx(i, j0)] = identity(n);
    for (int j = j0; j + 1 < ne; ++j) g.psi[g.idx(i, j + 1)] = detail::rk4_step(g.psi[g.idx(i, j)], he, rhs(F.eta(j)));
    for (int j = j0; j > 0; --j) g.psi[g.idx(i, j - 1)] = detail::rk4_step(g.psi[g.idx(i, j)], -he, rhs(F.eta(j)));
    for (int j = 0; j < ne; ++j) {
      const Matrix& psi = g.psi[g.idx(i, j)];
      g.v[g.idx(i, j)] = -0.5 * psi * Q(xi, F.eta(j)) * mat_inv(psi);
    }
  });

  parallel_for(static_cast<std::size_t>(ne), [&](std::size_t jj) {
    const int j = static_cast<int>(jj);
    std::vector<Matrix> line(nx);
    for (int i = 0; i < nx; ++i) line[i] = g.psi[g.idx(i, j)];
    for (int i = 0; i < nx; ++i) {
      bool one_sided = false;
      Matrix psi_xi = detail::diff_array(line, i, F.h_xi(), one_sided);
      g.u[g.idx(i, j)] = aconv[i] - psi_xi * mat_inv(line[i]);
      g.edge[g.idx(i, j)] = one_sided;
    }
  });
  for (int i = 0; i < nx; ++i) g.a[i] = -aconv[i];
  return g;
}

/// s = Phi(-1) Phi(1)^{-1} on the coarse nodes, Phi integrated by RK4 from the gridded fields.
inline std::vector<Matrix> gridded_wavemap(const GriddedFlow& g) {
  const CharGrid& C = g.grid;
  const int n = g.dim;
  const int i0 = detail::origin_index(C.xi0, C.h_xi(), C.n_xi, "xi");
  const int j0 = detail::origin_index(C.eta0, C.h_eta(), C.n_eta, "eta");
  auto field = [&](const std::vector<Matrix>& f, int fi, int fj) -> const Matrix& { return f[g.idx(fi, fj)]; };

  auto trivialize = [&](double lambda) {
    std::vector<Matrix> phi(static_cast<std::size_t>(C.n_xi) * C.n_eta);
    auto id = [&](int i, int j) { return static_cast<std::size_t>(i) * C.n_eta + j; };
    // along eta = 0 in xi: Phi_xi = Phi (a lambda + u); fine node offsets give the RK4 midpoints
    auto A = [&](int fi) { return Matrix(g.a[fi] * lambda + field(g.u, fi, 2 * j0)); };
    auto step_xi = [&](const Matrix& y, int fi_from, int dir) {
      const double h = dir * C.h_xi();
      Matrix k1 = y * A(fi_from);
      Matrix k2 = (y + h / 2 * k1) * A(fi_from + dir);
      Matrix k3 = (y + h / 2 * k2) * A(fi_from + dir);
      Matrix k4 = (y + h * k3) * A(fi_from + 2 * dir);
      return Matrix(y + h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    };
    phi[id(i0, j0)] = identity(n);
    for (int i = i0; i + 1 < C.n_xi; ++i) phi[id(i + 1, j0)] = step_xi(phi[id(i, j0)], 2 * i, 1);
    for (int i = i0; i > 0; --i) phi[id(i - 1, j0)] = step_xi(phi[id(i, j0)], 2 * i, -1);
    parallel_for(static_cast<std::size_t>(C.n_xi), [&](std::size_t ii) {
      const int i = static_cast<int>(ii);
      auto B = [&](int fj) { return Matrix(field(g.v, 2 * i, fj) / lambda); };
      auto step_eta = [&](const Matrix& y, int fj_from, int dir) {
        const double h = dir * C.h_eta();
        Matrix k1 = y * B(fj_from);
        Matrix k2 = (y + h / 2 * k1) * B(fj_from + dir);
        Matrix k3 = (y + h / 2 * k2) * B(fj_from + dir);
        Matrix k4 = (y + h * k3) * B(fj_from + 2 * dir);
        return Matrix(y + h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
      };
      for (int j = j0; j + 1 < C.n_eta; ++j) phi[id(i, j + 1)] = step_eta(phi[id(i, j)], 2 * j, 1);
      for (int j = j0; j > 0; --j) phi[id(i, j - 1)] = step_eta(phi[id(i, j)], 2 * j, -1);
    });
    return phi;
  };
  auto pm = trivialize(-1.0);
  auto pp = trivialize(1.0);
  std::vector<Matrix> s(pm.size());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = pm[k] * mat_inv(pp[k]);
  return s;
}

/// Max fourth-order flow residual of the gridded fields over interior fine nodes.
inline double gridded_flow_residual(const GriddedFlow& g, int margin = 4) {
  const CharGrid& F = g.fine;
  double worst = 0.0;
  for (int i = margin; i < F.n_xi - margin; ++i)
    for (int j = margin; j < F.n_eta - margin; ++j) {
      auto U = [&](int dj) { return g.u[g.idx(i, j + dj)]; };
      auto V = [&](int di) { return g.v[g.idx(i + di, j)]; };
      Matrix u_eta = (U(-2) - 8.0 * U(-1) + 8.0 * U(1) - U(2)) / (12 * F.h_eta());
      Matrix v_xi = (V(-2) - 8.0 * V(-1) + 8.0 * V(1) - V(2)) / (12 * F.h_xi());
      const Matrix& a = g.a[i];
      const Matrix& u = g.u[g.idx(i, j)];
      const Matrix& v = g.v[g.idx(i, j)];
      worst = std::max({worst, fro(u_eta - commutator(a, v)), fro(v_xi + commutator(u, v))});
    }
  return worst;
}

enum class Boundary { Periodic, ConstantAtInfinity };

struct CauchyData {
  double x0 = 0.0;
  double dx = 0.0;
  std::vector<Matrix> s0;
  std::vector<Matrix> w0;
  Boundary boundary = Boundary::Periodic;
  TargetClass target_class = TargetClass::SU;

  int size() const { return static_cast<int>(s0.size()); }
  double x(int i) const { return x0 + i * dx; }
};

/// Samples s and s^{-1}s_t at time t; for periodic data the grid covers [x0, x1) with period x1 - x0.
inline CauchyData cauchy_data_from(const WaveMap& s, double x0, double x1, int nx, Boundary boundary, double t = 0.0) {
  CauchyData d;
  d.x0 = x0;
  d.boundary = boundary;
  d.target_class = s.target_class;
  d.dx = boundary == Boundary::Periodic ? (x1 - x0) / nx : (x1 - x0) / (nx - 1);
  d.s0.resize(nx);
  d.w0.resize(nx);
  parallel_for(static_cast<std::size_t>(nx), [&](std::size_t i) {
    const double x = d.x(static_cast<int>(i));
    d.s0[i] = s.eval(x, t);
    d.w0[i] = left_derivatives_xt(s, x, t).eta;
  });
  return d;
}

struct CauchyResult {
  double x0 = 0.0, dx = 0.0;
  std::vector<double> times;
  std::vector<std::vector<Matrix>> snapshots;
  double max_drift = 0.0;  // largest pre-projection distance from the group
  std::vector<Matrix> w_final;
};

namespace detail {

inline bool project_group(Matrix& s, TargetClass target) {
  const int n = static_cast<int>(s.rows());
  if (!s.allFinite()) return false;
  if (compact(target)) {
    Eigen::JacobiSVD<Matrix> svd(s, Eigen::ComputeFullU | Eigen::ComputeFullV);
    s = svd.matrixU() * svd.matrixV().adjoint();
    cplx det = s.determinant();
    s *= std::polar(1.0, -std::arg(det) / n);
    return true;
  }
  s = s.real().cast<cplx>();
  double det = s.determinant().real();
  if (!(det > 0.0)) return false;
  s /= std::pow(det, 1.0 / n);
  return true;
}

inline void project_algebra(Matrix& w, TargetClass target) {
  const int n = static_cast<int>(w.rows());
  if (compact(target)) w = 0.5 * (w - w.adjoint());
  else w = w.real().cast<cplx>();
  w -= (w.trace() / static_cast<double>(n)) * identity(n);
}

}  // namespace detail

/// RK4 in t for s_t = s w, w_t = (s^{-1}s_x)_x, fourth-order central differences in x.
inline CauchyResult integrate_cauchy(const CauchyData& data, double t_final, double dt, int snapshot_every = 0) {
  if (dt > 0.5 * data.dx) throw CFLViolation("dt exceeds 0.5 dx");
  const int nx = data.size();
  if (nx < 8) throw PreconditionViolation("grid too small");
  const double dx = data.dx;
  const bool periodic = data.boundary == Boundary::Periodic;
  const TargetClass tc = data.target_class;
  using State = std::vector<Matrix>;

  auto at = [&](const State& s, int i) -> const Matrix& {
    if (periodic) return s[((i % nx) + nx) % nx];
    return s[std::clamp(i, 0, nx - 1)];
  };
  auto frozen = [&](int i) { return !periodic && (i < 2 || i >= nx - 2); };
  auto rhs = [&](const State& s, const State& w, State& ds, State& dw) {
    const int n = static_cast<int>(s[0].rows());
    for (int i = 0; i < nx; ++i) {
      if (frozen(i)) {
        ds[i] = Matrix::Zero(n, n);
        dw[i] = Matrix::Zero(n, n);
        continue;
      }
      const Matrix& sm2 = at(s, i - 2);
      const Matrix& sm1 = at(s, i - 1);
      const Matrix& sp1 = at(s, i + 1);
      const Matrix& sp2 = at(s, i + 2);
      Matrix sx = (sm2 - 8.0 * sm1 + 8.0 * sp1 - sp2) / (12 * dx);
      Matrix sxx = (-sm2 + 16.0 * sm1 - 30.0 * s[i] + 16.0 * sp1 - sp2) / (12 * dx * dx);
      Matrix sinv = s[i].inverse();
      Matrix p = sinv * sx;
      ds[i] = s[i] * w[i];
      dw[i] = sinv * sxx - p * p;
    }
  };

  State s = data.s0, w = data.w0;
  const int n = static_cast<int>(s[0].rows());
  State k1s(nx), k1w(nx), k2s(nx), k2w(nx), k3s(nx), k3w(nx), k4s(nx), k4w(nx), ts(nx), tw(nx);
  CauchyResult res;
  res.x0 = data.x0;
  res.dx = dx;
  res.times.push_back(0.0);
  res.snapshots.push_back(s);
  const int steps = static_cast<int>(std::ceil(t_final / dt - 1e-9));
  const double h = t_final / steps;
  for (int step = 1; step <= steps; ++step) {
    const double t = step * h;
    rhs(s, w, k1s, k1w);
    for (int i = 0; i < nx; ++i) { ts[i] = s[i] + h / 2 * k1s[i]; tw[i] = w[i] + h / 2 * k1w[i]; }
    rhs(ts, tw, k2s, k2w);
    for (int i = 0; i < nx; ++i) { ts[i] = s[i] + h / 2 * k2s[i]; tw[i] = w[i] + h / 2 * k2w[i]; }
    rhs(ts, tw, k3s, k3w);
    for (int i = 0; i < nx; ++i) { ts[i] = s[i] + h * k3s[i]; tw[i] = w[i] + h * k3w[i]; }
    rhs(ts, tw, k4s, k4w);
    double wmax = 0.0;
    for (int i = 0; i < nx; ++i) {
      s[i] += h / 6 * (k1s[i] + 2.0 * k2s[i] + 2.0 * k3s[i] + k4s[i]);
      w[i] += h / 6 * (k1w[i] + 2.0 * k2w[i] + 2.0 * k3w[i] + k4w[i]);
      if (s[i].allFinite()) res.max_drift = std::max(res.max_drift, group_drift(s[i], tc));
      if (!detail::project_group(s[i], tc)) throw BlowupDetected(t);
      detail::project_algebra(w[i], tc);
      double nw = w[i].norm();
      if (!std::isfinite(nw)) throw BlowupDetected(t);
      wmax = std::max(wmax, nw);
    }
    if (wmax > 1e6) throw BlowupDetected(t);
    if (snapshot_every > 0 && (step % snapshot_every == 0 || step == steps)) {
      res.times.push_back(t);
      res.snapshots.push_back(s);
    }
  }
  if (snapshot_every <= 0) {
    res.times.push_back(steps * h);
    res.snapshots.push_back(s);
  }
  res.w_final = w;
  (void)n;
  return res;
}

}  // namespace solitonforge
