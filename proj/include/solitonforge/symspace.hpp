#pragma once

#include <numbers>

#include "wavemaps.hpp"

namespace solitonforge {

struct Involution {
  enum class Kind { Star, Transpose, Conj, AdJ };
  Kind kind = Kind::Transpose;
  Matrix J;  // used by AdJ

  Matrix operator()(const Matrix& g) const {
    switch (kind) {
      case Kind::Star: return mat_inv(g.adjoint());
      case Kind::Transpose: return mat_inv(g.transpose());
      case Kind::Conj: return g.conjugate();
      case Kind::AdJ: return J * g * mat_inv(J);
    }
    return g;
  }

  static Involution ad(const Matrix& J) { return {Kind::AdJ, J}; }
};

/// diag(1, ..., 1, -1)
inline Matrix reflection_J(int n) {
  Matrix J = identity(n);
  J(n - 1, n - 1) = -1.0;
  return J;
}

struct RealityReport {
  std::optional<double> unitary_reality;
  std::optional<double> s2_reality;
  std::optional<double> cpn_reality;
  std::optional<double> sn_reality;

  double worst() const {
    double w = 0.0;
    for (auto& r : {unitary_reality, s2_reality, cpn_reality, sn_reality})
      if (r) w = std::max(w, *r);
    return w;
  }
  bool pass(double tol = 1e-9) const { return worst() <= tol; }
};

struct RealitySamples {
  std::vector<CharPoint> points{{0.0, 0.0}, {0.3, -0.2}, {-0.7, 0.4}, {1.1, 0.9}};
  std::vector<cplx> lambdas{0.7, -0.7, cplx(0, 1.3), cplx(0, -1.3), cplx(0.4, 0.4), 2.0, cplx(1.0, 1.0)};
};

namespace detail {

// maximum deviation of the identities for one lambda-family F
template <class F>
RealityReport reality_of(F&& E, SymmetryClass cls, int n, const std::vector<cplx>& lambdas) {
  RealityReport r;
  const Matrix I = identity(n);
  const Matrix J = reflection_J(n);
  double unitary = 0, s2 = 0, cpn = 0, sn = 0;
  for (cplx l : lambdas) {
    Matrix e = E(l);
    unitary = std::max(unitary, (E(std::conj(l)).adjoint() * e - I).norm());
    if (cls == SymmetryClass::S2) s2 = std::max(s2, (e * E(-l).transpose() - I).norm());
    if (cls == SymmetryClass::CPn) cpn = std::max(cpn, (E(-l) - J * e * J).norm());
    if (cls == SymmetryClass::Sn)
      sn = std::max({sn, (E(std::conj(l)).conjugate() - e).norm(), (E(-l) - J * e * J).norm()});
  }
  r.unitary_reality = unitary;
  if (cls == SymmetryClass::S2) r.s2_reality = s2;
  if (cls == SymmetryClass::CPn) r.cpn_reality = cpn;
  if (cls == SymmetryClass::Sn) r.sn_reality = sn;
  return r;
}

inline void merge(RealityReport& into, const RealityReport& r) {
  auto mx = [](std::optional<double>& a, const std::optional<double>& b) {
    if (b) a = std::max(a.value_or(0.0), *b);
  };
  mx(into.unitary_reality, r.unitary_reality);
  mx(into.s2_reality, r.s2_reality);
  mx(into.cpn_reality, r.cpn_reality);
  mx(into.sn_reality, r.sn_reality);
}

inline SymmetryTag tag_of(SymmetryClass c) {
  switch (c) {
    case SymmetryClass::S2: return SymmetryTag::S2;
    case SymmetryClass::CPn: return SymmetryTag::CPn;
    case SymmetryClass::Sn: return SymmetryTag::Sn;
    default: return SymmetryTag::Unitary;
  }
}

}  // namespace detail

/// S^{n-1} condition is checked as conj(E(conj l)) = E(l), the tau-reality for tau(g) = conj(g).
inline RealityReport check_reality(const FlowSolution& sol, SymmetryClass cls, const RealitySamples& samples = {}) {
  RealityReport rep;
  for (const auto& p : samples.points) {
    std::vector<cplx> ls;
    for (cplx l : samples.lambdas)
      if (!sol.near_pole(l) && !sol.near_pole(std::conj(l)) && !sol.near_pole(-l)) ls.push_back(l);
    detail::merge(rep, detail::reality_of([&](cplx l) { return sol.triv(p.xi, p.eta, l); }, cls, sol.dim, ls));
  }
  return rep;
}

inline RealityReport check_reality(const DressingFactor& h, SymmetryClass cls, const std::vector<cplx>& lambdas) {
  return detail::reality_of([&](cplx l) { return h.eval(l); }, cls, h.factors.front().pi.dim(), lambdas);
}

/// Copy of sol carrying the class tag when its reality check passes.
inline FlowSolution tag_if_real(FlowSolution sol, SymmetryClass cls, const RealitySamples& samples = {},
                                double tol = 1e-9) {
  if (check_reality(sol, cls, samples).pass(tol)) sol.symmetry_tags.insert(detail::tag_of(cls));
  return sol;
}

inline bool is_real(const Matrix& m, double tol = 1e-12) { return m.imag().norm() <= tol; }

/// Dressing that stays in the S^2 reality class: one step for z = i mu, else g_{z,pi} . (g_{-conj z,pi} . sol).
inline FlowSolution dress_s2(const FlowSolution& sol, cplx z, const HermitianProjection& pi) {
  if (!sol.symmetry_tags.count(SymmetryTag::S2)) throw PreconditionViolation("solution is not S2-tagged");
  if (!is_real(pi.matrix)) throw PreconditionViolation("S2 dressing needs a real projection");
  FlowSolution out = std::abs(z.real()) < 1e-14 ? dress(sol, z, pi) : dress(dress(sol, -std::conj(z), pi), z, pi);
  out.symmetry_tags.insert(SymmetryTag::S2);
  out.symmetry_tags.insert(SymmetryTag::Unitary);
  return out;
}

// ---- sine-Gordon bridge --------------------------------------------------

/// Angle field q(x,t); q_xi is optional and otherwise taken by finite differences.
struct SgeField {
  std::function<double(double, double)> q_eval;
  std::function<double(double, double)> q_xi;  // derivative along xi = (x+t)/2, may be empty
  double anchor_step = 0.02;                   // sample spacing used for branch continuation

  double operator()(double x, double t) const { return q_eval(x, t); }
};

namespace detail {

inline Matrix sge_v(double q, double alpha) {
  Matrix v(2, 2);
  v << std::cos(q), std::sin(q), std::sin(q), -std::cos(q);
  return (-kI / (4.0 * alpha)) * v;
}

inline double wrap(double d) { return std::remainder(d, 2.0 * std::numbers::pi); }

}  // namespace detail

/// (a,u,v) with a = diag(i alpha, -i alpha), u = (q_xi/2)[[0,1],[-1,0]], v = -(i/(4 alpha))[[cos q, sin q],[sin q, -cos q]].
/// These solve the flow iff q_{xi eta} = sin q; alpha = 1 is the standard embedding.
inline FlowSolution sge_to_flow(const SgeField& q, double alpha = 1.0) {
  FlowSolution s;
  s.group_class = GroupClass::SU;
  s.dim = 2;
  const Matrix a = diag({cplx(0, alpha), cplx(0, -alpha)});
  auto qxi = [q](double xi, double eta) {
    if (q.q_xi) return q.q_xi(xi + eta, xi - eta);
    auto f = [&](double d) { return q.q_eval(xi + d + eta, xi + d - eta); };
    const double h = 1e-3;
    return (f(-2 * h) - 8 * f(-h) + 8 * f(h) - f(2 * h)) / (12 * h);
  };
  s.a_eval = [a](double) { return a; };
  s.u_eval = [qxi](double xi, double eta) {
    Matrix u(2, 2);
    double w = qxi(xi, eta) / 2.0;
    u << 0.0, w, -w, 0.0;
    return u;
  };
  s.v_eval = [q, alpha](double xi, double eta) { return detail::sge_v(q.q_eval(xi + eta, xi - eta), alpha); };
  // trivialization by RK4 along (0,0) -> (xi,0) -> (xi,eta)
  auto u = s.u_eval;
  auto v = s.v_eval;
  s.triv = [a, u, v](double xi, double eta, cplx lambda) {
    if (lambda == 0.0) throw PoleHit("lambda = 0");
    Matrix E = identity(2);
    const int nxi = std::max(1, static_cast<int>(std::ceil(std::abs(xi) / 0.01)));
    const double hx = xi / nxi;
    for (int k = 0; k < nxi; ++k) {
      double x0 = k * hx;
      E = detail::rk4_step(E, hx, [&](double off, const Matrix& y) { return Matrix(y * (a * lambda + u(x0 + off, 0.0))); });
    }
    const int neta = std::max(1, static_cast<int>(std::ceil(std::abs(eta) / 0.01)));
    const double he = eta / neta;
    for (int k = 0; k < neta; ++k) {
      double e0 = k * he;
      E = detail::rk4_step(E, he, [&](double off, const Matrix& y) { return Matrix(y * v(xi, e0 + off) / lambda); });
    }
    return E;
  };
  s.symmetry_tags = {SymmetryTag::Unitary, SymmetryTag::S2};
  return s;
}

/// q = 0 with its closed-form trivialization exp(a lambda xi + v0 eta / lambda).
inline FlowSolution sge_vacuum(double alpha = 1.0) {
  SgeField zero{[](double, double) { return 0.0; }, [](double, double) { return 0.0; }};
  FlowSolution s = sge_to_flow(zero, alpha);
  s.triv = [alpha](double xi, double eta, cplx lambda) {
    if (lambda == 0.0) throw PoleHit("lambda = 0");
    cplx e = kI * (alpha * lambda * xi - eta / (4.0 * alpha * lambda));
    return diag({std::exp(e), std::exp(-e)});
  };
  return s;
}

/// Reads q from v via atan2, continued from (0,0) along t at x = 0, then along x.
inline SgeField sge_extract(const FlowSolution& sol) {
  const Matrix a = sol.a_eval(0.0);
  const double alpha = a(0, 0).imag();
  if (sol.dim != 2 || std::abs(a(0, 0).real()) > 1e-12 || std::abs(a(0, 0) + a(1, 1)) > 1e-12 || alpha == 0.0)
    throw ShapeMismatch("a is not diag(i alpha, -i alpha)");
  auto src = std::make_shared<const FlowSolution>(sol);
  auto raw = [src, alpha](double x, double t) {
    const CharPoint p = CharPoint::from_xt(x, t);
    Matrix v = src->v_eval(p.xi, p.eta) * (4.0 * alpha);
    // v = -i [[c, s],[s, -c]]
    double c = -v(0, 0).imag(), s = -v(0, 1).imag();
    double dev = std::abs(v(0, 0) + v(1, 1)) + std::abs(v(0, 1) - v(1, 0)) + std::abs(v(0, 0).real()) +
                 std::abs(v(0, 1).real()) + std::abs(c * c + s * s - 1.0);
    if (dev > 1e-8) throw ShapeMismatch("v is not of sine-Gordon form");
    return std::atan2(s, c);
  };
  SgeField f;
  f.q_eval = [raw](double x, double t) {
    const double step = 0.02;
    double q = raw(0.0, 0.0);
    double prev = q;
    auto walk = [&](auto point, double len) {
      const int n = static_cast<int>(std::ceil(std::abs(len) / step));
      for (int k = 1; k <= n; ++k) {
        double r = raw(point(len * k / n).first, point(len * k / n).second);
        q += detail::wrap(r - prev);
        prev = r;
      }
    };
    walk([](double s) { return std::pair{0.0, s}; }, t);
    walk([t](double s) { return std::pair{s, t}; }, x);
    return q;
  };
  return f;
}

/// |q_{xi eta} - sin q| with a central mixed difference in characteristic coordinates.
inline double sge_residual(const SgeField& q, double x, double t, double step = kDefaultStep) {
  const CharPoint p = CharPoint::from_xt(x, t);
  const double q0 = q(x, t);
  auto at = [&](double dxi, double deta) {
    double r = q(p.xi + dxi + p.eta + deta, p.xi + dxi - p.eta - deta);
    return q0 + detail::wrap(r - q0);
  };
  double mixed = (at(step, step) - at(step, -step) - at(-step, step) + at(-step, -step)) / (4 * step * step);
  return std::abs(mixed - std::sin(q0));
}

// ---- CP^{n-1} and S^{n-1} factors ---------------------------------------

inline DressingFactor cp_simple_element(cplx z, const Vector& w, cplx c) {
  if (std::abs(w.norm() - 1.0) > 1e-12 || std::abs(std::abs(c) - 1.0) > 1e-12)
    throw NormalizationError("need |w| = |c| = 1");
  if (z.imag() == 0.0) throw PreconditionViolation("Im z must be nonzero");
  const int n = static_cast<int>(w.size()) + 1;
  Vector q(n), qs(n);
  q << w, c;
  qs << w, -c;
  DressingFactor h;
  h.factors = {SimpleElement{z, herm_proj(q)}, SimpleElement{-z, herm_proj(qs)}};
  h.symmetry_class = SymmetryClass::CPn;
  return h;
}

inline DressingFactor sn_simple_element(cplx z, const Eigen::VectorXd& w, double b) {
  if (std::abs(w.norm() - 1.0) > 1e-12 || std::abs(std::abs(b) - 1.0) > 1e-12)
    throw NormalizationError("need |w| = |b| = 1");
  const double tol = 1e-9 * std::abs(z);
  if (std::abs(z.imag()) <= tol || std::abs(z.real()) <= tol)
    throw PoleCollision("z nearly real or imaginary: factors collide");
  const int n = static_cast<int>(w.size()) + 1;
  Vector q(n);
  q.head(n - 1) = w.cast<cplx>();
  q(n - 1) = kI * b;
  HermitianProjection pi = herm_proj(q);
  HermitianProjection pib = herm_proj(Vector(q.conjugate()));
  DressingFactor h;
  h.factors = {SimpleElement{z, pi}, SimpleElement{-z, pib}, SimpleElement{-std::conj(z), pi},
               SimpleElement{std::conj(z), pib}};
  h.symmetry_class = SymmetryClass::Sn;
  return h;
}

/// Dresses by a structured factor and tags the result with its class.
inline FlowSolution dress_symmetric(const FlowSolution& sol, const DressingFactor& h) {
  FlowSolution out = dress(sol, h);
  if (h.symmetry_class != SymmetryClass::None) out.symmetry_tags.insert(detail::tag_of(h.symmetry_class));
  return out;
}

inline Matrix cartan_project(const Matrix& g, const Involution& sigma) {
  const int n = static_cast<int>(g.rows());
  if ((g.adjoint() * g - identity(n)).norm() > 1e-10) throw OffGroupInput("g is not unitary");
  return g * mat_inv(sigma(g));
}

/// Unit vector attached to a wave map value, per target class.
inline Vector sphere_point(const WaveMap& s, TargetClass expected, double x, double t) {
  if (s.target_class != expected) throw ClassMismatch("wave map carries a different class tag");
  const Matrix y = s.eval(x, t);
  const int n = static_cast<int>(y.rows());
  switch (expected) {
    case TargetClass::SU: {
      if (s.source && s.source->soliton) {
        const auto& r = *s.source->soliton;
        return (mat_inv(r.b) * y * r.c).col(0);
      }
      return y.col(0);
    }
    case TargetClass::S2: {
      // symmetric SU(2) element [[p, i r],[i r, conj p]]
      return vec({y(0, 0).real(), y(0, 0).imag(), y(0, 1).imag()});
    }
    case TargetClass::CPn: {
      Vector col = y.col(n - 1);
      for (int i = 0; i < n; ++i)
        if (std::abs(col(i)) > 1e-12) {
          col *= std::polar(1.0, -std::arg(col(i)));
          break;
        }
      return col;
    }
    case TargetClass::Sn: return y.col(n - 1);
    default: throw ClassMismatch("no sphere point for this class");
  }
}

}  // namespace solitonforge
