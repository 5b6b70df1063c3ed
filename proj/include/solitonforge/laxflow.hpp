#pragma once

#include <array>
#include <functional>
#include <memory>
#include <set>
#include <vector>

#include "matcore.hpp"

namespace solitonforge {

enum class GroupClass { SU, SLR, SLC };

/// Reality/involution conditions a solution has been verified to satisfy.
enum class SymmetryTag { Unitary, S2, CPn, Sn };

struct CharPoint {
  double xi = 0.0;
  double eta = 0.0;

  double x() const { return xi + eta; }
  double t() const { return xi - eta; }
  static CharPoint from_xt(double x, double t) { return {(x + t) / 2.0, (x - t) / 2.0}; }
};

/// Constants recorded by k_soliton; b = (g_k...g_1)(-1), c = (g_k...g_1)(1).
struct SolitonRecord {
  ConjugatedDiagonal a;
  double m = 0.0;  // a = diag(im, -im) when the vacuum has this form, else 0
  std::vector<cplx> z;
  std::vector<HermitianProjection> pi;
  Matrix b, c;
};

struct FlowSolution {
  GroupClass group_class = GroupClass::SU;
  int dim = 2;
  std::function<Matrix(double)> a_eval;
  std::function<Matrix(double, double)> u_eval;
  std::function<Matrix(double, double)> v_eval;
  std::function<Matrix(double, double, cplx)> triv;
  std::vector<cplx> pole_set;
  std::set<SymmetryTag> symmetry_tags;
  std::shared_ptr<const SolitonRecord> soliton;

  Matrix a(const CharPoint& p) const { return a_eval(p.xi); }
  Matrix u(const CharPoint& p) const { return u_eval(p.xi, p.eta); }
  Matrix v(const CharPoint& p) const { return v_eval(p.xi, p.eta); }
  Matrix E(const CharPoint& p, cplx lambda) const { return triv(p.xi, p.eta, lambda); }

  bool near_pole(cplx lambda, double tol = 1e-6) const {
    for (cplx p : pole_set)
      if (std::abs(lambda - p) < tol) return true;
    return false;
  }
};

inline const std::vector<cplx>& default_lambda_samples() {
  static const std::vector<cplx> s{-2.0, -1.0, -0.5, cplx(0.0, 0.5), cplx(1.0, 1.0), 3.0};
  return s;
}

inline constexpr double kDefaultStep = 1e-3;

inline FlowSolution vacuum_solution(const ConjugatedDiagonal& a, GroupClass group = GroupClass::SU) {
  const Matrix am = a.matrix();
  if (group == GroupClass::SU && (am + am.adjoint()).norm() > 1e-12 * (1.0 + am.norm()))
    throw PreconditionViolation("vacuum of SU class needs skew-Hermitian a");
  FlowSolution s;
  s.group_class = group;
  s.dim = a.dim();
  const int n = a.dim();
  s.a_eval = [am](double) { return am; };
  s.u_eval = [n](double, double) { return Matrix(Matrix::Zero(n, n)); };
  s.v_eval = [am](double, double) { return am; };
  s.triv = [a](double xi, double eta, cplx lambda) {
    if (lambda == 0.0) throw PoleHit("lambda = 0");
    return mat_exp(a, lambda * xi + eta / lambda);
  };
  if (group == GroupClass::SU) s.symmetry_tags.insert(SymmetryTag::Unitary);
  return s;
}

/// A scalar function with its derivative, as (f, f').
struct Smooth {
  std::function<double(double)> f;
  std::function<double(double)> df;

  static Smooth zero() {
    return {[](double) { return 0.0; }, [](double) { return 0.0; }};
  }
};

namespace detail {

// Shared by the circle (SU) and R+ (SL) bases: a = h' d, v = k' d, with d = diag(1,-1) scaled by unit.
inline FlowSolution diagonal_base(const Smooth& h, const Smooth& k, cplx unit, GroupClass group) {
  FlowSolution s;
  s.group_class = group;
  s.dim = 2;
  const double h0 = h.f(0.0), k0 = k.f(0.0);
  s.a_eval = [h, unit](double xi) { return diag({unit * h.df(xi), -unit * h.df(xi)}); };
  s.u_eval = [](double, double) { return Matrix(Matrix::Zero(2, 2)); };
  s.v_eval = [k, unit](double, double eta) { return diag({unit * k.df(eta), -unit * k.df(eta)}); };
  s.triv = [h, k, unit, h0, k0](double xi, double eta, cplx lambda) {
    if (lambda == 0.0) throw PoleHit("lambda = 0");
    cplx e = unit * ((h.f(xi) - h0) * lambda + (k.f(eta) - k0) / lambda);
    return diag({std::exp(e), std::exp(-e)});
  };
  return s;
}

}  // namespace detail

/// Great-circle base (a(xi), 0, v(eta)); trivialization normalized so that E(0,0,.) = I.
inline FlowSolution circle_solution(const Smooth& h, const Smooth& k) {
  FlowSolution s = detail::diagonal_base(h, k, kI, GroupClass::SU);
  s.symmetry_tags.insert(SymmetryTag::Unitary);
  return s;
}

/// Diagonal SL(2,R) base with E = diag(e^{h lambda + k/lambda}, inverse), normalized at the origin.
inline FlowSolution rplus_solution(const Smooth& h, const Smooth& k) {
  return detail::diagonal_base(h, k, 1.0, GroupClass::SLR);
}

namespace detail {

template <class F>
Matrix central(F&& f, double step) {
  return (f(step) - f(-step)) / (2.0 * step);
}

// order 4 is the Richardson combination of the central difference at step and step/2
template <class F>
Matrix central(F&& f, double step, int order) {
  if (order == 2) return central(f, step);
  if (order != 4) throw PreconditionViolation("difference order must be 2 or 4");
  const double h = step / 2.0;
  return (f(-2 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2 * h)) / (12.0 * h);
}

inline void check_stencil(double step, int order) {
  if (!(step > 0.0)) throw PreconditionViolation("step must be positive");
  if (order != 2 && order != 4) throw PreconditionViolation("difference order must be 2 or 4");
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw EvaluationFailure(std::string("non-finite value in ") + what);
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const EvaluationFailure&) {
    throw;
  } catch (const Error& e) {
    throw EvaluationFailure(e.what());
  }
}

}  // namespace detail

struct FlowResidual {
  double a_eta = 0.0;
  double u_eq = 0.0;
  double v_eq = 0.0;

  double max() const { return std::max({a_eta, u_eq, v_eq}); }
};

inline FlowResidual flow_residual(const FlowSolution& sol, const CharPoint& p, double step = kDefaultStep,
                                  int order = 2) {
  detail::check_stencil(step, order);
  return detail::guarded([&] {
    const double xi = p.xi, eta = p.eta;
    Matrix a = sol.a_eval(xi);
    Matrix u = sol.u_eval(xi, eta);
    Matrix v = sol.v_eval(xi, eta);
    // a is a function of xi alone, so its eta difference is identically zero
    Matrix a_eta = detail::central([&](double) { return sol.a_eval(xi); }, step, order);
    Matrix u_eta = detail::central([&](double h) { return sol.u_eval(xi, eta + h); }, step, order);
    Matrix v_xi = detail::central([&](double h) { return sol.v_eval(xi + h, eta); }, step, order);
    Matrix r1 = u_eta - commutator(a, v);
    Matrix r2 = v_xi + commutator(u, v);
    detail::require_finite(r1, "flow residual");
    detail::require_finite(r2, "flow residual");
    return FlowResidual{fro(a_eta), fro(r1), fro(r2)};
  });
}

inline void check_lambda(const FlowSolution& sol, cplx lambda) {
  if (lambda == 0.0) throw PreconditionViolation("lambda = 0: Lax pair undefined");
  if (sol.near_pole(lambda)) throw PreconditionViolation("lambda within 1e-6 of a pole");
}

inline double lax_flatness_residual(const FlowSolution& sol, const CharPoint& p, cplx lambda,
                                    double step = kDefaultStep, int order = 2) {
  detail::check_stencil(step, order);
  check_lambda(sol, lambda);
  return detail::guarded([&] {
    const double xi = p.xi, eta = p.eta;
    auto A = [&](double x, double e) -> Matrix { return sol.a_eval(x) * lambda + sol.u_eval(x, e); };
    auto B = [&](double x, double e) -> Matrix { return sol.v_eval(x, e) / lambda; };
    Matrix A_eta = detail::central([&](double h) { return A(xi, eta + h); }, step, order);
    Matrix B_xi = detail::central([&](double h) { return B(xi + h, eta); }, step, order);
    Matrix r = A_eta - B_xi - commutator(A(xi, eta), B(xi, eta));
    detail::require_finite(r, "flatness residual");
    return fro(r);
  });
}

inline std::array<double, 2> triv_ode_check(const FlowSolution& sol, const CharPoint& p, cplx lambda,
                                            double step = kDefaultStep, int order = 2) {
  detail::check_stencil(step, order);
  check_lambda(sol, lambda);
  return detail::guarded([&] {
    const double xi = p.xi, eta = p.eta;
    Matrix Einv = mat_inv(sol.triv(xi, eta, lambda));
    Matrix E_xi = detail::central([&](double h) { return sol.triv(xi + h, eta, lambda); }, step, order);
    Matrix E_eta = detail::central([&](double h) { return sol.triv(xi, eta + h, lambda); }, step, order);
    Matrix r1 = Einv * E_xi - (sol.a_eval(xi) * lambda + sol.u_eval(xi, eta));
    Matrix r2 = Einv * E_eta - sol.v_eval(xi, eta) / lambda;
    detail::require_finite(r1, "trivialization check");
    detail::require_finite(r2, "trivialization check");
    return std::array<double, 2>{fro(r1), fro(r2)};
  });
}

}  // namespace solitonforge
