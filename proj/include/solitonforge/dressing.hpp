#pragma once

#include <utility>

#include "laxflow.hpp"

namespace solitonforge {

namespace detail {

inline cplx pole_factor(cplx lambda, cplx zero, cplx pole) {
  if (std::abs(lambda - pole) <= 1e-14 * (1.0 + std::abs(pole))) throw PoleHit("evaluation at a pole");
  return (lambda - zero) / (lambda - pole);
}

/// pi + ((lambda - z)/(lambda - conj z)) pi_perp
inline Matrix simple(cplx z, const Matrix& pi, cplx lambda) {
  const int n = static_cast<int>(pi.rows());
  return pi + pole_factor(lambda, z, std::conj(z)) * (identity(n) - pi);
}

}  // namespace detail

struct SimpleElement {
  cplx z;
  HermitianProjection pi;

  SimpleElement inverse() const { return {std::conj(z), pi}; }
};

inline Matrix simple_element_eval(const SimpleElement& e, cplx lambda) {
  return detail::simple(e.z, e.pi.matrix, lambda);
}

struct SlSimpleElement {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  ObliqueProjection pi;
};

namespace detail {

inline Matrix sl_simple(double a1, double a2, const Matrix& pi, cplx lambda) {
  const int n = static_cast<int>(pi.rows());
  if (std::abs(lambda - a1) < 1e-14 * (1.0 + std::abs(a1))) throw PoleHit("evaluation at alpha1");
  return identity(n) + ((a1 - a2) / (lambda - a1)) * (identity(n) - pi);
}

inline Matrix sl_simple_inv(double a1, double a2, const Matrix& pi, cplx lambda) {
  const int n = static_cast<int>(pi.rows());
  if (std::abs(lambda - a2) < 1e-14 * (1.0 + std::abs(a2))) throw PoleHit("evaluation at alpha2");
  return identity(n) + ((a2 - a1) / (lambda - a2)) * (identity(n) - pi);
}

}  // namespace detail

inline Matrix sl_element_eval(const SlSimpleElement& e, cplx lambda) {
  return detail::sl_simple(e.alpha1, e.alpha2, e.pi.matrix, lambda);
}

inline Matrix sl_element_eval_inverse(const SlSimpleElement& e, cplx lambda) {
  return detail::sl_simple_inv(e.alpha1, e.alpha2, e.pi.matrix, lambda);
}

enum class SymmetryClass { None, S2, CPn, Sn };

struct DressingFactor {
  std::vector<SimpleElement> factors;  // evaluated as factors[0] * factors[1] * ...
  SymmetryClass symmetry_class = SymmetryClass::None;

  Matrix eval(cplx lambda) const {
    Matrix g = identity(factors.front().pi.dim());
    for (const auto& f : factors) g = g * simple_element_eval(f, lambda);
    return g;
  }
  std::vector<cplx> poles() const {
    std::vector<cplx> p;
    for (const auto& f : factors) p.push_back(std::conj(f.z));
    return p;
  }
};

namespace detail {

inline void check_dressable(const FlowSolution& sol, cplx z, bool repeated_poles) {
  if (z.imag() == 0.0) throw PreconditionViolation("Im z must be nonzero");
  if (sol.group_class != GroupClass::SU) throw PreconditionViolation("dress needs an SU(n)-class solution");
  if (repeated_poles) return;
  for (cplx p : sol.pole_set)
    if (std::abs(p - z) < 1e-9 || std::abs(p - std::conj(z)) < 1e-9)
      throw PoleCollision("dressing pole coincides with an existing pole");
}

/// Trivialization at lambda; at a recorded (removable) pole, the mean over a small circle.
inline Matrix triv_at(const FlowSolution& sol, double xi, double eta, cplx lambda) {
  double near = INFINITY;
  for (cplx p : sol.pole_set) near = std::min(near, std::abs(lambda - p));
  if (near > 1e-6) return sol.triv(xi, eta, lambda);
  double gap = std::abs(lambda);
  for (cplx p : sol.pole_set)
    if (std::abs(lambda - p) > 1e-6) gap = std::min(gap, std::abs(lambda - p));
  const double r = std::min(1e-2, gap / 4.0);
  constexpr int kPts = 16;
  Matrix sum = Matrix::Zero(sol.dim, sol.dim);
  for (int k = 0; k < kPts; ++k) sum += sol.triv(xi, eta, lambda + std::polar(r, 2.0 * M_PI * (k + 0.5) / kPts));
  return sum / static_cast<double>(kPts);
}

inline HermitianProjection transported(const Matrix& Ez, const Matrix& basis) {
  Matrix q = Ez.adjoint() * basis;
  std::vector<Vector> cols;
  for (int j = 0; j < q.cols(); ++j) cols.push_back(q.col(j));
  return herm_proj(cols);
}

inline Matrix conj_factor(cplx z, const Matrix& pt, bool left) {
  const int n = static_cast<int>(pt.rows());
  Matrix perp = identity(n) - pt;
  return left ? Matrix(std::conj(z) * pt + z * perp) : Matrix(z * pt + std::conj(z) * perp);
}

}  // namespace detail

/// Dressing action of the simple element g_{z,pi} on a unitary-class solution.
/// repeated_poles admits z at an existing (removable) pole, as needed by structured factors.
inline FlowSolution dress(const FlowSolution& sol, cplx z, const HermitianProjection& pi, bool repeated_poles = false) {
  detail::check_dressable(sol, z, repeated_poles);
  auto base = std::make_shared<const FlowSolution>(sol);
  const Matrix basis = pi.basis;
  const Matrix P = pi.matrix;
  auto tilde_pi = [base, basis, z](double xi, double eta) {
    return detail::transported(detail::triv_at(*base, xi, eta, z), basis).matrix;
  };

  FlowSolution out;
  out.group_class = sol.group_class;
  out.dim = sol.dim;
  out.a_eval = sol.a_eval;
  out.u_eval = [base, tilde_pi, z](double xi, double eta) {
    Matrix pt = tilde_pi(xi, eta);
    return Matrix(base->u_eval(xi, eta) + (z - std::conj(z)) * commutator(pt, base->a_eval(xi)));
  };
  out.v_eval = [base, tilde_pi, z](double xi, double eta) {
    Matrix pt = tilde_pi(xi, eta);
    return Matrix(detail::conj_factor(z, pt, true) * base->v_eval(xi, eta) * detail::conj_factor(z, pt, false) /
                  std::norm(z));
  };
  out.triv = [base, tilde_pi, z, P](double xi, double eta, cplx lambda) {
    Matrix pt = tilde_pi(xi, eta);
    return Matrix(detail::simple(z, P, lambda) * base->triv(xi, eta, lambda) *
                  detail::simple(std::conj(z), pt, lambda));
  };
  out.pole_set = sol.pole_set;
  out.pole_set.push_back(z);
  out.pole_set.push_back(std::conj(z));
  out.symmetry_tags = {};
  if (sol.symmetry_tags.count(SymmetryTag::Unitary)) out.symmetry_tags.insert(SymmetryTag::Unitary);
  return out;
}

inline FlowSolution dress(const FlowSolution& sol, const SimpleElement& g) { return dress(sol, g.z, g.pi); }

/// h . sol for h = g_1 g_2 ... g_r, i.e. g_1 . (g_2 . (... (g_r . sol))).
inline FlowSolution dress(const FlowSolution& sol, const DressingFactor& h) {
  FlowSolution cur = sol;
  const bool structured = h.symmetry_class != SymmetryClass::None;
  for (auto it = h.factors.rbegin(); it != h.factors.rend(); ++it) cur = dress(cur, it->z, it->pi, structured);
  return cur;
}

namespace detail {

inline double vacuum_m(const ConjugatedDiagonal& a) {
  if (a.dim() != 2) return 0.0;
  if ((a.frame - identity(2)).norm() > 1e-14) return 0.0;
  if (std::abs(a.c(0).real()) > 0.0 || std::abs(a.c(0) + a.c(1)) > 1e-14) return 0.0;
  return a.c(0).imag();
}

struct KSolitonData {
  ConjugatedDiagonal a;
  Matrix amat;
  std::vector<cplx> z;
  std::vector<Matrix> pi;
  std::vector<Matrix> basis;

  // dressed projections at one point via the recursion for q_j
  std::vector<Matrix> tilde(double xi, double eta) const {
    const int n = a.dim();
    const std::size_t k = z.size();
    std::vector<Matrix> pt;
    pt.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
      Matrix G = identity(n);
      for (std::size_t i = 0; i < j; ++i) G = simple(z[i], pi[i], z[j]) * G;
      Matrix q = G.adjoint() * basis[j];
      q = mat_exp(a, z[j] * xi + eta / z[j]).adjoint() * q;
      Matrix Gt = identity(n);
      for (std::size_t i = 0; i < j; ++i) Gt = simple(z[i], pt[i], std::conj(z[j])) * Gt;
      q = Gt * q;
      std::vector<Vector> cols;
      for (int c = 0; c < q.cols(); ++c) cols.push_back(q.col(c));
      pt.push_back(herm_proj(cols).matrix);
    }
    return pt;
  }
};

}  // namespace detail

/// Iterated dressing of the vacuum (a,0,a) by g_{z_1,pi_1}, ..., g_{z_k,pi_k}.
inline FlowSolution k_soliton(const ConjugatedDiagonal& a, const std::vector<std::pair<cplx, HermitianProjection>>& data) {
  if (data.empty()) throw PreconditionViolation("k_soliton needs at least one pole");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].first.imag() == 0.0) throw PreconditionViolation("Im z must be nonzero");
    for (std::size_t j = 0; j < data.size(); ++j) {
      if (i == j) continue;
      if (std::abs(data[i].first - std::conj(data[j].first)) < 1e-9)
        throw PoleCollision("z_i equals conj(z_j)");
      if (std::abs(data[i].first - data[j].first) < 1e-9) throw PoleCollision("repeated pole");
    }
  }
  auto d = std::make_shared<detail::KSolitonData>();
  d->a = a;
  d->amat = a.matrix();
  for (const auto& [z, p] : data) {
    d->z.push_back(z);
    d->pi.push_back(p.matrix);
    d->basis.push_back(p.basis);
  }
  const int n = a.dim();

  FlowSolution out;
  out.group_class = GroupClass::SU;
  out.dim = n;
  const Matrix am = d->amat;
  out.a_eval = [am](double) { return am; };
  out.u_eval = [d](double xi, double eta) {
    auto pt = d->tilde(xi, eta);
    Matrix u = Matrix::Zero(d->a.dim(), d->a.dim());
    for (std::size_t j = 0; j < pt.size(); ++j) u += (d->z[j] - std::conj(d->z[j])) * commutator(pt[j], d->amat);
    return u;
  };
  out.v_eval = [d](double xi, double eta) {
    auto pt = d->tilde(xi, eta);
    Matrix v = d->amat;
    for (std::size_t j = 0; j < pt.size(); ++j)
      v = detail::conj_factor(d->z[j], pt[j], true) * v * detail::conj_factor(d->z[j], pt[j], false) /
          std::norm(d->z[j]);
    return v;
  };
  out.triv = [d](double xi, double eta, cplx lambda) {
    if (lambda == 0.0) throw PoleHit("lambda = 0");
    auto pt = d->tilde(xi, eta);
    const int n = d->a.dim();
    Matrix left = identity(n), right = identity(n);
    for (std::size_t j = 0; j < pt.size(); ++j) {
      left = detail::simple(d->z[j], d->pi[j], lambda) * left;
      right = right * detail::simple(std::conj(d->z[j]), pt[j], lambda);
    }
    return Matrix(left * mat_exp(d->a, lambda * xi + eta / lambda) * right);
  };
  for (cplx z : d->z) {
    out.pole_set.push_back(z);
    out.pole_set.push_back(std::conj(z));
  }
  if ((am + am.adjoint()).norm() <= 1e-12 * (1.0 + am.norm())) out.symmetry_tags.insert(SymmetryTag::Unitary);

  auto rec = std::make_shared<SolitonRecord>();
  rec->a = a;
  rec->m = detail::vacuum_m(a);
  rec->z = d->z;
  for (const auto& [z, p] : data) rec->pi.push_back(p);
  rec->b = identity(n);
  rec->c = identity(n);
  for (std::size_t j = 0; j < d->z.size(); ++j) {
    rec->b = detail::simple(d->z[j], d->pi[j], -1.0) * rec->b;
    rec->c = detail::simple(d->z[j], d->pi[j], 1.0) * rec->c;
  }
  out.soliton = rec;
  return out;
}

/// Periodic k-soliton of the vacuum a = diag(im,-im) with z_j = e^{i theta_j} and pi = proj(1,1).
inline FlowSolution periodic_soliton(double m, const std::vector<double>& thetas) {
  auto a = ConjugatedDiagonal::diagonal({cplx(0.0, m), cplx(0.0, -m)});
  auto pi = herm_proj(vec({1.0, 1.0}));
  std::vector<std::pair<cplx, HermitianProjection>> data;
  for (double th : thetas) data.emplace_back(std::polar(1.0, th), pi);
  return k_soliton(a, data);
}

namespace detail {

/// |det| against a scale built from the terms of the determinant (n = 2) or column norms.
inline bool transversal(const Matrix& stacked) {
  const int n = static_cast<int>(stacked.rows());
  double det = std::abs(stacked.determinant());
  double scale;
  if (n == 2) {
    scale = std::abs(stacked(0, 0) * stacked(1, 1)) + std::abs(stacked(0, 1) * stacked(1, 0));
  } else {
    scale = 1.0;
    for (int j = 0; j < n; ++j) scale *= stacked.col(j).norm();
  }
  return det >= 1e-10 * scale && std::isfinite(det);
}

}  // namespace detail

/// Non-compact dressing by h_{alpha1,alpha2,pi}; pi projects onto V1 along V2.
inline FlowSolution dress_sl(const FlowSolution& sol, double alpha1, double alpha2, const ObliqueProjection& pi) {
  if (alpha1 == alpha2 || alpha1 == 0.0 || alpha2 == 0.0)
    throw PreconditionViolation("alpha1, alpha2 must be distinct and nonzero");
  if (sol.group_class != GroupClass::SLR) throw PreconditionViolation("dress_sl needs an SL(n,R)-class solution");
  auto base = std::make_shared<const FlowSolution>(sol);
  const std::vector<Vector> V1 = pi.image_basis, V2 = pi.kernel_basis;
  const int n = sol.dim;
  auto tilde_pi = [base, V1, V2, alpha1, alpha2, n](double xi, double eta) {
    Matrix E1 = mat_inv(base->triv(xi, eta, alpha1));
    Matrix E2 = mat_inv(base->triv(xi, eta, alpha2));
    std::vector<Vector> w1, w2;
    Matrix stacked(n, n);
    int c = 0;
    for (const auto& v : V1) stacked.col(c++) = (w1.emplace_back(E1 * v));
    for (const auto& v : V2) stacked.col(c++) = (w2.emplace_back(E2 * v));
    if (!detail::transversal(stacked)) throw Singular(xi, eta);
    return oblique_proj(w1, w2).matrix;
  };
  const Matrix P = pi.matrix;

  FlowSolution out;
  out.group_class = sol.group_class;
  out.dim = n;
  out.a_eval = sol.a_eval;
  out.u_eval = [base, tilde_pi, alpha1, alpha2](double xi, double eta) {
    return Matrix(base->u_eval(xi, eta) + (alpha1 - alpha2) * commutator(base->a_eval(xi), tilde_pi(xi, eta)));
  };
  out.v_eval = [base, tilde_pi, alpha1, alpha2, n](double xi, double eta) {
    Matrix pt = tilde_pi(xi, eta);
    Matrix pp = identity(n) - pt;
    // v~ = h(0) v h(0)^{-1}, h the right factor, up to a scalar
    return Matrix((alpha1 * pt + alpha2 * pp) * base->v_eval(xi, eta) * (pt / alpha1 + pp / alpha2));
  };
  out.triv = [base, tilde_pi, alpha1, alpha2, P](double xi, double eta, cplx lambda) {
    Matrix pt = tilde_pi(xi, eta);
    return Matrix(detail::sl_simple(alpha1, alpha2, P, lambda) * base->triv(xi, eta, lambda) *
                  detail::sl_simple_inv(alpha1, alpha2, pt, lambda));
  };
  out.pole_set = sol.pole_set;
  out.pole_set.push_back(alpha1);
  out.pole_set.push_back(alpha2);
  return out;
}

}  // namespace solitonforge
