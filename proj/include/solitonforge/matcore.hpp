#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <vector>

#include "errors.hpp"

namespace solitonforge {

using cplx = std::complex<double>;
inline constexpr int kMaxDim = 8;
inline constexpr cplx kI{0.0, 1.0};

/// Square complex matrix, n <= 8, stack allocated.
using Matrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using Vector = Eigen::Matrix<cplx, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

struct Thresholds {
  double min_vector_norm = 1e-14;
  double max_condition = 1e12;
};

inline Thresholds& thresholds() {
  static Thresholds t;
  return t;
}

inline Matrix identity(int n) { return Matrix::Identity(n, n); }

inline Matrix diag(std::initializer_list<cplx> d) {
  Matrix m = Matrix::Zero(static_cast<int>(d.size()), static_cast<int>(d.size()));
  int i = 0;
  for (cplx c : d) {
    m(i, i) = c;
    ++i;
  }
  return m;
}

inline Vector vec(std::initializer_list<cplx> d) {
  Vector v(static_cast<int>(d.size()));
  int i = 0;
  for (cplx c : d) v(i++) = c;
  return v;
}

inline Matrix commutator(const Matrix& x, const Matrix& y) { return x * y - y * x; }

/// <y1,y2> = -tr(y1 y2); positive definite on skew-Hermitian matrices.
inline double pairing(const Matrix& x, const Matrix& y) { return -(x * y).trace().real(); }

inline double fro(const Matrix& m) { return m.norm(); }

struct HermitianProjection {
  Matrix matrix;
  int rank = 0;
  Matrix basis;  // orthonormal columns spanning the image

  int dim() const { return static_cast<int>(matrix.rows()); }
  Matrix perp() const { return identity(dim()) - matrix; }
};

struct ObliqueProjection {
  Matrix matrix;
  std::vector<Vector> image_basis;
  std::vector<Vector> kernel_basis;
};

namespace detail {

inline Matrix stack(const std::vector<Vector>& vs, int n) {
  Matrix q(n, static_cast<int>(vs.size()));
  for (std::size_t j = 0; j < vs.size(); ++j) q.col(static_cast<int>(j)) = vs[j];
  return q;
}

inline double condition(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0.0;
  double lo = s(s.size() - 1);
  return lo > 0.0 ? s(0) / lo : INFINITY;
}

}  // namespace detail

inline HermitianProjection herm_proj(const std::vector<Vector>& vectors) {
  if (vectors.empty()) throw DegenerateSpan("no vectors");
  const int n = static_cast<int>(vectors.front().size());
  for (const auto& v : vectors) {
    if (v.size() != n) throw DegenerateSpan("mixed vector sizes");
    if (v.norm() <= thresholds().min_vector_norm) throw DegenerateSpan("vector norm below threshold");
  }
  Matrix q = detail::stack(vectors, n);
  // normalize columns first so the Gram condition only measures angles
  for (int j = 0; j < q.cols(); ++j) q.col(j) /= q.col(j).norm();
  Matrix gram = q.adjoint() * q;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const auto& ev = es.eigenvalues();
  if (!(ev(0) > 0.0) || ev(ev.size() - 1) / ev(0) > thresholds().max_condition)
    throw DegenerateSpan("Gram matrix numerically singular");
  // orthonormal basis q G^{-1/2}
  Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1> isq = ev.cwiseSqrt().cwiseInverse();
  Matrix basis = q * es.eigenvectors() * isq.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  HermitianProjection p;
  p.basis = basis;
  p.matrix = basis * basis.adjoint();
  p.rank = static_cast<int>(vectors.size());
  return p;
}

inline HermitianProjection herm_proj(const Vector& v) { return herm_proj(std::vector<Vector>{v}); }

/// Recovers a HermitianProjection from its matrix (image basis from the eigenvectors near 1).
inline HermitianProjection as_projection(const Matrix& p, double tol = 1e-10) {
  if ((p - p.adjoint()).norm() > tol || (p * p - p).norm() > tol)
    throw DegenerateSpan("matrix is not a Hermitian projection");
  Eigen::SelfAdjointEigenSolver<Matrix> es(p);
  std::vector<Vector> cols;
  for (int j = 0; j < p.rows(); ++j)
    if (es.eigenvalues()(j) > 0.5) cols.push_back(es.eigenvectors().col(j));
  if (cols.empty()) throw DegenerateSpan("zero projection");
  return herm_proj(cols);
}

inline ObliqueProjection oblique_proj(const std::vector<Vector>& im, const std::vector<Vector>& ker) {
  if (im.empty()) throw DegenerateSpan("empty image");
  const int n = static_cast<int>(im.front().size());
  if (static_cast<int>(im.size() + ker.size()) != n)
    throw DegenerateSpan("image and kernel do not span C^n");
  std::vector<Vector> all = im;
  all.insert(all.end(), ker.begin(), ker.end());
  Matrix b = detail::stack(all, n);
  for (int j = 0; j < n; ++j) {
    double nj = b.col(j).norm();
    if (nj <= thresholds().min_vector_norm) throw DegenerateSpan("vector norm below threshold");
    b.col(j) /= nj;
  }
  if (detail::condition(b) > thresholds().max_condition) throw DegenerateSpan("stacked basis singular");
  Matrix d = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < im.size(); ++j) d(static_cast<int>(j), static_cast<int>(j)) = 1.0;
  ObliqueProjection p;
  p.matrix = b * d * b.partialPivLu().inverse();
  p.image_basis = im;
  p.kernel_basis = ker;
  return p;
}

/// A = frame * diag(c) * frame^{-1} with a unitary frame.
struct ConjugatedDiagonal {
  Matrix frame;
  Vector c;

  int dim() const { return static_cast<int>(c.size()); }
  Matrix matrix() const { return frame * c.asDiagonal() * frame.adjoint(); }

  static ConjugatedDiagonal diagonal(std::initializer_list<cplx> d) {
    ConjugatedDiagonal a;
    a.c = vec(d);
    a.frame = identity(a.dim());
    return a;
  }
  static ConjugatedDiagonal diagonal(const Vector& d) {
    return ConjugatedDiagonal{identity(static_cast<int>(d.size())), d};
  }
  /// Diagonalizes a skew-Hermitian matrix (a = -i H with H Hermitian).
  static ConjugatedDiagonal from_skew_hermitian(const Matrix& a) {
    if ((a + a.adjoint()).norm() > 1e-12 * (1.0 + a.norm()))
      throw PreconditionViolation("matrix is not skew-Hermitian");
    Matrix h = kI * a;
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    ConjugatedDiagonal r;
    r.frame = es.eigenvectors();
    r.c = (-kI) * es.eigenvalues().cast<cplx>();
    return r;
  }
  ConjugatedDiagonal scaled(cplx s) const { return ConjugatedDiagonal{frame, c * s}; }
};

inline Matrix mat_exp(const ConjugatedDiagonal& a, cplx s) {
  Vector e(a.dim());
  for (int i = 0; i < a.dim(); ++i) e(i) = std::exp(a.c(i) * s);
  return a.frame * e.asDiagonal() * a.frame.adjoint();
}

inline Matrix mat_inv(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  Eigen::PartialPivLU<Matrix> lu(m);
  double scale = std::pow(m.norm(), n);
  if (!(std::abs(lu.determinant()) > 1e-14 * scale)) throw SingularMatrix("determinant below threshold");
  return lu.inverse();
}

}  // namespace solitonforge
