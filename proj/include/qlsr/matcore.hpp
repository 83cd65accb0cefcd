#ifndef QLSR_MATCORE_HPP
#define QLSR_MATCORE_HPP

// Dense complex kernel for the doubled-up algebra: the flat adjoint, the
// Delta block structure, J forms, tolerant kernels and a lower Schur form.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "qlsr/errors.hpp"
#include "qlsr/tolerances.hpp"

namespace qlsr {

using cdouble = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr cdouble kI{0.0, 1.0};

/// Spectral (operator 2-) norm; zero for empty matrices.
inline double opnorm(const CMat& x) {
  if (x.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMat> svd(x);
  return svd.singularValues()(0);
}

inline bool all_finite(const CMat& x) { return x.size() == 0 || x.allFinite(); }

/// J_k = diag(I_k, -I_k).
inline CMat jmat(Index k) {
  CMat j = CMat::Identity(2 * k, 2 * k);
  j.bottomRightCorner(k, k) *= -1.0;
  return j;
}

/// X^flat = J_k X^H J_j for X of shape 2j x 2k.
inline CMat flat(const CMat& x) {
  if (x.rows() % 2 != 0 || x.cols() % 2 != 0) {
    throw StructuralError("flat: matrix of shape " + std::to_string(x.rows()) + "x" +
                          std::to_string(x.cols()) + " does not have even dimensions");
  }
  const Index j = x.rows() / 2;
  const Index k = x.cols() / 2;
  CMat out = x.adjoint();
  // Left J_k negates the bottom k rows, right J_j negates the right j columns.
  out.bottomRows(k) *= -1.0;
  out.rightCols(j) *= -1.0;
  return out;
}

/// Delta(U, V) = [U V; V^# U^#].
inline CMat delta(const CMat& u, const CMat& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) {
    throw StructuralError("delta: blocks have shapes " + std::to_string(u.rows()) + "x" +
                          std::to_string(u.cols()) + " and " + std::to_string(v.rows()) + "x" +
                          std::to_string(v.cols()));
  }
  const Index m = u.rows();
  const Index n = u.cols();
  CMat out(2 * m, 2 * n);
  out.topLeftCorner(m, n) = u;
  out.topRightCorner(m, n) = v;
  out.bottomLeftCorner(m, n) = v.conjugate();
  out.bottomRightCorner(m, n) = u.conjugate();
  return out;
}

/// Splits a 2m x 2n matrix into the (U, V) blocks of its first block row.
/// Returns the residual distance from exact Delta structure in `residual`.
inline std::pair<CMat, CMat> delta_blocks(const CMat& x, double* residual = nullptr) {
  if (x.rows() % 2 != 0 || x.cols() % 2 != 0) {
    throw StructuralError("delta_blocks: odd dimension");
  }
  const Index m = x.rows() / 2;
  const Index n = x.cols() / 2;
  CMat u = x.topLeftCorner(m, n);
  CMat v = x.topRightCorner(m, n);
  if (residual != nullptr) {
    *residual = x.size() == 0 ? 0.0 : (x - delta(u, v)).norm();
  }
  return {u, v};
}

/// Orthonormal column basis of a subspace of C^ambient.
class SubspaceBasis {
 public:
  SubspaceBasis() = default;

  explicit SubspaceBasis(Index ambient_dim) : ambient_(ambient_dim), basis_(ambient_dim, 0) {}

  /// Wraps columns the caller guarantees to be orthonormal.
  SubspaceBasis(Index ambient_dim, CMat orthonormal_columns)
      : ambient_(ambient_dim), basis_(std::move(orthonormal_columns)) {
    if (basis_.rows() != ambient_) {
      throw StructuralError("SubspaceBasis: basis has " + std::to_string(basis_.rows()) +
                            " rows, ambient dimension is " + std::to_string(ambient_));
    }
  }

  Index ambient_dim() const noexcept { return ambient_; }
  Index dim() const noexcept { return basis_.cols(); }
  bool empty() const noexcept { return basis_.cols() == 0; }
  const CMat& basis() const noexcept { return basis_; }

  CMat projector() const { return basis_ * basis_.adjoint(); }

  /// ||B^H B - I||_F.
  double orthonormality_defect() const {
    if (empty()) return 0.0;
    return (basis_.adjoint() * basis_ - CMat::Identity(dim(), dim())).norm();
  }

 private:
  Index ambient_ = 0;
  CMat basis_;
};

namespace detail {

// Columns of V for singular values <= threshold, plus the columns beyond min(rows, cols).
inline CMat null_columns(const CMat& x, double threshold) {
  Eigen::JacobiSVD<CMat> svd(x, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > threshold) ++rank;
  }
  return svd.matrixV().rightCols(x.cols() - rank);
}

}  // namespace detail

/// Numerical null space. Rank counts singular values above rel_tol * sigma_max;
/// rel_tol <= 0 selects max(rows, cols) * 2^-52.
inline SubspaceBasis kernel_basis(const CMat& x, double rel_tol = 0.0) {
  if (x.cols() == 0) return SubspaceBasis(0);
  if (x.rows() == 0) return SubspaceBasis(x.cols(), CMat::Identity(x.cols(), x.cols()));
  if (!all_finite(x)) throw ValidationError("kernel_basis: matrix has non-finite entries");
  Tolerances t;
  t.rank = rel_tol;
  const double rel = t.rank_for(x.rows(), x.cols());
  const double smax = opnorm(x);
  if (smax == 0.0) return SubspaceBasis(x.cols(), CMat::Identity(x.cols(), x.cols()));
  return SubspaceBasis(x.cols(), detail::null_columns(x, rel * smax));
}

/// Numerical rank under the same convention as kernel_basis.
inline Index numerical_rank(const CMat& x, double rel_tol = 0.0) {
  return x.cols() - kernel_basis(x, rel_tol).dim();
}

/// Orthonormal basis of Range(X), same rank convention as kernel_basis.
inline SubspaceBasis range_basis(const CMat& x, double rel_tol = 0.0) {
  if (x.rows() == 0) return SubspaceBasis(0);
  if (x.cols() == 0) return SubspaceBasis(x.rows());
  Tolerances t;
  t.rank = rel_tol;
  const double rel = t.rank_for(x.rows(), x.cols());
  Eigen::JacobiSVD<CMat> svd(x, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel * sv(0) && sv(i) > 0.0) ++rank;
  }
  return SubspaceBasis(x.rows(), svd.matrixU().leftCols(rank));
}

/// Range(B1) ∩ Range(B2) as the null space of [I - P1; I - P2]. Directions
/// whose combined sine of principal angle is at most angle_tol are kept.
inline SubspaceBasis intersect(const SubspaceBasis& b1, const SubspaceBasis& b2,
                               double angle_tol = 1e-8) {
  if (b1.ambient_dim() != b2.ambient_dim()) {
    throw StructuralError("intersect: ambient dimensions " + std::to_string(b1.ambient_dim()) +
                          " and " + std::to_string(b2.ambient_dim()) + " differ");
  }
  const Index n = b1.ambient_dim();
  if (b1.empty() || b2.empty()) return SubspaceBasis(n);
  CMat stacked(2 * n, n);
  stacked.topRows(n) = CMat::Identity(n, n) - b1.projector();
  stacked.bottomRows(n) = CMat::Identity(n, n) - b2.projector();
  return SubspaceBasis(n, detail::null_columns(stacked, angle_tol));
}

/// ||P1 - P2||_2 between the orthogonal projectors of two subspaces.
inline double projector_distance(const SubspaceBasis& b1, const SubspaceBasis& b2) {
  if (b1.ambient_dim() != b2.ambient_dim()) {
    throw StructuralError("projector_distance: ambient dimensions differ");
  }
  if (b1.ambient_dim() == 0) return 0.0;
  return opnorm(b1.projector() - b2.projector());
}

/// Result of schur_lower: A = U^H T U with T lower triangular.
struct LowerSchur {
  CMat U;
  CMat T;
};

namespace detail {

// Ascending real part; real parts within `tie` compare by imaginary part.
inline bool eig_before(cdouble a, cdouble b, double tie) {
  if (std::abs(a.real() - b.real()) > tie) return a.real() < b.real();
  return a.imag() < b.imag();
}

// Swaps diagonal entries k and k+1 of upper-triangular T, keeping A = Q T Q^H.
inline void swap_schur_pair(CMat& t, CMat& q, Index k) {
  const cdouble a = t(k, k);
  const cdouble b = t(k + 1, k + 1);
  Eigen::Vector2cd x(t(k, k + 1), b - a);
  const double nx = x.norm();
  if (nx == 0.0) return;  // equal eigenvalues, already decoupled
  x /= nx;
  Eigen::Matrix2cd g;
  g << x(0), -std::conj(x(1)), x(1), std::conj(x(0));
  t.middleRows(k, 2) = g.adjoint() * t.middleRows(k, 2);
  t.middleCols(k, 2) = t.middleCols(k, 2) * g;
  q.middleCols(k, 2) = q.middleCols(k, 2) * g;
  t(k + 1, k) = 0.0;
}

}  // namespace detail

/// Lower-triangular Schur form A = U^H T U.
///
/// Diagonal of T is ordered by ascending real part, ties (within
/// 1e-12 * ||A||) by ascending imaginary part, so the output is reproducible.
/// Built from the upper form of Eigen's ComplexSchur, reordered with Givens
/// swaps and then conjugated by the anti-diagonal permutation.
inline LowerSchur schur_lower(const CMat& a) {
  if (a.rows() != a.cols()) {
    throw StructuralError("schur_lower: matrix is " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + ", not square");
  }
  const Index n = a.rows();
  if (n == 0) return {CMat(0, 0), CMat(0, 0)};
  if (!all_finite(a)) throw ValidationError("schur_lower: matrix has non-finite entries");

  Eigen::ComplexSchur<CMat> schur(a);
  if (schur.info() != Eigen::Success) throw Error("schur_lower: Schur iteration did not converge");
  CMat t = schur.matrixT().triangularView<Eigen::Upper>();
  CMat q = schur.matrixU();

  // Bubble the upper form into descending order; reversal below makes it ascending.
  const double tie = 1e-12 * std::max(1.0, opnorm(a));
  for (Index pass = 0; pass < n; ++pass) {
    bool swapped = false;
    for (Index k = 0; k + 1 < n; ++k) {
      if (detail::eig_before(t(k, k), t(k + 1, k + 1), tie)) {
        detail::swap_schur_pair(t, q, k);
        swapped = true;
      }
    }
    if (!swapped) break;
  }
  CMat upper = t.triangularView<Eigen::Upper>();

  // With P the anti-diagonal permutation: A = Q T Q^H = (P Q^H)^H (P T P) (P Q^H).
  LowerSchur out;
  out.T = upper.reverse();
  out.U = q.adjoint().colwise().reverse();
  return out;
}

/// Stacks blocks X, X M, X M^2, ..., X M^(count-1).
///
/// With `normalize`, M is first scaled by 1/||M||_2. Left-multiplying by the
/// block-diagonal scaling does not change the kernel, and it keeps the
/// magnitude of later blocks comparable to X so rank decisions see roundoff
/// at the scale of the leading block.
inline CMat krylov_rows(const CMat& x, const CMat& m, Index count, bool normalize) {
  if (m.rows() != m.cols() || x.cols() != m.rows()) {
    throw StructuralError("krylov_rows: incompatible shapes");
  }
  CMat step = m;
  if (normalize) {
    const double s = opnorm(m);
    if (s > 0.0) step /= s;
  }
  CMat out(x.rows() * count, x.cols());
  CMat block = x;
  for (Index k = 0; k < count; ++k) {
    out.middleRows(k * x.rows(), x.rows()) = block;
    if (k + 1 < count) block = block * step;
  }
  return out;
}

/// Column counterpart of krylov_rows: [X, M X, M^2 X, ...].
inline CMat krylov_cols(const CMat& m, const CMat& x, Index count, bool normalize) {
  return krylov_rows(x.adjoint(), m.adjoint(), count, normalize).adjoint();
}

/// Largest M-invariant subspace contained in Ker(X), i.e. Ker([X; X M; X M^2; ...]).
///
/// Computed by an orthogonal staircase: start from Ker(X) and repeatedly keep
/// the directions that M maps back into the current subspace. X and M are
/// scaled to unit spectral norm first; a direction is dropped once its
/// residual exceeds `threshold` on that scale.
inline SubspaceBasis invariant_kernel(const CMat& x, const CMat& m, double threshold) {
  if (m.rows() != m.cols() || x.cols() != m.rows()) {
    throw StructuralError("invariant_kernel: incompatible shapes");
  }
  const Index n = m.rows();
  if (!all_finite(x) || !all_finite(m)) {
    throw ValidationError("invariant_kernel: matrix has non-finite entries");
  }
  if (n == 0) return SubspaceBasis(0);
  CMat basis = CMat::Identity(n, n);
  const double sx = opnorm(x);
  if (x.rows() > 0 && sx > 0.0) basis = detail::null_columns(x / sx, threshold);
  const double sm = opnorm(m);
  if (sm == 0.0) return SubspaceBasis(n, basis);
  const CMat step = m / sm;
  while (basis.cols() > 0) {
    const CMat image = step * basis;
    const CMat outside = image - basis * (basis.adjoint() * image);
    const CMat keep = detail::null_columns(outside, threshold);
    if (keep.cols() == basis.cols()) break;
    basis = basis * keep;
  }
  return SubspaceBasis(n, basis);
}

}  // namespace qlsr

#endif  // QLSR_MATCORE_HPP
