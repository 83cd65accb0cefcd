#ifndef QLSR_DETAIL_SPECTRAL_HPP
#define QLSR_DETAIL_SPECTRAL_HPP

// Jacobi-matrix machinery shared by the chain-mode synthesis and the
// genuineness probe.

#include <cmath>
#include <vector>

#include "qlsr/matcore.hpp"

namespace qlsr::detail {

/// Output of a Lanczos run: H Q = Q T with T = tridiag(offdiag, diag, offdiag).
struct LanczosResult {
  CMat basis;                    ///< orthonormal Krylov columns q_0, q_1, ...
  std::vector<double> diag;      ///< alpha_k = q_k^H H q_k
  std::vector<double> offdiag;   ///< beta_k = ||r_k||, size diag.size() - 1
  bool breakdown = false;        ///< stopped early on a vanishing residual
};

/// Hermitian Lanczos with full (twice-applied) reorthogonalisation.
///
/// For a diagonal H this is the Stieltjes procedure for the discrete measure
/// with weights |start_j|^2 at the nodes H_jj; diag/offdiag are the
/// orthonormal-polynomial recurrence coefficients.
inline LanczosResult lanczos(const CMat& h, const CVec& start, double breakdown_tol) {
  const Index n = h.rows();
  LanczosResult out;
  out.basis = CMat::Zero(n, n);
  const double s = start.norm();
  if (n == 0 || s == 0.0) {
    out.basis.resize(n, 0);
    return out;
  }
  const double scale = std::max(1.0, opnorm(h));
  CVec q = start / s;
  Index k = 0;
  for (; k < n; ++k) {
    out.basis.col(k) = q;
    CVec w = h * q;
    out.diag.push_back(std::real(q.dot(w)));
    for (int pass = 0; pass < 2; ++pass) {
      w -= out.basis.leftCols(k + 1) * (out.basis.leftCols(k + 1).adjoint() * w);
    }
    if (k + 1 == n) break;
    const double beta = w.norm();
    if (beta <= breakdown_tol * scale) {
      out.breakdown = true;
      break;
    }
    out.offdiag.push_back(beta);
    q = w / beta;
  }
  out.basis.conservativeResize(n, static_cast<Index>(out.diag.size()));
  return out;
}

/// Real symmetric tridiagonal matrix from its diagonals.
inline Eigen::MatrixXd jacobi_matrix(const std::vector<double>& diag,
                                     const std::vector<double>& offdiag) {
  const auto n = static_cast<Index>(diag.size());
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) j(i, i) = diag[static_cast<size_t>(i)];
  for (Index i = 0; i + 1 < n; ++i) {
    j(i, i + 1) = offdiag[static_cast<size_t>(i)];
    j(i + 1, i) = offdiag[static_cast<size_t>(i)];
  }
  return j;
}

/// One simple-pole term weight / (s + i * omega).
struct PoleTerm {
  double weight;
  double omega;
};

/// Expands e_1^T (s I + i J)^{-1} e_1 for a Jacobi matrix J into simple poles
/// sum_k w_k / (s + i lambda_k), w_k = |z_{1k}|^2, ascending lambda.
inline std::vector<PoleTerm> first_entry_poles(const std::vector<double>& diag,
                                               const std::vector<double>& offdiag) {
  std::vector<PoleTerm> out;
  if (diag.empty()) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi_matrix(diag, offdiag));
  for (Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double z = es.eigenvectors()(0, k);
    out.push_back({z * z, es.eigenvalues()(k)});
  }
  return out;
}

}  // namespace qlsr::detail

#endif  // QLSR_DETAIL_SPECTRAL_HPP
