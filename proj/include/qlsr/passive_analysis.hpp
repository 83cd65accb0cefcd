#ifndef QLSR_PASSIVE_ANALYSIS_HPP
#define QLSR_PASSIVE_ANALYSIS_HPP

// Stability / observability / controllability equivalence for passive
// systems, minimal mode counts, and extraction of a minimal subsystem.

#include <cmath>
#include <string>
#include <vector>

#include "qlsr/matcore.hpp"
#include "qlsr/sysmodel.hpp"

namespace qlsr {

/// Every eigenvalue of A = -1/2 C_-^H C_- - i Omega_- has real part below -tol.eig.
inline bool is_hurwitz(const PassiveSystem& sys, const Tolerances& tol = {}) {
  if (sys.n() == 0) return true;
  Eigen::ComplexEigenSolver<CMat> es(sys.A(), false);
  return es.eigenvalues().real().maxCoeff() < -tol.eig;
}

/// Eigenvalues of a Hermitian matrix grouped into numerically degenerate clusters.
struct SpectralCluster {
  double omega = 0.0;  ///< mean eigenvalue of the cluster
  CMat basis;          ///< orthonormal eigenvectors, n x multiplicity
};

/// Consecutive ascending eigenvalues join a cluster while each gap is at most
/// tol.cluster * (1 + |omega|).
inline std::vector<SpectralCluster> spectral_clusters(const CMat& hermitian,
                                                      const Tolerances& tol = {}) {
  std::vector<SpectralCluster> out;
  const Index n = hermitian.rows();
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian);
  const RVec& ev = es.eigenvalues();
  Index start = 0;
  for (Index k = 1; k <= n; ++k) {
    const bool split =
        k == n || ev(k) - ev(k - 1) > tol.cluster * (1.0 + std::abs(ev(k)));
    if (!split) continue;
    SpectralCluster c;
    c.omega = ev.segment(start, k - start).mean();
    c.basis = es.eigenvectors().middleCols(start, k - start);
    out.push_back(std::move(c));
    start = k;
  }
  return out;
}

namespace detail {

// Squared singular value above which a coupling direction counts as nonzero.
inline double coupling_floor(const PassiveSystem& sys, const Tolerances& tol) {
  return tol.coup * std::max(1.0, sys.C_minus().squaredNorm());
}

}  // namespace detail

/// Number of eigenvalue clusters omega of Omega_- with C_- P_omega C_-^H nonzero.
inline Index n_min_siso(const PassiveSystem& sys, const Tolerances& tol = {}) {
  if (sys.m() != 1) {
    throw PreconditionError("n_min_siso requires single-input single-output (m = 1), got m = " +
                            std::to_string(sys.m()));
  }
  const double floor = detail::coupling_floor(sys, tol);
  Index count = 0;
  for (const auto& c : spectral_clusters(sys.Omega_minus(), tol)) {
    if ((sys.C_minus() * c.basis).squaredNorm() > floor) ++count;
  }
  return count;
}

namespace detail {

// Right singular directions of C_- restricted to one eigenspace, above the coupling floor.
inline CMat coupled_directions(const PassiveSystem& sys, const SpectralCluster& c, double floor) {
  const CMat ci = sys.C_minus() * c.basis;
  Eigen::JacobiSVD<CMat> svd(ci, Eigen::ComputeFullV);
  Index r = 0;
  for (Index k = 0; k < svd.singularValues().size(); ++k) {
    const double s = svd.singularValues()(k);
    if (s * s > floor) ++r;
  }
  return c.basis * svd.matrixV().leftCols(r);
}

}  // namespace detail

/// Sum over eigenspaces of rank(C_- restricted to the eigenspace).
inline Index n_min_mimo(const PassiveSystem& sys, const Tolerances& tol = {}) {
  const double floor = detail::coupling_floor(sys, tol);
  Index count = 0;
  for (const auto& c : spectral_clusters(sys.Omega_minus(), tol)) {
    count += detail::coupled_directions(sys, c, floor).cols();
  }
  return count;
}

/// Passive observability matrix [C_-; C_- Omega_-; ...; C_- Omega_-^(n-1)].
inline CMat passive_observability_matrix(const PassiveSystem& sys) {
  return krylov_rows(sys.C_minus(), sys.Omega_minus(), sys.n(), false);
}

/// Dimension of the observable part of (C_-, Omega_-).
inline Index passive_observability_rank(const PassiveSystem& sys, const Tolerances& tol = {}) {
  return sys.n() - invariant_kernel(sys.C_minus(), sys.Omega_minus(), tol.subspace).dim();
}

/// Dimension of the reachable part of (A, B) with B = -C_-^H S.
inline Index passive_controllability_rank(const PassiveSystem& sys, const Tolerances& tol = {}) {
  const CMat b = -sys.C_minus().adjoint() * sys.S();
  return sys.n() - invariant_kernel(b.adjoint(), sys.A().adjoint(), tol.subspace).dim();
}

struct SigmaEntry {
  double omega = 0.0;     ///< eigenvalue of Omega_-
  double coupling = 0.0;  ///< Tr[C_- P_omega C_-^H]
};

struct MinimalityReport {
  bool hurwitz = false;
  bool observable = false;
  bool controllable = false;
  Index n_min = 0;
  std::vector<SigmaEntry> sigma_set;  ///< coupled clusters only
  std::vector<std::string> warnings;
};

inline MinimalityReport passive_equivalence_report(const PassiveSystem& sys,
                                                   const Tolerances& tol = {}) {
  MinimalityReport r;
  r.hurwitz = is_hurwitz(sys, tol);
  r.observable = passive_observability_rank(sys, tol) == sys.n();
  r.controllable = passive_controllability_rank(sys, tol) == sys.n();
  r.n_min = n_min_mimo(sys, tol);
  const double floor = detail::coupling_floor(sys, tol);
  for (const auto& c : spectral_clusters(sys.Omega_minus(), tol)) {
    const double coupling = (sys.C_minus() * c.basis).squaredNorm();
    if (coupling > floor) r.sigma_set.push_back({c.omega, coupling});
  }
  if (r.hurwitz != r.observable || r.observable != r.controllable) {
    r.warnings.push_back(std::string("stability/observability/controllability disagree: hurwitz=") +
                         (r.hurwitz ? "true" : "false") +
                         " observable=" + (r.observable ? "true" : "false") +
                         " controllable=" + (r.controllable ? "true" : "false"));
  }
  if (r.observable != (r.n_min == sys.n())) {
    r.warnings.push_back("minimal mode count " + std::to_string(r.n_min) +
                         " disagrees with the observability test");
  }
  return r;
}

struct MinimalSubsystem {
  PassiveSystem system;
  /// n x n_min isometry: original modes = isometry * retained modes.
  CMat isometry;
  std::vector<std::string> warnings;
};

/// Diagonalize Omega_-, compress C_- inside each eigenspace by SVD and drop
/// the uncoupled directions. Omega_min is diagonal (cluster means) and each
/// retained coupling column has its largest entry real and positive.
inline MinimalSubsystem minimal_subsystem(const PassiveSystem& sys, const Tolerances& tol = {}) {
  const Index n = sys.n();
  const double floor = detail::coupling_floor(sys, tol);
  std::vector<CMat> blocks;
  std::vector<double> freqs;
  Index total = 0;
  for (const auto& c : spectral_clusters(sys.Omega_minus(), tol)) {
    CMat dirs = detail::coupled_directions(sys, c, floor);
    for (Index k = 0; k < dirs.cols(); ++k) freqs.push_back(c.omega);
    total += dirs.cols();
    blocks.push_back(std::move(dirs));
  }
  CMat q(n, total);
  Index col = 0;
  for (const auto& b : blocks) {
    q.middleCols(col, b.cols()) = b;
    col += b.cols();
  }
  CMat c_min = sys.C_minus() * q;
  for (Index k = 0; k < total; ++k) {
    Index row = 0;
    c_min.col(k).cwiseAbs().maxCoeff(&row);
    const cdouble z = c_min(row, k);
    const cdouble phase = std::abs(z) > 0.0 ? std::conj(z) / std::abs(z) : cdouble(1.0);
    c_min.col(k) *= phase;
    q.col(k) *= phase;
  }
  CMat omega_min = CMat::Zero(total, total);
  for (Index k = 0; k < total; ++k) omega_min(k, k) = freqs[static_cast<size_t>(k)];

  MinimalSubsystem out{PassiveSystem(sys.S(), c_min, omega_min, tol), q, {}};
  if (total == 0) out.warnings.push_back("no mode couples to the field: minimal system is static");
  return out;
}

}  // namespace qlsr

#endif  // QLSR_PASSIVE_ANALYSIS_HPP
