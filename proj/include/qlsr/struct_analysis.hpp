#ifndef QLSR_STRUCT_ANALYSIS_HPP
#define QLSR_STRUCT_ANALYSIS_HPP

// Controllability / observability through O_s, the kernel subspaces, the
// paired V basis and the decoherence-free split.

#include <optional>
#include <string>
#include <vector>

#include "qlsr/matcore.hpp"
#include "qlsr/sysmodel.hpp"

namespace qlsr {

/// O_s = [C; C (J Omega); ...; C (J Omega)^(2n-1)], blocks of 2m x 2n.
struct OsMatrix {
  CMat matrix;
  Index block_rows = 0;
  Index blocks = 0;

  CMat block(Index k) const { return matrix.middleRows(k * block_rows, block_rows); }
};

/// J_n Omega, the generator whose powers build O_s.
inline CMat j_omega(const GeneralSystem& sys) { return jmat(sys.n()) * sys.Omega(); }

inline OsMatrix build_Os(const GeneralSystem& sys) {
  const Index n2 = 2 * sys.n();
  OsMatrix os;
  os.block_rows = 2 * sys.m();
  os.blocks = n2;
  os.matrix = krylov_rows(sys.C(), j_omega(sys), n2, false);
  return os;
}

/// Classical observability matrix [C; C A; ...; C A^(2n-1)] of a doubled quadruple.
inline CMat kalman_observability_matrix(const StateSpace& ss) {
  return krylov_rows(ss.C, ss.A, ss.A.rows(), false);
}

/// Classical controllability matrix [B, A B, ..., A^(2n-1) B].
inline CMat kalman_controllability_matrix(const StateSpace& ss) {
  return krylov_cols(ss.A, ss.B, ss.A.rows(), false);
}

/// Ker(O_s), the largest J Omega-invariant subspace inside Ker(C).
inline SubspaceBasis os_kernel(const GeneralSystem& sys, const Tolerances& tol = {}) {
  return invariant_kernel(sys.C(), j_omega(sys), tol.subspace);
}

/// Ker of the classical observability matrix of (C, A).
inline SubspaceBasis kalman_unobservable(const StateSpace& ss, const Tolerances& tol = {}) {
  return invariant_kernel(ss.C, ss.A, tol.subspace);
}

/// Ker of the adjoint classical controllability matrix: complement of the reachable space.
inline SubspaceBasis kalman_uncontrollable(const StateSpace& ss, const Tolerances& tol = {}) {
  return invariant_kernel(ss.B.adjoint(), ss.A.adjoint(), tol.subspace);
}

struct CtrbObsvReport {
  bool controllable = false;
  bool observable = false;
  Index rank_Os = 0;
  Index kalman_obsv_rank = 0;  ///< rank of the classical observability matrix of (C, A)
  Index kalman_ctrb_rank = 0;  ///< rank of the classical controllability matrix of (A, B)
  std::vector<std::string> warnings;
};

/// Controllable = observable = (rank O_s == 2n), cross-checked against the
/// classical Kalman tests on the doubled quadruple.
inline CtrbObsvReport ctrb_obsv_report(const GeneralSystem& sys, const Tolerances& tol = {}) {
  const Index n2 = 2 * sys.n();
  const StateSpace ss = build_state_space(sys);
  CtrbObsvReport r;
  r.rank_Os = n2 - os_kernel(sys, tol).dim();
  r.kalman_obsv_rank = n2 - kalman_unobservable(ss, tol).dim();
  r.kalman_ctrb_rank = n2 - kalman_uncontrollable(ss, tol).dim();
  r.controllable = r.observable = r.rank_Os == n2;
  if ((r.kalman_obsv_rank == n2) != r.observable) {
    r.warnings.push_back("classical observability test disagrees with rank(O_s): rank " +
                         std::to_string(r.kalman_obsv_rank) + " vs " + std::to_string(r.rank_Os));
  }
  if ((r.kalman_ctrb_rank == n2) != r.controllable) {
    r.warnings.push_back("classical controllability test disagrees with rank(O_s): rank " +
                         std::to_string(r.kalman_ctrb_rank) + " vs " + std::to_string(r.rank_Os));
  }
  return r;
}

struct Subspaces {
  SubspaceBasis unobs;             ///< Ker(O_s)
  SubspaceBasis unctrb;            ///< Ker(O_s J_n)
  SubspaceBasis unobs_and_unctrb;  ///< their intersection
};

inline Subspaces subspaces(const GeneralSystem& sys, const Tolerances& tol = {}) {
  Subspaces out;
  out.unobs = os_kernel(sys, tol);
  // O_s J x = 0 iff J x lies in Ker(O_s), and J is unitary.
  out.unctrb = SubspaceBasis(out.unobs.ambient_dim(), jmat(sys.n()) * out.unobs.basis());
  out.unobs_and_unctrb = intersect(out.unobs, out.unctrb, tol.subspace);
  return out;
}

/// Paired doubling [[X, 0], [0, X^#]] of an n x k block.
inline CMat paired(const CMat& x) {
  CMat out = CMat::Zero(2 * x.rows(), 2 * x.cols());
  out.topLeftCorner(x.rows(), x.cols()) = x;
  out.bottomRightCorner(x.rows(), x.cols()) = x.conjugate();
  return out;
}

struct DFDecomposition {
  CMat V1;        ///< 2n x 2l, paired basis of Ker(O_s) ∩ Ker(O_s J_n)
  CMat V2;        ///< 2n x 2(n-l), paired orthogonal complement
  CMat V;         ///< [V1 V2]
  Index l = 0;    ///< number of decoherence-free mode pairs
  CMat Omega_DF;  ///< J_l V1^H Omega V1; the DF block evolves as d a = -i Omega_DF a dt
  bool hypothesis_ok = false;
  double hypothesis_residual = 0.0;  ///< ||(I - V1 V1^H) Omega V1||
  double unitarity_residual = 0.0;   ///< ||V^H V - I||
  double symplectic_residual = 0.0;  ///< ||V^H J_n V - diag(J_l, J_{n-l})||
  double block_leakage = 0.0;        ///< off-diagonal blocks of V^H A V
  double output_leakage = 0.0;       ///< max(||C V1||, ||V1^H B||)
  /// Driven part (S, C_- W, C_+ W^#, W^H Omega_- W, W^H Omega_+ W^#); set only when
  /// the DF subspace is Omega-invariant.
  std::optional<GeneralSystem> reduced_system;
};

inline DFDecomposition df_decompose(const GeneralSystem& sys, const Tolerances& tol = {}) {
  const Index n = sys.n();
  DFDecomposition d;

  // Ker(O_s [I; 0]): the annihilation halves of the joint kernel. Its paired
  // doubling spans Ker(O_s) ∩ Ker(O_s J_n).
  CMat top = CMat::Zero(2 * n, n);
  top.topRows(n) = CMat::Identity(n, n);
  const SubspaceBasis first =
      intersect(os_kernel(sys, tol), SubspaceBasis(2 * n, top), tol.subspace);
  CMat v = first.basis().topRows(n);
  if (v.cols() > 0) v = Eigen::HouseholderQR<CMat>(v).householderQ() * CMat::Identity(n, v.cols());
  const CMat w = kernel_basis(v.adjoint()).basis();

  d.l = v.cols();
  d.V1 = paired(v);
  d.V2 = paired(w);
  // Column order [a-halves, conjugate halves] within each block.
  d.V.resize(2 * n, 2 * n);
  d.V << d.V1, d.V2;

  const CMat omega = sys.Omega();
  const CMat j = jmat(n);
  d.Omega_DF = jmat(d.l) * d.V1.adjoint() * omega * d.V1;
  d.hypothesis_residual =
      opnorm(omega * d.V1 - d.V1 * (d.V1.adjoint() * omega * d.V1));
  d.hypothesis_ok = d.hypothesis_residual <= tol.inv * std::max(1.0, opnorm(omega));

  d.unitarity_residual = (d.V.adjoint() * d.V - CMat::Identity(2 * n, 2 * n)).norm();
  CMat jj = CMat::Zero(2 * n, 2 * n);
  jj.topLeftCorner(2 * d.l, 2 * d.l) = jmat(d.l);
  jj.bottomRightCorner(2 * (n - d.l), 2 * (n - d.l)) = jmat(n - d.l);
  d.symplectic_residual = (d.V.adjoint() * j * d.V - jj).norm();

  const StateSpace ss = build_state_space(sys);
  const CMat at = d.V.adjoint() * ss.A * d.V;
  const Index k1 = 2 * d.l;
  const Index k2 = 2 * (n - d.l);
  d.block_leakage = std::max(opnorm(at.topRightCorner(k1, k2)), opnorm(at.bottomLeftCorner(k2, k1)));
  d.output_leakage = std::max(opnorm(ss.C * d.V1), opnorm(d.V1.adjoint() * ss.B));

  if (d.hypothesis_ok) {
    d.reduced_system.emplace(sys.S(), sys.C_minus() * w, sys.C_plus() * w.conjugate(),
                             w.adjoint() * sys.Omega_minus() * w,
                             w.adjoint() * sys.Omega_plus() * w.conjugate(), tol,
                             Validation::repair);
  }
  return d;
}

struct KernelCCondition {
  bool holds = false;            ///< both hypotheses hold
  Index kernel_dim = 0;          ///< dim Ker(C)
  bool paired = false;           ///< J_n T = T J_r achievable: Ker(C) splits into equal halves
  double j_residual = 0.0;       ///< ||J P J - P|| for the projector P onto Ker(C)
  double invariance_residual = 0.0;  ///< ||(I - P) Omega T||
  /// Projector distance between Ker(C) and Ker(O_s) ∩ Ker(O_s J_n), when holds.
  std::optional<double> subspace_distance;
  bool agrees = false;
};

inline KernelCCondition check_kernel_C_condition(const GeneralSystem& sys,
                                                 const Tolerances& tol = {}) {
  const Index n = sys.n();
  KernelCCondition r;
  const SubspaceBasis ker = kernel_basis(sys.C(), tol.rank);
  r.kernel_dim = ker.dim();
  if (ker.empty()) {
    r.paired = true;
    r.holds = true;
    r.subspace_distance = projector_distance(ker, subspaces(sys, tol).unobs_and_unctrb);
    r.agrees = *r.subspace_distance <= tol.subspace;
    return r;
  }
  const CMat p = ker.projector();
  const CMat j = jmat(n);
  r.j_residual = opnorm(j * p * j - p);

  CMat top = CMat::Zero(2 * n, n);
  top.topRows(n) = CMat::Identity(n, n);
  CMat bottom = CMat::Zero(2 * n, n);
  bottom.bottomRows(n) = CMat::Identity(n, n);
  const Index upper = intersect(ker, SubspaceBasis(2 * n, top), tol.subspace).dim();
  const Index lower = intersect(ker, SubspaceBasis(2 * n, bottom), tol.subspace).dim();
  r.paired = r.j_residual <= tol.subspace && upper == lower && upper + lower == ker.dim();

  const CMat omega = sys.Omega();
  r.invariance_residual = opnorm(omega * ker.basis() - p * omega * ker.basis());
  const bool invariant = r.invariance_residual <= tol.inv * std::max(1.0, opnorm(omega));
  r.holds = r.paired && invariant;
  if (r.holds) {
    r.subspace_distance = projector_distance(ker, subspaces(sys, tol).unobs_and_unctrb);
    r.agrees = *r.subspace_distance <= tol.subspace;
  }
  return r;
}

}  // namespace qlsr

#endif  // QLSR_STRUCT_ANALYSIS_HPP
