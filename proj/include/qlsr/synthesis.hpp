#ifndef QLSR_SYNTHESIS_HPP
#define QLSR_SYNTHESIS_HPP

// Constructive realizations of passive systems: cascade of one-mode stages,
// MIMO canonical form, independent-oscillator and chain-mode forms.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "qlsr/detail/spectral.hpp"
#include "qlsr/matcore.hpp"
#include "qlsr/oscillator_params.hpp"
#include "qlsr/passive_analysis.hpp"
#include "qlsr/sysmodel.hpp"

namespace qlsr {

/// One single-mode stage (I, c, omega) of a cascade.
struct CascadeStage {
  CVec coupling;  ///< m-vector: column k of the transformed coupling matrix
  double omega = 0.0;
};

/// G' = G_n <| ... <| G_1 <| G_0 with G_0 = (S0, 0, 0).
struct CascadeNetlist {
  CMat S0;
  std::vector<CascadeStage> stages;
  /// Mode transform: stage modes = U * original modes.
  CMat U;
};

/// Coupling matrix [c_1 ... c_n] of the netlist.
inline CMat cascade_coupling(const CascadeNetlist& net) {
  const Index m = net.S0.rows();
  CMat c(m, static_cast<Index>(net.stages.size()));
  for (std::size_t k = 0; k < net.stages.size(); ++k) {
    if (net.stages[k].coupling.size() != m) {
      throw StructuralError("cascade stage " + std::to_string(k + 1) + " has coupling of length " +
                            std::to_string(net.stages[k].coupling.size()) + ", expected " +
                            std::to_string(m));
    }
    c.col(static_cast<Index>(k)) = net.stages[k].coupling;
  }
  return c;
}

/// Hamiltonian of the cascade: stage frequencies on the diagonal and
/// Omega_jk = (i/2) c_j^H c_k above it (j < k).
inline CMat cascade_hamiltonian(const CascadeNetlist& net) {
  const CMat c = cascade_coupling(net);
  const Index n = c.cols();
  CMat h = CMat::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    h(k, k) = net.stages[static_cast<std::size_t>(k)].omega;
    for (Index j = 0; j < k; ++j) {
      h(j, k) = 0.5 * kI * c.col(j).dot(c.col(k));
      h(k, j) = std::conj(h(j, k));
    }
  }
  return h;
}

/// Series product of the stages: an n-mode passive system whose A is lower
/// triangular with A_kj = -c_k^H c_j below the diagonal.
inline PassiveSystem series_product(const CascadeNetlist& net, const Tolerances& tol = {}) {
  if (net.S0.rows() != net.S0.cols()) throw StructuralError("series_product: S0 is not square");
  return PassiveSystem(net.S0, cascade_coupling(net), cascade_hamiltonian(net), tol,
                       Validation::repair);
}

/// Lower Schur form A' = U A U^H; stage k carries column k of C_- U^H and
/// Omega'_kk = -Im A'_kk.
inline CascadeNetlist cascade_realization(const PassiveSystem& sys) {
  const LowerSchur ls = schur_lower(sys.A());
  CascadeNetlist net;
  net.S0 = sys.S();
  net.U = ls.U;
  const CMat c = sys.C_minus() * ls.U.adjoint();
  for (Index k = 0; k < sys.n(); ++k) {
    net.stages.push_back({c.col(k), -ls.T(k, k).imag()});
  }
  return net;
}

/// Theorem-style MIMO canonical form: principal modes carry the nonzero
/// singular values of C_-, auxiliary modes couple only to principal modes.
struct MimoCanonical {
  RVec sigma_C;       ///< r nonzero singular values of C_-, descending
  CMat Omega1;        ///< r x r
  CMat Omega21;       ///< r x aux1, principal to nonzero-frequency auxiliaries
  CMat Omega22;       ///< r x aux2, principal to zero-frequency auxiliaries
  RVec sigma_Omega3;  ///< aux1 nonzero auxiliary frequencies, ascending
  Index r = 0;
  Index aux1 = 0;
  Index aux2 = 0;
  CMat C_bar;         ///< m x n, [diag(sigma_C) 0 0; 0 0 0]
  CMat Omega_bar;     ///< n x n, [Omega1 Omega21 Omega22; Omega21^H diag 0; Omega22^H 0 0]
  CMat S_bar;         ///< R1 S R1^H
  CMat R1;            ///< field rotation: canonical fields = R1 * original fields
  CMat W;             ///< mode transform: canonical modes = W * original modes
  std::vector<std::string> warnings;

  PassiveSystem system() const { return PassiveSystem(S_bar, C_bar, Omega_bar, {}, Validation::repair); }
};

inline MimoCanonical mimo_realization(const PassiveSystem& sys, const Tolerances& tol = {}) {
  const Index m = sys.m();
  const Index n = sys.n();
  MimoCanonical out;
  Eigen::JacobiSVD<CMat> svd(sys.C_minus(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVec& sv = svd.singularValues();
  const double rel = tol.rank_for(m, n);
  for (Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > rel * sv(0) && sv(k) > 0.0) ++out.r;
  }
  if (out.r == 0) out.warnings.push_back("C_minus is zero: every mode is auxiliary");
  const Index r = out.r;
  out.sigma_C = sv.head(r);
  out.R1 = svd.matrixU().adjoint();
  const CMat r2 = n > 0 ? CMat(svd.matrixV()) : CMat(0, 0);

  const CMat rotated = r2.adjoint() * sys.Omega_minus() * r2;
  const Index na = n - r;
  CMat t = CMat::Identity(na, na);
  RVec lambda = RVec::Zero(na);
  if (na > 0) {
    Eigen::SelfAdjointEigenSolver<CMat> es(rotated.bottomRightCorner(na, na));
    // Nonzero frequencies first (ascending), zero frequencies last.
    const double zero = tol.cluster * std::max(1.0, opnorm(rotated));
    std::vector<Index> order(static_cast<std::size_t>(na));
    for (Index k = 0; k < na; ++k) order[static_cast<std::size_t>(k)] = k;
    std::stable_partition(order.begin(), order.end(),
                          [&](Index k) { return std::abs(es.eigenvalues()(k)) > zero; });
    for (Index k = 0; k < na; ++k) {
      const Index src = order[static_cast<std::size_t>(k)];
      t.col(k) = es.eigenvectors().col(src);
      lambda(k) = std::abs(es.eigenvalues()(src)) > zero ? es.eigenvalues()(src) : 0.0;
      if (lambda(k) != 0.0) ++out.aux1;
    }
    out.aux2 = na - out.aux1;
  }

  CMat w_block = CMat::Identity(n, n);
  w_block.bottomRightCorner(na, na) = t.adjoint();
  out.W = w_block * r2.adjoint();

  out.Omega1 = rotated.topLeftCorner(r, r);
  const CMat coupling = rotated.topRightCorner(r, na) * t;
  out.Omega21 = coupling.leftCols(out.aux1);
  out.Omega22 = coupling.rightCols(out.aux2);
  out.sigma_Omega3 = lambda.head(out.aux1);

  out.C_bar = CMat::Zero(m, n);
  for (Index k = 0; k < r; ++k) out.C_bar(k, k) = out.sigma_C(k);
  out.Omega_bar = CMat::Zero(n, n);
  out.Omega_bar.topLeftCorner(r, r) = out.Omega1;
  out.Omega_bar.block(0, r, r, na) = coupling;
  out.Omega_bar.block(r, 0, na, r) = coupling.adjoint();
  for (Index k = 0; k < out.aux1; ++k) out.Omega_bar(r + k, r + k) = lambda(k);
  out.S_bar = out.R1 * sys.S() * out.R1.adjoint();
  return out;
}

/// Independent-oscillator form of a single-input system together with the
/// mode transform T (new modes = T * original modes).
struct IndependentOscillator {
  IndepOscParams params;
  CMat T;

  /// (S, [sqrt(gamma) 0 ...], arrowhead Hamiltonian).
  PassiveSystem system(const CMat& s) const {
    const CMat h = indep_hamiltonian(params);
    return PassiveSystem(s, leading_coupling(params.gamma, h.rows()), h);
  }
};

namespace detail {

inline void require_siso(const PassiveSystem& sys, const char* op) {
  if (sys.m() != 1) {
    throw PreconditionError(std::string(op) + " requires single-input single-output (m = 1), got m = " +
                            std::to_string(sys.m()));
  }
}

// Unitary whose first row is the unit row vector `row`.
inline CMat unitary_with_first_row(const CMat& row) {
  const Index n = row.cols();
  Eigen::HouseholderQR<CMat> qr(row.adjoint());
  CMat q = qr.householderQ() * CMat::Identity(n, n);
  // Fix the phase so that column 0 equals row^H exactly.
  const cdouble z = row.adjoint().col(0).dot(q.col(0));
  if (std::abs(z) > 0.0) q.col(0) *= std::conj(z) / std::abs(z);
  return q.adjoint();
}

}  // namespace detail

inline IndependentOscillator independent_oscillator(const PassiveSystem& sys) {
  detail::require_siso(sys, "independent_oscillator");
  const Index n = sys.n();
  const double gamma = sys.C_minus().squaredNorm();
  if (n == 0 || !(gamma > 0.0)) {
    throw PreconditionError("independent_oscillator requires a nonzero coupling C_minus");
  }
  const CMat r = detail::unitary_with_first_row(sys.C_minus() / std::sqrt(gamma));
  const CMat rotated = r * sys.Omega_minus() * r.adjoint();

  CMat v = CMat::Identity(n, n);
  IndependentOscillator out;
  out.params.gamma = gamma;
  out.params.omega0 = rotated(0, 0).real();
  if (n > 1) {
    Eigen::SelfAdjointEigenSolver<CMat> es(rotated.bottomRightCorner(n - 1, n - 1));
    v.bottomRightCorner(n - 1, n - 1) = es.eigenvectors().adjoint();
    const CMat eps = rotated.block(0, 1, 1, n - 1) * es.eigenvectors();
    // Diagonal phases make every principal-auxiliary coupling real and nonnegative.
    CMat d = CMat::Identity(n, n);
    for (Index k = 0; k < n - 1; ++k) {
      const double mag = std::abs(eps(0, k));
      if (mag > 0.0) d(k + 1, k + 1) = eps(0, k) / mag;
      out.params.aux.push_back({mag * mag, es.eigenvalues()(k)});
    }
    v = d * v;
  }
  out.T = v * r;
  return out;
}

/// Chain-mode form of a single-input system with the mode transform W
/// (chain modes = W * original modes).
struct ChainMode {
  ChainParams params;
  CMat W;

  /// (S, [sqrt(gamma_bar) 0 ...], Jacobi matrix).
  PassiveSystem system(const CMat& s) const {
    const CMat h = chain_hamiltonian(params);
    return PassiveSystem(s, leading_coupling(params.gamma_bar, h.rows()), h);
  }
};

/// Requires Omega_- diagonal with distinct entries and every coupling nonzero,
/// the form minimal_subsystem returns. The rows of W are the Lanczos vectors
/// of diag(omega) started from C_-^H / sqrt(gamma_bar).
inline ChainMode chain_mode(const PassiveSystem& sys, const Tolerances& tol = {}) {
  detail::require_siso(sys, "chain_mode");
  const Index n = sys.n();
  if (n == 0) throw PreconditionError("chain_mode requires at least one mode");
  const CMat& om = sys.Omega_minus();
  CMat off = om;
  off.diagonal().setZero();
  if (off.norm() > tol.orth * std::max(1.0, om.norm())) {
    throw PreconditionError("chain_mode requires a diagonal Omega_minus; apply minimal_subsystem first");
  }
  const double floor = tol.coup * std::max(1.0, sys.C_minus().squaredNorm());
  for (Index j = 0; j < n; ++j) {
    if (std::norm(sys.C_minus()(0, j)) <= floor) {
      throw PreconditionError("chain_mode: mode " + std::to_string(j + 1) +
                              " is uncoupled, input is not minimal");
    }
    for (Index k = 0; k < j; ++k) {
      const double wj = om(j, j).real();
      const double wk = om(k, k).real();
      if (std::abs(wj - wk) <= tol.cluster * (1.0 + std::abs(wj))) {
        throw PreconditionError("chain_mode: repeated frequency " + std::to_string(wj) +
                                ", input is not minimal");
      }
    }
  }
  const double gamma_bar = sys.C_minus().squaredNorm();
  const CVec start = sys.C_minus().adjoint() / std::sqrt(gamma_bar);
  const auto lz = detail::lanczos(om, start, tol.orth);
  if (lz.breakdown) throw PreconditionError("chain_mode: Krylov space collapsed, input is not minimal");
  ChainMode out;
  out.params = {gamma_bar, lz.diag, lz.offdiag};
  out.W = lz.basis.adjoint();
  return out;
}

}  // namespace qlsr

#endif  // QLSR_SYNTHESIS_HPP
