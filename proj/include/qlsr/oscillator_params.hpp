#ifndef QLSR_OSCILLATOR_PARAMS_HPP
#define QLSR_OSCILLATOR_PARAMS_HPP

// Parameter sets of the single-input independent-oscillator and chain-mode
// realizations, their scalar transfer functions and the E11 identities that
// back them.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "qlsr/detail/spectral.hpp"
#include "qlsr/matcore.hpp"

namespace qlsr {

/// One auxiliary oscillator attached to the principal mode.
struct AuxMode {
  double kappa = 0.0;  ///< squared coupling strength to the principal mode
  double omega = 0.0;  ///< detuning
};

/// Principal mode (gamma, omega0) coupled to the field, plus auxiliaries coupled
/// only to the principal mode.
struct IndepOscParams {
  double gamma = 0.0;
  double omega0 = 0.0;
  std::vector<AuxMode> aux;
};

/// Chain of modes: mode 0 couples to the field with rate gamma_bar, neighbours
/// couple with strength offdiag[k]; diag holds the mode frequencies.
struct ChainParams {
  double gamma_bar = 0.0;
  std::vector<double> diag;
  std::vector<double> offdiag;
};

/// 1 / (a0 - sum_k b_k^2 / a_k), the (1,1) entry of the inverse of the arrowhead
/// matrix with diagonal (a0, a_1, ...) and first row/column (b_1, ...).
inline cdouble arrowhead_E11(cdouble a0, std::span<const cdouble> a, std::span<const cdouble> b) {
  if (a.size() != b.size()) {
    throw StructuralError("arrowhead_E11: " + std::to_string(a.size()) + " diagonal entries vs " +
                          std::to_string(b.size()) + " couplings");
  }
  cdouble den = a0;
  for (size_t k = 0; k < a.size(); ++k) {
    if (a[k] == 0.0) throw PreconditionError("arrowhead_E11: zero diagonal entry a_" + std::to_string(k + 1));
    den -= b[k] * b[k] / a[k];
  }
  if (den == 0.0) throw PreconditionError("arrowhead_E11: matrix is singular");
  return 1.0 / den;
}

/// 1 / (a0 - b1^2 / (a1 - b2^2 / (...))), the (1,1) entry of the inverse of the
/// symmetric tridiagonal matrix with diagonal a and off-diagonal b.
inline cdouble tridiag_E11(std::span<const cdouble> a, std::span<const cdouble> b) {
  if (a.empty() || b.size() + 1 != a.size()) {
    throw StructuralError("tridiag_E11: need |b| = |a| - 1 with a nonempty");
  }
  cdouble den = a.back();
  for (size_t k = a.size() - 1; k-- > 0;) {
    if (den == 0.0) {
      throw PreconditionError("tridiag_E11: continued fraction breaks down at level " +
                              std::to_string(k + 1));
    }
    den = a[k] - b[k] * b[k] / den;
  }
  if (den == 0.0) throw PreconditionError("tridiag_E11: matrix is singular");
  return 1.0 / den;
}

namespace detail {

inline double param_scale(double gamma, double omega0, std::span<const double> freqs,
                          std::span<const double> couplings) {
  double s = std::max({1.0, gamma, std::abs(omega0)});
  for (double w : freqs) s = std::max(s, std::abs(w));
  for (double c : couplings) s = std::max(s, std::sqrt(std::abs(c)));
  return s;
}

inline void guard_outer(cdouble den, cdouble s, double scale, const Tolerances& tol) {
  if (std::abs(den) <= tol.pole_guard * scale) {
    throw PoleProximityError("transfer function evaluated within the pole guard", s);
  }
}

}  // namespace detail

/// 1 - gamma / (s + gamma/2 + i omega0 + sum_k kappa_k / (s + i omega_k)), the
/// transfer function for unit scattering.
inline cdouble tf_indep(const IndepOscParams& p, cdouble s, const Tolerances& tol = {}) {
  std::vector<double> freqs, kappas;
  cdouble den = s + 0.5 * p.gamma + kI * p.omega0;
  for (const auto& a : p.aux) {
    freqs.push_back(a.omega);
    kappas.push_back(a.kappa);
    const cdouble inner = s + kI * a.omega;
    // A vanishing inner denominator drives the fraction to its limit 1.
    if (inner == 0.0) return 1.0;
    den += a.kappa / inner;
  }
  detail::guard_outer(den, s, detail::param_scale(p.gamma, p.omega0, freqs, kappas), tol);
  return 1.0 - p.gamma / den;
}

/// 1 - gamma_bar / (s + gamma_bar/2 + i w_0 + b_1^2 / (s + i w_1 + b_2^2 / (...))),
/// the transfer function for unit scattering.
inline cdouble tf_chain(const ChainParams& p, cdouble s, const Tolerances& tol = {}) {
  if (p.diag.empty() || p.offdiag.size() + 1 != p.diag.size()) {
    throw StructuralError("tf_chain: need diag nonempty and |offdiag| = |diag| - 1");
  }
  cdouble tail = 0.0;
  bool tail_infinite = false;
  for (size_t k = p.diag.size() - 1; k >= 1; --k) {
    if (tail_infinite) {
      tail = 0.0;
      tail_infinite = false;
      continue;
    }
    const cdouble d = s + kI * p.diag[k] + tail;
    const double b = p.offdiag[k - 1];
    if (d == 0.0) {
      tail_infinite = true;
    } else {
      tail = b * b / d;
    }
  }
  if (tail_infinite) return 1.0;
  const cdouble den = s + 0.5 * p.gamma_bar + kI * p.diag[0] + tail;
  std::vector<double> sq;
  for (double b : p.offdiag) sq.push_back(b * b);
  detail::guard_outer(den, s, detail::param_scale(p.gamma_bar, 0.0, p.diag, sq), tol);
  return 1.0 - p.gamma_bar / den;
}

/// Expands the chain's tail continued fraction into simple poles. The trailing
/// Jacobi block J' gives kappa_k = b_1^2 |z_{1k}|^2 and omega_k = lambda_k;
/// gamma and omega0 carry over unchanged.
inline IndepOscParams recover_indep_from_chain(const ChainParams& p) {
  if (p.diag.empty() || p.offdiag.size() + 1 != p.diag.size()) {
    throw StructuralError("recover_indep_from_chain: need |offdiag| = |diag| - 1");
  }
  for (double b : p.offdiag) {
    if (!(b > 0.0)) {
      throw PreconditionError("recover_indep_from_chain: chain coupling is not positive, chain is not minimal");
    }
  }
  IndepOscParams out;
  out.gamma = p.gamma_bar;
  out.omega0 = p.diag[0];
  if (p.diag.size() == 1) return out;
  const std::vector<double> trail_diag(p.diag.begin() + 1, p.diag.end());
  const std::vector<double> trail_off(p.offdiag.begin() + 1, p.offdiag.end());
  const double b1 = p.offdiag[0];
  for (const auto& term : detail::first_entry_poles(trail_diag, trail_off)) {
    out.aux.push_back({b1 * b1 * term.weight, term.omega});
  }
  return out;
}

/// Principal-mode coupling row [sqrt(gamma), 0, ..., 0] and arrowhead Hamiltonian.
inline CMat indep_hamiltonian(const IndepOscParams& p) {
  const auto n = static_cast<Index>(p.aux.size()) + 1;
  CMat h = CMat::Zero(n, n);
  h(0, 0) = p.omega0;
  for (Index k = 1; k < n; ++k) {
    const auto& a = p.aux[static_cast<size_t>(k - 1)];
    h(k, k) = a.omega;
    h(0, k) = h(k, 0) = std::sqrt(a.kappa);
  }
  return h;
}

/// Tridiagonal chain Hamiltonian (the Jacobi matrix).
inline CMat chain_hamiltonian(const ChainParams& p) {
  return detail::jacobi_matrix(p.diag, p.offdiag).cast<cdouble>();
}

inline CMat leading_coupling(double gamma, Index n) {
  CMat c = CMat::Zero(1, n);
  if (n > 0) c(0, 0) = std::sqrt(gamma);
  return c;
}

}  // namespace qlsr

#endif  // QLSR_OSCILLATOR_PARAMS_HPP
