#ifndef QLSR_TRANSFER_HPP
#define QLSR_TRANSFER_HPP

// Transfer-function evaluation, the fractional Sigma forms, all-pass and
// lossless bounded-real / positive-real checks, and the genuineness probe.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qlsr/detail/spectral.hpp"
#include "qlsr/matcore.hpp"
#include "qlsr/oscillator_params.hpp"
#include "qlsr/passive_analysis.hpp"
#include "qlsr/sysmodel.hpp"

namespace qlsr {

/// D + C (sI - A)^{-1} B with the poles of A cached for the proximity guard.
class RationalMatrix {
 public:
  RationalMatrix(CMat a, CMat b, CMat c, CMat d)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
    if (a_.rows() != a_.cols() || b_.rows() != a_.rows() || c_.cols() != a_.cols() ||
        d_.rows() != c_.rows() || d_.cols() != b_.cols()) {
      throw StructuralError("RationalMatrix: inconsistent shapes");
    }
    if (a_.rows() > 0) {
      Eigen::ComplexEigenSolver<CMat> es(a_, false);
      poles_.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    }
    for (const auto& p : poles_) scale_ = std::max(scale_, std::abs(p));
    if (scale_ == 0.0) scale_ = 1.0;
  }

  Index rows() const { return d_.rows(); }
  Index cols() const { return d_.cols(); }
  const std::vector<cdouble>& poles() const { return poles_; }
  /// Spectral radius of A, or 1 when A is nilpotent or empty.
  double scale() const { return scale_; }
  const CMat& direct() const { return d_; }

  /// Nearest pole within the guard distance tol.pole_guard * scale(), if any.
  std::optional<cdouble> pole_near(cdouble s, const Tolerances& tol = {}) const {
    std::optional<cdouble> hit;
    double best = tol.pole_guard * scale_;
    for (const auto& p : poles_) {
      const double d = std::abs(s - p);
      if (d <= best) {
        best = d;
        hit = p;
      }
    }
    return hit;
  }

  CMat operator()(cdouble s, const Tolerances& tol = {}) const {
    if (auto p = pole_near(s, tol)) {
      throw PoleProximityError("evaluation point is within the pole guard of an eigenvalue", *p);
    }
    if (a_.rows() == 0) return d_;
    CMat shifted = -a_;
    shifted.diagonal().array() += s;
    return d_ + c_ * shifted.partialPivLu().solve(b_);
  }

 private:
  CMat a_, b_, c_, d_;
  std::vector<cdouble> poles_;
  double scale_ = 0.0;
};

/// G(s) = D + C (sI - A)^{-1} B of the doubled quadruple.
inline RationalMatrix transfer_of(const StateSpace& ss) { return {ss.A, ss.B, ss.C, ss.D}; }
inline RationalMatrix transfer_of(const GeneralSystem& sys) { return transfer_of(build_state_space(sys)); }
/// G(s) = S - C_- (sI - A)^{-1} C_-^H S.
inline RationalMatrix transfer_of(const PassiveSystem& sys) {
  const auto q = passive_state_space(sys);
  return {q.A, q.B, q.C, q.D};
}

/// Sigma(s) = 1/2 C (sI + i J_n Omega)^{-1} C^flat.
inline RationalMatrix sigma_of(const GeneralSystem& sys) {
  const CMat c = sys.C();
  const Index m2 = 2 * sys.m();
  return {-kI * jmat(sys.n()) * sys.Omega(), flat(c), 0.5 * c, CMat::Zero(m2, m2)};
}
/// Sigma(s) = 1/2 C_- (sI + i Omega_-)^{-1} C_-^H.
inline RationalMatrix sigma_of(const PassiveSystem& sys) {
  const Index m = sys.m();
  return {-kI * sys.Omega_minus(), sys.C_minus().adjoint(), 0.5 * sys.C_minus(), CMat::Zero(m, m)};
}

template <class System>
CMat eval_G(const System& sys, cdouble s, const Tolerances& tol = {}) {
  return transfer_of(sys)(s, tol);
}

template <class System>
CMat eval_Sigma(const System& sys, cdouble s, const Tolerances& tol = {}) {
  return sigma_of(sys)(s, tol);
}

/// Frequencies +-rho * 10^k for 201 exponents k evenly spaced in [-3, 3], plus 0,
/// in ascending order.
inline std::vector<double> standard_grid(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) rho = 1.0;
  constexpr int kPoints = 201;
  std::vector<double> out;
  out.reserve(2 * kPoints + 1);
  for (int k = kPoints - 1; k >= 0; --k) out.push_back(-rho * std::pow(10.0, -3.0 + 6.0 * k / (kPoints - 1)));
  out.push_back(0.0);
  for (int k = 0; k < kPoints; ++k) out.push_back(rho * std::pow(10.0, -3.0 + 6.0 * k / (kPoints - 1)));
  return out;
}

inline std::vector<double> standard_grid(const RationalMatrix& g) { return standard_grid(g.scale()); }

/// Outcome of a grid check: worst residual plus the points that could not be used.
struct GridCheck {
  double max_residual = 0.0;
  std::vector<cdouble> skipped;  ///< points on or near a pole, or with singular I + Sigma
  std::size_t evaluated = 0;
};

namespace detail {

inline GridCheck fractional_identity(const RationalMatrix& g, const RationalMatrix& sigma,
                                     const CMat& d, std::span<const cdouble> s_grid,
                                     const Tolerances& tol) {
  GridCheck out;
  const Index k = d.rows();
  const CMat eye = CMat::Identity(k, k);
  for (const cdouble s : s_grid) {
    if (!(s.real() > 0.0)) {
      throw PreconditionError("fractional_identity_check: grid point with Re[s] <= 0");
    }
    if (g.pole_near(s, tol) || sigma.pole_near(s, tol)) {
      out.skipped.push_back(s);
      continue;
    }
    const CMat sg = sigma(s, tol);
    const Eigen::PartialPivLU<CMat> lu(eye + sg);
    if (std::abs(lu.determinant()) <= tol.orth) {
      out.skipped.push_back(s);
      continue;
    }
    // (I - Sigma)(I + Sigma)^{-1} D; the two factors commute.
    const CMat rhs = lu.solve((eye - sg) * d);
    out.max_residual = std::max(out.max_residual, opnorm(g(s, tol) - rhs));
    ++out.evaluated;
  }
  return out;
}

}  // namespace detail

/// max over the grid of ||G(s) - (I - Sigma(s))(I + Sigma(s))^{-1} Delta(S, 0)||.
inline GridCheck fractional_identity_check(const GeneralSystem& sys, std::span<const cdouble> s_grid,
                                           const Tolerances& tol = {}) {
  const CMat d = delta(sys.S(), CMat::Zero(sys.m(), sys.m()));
  return detail::fractional_identity(transfer_of(sys), sigma_of(sys), d, s_grid, tol);
}

/// max over the grid of ||G(s) - (I - Sigma(s))(I + Sigma(s))^{-1} S||.
inline GridCheck fractional_identity_check(const PassiveSystem& sys, std::span<const cdouble> s_grid,
                                           const Tolerances& tol = {}) {
  return detail::fractional_identity(transfer_of(sys), sigma_of(sys), sys.S(), s_grid, tol);
}

/// max ||G(i w)^flat G(i w) - I|| over the grid; pole points are skipped.
inline GridCheck allpass_check(const GeneralSystem& sys, std::span<const double> w_grid,
                               const Tolerances& tol = {}) {
  const RationalMatrix g = transfer_of(sys);
  GridCheck out;
  const Index m2 = 2 * sys.m();
  for (const double w : w_grid) {
    const cdouble s{0.0, w};
    if (g.pole_near(s, tol)) {
      out.skipped.push_back(s);
      continue;
    }
    const CMat gs = g(s, tol);
    out.max_residual = std::max(out.max_residual, opnorm(flat(gs) * gs - CMat::Identity(m2, m2)));
    ++out.evaluated;
  }
  return out;
}

/// max ||G(i w)^H G(i w) - I|| over the grid; pole points are skipped.
inline GridCheck allpass_check(const PassiveSystem& sys, std::span<const double> w_grid,
                               const Tolerances& tol = {}) {
  const RationalMatrix g = transfer_of(sys);
  GridCheck out;
  for (const double w : w_grid) {
    const cdouble s{0.0, w};
    if (g.pole_near(s, tol)) {
      out.skipped.push_back(s);
      continue;
    }
    const CMat gs = g(s, tol);
    out.max_residual =
        std::max(out.max_residual, opnorm(gs.adjoint() * gs - CMat::Identity(sys.m(), sys.m())));
    ++out.evaluated;
  }
  return out;
}

/// Hurwitz and all-pass on the standard grid.
inline bool is_lossless_bounded_real(const PassiveSystem& sys, const Tolerances& tol = {}) {
  if (!is_hurwitz(sys, tol)) return false;
  const auto grid = standard_grid(transfer_of(sys));
  return allpass_check(sys, grid, tol).max_residual <= tol.tf;
}

/// Sample points in the open right half-plane: every 10th standard-grid
/// frequency combined with real parts rho * {1e-3, 1e-2, ..., 1e3}.
inline std::vector<cdouble> right_half_plane_grid(double rho) {
  const auto w = standard_grid(rho);
  std::vector<cdouble> out;
  for (int e = -3; e <= 3; ++e) {
    const double sigma = rho * std::pow(10.0, e);
    for (std::size_t k = 0; k < w.size(); k += 10) out.emplace_back(sigma, w[k]);
    out.emplace_back(sigma, 0.0);
  }
  return out;
}

/// Grid evidence for lossless positive realness of a square function F.
struct PositiveRealCheck {
  bool lossless_positive_real = false;
  double min_hermitian_eig = 0.0;    ///< min over Re[s] > 0 of lambda_min(F + F^H) / max(1, ||F||)
  double max_axis_hermitian = 0.0;   ///< max over i w of ||F + F^H|| / max(1, ||F||)
  std::vector<cdouble> skipped;
};

namespace detail {

template <class Eval>
PositiveRealCheck positive_real_grid(Eval&& f, double rho, const Tolerances& tol,
                                     const std::function<bool(cdouble)>& near_pole) {
  PositiveRealCheck out;
  out.min_hermitian_eig = std::numeric_limits<double>::infinity();
  for (const cdouble s : right_half_plane_grid(rho)) {
    if (near_pole(s)) {
      out.skipped.push_back(s);
      continue;
    }
    const CMat v = f(s);
    const CMat h = v + v.adjoint();
    Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, opnorm(v));
    out.min_hermitian_eig = std::min(out.min_hermitian_eig, es.eigenvalues()(0) / scale);
  }
  for (const double w : standard_grid(rho)) {
    const cdouble s{0.0, w};
    if (near_pole(s)) {
      out.skipped.push_back(s);
      continue;
    }
    const CMat v = f(s);
    const double scale = std::max(1.0, opnorm(v));
    out.max_axis_hermitian = std::max(out.max_axis_hermitian, opnorm(v + v.adjoint()) / scale);
  }
  if (!std::isfinite(out.min_hermitian_eig)) out.min_hermitian_eig = 0.0;
  out.lossless_positive_real = out.min_hermitian_eig >= -tol.tf && out.max_axis_hermitian <= tol.tf;
  return out;
}

}  // namespace detail

/// Sigma(s) + Sigma(s)^H is positive semidefinite on a right-half-plane grid and
/// vanishes on the non-pole imaginary-axis grid (relative to max(1, ||Sigma||)).
inline PositiveRealCheck lossless_positive_real_check(const PassiveSystem& sys,
                                                      const Tolerances& tol = {}) {
  const RationalMatrix sigma = sigma_of(sys);
  return detail::positive_real_grid([&](cdouble s) { return sigma(s, tol); }, sigma.scale(), tol,
                                    [&](cdouble s) { return sigma.pole_near(s, tol).has_value(); });
}

inline bool is_lossless_positive_real(const PassiveSystem& sys, const Tolerances& tol = {}) {
  return lossless_positive_real_check(sys, tol).lossless_positive_real;
}

/// Scalar rational function d + sum_k r_k / (s - p_k).
struct PoleResidueFunction {
  cdouble direct = 0.0;
  std::vector<std::pair<cdouble, cdouble>> terms;  ///< (pole p_k, residue r_k)

  cdouble operator()(cdouble s) const {
    cdouble v = direct;
    for (const auto& [p, r] : terms) v += r / (s - p);
    return v;
  }

  double scale() const {
    double rho = 0.0;
    for (const auto& [p, r] : terms) rho = std::max(rho, std::abs(p));
    return rho > 0.0 ? rho : 1.0;
  }
};

inline PositiveRealCheck lossless_positive_real_check(const PoleResidueFunction& f,
                                                      const Tolerances& tol = {}) {
  const double rho = f.scale();
  auto near = [&](cdouble s) {
    for (const auto& term : f.terms) {
      if (std::abs(s - term.first) <= tol.pole_guard * rho) return true;
    }
    return false;
  };
  return detail::positive_real_grid([&](cdouble s) { return CMat::Constant(1, 1, f(s)); }, rho, tol,
                                    near);
}

struct GenuinenessResult {
  bool lossless_positive_real = false;
  bool genuine = false;
  /// Template parameters: Sigma(s) = (gamma/2) / (s + i omega0 + sum_k kappa_k / (s + i omega_k)).
  std::optional<IndepOscParams> fitted;
  double fit_residual = 0.0;  ///< max relative mismatch between template and input on the grid
  std::string diagnostics;
  std::vector<std::pair<cdouble, cdouble>> G_samples;  ///< (s, (1 - Sigma)/(1 + Sigma))
};

/// Decides whether Sigma is the Sigma-function of a one-port passive oscillator
/// network, i.e. (gamma/2) / (s + i omega0 + Delta(s)) with Delta a sum of simple
/// imaginary-axis poles with nonnegative weights.
inline GenuinenessResult genuineness_probe(const PoleResidueFunction& f, const Tolerances& tol = {}) {
  GenuinenessResult out;
  const double rho = f.scale();
  const auto lpr = lossless_positive_real_check(f, tol);
  out.lossless_positive_real = lpr.lossless_positive_real;

  for (const auto& s : right_half_plane_grid(rho)) {
    const cdouble v = f(s);
    out.G_samples.emplace_back(s, (1.0 - v) / (1.0 + v));
  }
  if (!out.lossless_positive_real) {
    out.diagnostics = "not lossless positive real on the sample grid";
    return out;
  }
  double rscale = 0.0;
  for (const auto& term : f.terms) rscale = std::max(rscale, std::abs(term.second));
  rscale = std::max(rscale, 1.0);
  if (std::abs(f.direct) > tol.tf * rscale) {
    out.diagnostics = "direct term is nonzero: the template is strictly proper";
    return out;
  }

  // Merge coincident poles, then require imaginary-axis poles with positive residues.
  std::vector<std::pair<double, double>> nodes;  // (frequency, residue)
  for (const auto& [p, r] : f.terms) {
    if (std::abs(p.real()) > tol.tf * rho) {
      out.diagnostics = "pole off the imaginary axis";
      return out;
    }
    if (std::abs(r.imag()) > tol.tf * rscale) {
      out.diagnostics = "residue is not real";
      return out;
    }
    const double w = -p.imag();
    auto it = std::find_if(nodes.begin(), nodes.end(), [&](const auto& nd) {
      return std::abs(nd.first - w) <= tol.cluster * (1.0 + std::abs(w));
    });
    if (it == nodes.end()) {
      nodes.emplace_back(w, r.real());
    } else {
      it->second += r.real();
    }
  }
  nodes.erase(std::remove_if(nodes.begin(), nodes.end(),
                             [&](const auto& nd) { return std::abs(nd.second) <= tol.tf * rscale; }),
              nodes.end());
  if (nodes.empty()) {
    out.diagnostics = "no poles: the template needs at least one";
    return out;
  }
  double total = 0.0;
  for (const auto& nd : nodes) {
    if (nd.second <= 0.0) {
      out.diagnostics = "negative residue";
      return out;
    }
    total += nd.second;
  }

  // Sigma = 1/2 c (sI + i diag(w))^{-1} c^H with |c_k|^2 = 2 r_k: a Lanczos run on
  // diag(w) from the normalized couplings gives the chain, whose tail expands to
  // the auxiliary poles.
  const auto n = static_cast<Index>(nodes.size());
  CMat h = CMat::Zero(n, n);
  CVec start(n);
  for (Index k = 0; k < n; ++k) {
    h(k, k) = nodes[static_cast<size_t>(k)].first;
    start(k) = std::sqrt(nodes[static_cast<size_t>(k)].second / total);
  }
  const auto lz = detail::lanczos(h, start, tol.orth);
  ChainParams chain{2.0 * total, lz.diag, lz.offdiag};
  IndepOscParams fit;
  try {
    fit = recover_indep_from_chain(chain);
  } catch (const Error& e) {
    out.diagnostics = std::string("fit failed: ") + e.what();
    return out;
  }

  auto template_sigma = [&](cdouble s) {
    cdouble den = s + kI * fit.omega0;
    for (const auto& a : fit.aux) den += a.kappa / (s + kI * a.omega);
    return 0.5 * fit.gamma / den;
  };
  for (const auto& s : right_half_plane_grid(rho)) {
    const cdouble v = f(s);
    out.fit_residual =
        std::max(out.fit_residual, std::abs(template_sigma(s) - v) / std::max(1.0, std::abs(v)));
  }
  out.fitted = fit;
  out.genuine = out.fit_residual <= tol.tf;
  out.diagnostics = out.genuine ? "matches the oscillator template"
                                : "template fit residual " + std::to_string(out.fit_residual);
  return out;
}

/// Sigma(s) of a single-input passive system as poles and residues.
inline PoleResidueFunction sigma_pole_residue(const PassiveSystem& sys, const Tolerances& tol = {}) {
  if (sys.m() != 1) throw PreconditionError("sigma_pole_residue requires single-input single-output");
  PoleResidueFunction f;
  for (const auto& c : spectral_clusters(sys.Omega_minus(), tol)) {
    const double weight = 0.5 * (sys.C_minus() * c.basis).squaredNorm();
    if (weight > 0.0) f.terms.emplace_back(cdouble(0.0, -c.omega), weight);
  }
  return f;
}

}  // namespace qlsr

#endif  // QLSR_TRANSFER_HPP
