#ifndef QLSR_SYSMODEL_HPP
#define QLSR_SYSMODEL_HPP

// System data model: general and passive quantum linear systems, the doubled
// state-space quadruple, physical-realizability residuals and the mean-field
// time response.

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "qlsr/matcore.hpp"

namespace qlsr {

/// How constructors treat Hermitian / symmetric blocks that are only
/// approximately so.
enum class Validation {
  strict,  ///< reject
  repair,  ///< replace X by (X + X^H) / 2 (or (X + X^T) / 2) before checking
};

namespace detail {

inline void require_shape(const CMat& x, Index rows, Index cols, const char* name) {
  if (x.rows() != rows || x.cols() != cols) {
    throw StructuralError(std::string(name) + " has shape " + std::to_string(x.rows()) + "x" +
                          std::to_string(x.cols()) + ", expected " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  }
}

inline void require_finite(const CMat& x, const char* name) {
  if (!all_finite(x)) throw ValidationError(std::string(name) + " has non-finite entries");
}

inline void require_unitary(const CMat& s, double tol) {
  const double r = (s.adjoint() * s - CMat::Identity(s.cols(), s.cols())).norm();
  if (r > tol) {
    throw ValidationError("S is not unitary: ||S^H S - I|| = " + std::to_string(r));
  }
}

inline void require_hermitian(const CMat& x, double tol, const char* name) {
  if (x.size() == 0) return;
  const double r = (x - x.adjoint()).norm();
  if (r > tol * std::max(1.0, x.norm())) {
    throw ValidationError(std::string(name) + " is not Hermitian: ||X - X^H|| = " + std::to_string(r));
  }
}

inline void require_symmetric(const CMat& x, double tol, const char* name) {
  if (x.size() == 0) return;
  const double r = (x - x.transpose()).norm();
  if (r > tol * std::max(1.0, x.norm())) {
    throw ValidationError(std::string(name) + " is not complex-symmetric: ||X - X^T|| = " +
                          std::to_string(r));
  }
}

}  // namespace detail

class PassiveSystem;

/// G ~ (S, C, Omega) with C = Delta(C_-, C_+) and Omega = Delta(Omega_-, Omega_+).
class GeneralSystem {
 public:
  GeneralSystem(CMat s, CMat c_minus, CMat c_plus, CMat omega_minus, CMat omega_plus,
                const Tolerances& tol = {}, Validation mode = Validation::strict)
      : s_(std::move(s)),
        c_minus_(std::move(c_minus)),
        c_plus_(std::move(c_plus)),
        omega_minus_(std::move(omega_minus)),
        omega_plus_(std::move(omega_plus)) {
    const Index m = s_.rows();
    const Index n = c_minus_.cols();
    if (m < 1) throw StructuralError("S must have at least one row");
    detail::require_shape(s_, m, m, "S");
    detail::require_shape(c_minus_, m, n, "C_minus");
    detail::require_shape(c_plus_, m, n, "C_plus");
    detail::require_shape(omega_minus_, n, n, "Omega_minus");
    detail::require_shape(omega_plus_, n, n, "Omega_plus");
    detail::require_finite(s_, "S");
    detail::require_finite(c_minus_, "C_minus");
    detail::require_finite(c_plus_, "C_plus");
    detail::require_finite(omega_minus_, "Omega_minus");
    detail::require_finite(omega_plus_, "Omega_plus");
    if (mode == Validation::repair) {
      omega_minus_ = (0.5 * (omega_minus_ + omega_minus_.adjoint())).eval();
      omega_plus_ = (0.5 * (omega_plus_ + omega_plus_.transpose())).eval();
    }
    detail::require_unitary(s_, tol.orth);
    detail::require_hermitian(omega_minus_, tol.orth, "Omega_minus");
    detail::require_symmetric(omega_plus_, tol.orth, "Omega_plus");
  }

  Index m() const noexcept { return s_.rows(); }
  Index n() const noexcept { return c_minus_.cols(); }

  const CMat& S() const noexcept { return s_; }
  const CMat& C_minus() const noexcept { return c_minus_; }
  const CMat& C_plus() const noexcept { return c_plus_; }
  const CMat& Omega_minus() const noexcept { return omega_minus_; }
  const CMat& Omega_plus() const noexcept { return omega_plus_; }

  CMat C() const { return delta(c_minus_, c_plus_); }
  CMat Omega() const { return delta(omega_minus_, omega_plus_); }

  /// True when C_+ and Omega_+ vanish within `tol` (absolute Frobenius).
  bool is_passive(double tol = 0.0) const {
    return c_plus_.norm() <= tol && omega_plus_.norm() <= tol;
  }

  PassiveSystem to_passive(double tol = 0.0) const;

 private:
  CMat s_;
  CMat c_minus_;
  CMat c_plus_;
  CMat omega_minus_;
  CMat omega_plus_;
};

/// G ~ (S, C_-, Omega_-), annihilation operators only.
class PassiveSystem {
 public:
  PassiveSystem(CMat s, CMat c_minus, CMat omega_minus, const Tolerances& tol = {},
                Validation mode = Validation::strict)
      : s_(std::move(s)), c_minus_(std::move(c_minus)), omega_minus_(std::move(omega_minus)) {
    const Index m = s_.rows();
    const Index n = c_minus_.cols();
    if (m < 1) throw StructuralError("S must have at least one row");
    detail::require_shape(s_, m, m, "S");
    detail::require_shape(c_minus_, m, n, "C_minus");
    detail::require_shape(omega_minus_, n, n, "Omega_minus");
    detail::require_finite(s_, "S");
    detail::require_finite(c_minus_, "C_minus");
    detail::require_finite(omega_minus_, "Omega_minus");
    if (mode == Validation::repair) {
      omega_minus_ = (0.5 * (omega_minus_ + omega_minus_.adjoint())).eval();
    }
    detail::require_unitary(s_, tol.orth);
    detail::require_hermitian(omega_minus_, tol.orth, "Omega_minus");
  }

  Index m() const noexcept { return s_.rows(); }
  Index n() const noexcept { return c_minus_.cols(); }

  const CMat& S() const noexcept { return s_; }
  const CMat& C_minus() const noexcept { return c_minus_; }
  const CMat& Omega_minus() const noexcept { return omega_minus_; }

  /// A = -1/2 C_-^H C_- - i Omega_-.
  CMat A() const { return -0.5 * c_minus_.adjoint() * c_minus_ - kI * omega_minus_; }

  GeneralSystem to_general() const {
    return GeneralSystem(s_, c_minus_, CMat::Zero(m(), n()), omega_minus_, CMat::Zero(n(), n()));
  }

 private:
  CMat s_;
  CMat c_minus_;
  CMat omega_minus_;
};

inline PassiveSystem GeneralSystem::to_passive(double tol) const {
  if (!is_passive(tol)) {
    throw PreconditionError("system is not passive: C_plus or Omega_plus is nonzero");
  }
  return PassiveSystem(s_, c_minus_, omega_minus_);
}

/// Doubled-up quadruple (A, B, C, D).
struct StateSpace {
  CMat A;
  CMat B;
  CMat C;
  CMat D;

  Index n() const { return A.rows() / 2; }
  Index m() const { return D.rows() / 2; }
};

/// A = -1/2 C^flat C - i J_n Omega, B = -C^flat Delta(S, 0), C = Delta(C_-, C_+),
/// D = Delta(S, 0).
inline StateSpace build_state_space(const GeneralSystem& sys) {
  const Index n = sys.n();
  const Index m = sys.m();
  const CMat c = sys.C();
  const CMat cf = flat(c);
  StateSpace ss;
  ss.D = delta(sys.S(), CMat::Zero(m, m));
  ss.A = -0.5 * cf * c - kI * jmat(n) * sys.Omega();
  ss.B = -cf * ss.D;
  ss.C = c;
  return ss;
}

/// Residuals of the three physical-realizability relations.
struct RealizabilityReport {
  double residual_A = 0.0;  ///< ||A + A^flat + C^flat C||
  double residual_B = 0.0;  ///< ||B + C^flat D||
  double residual_D = 0.0;  ///< ||D^flat D - I||
  /// Same residuals divided by the natural scale of each relation.
  double relative_A = 0.0;
  double relative_B = 0.0;
  double relative_D = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline RealizabilityReport check_physical_realizability(const StateSpace& ss,
                                                        const Tolerances& tol = {}) {
  const Index n2 = ss.A.rows();
  const Index m2 = ss.D.rows();
  if (ss.A.cols() != n2 || ss.B.rows() != n2 || ss.B.cols() != m2 || ss.C.rows() != m2 ||
      ss.C.cols() != n2 || ss.D.cols() != m2 || n2 % 2 != 0 || m2 % 2 != 0) {
    throw StructuralError("check_physical_realizability: inconsistent state-space shapes");
  }
  RealizabilityReport r;
  const CMat cf = flat(ss.C);
  const CMat cfc = cf * ss.C;
  r.residual_A = opnorm(ss.A + flat(ss.A) + cfc);
  r.residual_B = opnorm(ss.B + cf * ss.D);
  r.residual_D = opnorm(flat(ss.D) * ss.D - CMat::Identity(m2, m2));
  r.relative_A = r.residual_A / std::max(1.0, opnorm(ss.A) + opnorm(cfc));
  r.relative_B = r.residual_B / std::max(1.0, opnorm(ss.B) + opnorm(ss.C) * opnorm(ss.D));
  r.relative_D = r.residual_D / std::max(1.0, opnorm(ss.D) * opnorm(ss.D));
  r.tolerance = tol.pr;
  r.pass = r.residual_A <= tol.pr && r.residual_B <= tol.pr && r.residual_D <= tol.pr;
  return r;
}

/// Passive quadruple (A, B, C, D) = (-1/2 C_-^H C_- - i Omega_-, -C_-^H S, C_-, S).
struct PassiveStateSpace {
  CMat A;
  CMat B;
  CMat C;
  CMat D;
};

inline PassiveStateSpace passive_state_space(const PassiveSystem& sys) {
  return {sys.A(), -sys.C_minus().adjoint() * sys.S(), sys.C_minus(), sys.S()};
}

/// Mean input held constant from `start` until the next segment begins.
struct InputSegment {
  double start = 0.0;
  CVec value;  ///< doubled-up mean field, length 2m
};

/// Mean trajectories sampled on the requested grid.
struct MeanTrajectory {
  std::vector<double> t;
  std::vector<CVec> state;   ///< <a(t)> doubled, length 2n
  std::vector<CVec> output;  ///< <b_out(t)> doubled, length 2m
};

/// [u; u^#] for a length-m annihilation-field vector.
inline CVec doubled(const CVec& u) {
  CVec out(2 * u.size());
  out << u, u.conjugate();
  return out;
}

/// Exact piecewise propagation of d<a>/dt = A<a> + B<b>, <b_out> = C<a> + D<b>.
///
/// `x0` is the state at t_grid.front(). Input before the first segment is
/// zero; each segment holds until the next one starts. Every constant-input
/// interval is stepped with one augmented matrix exponential.
inline MeanTrajectory mean_response(const StateSpace& ss, const CVec& x0,
                                    std::span<const InputSegment> input,
                                    std::span<const double> t_grid) {
  const Index n2 = ss.A.rows();
  const Index m2 = ss.D.rows();
  if (x0.size() != n2) throw StructuralError("mean_response: initial state has wrong length");
  for (size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) {
      throw PreconditionError("mean_response: time grid is not strictly ascending");
    }
  }
  for (size_t i = 0; i < input.size(); ++i) {
    if (input[i].value.size() != m2) {
      throw StructuralError("mean_response: input segment has wrong length");
    }
    if (i > 0 && !(input[i].start > input[i - 1].start)) {
      throw PreconditionError("mean_response: input segments are not ascending");
    }
  }

  auto input_at = [&](double t) -> CVec {
    CVec u = CVec::Zero(m2);
    for (const auto& seg : input) {
      if (seg.start <= t) u = seg.value;
    }
    return u;
  };

  auto step = [&](const CVec& x, const CVec& u, double h) -> CVec {
    CMat aug = CMat::Zero(n2 + 1, n2 + 1);
    aug.topLeftCorner(n2, n2) = ss.A * h;
    aug.topRightCorner(n2, 1) = ss.B * u * h;
    const CMat e = aug.exp();
    return e.topLeftCorner(n2, n2) * x + e.topRightCorner(n2, 1);
  };

  MeanTrajectory out;
  if (t_grid.empty()) return out;
  CVec x = x0;
  double now = t_grid.front();
  for (double target : t_grid) {
    // Advance through every switching instant strictly inside (now, target).
    while (now < target) {
      double next = target;
      for (const auto& seg : input) {
        if (seg.start > now && seg.start < next) next = seg.start;
      }
      x = step(x, input_at(now), next - now);
      now = next;
    }
    const CVec u = input_at(target);
    out.t.push_back(target);
    out.state.push_back(x);
    out.output.push_back(ss.C * x + ss.D * u);
  }
  return out;
}

}  // namespace qlsr

#endif  // QLSR_SYSMODEL_HPP
