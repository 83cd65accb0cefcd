#ifndef QLSR_TOLERANCES_HPP
#define QLSR_TOLERANCES_HPP

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>

#include "qlsr/errors.hpp"

namespace qlsr {

/// Numerical thresholds shared by every module.
///
/// Every operation takes a `Tolerances` by const reference and defaults to a
/// value-initialised instance, so overriding a threshold never touches shared
/// state. The CLI builds one from `--tol` and `QLSR_TOL`.
struct Tolerances {
  /// Relative numerical-rank threshold; <= 0 selects max(rows, cols) * 2^-52.
  double rank = 0.0;
  /// Orthonormality / unitarity / Hermiticity on unit-scale matrices.
  double orth = 1e-10;
  /// Physical-realizability residuals.
  double pr = 1e-9;
  /// Omega-invariance of the decoherence-free subspace.
  double inv = 1e-8;
  /// Principal-angle threshold when intersecting or comparing subspaces, and
  /// the residual threshold of the invariant-subspace staircase that decides
  /// controllability / observability.
  double subspace = 1e-8;
  /// Hurwitz margin: Re(lambda) must be below -eig.
  double eig = 1e-10;
  /// Relative eigenvalue clustering width, applied as cluster * (1 + |omega|).
  double cluster = 1e-8;
  /// Threshold for "C P C^H != 0".
  double coup = 1e-10;
  /// Transfer-function identity checks (all-pass, positive-real).
  double tf = 1e-9;
  /// Grid points closer than pole_guard * rho to a pole are skipped.
  double pole_guard = 1e-6;

  double rank_for(long rows, long cols) const {
    if (rank > 0.0) return rank;
    return static_cast<double>(std::max<long>({rows, cols, 1})) *
           std::numeric_limits<double>::epsilon();
  }

  /// Applies one `key=value` override. A bare number sets `rank`.
  void apply(std::string_view spec) {
    auto eq = spec.find('=');
    std::string key = eq == std::string_view::npos ? "rank" : std::string(spec.substr(0, eq));
    std::string value = std::string(eq == std::string_view::npos ? spec : spec.substr(eq + 1));
    char* end = nullptr;
    double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end == value.c_str() || *end != '\0' || !(v > 0.0)) {
      throw ParseError("tolerance override '" + std::string(spec) +
                       "': value must be a positive number");
    }
    if (key == "rank") rank = v;
    else if (key == "orth") orth = v;
    else if (key == "pr") pr = v;
    else if (key == "inv") inv = v;
    else if (key == "subspace") subspace = v;
    else if (key == "eig") eig = v;
    else if (key == "cluster") cluster = v;
    else if (key == "coup") coup = v;
    else if (key == "tf") tf = v;
    else if (key == "pole_guard") pole_guard = v;
    else throw ParseError("unknown tolerance key '" + key + "'");
  }

  /// Applies a comma-separated list of overrides (the `QLSR_TOL` syntax).
  void apply_list(std::string_view list) {
    std::string item;
    std::istringstream in{std::string(list)};
    while (std::getline(in, item, ',')) {
      if (!item.empty()) apply(item);
    }
  }
};

}  // namespace qlsr

#endif  // QLSR_TOLERANCES_HPP
