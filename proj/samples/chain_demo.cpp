// Reduce a redundant single-input system to its minimal part, put it in chain
// form and check that the field sees the same transfer function throughout.

#include <cstdio>

#include "qlsr/qlsr.hpp"

int main() {
  using namespace qlsr;

  // Four modes: one never touches the field and two share a frequency.
  CMat s(1, 1);
  s << 1.0;
  CMat c(1, 4);
  c << 1.0, 0.5, cdouble(0.0, 0.5), 0.0;
  CMat omega = CMat::Zero(4, 4);
  omega.diagonal() << -1.0, 0.5, 0.5, 2.0;
  const PassiveSystem original(s, c, omega);

  const MinimalSubsystem reduced = minimal_subsystem(original);
  const ChainMode chain = chain_mode(reduced.system);
  const PassiveSystem realized = chain.system(s);

  std::printf("modes: original %ld, minimal %ld\n", static_cast<long>(original.n()),
              static_cast<long>(reduced.system.n()));
  std::printf("gamma_bar = %.6f\n", chain.params.gamma_bar);
  for (std::size_t k = 0; k < chain.params.diag.size(); ++k) {
    std::printf("  mode %zu: omega = %+.6f", k, chain.params.diag[k]);
    if (k < chain.params.offdiag.size()) std::printf("  coupling to next = %.6f", chain.params.offdiag[k]);
    std::printf("\n");
  }

  const RationalMatrix g0 = transfer_of(original);
  const RationalMatrix g1 = transfer_of(realized);
  double worst = 0.0;
  for (double w : standard_grid(g0)) {
    const cdouble pt{0.0, w};
    if (g0.pole_near(pt) || g1.pole_near(pt)) continue;
    worst = std::max(worst, opnorm(g0(pt) - g1(pt)));
  }
  std::printf("max |G_original - G_chain| on the grid: %.3e\n", worst);
  return worst < 1e-8 ? 0 : 1;
}
