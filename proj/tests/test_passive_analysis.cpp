#include <catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace qlsr;
using namespace qlsr::testing;

namespace {

CMat scalar(cdouble z) { return CMat::Constant(1, 1, z); }

CMat row(std::initializer_list<cdouble> v) {
  CMat r(1, static_cast<Index>(v.size()));
  Index k = 0;
  for (cdouble z : v) r(0, k++) = z;
  return r;
}

CMat diag(std::initializer_list<double> v) {
  CMat d = CMat::Zero(static_cast<Index>(v.size()), static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) { d(k, k) = x; ++k; }
  return d;
}

PassiveSystem siso(const CMat& c, const CMat& omega) { return PassiveSystem(scalar(1.0), c, omega); }

// Brute-force oracle: plain SVD rank of the unit-scaled passive observability matrix.
Index oracle_passive_rank(const PassiveSystem& p) {
  if (p.n() == 0) return 0;
  return oracle_rank(krylov_rows(p.C_minus(), p.Omega_minus(), p.n(), true), 1e-9);
}

}  // namespace

TEST_CASE("Hurwitz examples") {
  CHECK(is_hurwitz(siso(scalar(std::sqrt(2.0)), scalar(0.0))));
  CHECK_FALSE(is_hurwitz(siso(row({0.0, 0.0}), diag({1, 2}))));
  CHECK_FALSE(is_hurwitz(siso(row({1.0, 0.0}), diag({1, 2}))));
}

TEST_CASE("equivalence report on small examples") {
  Rng rng(41);
  const PassiveSystem minimal = random_passive(1, 2, rng);
  const MinimalityReport a = passive_equivalence_report(minimal);
  CHECK(a.hurwitz);
  CHECK(a.observable);
  CHECK(a.controllable);
  CHECK(a.n_min == 2);
  CHECK(a.warnings.empty());

  const MinimalityReport b = passive_equivalence_report(siso(row({0.0, 0.0}), diag({1, 2})));
  CHECK_FALSE(b.hurwitz);
  CHECK_FALSE(b.observable);
  CHECK_FALSE(b.controllable);
  CHECK(b.n_min == 0);
  CHECK(b.sigma_set.empty());
}

TEST_CASE("Hurwitz, observable and controllable agree on random passive systems") {
  Rng rng(42);
  int unstable = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index m = pick(rng, 1, 3);
    PassiveSystem p = random_passive(m, pick(rng, 1, 6), rng);
    if (trial % 3 == 1) p = passive_with_hidden_modes(m, pick(rng, 0, 3), pick(rng, 1, 3), rng);
    if (trial % 3 == 2 && m == 1) p = siso_with_degenerate_eigenvalue(pick(rng, 2, 6), 2, rng);
    const MinimalityReport r = passive_equivalence_report(p);
    CHECK(r.warnings.empty());
    CHECK(r.hurwitz == r.observable);
    CHECK(r.observable == r.controllable);
    unstable += !r.hurwitz;
  }
  CHECK(unstable > 20);
}

TEST_CASE("n_min_siso examples") {
  CHECK(n_min_siso(siso(row({1.0, 1.0}), diag({2, 2}))) == 1);
  CHECK(n_min_siso(siso(row({1.0, 0.0}), diag({1, 2}))) == 1);
  CHECK(n_min_siso(siso(row({1.0, 1.0}), diag({1, 2}))) == 2);
  Rng rng(43);
  CHECK_THROWS_AS(n_min_siso(random_passive(2, 2, rng)), PreconditionError);
}

TEST_CASE("n_min_mimo examples") {
  CHECK(n_min_mimo(PassiveSystem(CMat::Identity(2, 2), CMat::Identity(2, 2), diag({1, 2}))) == 2);
  CMat c = CMat::Ones(2, 2);
  CHECK(n_min_mimo(PassiveSystem(CMat::Identity(2, 2), c, diag({1, 1}))) == 1);
}

TEST_CASE("n_min formulas equal the passive observability rank") {
  Rng rng(44);
  for (int trial = 0; trial < 200; ++trial) {
    PassiveSystem p = random_passive(1, 1, rng);
    switch (trial % 4) {
      case 0: p = random_passive(pick(rng, 1, 3), pick(rng, 1, 6), rng); break;
      case 1: p = siso_with_degenerate_eigenvalue(pick(rng, 2, 7), pick(rng, 2, 3), rng); break;
      case 2: p = passive_with_hidden_modes(pick(rng, 1, 3), pick(rng, 1, 3), pick(rng, 1, 3), rng); break;
      default: p = passive_with_hidden_modes(1, pick(rng, 1, 4), pick(rng, 1, 2), rng); break;
    }
    const Index expected = oracle_passive_rank(p);
    CHECK(n_min_mimo(p) == expected);
    CHECK(passive_observability_rank(p) == expected);
    if (p.m() == 1) CHECK(n_min_siso(p) == expected);
  }
}

TEST_CASE("degenerate eigenvalue reduces n_min by multiplicity minus one") {
  Rng rng(45);
  for (Index mult = 2; mult <= 4; ++mult) {
    const PassiveSystem p = siso_with_degenerate_eigenvalue(6, mult, rng);
    CHECK(n_min_siso(p) == 6 - mult + 1);
  }
}

TEST_CASE("sigma set lists coupled clusters") {
  const MinimalityReport r = passive_equivalence_report(siso(row({1.0, 1.0, 0.0}), diag({2, 2, 3})));
  REQUIRE(r.sigma_set.size() == 1);
  CHECK(r.sigma_set[0].omega == Catch::Approx(2.0));
  CHECK(r.sigma_set[0].coupling == Catch::Approx(2.0));
}

TEST_CASE("minimal_subsystem examples") {
  const MinimalSubsystem a = minimal_subsystem(siso(row({1.0, 0.0}), diag({1, 2})));
  REQUIRE(a.system.n() == 1);
  CHECK(std::norm(a.system.C_minus()(0, 0)) == Catch::Approx(1.0));
  CHECK(a.system.Omega_minus()(0, 0).real() == Catch::Approx(1.0));

  const MinimalSubsystem b = minimal_subsystem(siso(row({1.0, 1.0}), diag({2, 2})));
  REQUIRE(b.system.n() == 1);
  CHECK(std::norm(b.system.C_minus()(0, 0)) == Catch::Approx(2.0));
  CHECK(b.system.Omega_minus()(0, 0).real() == Catch::Approx(2.0));
  CHECK(b.system.C_minus()(0, 0).real() > 0.0);

  const MinimalSubsystem c = minimal_subsystem(siso(row({0.0, 0.0}), diag({1, 2})));
  CHECK(c.system.n() == 0);
  CHECK_FALSE(c.warnings.empty());
}

TEST_CASE("minimal_subsystem of a minimal system is an equivalent copy") {
  Rng rng(46);
  const PassiveSystem p = random_passive(2, 3, rng);
  const MinimalSubsystem ms = minimal_subsystem(p);
  CHECK(ms.system.n() == 3);
  CHECK((ms.isometry.adjoint() * ms.isometry - CMat::Identity(3, 3)).norm() < 1e-12);
  const auto grid = standard_grid(transfer_of(p));
  CHECK(max_grid_distance([&](cdouble s) { return eval_G(p, s); },
                          [&](cdouble s) { return eval_G(ms.system, s); }, grid) < 1e-9);
}

TEST_CASE("minimal_subsystem preserves the transfer function and is Hurwitz") {
  Rng rng(47);
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = pick(rng, 1, 3);
    const PassiveSystem p = trial % 2 == 0 ? passive_with_hidden_modes(m, pick(rng, 1, 4), pick(rng, 1, 3), rng)
                                           : siso_with_degenerate_eigenvalue(pick(rng, 2, 6), 2, rng);
    const MinimalSubsystem ms = minimal_subsystem(p);
    CHECK(ms.system.n() == n_min_mimo(p));
    CHECK(is_hurwitz(ms.system));
    CHECK(passive_equivalence_report(ms.system).observable);
    // Columns of the isometry are orthonormal and map Omega_min into Omega_-.
    const Index k = ms.system.n();
    CHECK((ms.isometry.adjoint() * ms.isometry - CMat::Identity(k, k)).norm() < 1e-10);
    CHECK((p.C_minus() * ms.isometry - ms.system.C_minus()).norm() < 1e-10);
    const RationalMatrix g = transfer_of(p);
    const RationalMatrix gm = transfer_of(ms.system);
    double worst = 0.0;
    for (double w : standard_grid(gm)) {
      const cdouble s{0.0, w};
      if (g.pole_near(s)) continue;  // undamped hidden modes are invisible but still poles of A
      const CMat a = g(s);
      worst = std::max(worst, opnorm(a - gm(s)) / std::max(1.0, opnorm(a)));
    }
    CHECK(worst <= 1e-8);
  }
}
