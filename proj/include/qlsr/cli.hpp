#ifndef QLSR_CLI_HPP
#define QLSR_CLI_HPP

// Command implementations behind the qlsr executable. Each command writes to
// the given stream and returns an exit code; errors surface as exceptions.

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qlsr/qlsr.hpp"

namespace qlsr::cli {

struct Options {
  Tolerances tol;
  Validation mode = Validation::strict;
};

/// %.17g formatting; enough digits to reproduce the double.
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------- analyze

struct AnalysisReport {
  std::string kind;
  Index m = 0;
  Index n = 0;
  RealizabilityReport realizability;
  bool hurwitz = false;  ///< doubled A
  CtrbObsvReport ctrb_obsv;
  Index dim_unobs = 0;
  Index dim_unctrb = 0;
  Index dim_joint = 0;
  Index df_pairs = 0;
  bool df_certified = false;
  double df_residual = 0.0;
  KernelCCondition kernel_c;
  std::optional<MinimalityReport> passive;
  std::optional<bool> lossless_bounded_real;
  std::optional<bool> lossless_positive_real;
  std::optional<double> allpass_deviation;  ///< on the standard grid, when Hurwitz
};

inline AnalysisReport analyze(const SystemFile& file, const Tolerances& tol = {}) {
  AnalysisReport r;
  const GeneralSystem g = file.general();
  r.kind = file.passive() ? "passive" : "general";
  r.m = g.m();
  r.n = g.n();
  const StateSpace ss = build_state_space(g);
  r.realizability = check_physical_realizability(ss, tol);
  if (g.n() == 0) {
    r.hurwitz = true;
  } else {
    Eigen::ComplexEigenSolver<CMat> es(ss.A, false);
    r.hurwitz = es.eigenvalues().real().maxCoeff() < -tol.eig;
  }
  r.ctrb_obsv = ctrb_obsv_report(g, tol);
  const Subspaces sub = subspaces(g, tol);
  r.dim_unobs = sub.unobs.dim();
  r.dim_unctrb = sub.unctrb.dim();
  r.dim_joint = sub.unobs_and_unctrb.dim();
  const DFDecomposition df = df_decompose(g, tol);
  r.df_pairs = df.l;
  r.df_certified = df.hypothesis_ok;
  r.df_residual = df.hypothesis_residual;
  r.kernel_c = check_kernel_C_condition(g, tol);
  if (file.passive()) {
    const PassiveSystem& p = file.as_passive();
    r.passive = passive_equivalence_report(p, tol);
    r.lossless_bounded_real = is_lossless_bounded_real(p, tol);
    r.lossless_positive_real = is_lossless_positive_real(p, tol);
  }
  if (r.hurwitz) r.allpass_deviation = allpass_check(g, standard_grid(transfer_of(ss)), tol).max_residual;
  return r;
}

inline Json to_json(const AnalysisReport& r) {
  Json j;
  j["kind"] = r.kind;
  j["m"] = r.m;
  j["n"] = r.n;
  j["realizability"] = {{"residual_A", r.realizability.residual_A},
                        {"residual_B", r.realizability.residual_B},
                        {"residual_D", r.realizability.residual_D},
                        {"pass", r.realizability.pass}};
  j["hurwitz"] = r.hurwitz;
  j["controllable"] = r.ctrb_obsv.controllable;
  j["observable"] = r.ctrb_obsv.observable;
  j["rank_Os"] = r.ctrb_obsv.rank_Os;
  j["kalman_obsv_rank"] = r.ctrb_obsv.kalman_obsv_rank;
  j["kalman_ctrb_rank"] = r.ctrb_obsv.kalman_ctrb_rank;
  j["subspaces"] = {{"unobservable", r.dim_unobs},
                    {"uncontrollable", r.dim_unctrb},
                    {"joint", r.dim_joint}};
  j["decoherence_free"] = {{"pairs", r.df_pairs},
                           {"certified", r.df_certified},
                           {"invariance_residual", r.df_residual}};
  j["kernel_C_condition"] = {{"holds", r.kernel_c.holds},
                             {"kernel_dim", r.kernel_c.kernel_dim},
                             {"agrees", r.kernel_c.agrees}};
  if (r.passive) {
    Json sigma = Json::array();
    for (const auto& e : r.passive->sigma_set) sigma.push_back({{"omega", e.omega}, {"coupling", e.coupling}});
    j["passive"] = {{"hurwitz", r.passive->hurwitz},
                    {"observable", r.passive->observable},
                    {"controllable", r.passive->controllable},
                    {"n_min", r.passive->n_min},
                    {"sigma_set", sigma}};
    j["lossless_bounded_real"] = *r.lossless_bounded_real;
    j["lossless_positive_real"] = *r.lossless_positive_real;
  }
  if (r.allpass_deviation) j["allpass_deviation"] = *r.allpass_deviation;
  Json warnings = Json::array();
  for (const auto& w : r.ctrb_obsv.warnings) warnings.push_back(w);
  if (r.passive) {
    for (const auto& w : r.passive->warnings) warnings.push_back(w);
  }
  j["warnings"] = warnings;
  return j;
}

inline std::string to_text(const AnalysisReport& r) {
  auto yes = [](bool b) { return b ? "yes" : "no"; };
  std::ostringstream o;
  o << "system: " << r.kind << ", m = " << r.m << ", n = " << r.n << "\n";
  o << "physical realizability: " << (r.realizability.pass ? "pass" : "FAIL")
    << " (residuals " << num(r.realizability.residual_A) << ", " << num(r.realizability.residual_B)
    << ", " << num(r.realizability.residual_D) << ")\n";
  o << "hurwitz: " << yes(r.hurwitz) << "\n";
  o << "controllable: " << yes(r.ctrb_obsv.controllable) << "\n";
  o << "observable: " << yes(r.ctrb_obsv.observable) << "\n";
  o << "rank O_s: " << r.ctrb_obsv.rank_Os << " of " << 2 * r.n << "\n";
  o << "unobservable subspace dim: " << r.dim_unobs << "\n";
  o << "uncontrollable subspace dim: " << r.dim_unctrb << "\n";
  o << "joint subspace dim: " << r.dim_joint << "\n";
  o << "decoherence-free pairs l: " << r.df_pairs << " ("
    << (r.df_certified ? "invariant" : "not invariant, split not certified") << ", residual "
    << num(r.df_residual) << ")\n";
  o << "Ker(C) condition: " << (r.kernel_c.holds ? "holds" : "does not hold") << "\n";
  if (r.passive) {
    o << "passive hurwitz: " << yes(r.passive->hurwitz) << "\n";
    o << "passive observable: " << yes(r.passive->observable) << "\n";
    o << "passive controllable: " << yes(r.passive->controllable) << "\n";
    o << "n_min: " << r.passive->n_min << "\n";
    for (const auto& e : r.passive->sigma_set) {
      o << "  coupled frequency " << num(e.omega) << ", coupling " << num(e.coupling) << "\n";
    }
    o << "lossless bounded real: " << yes(*r.lossless_bounded_real) << "\n";
    o << "lossless positive real: " << yes(*r.lossless_positive_real) << "\n";
  }
  if (r.allpass_deviation) o << "all-pass deviation: " << num(*r.allpass_deviation) << "\n";
  for (const auto& w : r.ctrb_obsv.warnings) o << "warning: " << w << "\n";
  if (r.passive) {
    for (const auto& w : r.passive->warnings) o << "warning: " << w << "\n";
  }
  return o.str();
}

inline int cmd_analyze(const std::string& path, const Options& opt, std::ostream& out, bool json,
                       const std::string& json_out = {}) {
  const SystemFile file = load_system(path, opt.tol, opt.mode);
  const AnalysisReport r = analyze(file, opt.tol);
  if (json) {
    out << to_json(r).dump(2) << "\n";
  } else {
    out << to_text(r);
  }
  if (!json_out.empty()) write_text_file(json_out, to_json(r).dump(2) + "\n");
  return 0;
}

// ------------------------------------------------------------- synthesize

/// Worst relative distance max ||G_a - G_b|| / max(1, ||G_a||) over a grid.
template <class Fa, class Fb>
double grid_residual(Fa&& ga, Fb&& gb, const std::vector<double>& grid, const RationalMatrix& poles,
                     const Tolerances& tol) {
  double worst = 0.0;
  for (const double w : grid) {
    const cdouble s{0.0, w};
    if (poles.pole_near(s, tol)) continue;
    try {
      const CMat a = ga(s);
      worst = std::max(worst, opnorm(a - gb(s)) / std::max(1.0, opnorm(a)));
    } catch (const PoleProximityError&) {
      // A realization pole moved into the guard by roundoff; the point carries no information.
    }
  }
  return worst;
}

inline Json indep_to_json(const IndepOscParams& p) {
  Json aux = Json::array();
  for (const auto& a : p.aux) aux.push_back({{"kappa", a.kappa}, {"omega", a.omega}});
  return {{"gamma", p.gamma}, {"omega0", p.omega0}, {"aux", aux}};
}

inline Json chain_to_json(const ChainParams& p) {
  return {{"gamma_bar", p.gamma_bar}, {"diag", p.diag}, {"offdiag", p.offdiag}};
}

/// Result of a synthesis: the artifact document plus the realization used for verification.
struct SynthesisArtifact {
  Json document;
  double residual = 0.0;
};

inline SynthesisArtifact synthesize(const SystemFile& file, const std::string& form,
                                    const Tolerances& tol, std::vector<std::string>& notices) {
  if (!file.passive()) {
    throw PreconditionError("synthesis requires a passive system (kind \"passive\")");
  }
  const PassiveSystem& src = file.as_passive();
  const RationalMatrix g_src = transfer_of(src);
  const auto grid = standard_grid(g_src);
  auto g_of = [&](cdouble s) { return g_src(s, tol); };

  Json doc;
  doc["form"] = form;
  doc["m"] = src.m();
  doc["n"] = src.n();
  double residual = 0.0;

  if (form == "cascade") {
    const CascadeNetlist net = cascade_realization(src);
    const PassiveSystem real = series_product(net, tol);
    const RationalMatrix g_real = transfer_of(real);
    residual = grid_residual(g_of, [&](cdouble s) { return g_real(s, tol); }, grid, g_src, tol);
    Json stages = Json::array();
    for (const auto& st : net.stages) {
      stages.push_back({{"coupling", matrix_to_json(st.coupling)}, {"omega", st.omega}});
    }
    doc["params"] = {{"S0", matrix_to_json(net.S0)}, {"stages", stages}};
    doc["transform"] = matrix_to_json(net.U);
    doc["realization"] = system_to_json(real);
  } else if (form == "mimo") {
    const MimoCanonical mc = mimo_realization(src, tol);
    for (const auto& w : mc.warnings) notices.push_back(w);
    const PassiveSystem real = mc.system();
    const RationalMatrix g_real = transfer_of(real);
    residual = grid_residual(
        g_of, [&](cdouble s) { return CMat(mc.R1.adjoint() * g_real(s, tol) * mc.R1); }, grid, g_src, tol);
    doc["params"] = {{"r", mc.r},
                     {"aux1", mc.aux1},
                     {"aux2", mc.aux2},
                     {"sigma_C", std::vector<double>(mc.sigma_C.data(), mc.sigma_C.data() + mc.sigma_C.size())},
                     {"sigma_Omega3",
                      std::vector<double>(mc.sigma_Omega3.data(), mc.sigma_Omega3.data() + mc.sigma_Omega3.size())},
                     {"Omega1", matrix_to_json(mc.Omega1)},
                     {"Omega21", matrix_to_json(mc.Omega21)},
                     {"Omega22", matrix_to_json(mc.Omega22)}};
    doc["transform"] = matrix_to_json(mc.W);
    doc["field_transform"] = matrix_to_json(mc.R1);
    doc["realization"] = system_to_json(real);
  } else if (form == "indep" || form == "chain") {
    if (src.m() != 1) {
      throw PreconditionError("--form " + form + " requires single-input single-output (m = 1); input has m = " +
                              std::to_string(src.m()) + ". Use --form mimo or --form cascade instead.");
    }
    if (form == "indep") {
      const IndependentOscillator io = independent_oscillator(src);
      const PassiveSystem real = io.system(src.S());
      const RationalMatrix g_real = transfer_of(real);
      residual = grid_residual(g_of, [&](cdouble s) { return g_real(s, tol); }, grid, g_src, tol);
      doc["params"] = indep_to_json(io.params);
      doc["transform"] = matrix_to_json(io.T);
      doc["realization"] = system_to_json(real);
    } else {
      const MinimalSubsystem ms = minimal_subsystem(src, tol);
      if (ms.system.n() != src.n()) {
        notices.push_back("reduced to a minimal subsystem: " + std::to_string(src.n()) + " -> " +
                          std::to_string(ms.system.n()) + " modes before chain synthesis");
      }
      if (ms.system.n() == 0) throw PreconditionError("chain synthesis: no mode couples to the field");
      const ChainMode cm = chain_mode(ms.system, tol);
      const PassiveSystem real = cm.system(src.S());
      const RationalMatrix g_real = transfer_of(real);
      residual = grid_residual(g_of, [&](cdouble s) { return g_real(s, tol); }, grid, g_src, tol);
      doc["params"] = chain_to_json(cm.params);
      // Chain modes = W * minimal modes = W * Q^H * original modes.
      doc["transform"] = matrix_to_json(cm.W * ms.isometry.adjoint());
      doc["realization"] = system_to_json(real);
    }
  } else {
    throw PreconditionError("unknown form '" + form + "' (expected cascade, mimo, indep or chain)");
  }
  doc["notices"] = notices;
  doc["verification"] = {{"grid", "standard"},
                         {"points", grid.size()},
                         {"max_transfer_residual", residual},
                         {"tolerance", 1e-8},
                         {"pass", residual <= 1e-8}};
  return {doc, residual};
}

inline int cmd_synthesize(const std::string& path, const std::string& form, const std::string& out_path,
                          const Options& opt, std::ostream& out, std::ostream& err) {
  const SystemFile file = load_system(path, opt.tol, opt.mode);
  std::vector<std::string> notices;
  const SynthesisArtifact art = synthesize(file, form, opt.tol, notices);
  for (const auto& n : notices) err << "notice: " << n << "\n";
  const std::string text = art.document.dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    out << text;
  } else {
    write_text_file(out_path, text);
    out << "wrote " << form << " realization to " << out_path << " (transfer residual "
        << num(art.residual) << ")\n";
  }
  return 0;
}

// --------------------------------------------------------------- freqresp

/// Frequencies for a sweep: logarithmic when 0 < wmin < wmax, linear otherwise.
inline std::vector<double> sweep_grid(double wmin, double wmax, int points) {
  if (points < 1) throw PreconditionError("--points must be at least 1");
  if (!(wmax >= wmin)) throw PreconditionError("--wmax must not be below --wmin");
  std::vector<double> out;
  if (points == 1) return {wmin};
  const bool log_spaced = wmin > 0.0 && wmax > wmin;
  for (int k = 0; k < points; ++k) {
    const double t = static_cast<double>(k) / (points - 1);
    out.push_back(log_spaced ? wmin * std::pow(wmax / wmin, t) : wmin + (wmax - wmin) * t);
  }
  return out;
}

/// CSV: omega, Re/Im of each G entry (row-major), all-pass deviation,
/// ||Sigma + Sigma^H||. Rows at pole points carry nan.
inline std::string freqresp_csv(const SystemFile& file, const std::vector<double>& grid, const Tolerances& tol) {
  const bool passive = file.passive();
  const RationalMatrix g = passive ? transfer_of(file.as_passive()) : transfer_of(file.general());
  const RationalMatrix sigma = passive ? sigma_of(file.as_passive()) : sigma_of(file.general());
  const Index k = g.rows();
  std::ostringstream o;
  o << "omega";
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) o << ",G" << i + 1 << "_" << j + 1 << "_re,G" << i + 1 << "_" << j + 1 << "_im";
  o << ",allpass_dev,sigma_herm_norm\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const double w : grid) {
    const cdouble s{0.0, w};
    o << num(w);
    if (g.pole_near(s, tol)) {
      for (Index e = 0; e < 2 * k * k + 1; ++e) o << "," << num(nan);
    } else {
      const CMat gs = g(s, tol);
      for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < k; ++j) o << "," << num(gs(i, j).real()) << "," << num(gs(i, j).imag());
      const CMat prod = passive ? CMat(gs.adjoint() * gs) : CMat(flat(gs) * gs);
      o << "," << num(opnorm(prod - CMat::Identity(k, k)));
    }
    if (sigma.pole_near(s, tol)) {
      o << "," << num(nan);
    } else {
      const CMat sg = sigma(s, tol);
      o << "," << num(opnorm(sg + sg.adjoint()));
    }
    o << "\n";
  }
  return o.str();
}

inline int cmd_freqresp(const std::string& path, std::optional<double> wmin, std::optional<double> wmax,
                        std::optional<int> points, const std::string& out_path, const Options& opt,
                        std::ostream& out) {
  const SystemFile file = load_system(path, opt.tol, opt.mode);
  std::vector<double> grid;
  if (!wmin && !wmax && !points) {
    const RationalMatrix g = file.passive() ? transfer_of(file.as_passive()) : transfer_of(file.general());
    grid = standard_grid(g);
  } else {
    if (!wmin || !wmax) throw PreconditionError("--wmin and --wmax must be given together");
    grid = sweep_grid(*wmin, *wmax, points.value_or(201));
  }
  const std::string csv = freqresp_csv(file, grid, opt.tol);
  if (out_path.empty() || out_path == "-") {
    out << csv;
  } else {
    write_text_file(out_path, csv);
  }
  return 0;
}

// ----------------------------------------------------------------- verify

struct Check {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
};

inline std::vector<Check> verify(const SystemFile& file, const Tolerances& tol) {
  std::vector<Check> checks;
  auto add = [&](std::string name, double value, double limit) {
    checks.push_back({std::move(name), value, limit, value <= limit});
  };
  auto flag = [&](std::string name, bool ok) { checks.push_back({std::move(name), ok ? 0.0 : 1.0, 0.0, ok}); };

  const GeneralSystem g = file.general();
  const StateSpace ss = build_state_space(g);
  const auto pr = check_physical_realizability(ss, tol);
  add("realizability A", pr.residual_A, tol.pr);
  add("realizability B", pr.residual_B, tol.pr);
  add("realizability D", pr.residual_D, tol.pr);

  const auto co = ctrb_obsv_report(g, tol);
  flag("O_s rank agrees with Kalman tests", co.warnings.empty());

  const Subspaces sub = subspaces(g, tol);
  add("Ker(O) = Ker(O_s)", projector_distance(kalman_unobservable(ss, tol), sub.unobs), 1e-8);
  add("Ker(C^H) = Ker(O_s J)", projector_distance(kalman_uncontrollable(ss, tol), sub.unctrb), 1e-8);
  flag("joint kernel has even dimension", sub.unobs_and_unctrb.dim() % 2 == 0);

  const DFDecomposition df = df_decompose(g, tol);
  add("V unitary", df.unitarity_residual, 1e-10);
  add("V symplectic", df.symplectic_residual, 1e-10);
  if (df.hypothesis_ok) {
    add("DF block leakage", df.block_leakage, 1e-8);
    add("DF output leakage", df.output_leakage, 1e-8);
  }

  const RationalMatrix gt = transfer_of(ss);
  const auto grid = standard_grid(gt);
  Eigen::ComplexEigenSolver<CMat> es(ss.A, false);
  const bool hurwitz = g.n() == 0 || es.eigenvalues().real().maxCoeff() < -tol.eig;
  if (hurwitz) {
    add("all-pass G^flat G = I", allpass_check(g, grid, tol).max_residual, 1e-9);
    std::vector<cdouble> rhp;
    for (std::size_t k = 0; k < grid.size(); k += 20) rhp.emplace_back(0.1 * gt.scale(), grid[k]);
    add("fractional form", fractional_identity_check(g, rhp, tol).max_residual, 1e-9);
  }

  if (file.passive()) {
    const PassiveSystem& p = file.as_passive();
    const auto mr = passive_equivalence_report(p, tol);
    flag("Hurwitz <=> observable <=> controllable", mr.warnings.empty());
    flag("n_min = passive observability rank", mr.n_min == passive_observability_rank(p, tol));
    const MinimalSubsystem ms = minimal_subsystem(p, tol);
    const RationalMatrix gp = transfer_of(p);
    const RationalMatrix gm = transfer_of(ms.system);
    auto g_src = [&](cdouble s) { return gp(s, tol); };
    add("minimal subsystem transfer", grid_residual(g_src, [&](cdouble s) { return gm(s, tol); }, grid, gp, tol), 1e-8);
    flag("minimal subsystem Hurwitz", is_hurwitz(ms.system, tol));
    if (mr.observable) {
      flag("lossless bounded real", is_lossless_bounded_real(p, tol));
      flag("lossless positive real", is_lossless_positive_real(p, tol));
    }
    std::vector<std::string> forms = {"cascade", "mimo"};
    if (p.m() == 1 && p.C_minus().norm() > 0.0) {
      forms.push_back("indep");
      forms.push_back("chain");
    }
    for (const auto& f : forms) {
      std::vector<std::string> notices;
      add("synthesis " + f, synthesize(file, f, tol, notices).residual, 1e-8);
    }
  }
  return checks;
}

inline int cmd_verify(const std::string& path, const Options& opt, std::ostream& out) {
  const SystemFile file = load_system(path, opt.tol, opt.mode);
  bool ok = true;
  for (const auto& c : verify(file, opt.tol)) {
    ok = ok && c.pass;
    out << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << num(c.value) << " (limit " << num(c.limit) << ")\n";
  }
  out << (ok ? "all checks passed\n" : "some checks failed\n");
  return ok ? 0 : 1;
}

}  // namespace qlsr::cli

#endif  // QLSR_CLI_HPP
