// qlsr: analysis and synthesis of quantum linear systems from JSON system files.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qlsr/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Analysis and realization synthesis for quantum linear systems"};
  app.require_subcommand(1);

  std::vector<std::string> tol_overrides;
  bool repair = false;
  app.add_option("--tol", tol_overrides,
                 "Tolerance override key=value (keys: rank, orth, pr, inv, subspace, eig, cluster, coup, tf, "
                 "pole_guard); a bare number sets rank. Applied after QLSR_TOL.")
      ->take_all();
  app.add_flag("--repair", repair, "Symmetrize nearly Hermitian / symmetric Omega blocks instead of rejecting them");

  std::string path;
  bool json = false;
  std::string report_out;
  auto* analyze = app.add_subcommand("analyze", "Structural, stability and minimality report");
  analyze->add_option("file", path, "System file")->required();
  analyze->add_flag("--json", json, "Print the report as JSON");
  analyze->add_option("-o,--output", report_out, "Also write the JSON report to this file");

  std::string form;
  std::string out;
  auto* synth = app.add_subcommand("synthesize", "Build an equivalent realization");
  synth->add_option("file", path, "System file")->required();
  synth->add_option("--form", form, "Realization form")
      ->required()
      ->check(CLI::IsMember({"cascade", "mimo", "indep", "chain"}));
  synth->add_option("-o,--output", out, "Artifact file (default: stdout)");

  std::optional<double> wmin, wmax;
  std::optional<int> points;
  auto* freq = app.add_subcommand("freqresp", "Frequency sweep as CSV");
  freq->add_option("file", path, "System file")->required();
  freq->add_option("--wmin", wmin, "Lowest frequency (log spacing when 0 < wmin < wmax)");
  freq->add_option("--wmax", wmax, "Highest frequency");
  freq->add_option("--points", points, "Number of frequencies (default 201)");
  freq->add_option("-o,--output", out, "CSV file (default: stdout)");

  auto* verify = app.add_subcommand("verify", "Run the invariant suite on one system");
  verify->add_option("file", path, "System file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    qlsr::cli::Options opt;
    if (const char* env = std::getenv("QLSR_TOL")) opt.tol.apply_list(env);
    for (const auto& t : tol_overrides) opt.tol.apply(t);
    if (repair) opt.mode = qlsr::Validation::repair;

    if (*analyze) return qlsr::cli::cmd_analyze(path, opt, std::cout, json, report_out);
    if (*synth) return qlsr::cli::cmd_synthesize(path, form, out, opt, std::cout, std::cerr);
    if (*freq) return qlsr::cli::cmd_freqresp(path, wmin, wmax, points, out, opt, std::cout);
    if (*verify) return qlsr::cli::cmd_verify(path, opt, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "qlsr: error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
