#include <catch_amalgamated.hpp>

#include <filesystem>

#include "golden_compare.hpp"
#include "test_support.hpp"

using namespace qlsr;
using namespace qlsr::testing;

namespace {

const std::string kCli = QLSR_CLI_PATH;
const std::string kFixtures = QLSR_FIXTURE_DIR;
const std::string kGolden = QLSR_GOLDEN_DIR;

std::string fixture(const std::string& name) { return kFixtures + "/" + name; }

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("qlsr_test_cli_" + name)).string();
}

int qlsr_run(const std::string& args, std::string& out) { return run_command(kCli + " " + args, out); }

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) s.replace(pos, from.size(), to);
  return s;
}

struct GoldenCase {
  std::string name;
  std::string args;
};

std::vector<GoldenCase> golden_cases() {
  std::vector<GoldenCase> cases;
  std::istringstream in(slurp(kGolden + "/cases.txt"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    cases.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return cases;
}

std::vector<double> csv_column(const std::string& csv, std::size_t col) {
  std::vector<double> v;
  const auto rows = csv_rows(csv);
  for (std::size_t r = 1; r < rows.size(); ++r) v.push_back(std::strtod(rows[r][col].c_str(), nullptr));
  return v;
}

}  // namespace

TEST_CASE("CLI outputs match the golden files") {
  const auto cases = golden_cases();
  REQUIRE(cases.size() >= 15);
  for (const auto& c : cases) {
    CAPTURE(c.name, c.args);
    const std::string out_path = temp_path(c.name);
    const std::string args = replace_all(replace_all(c.args, "{fixtures}", kFixtures), "{out}", out_path);
    std::string stdout_text;
    REQUIRE(qlsr_run(args, stdout_text) == 0);
    const bool to_file = c.args.find("{out}") != std::string::npos;
    const std::string got = to_file ? slurp(out_path) : stdout_text;
    std::remove(out_path.c_str());
    const std::string want = slurp(kGolden + "/" + c.name);
    const bool csv = c.name.size() > 4 && c.name.substr(c.name.size() - 4) == ".csv";
    const std::string mismatch =
        csv ? csv_mismatch(got, want, 1e-9) : json_mismatch(Json::parse(got), Json::parse(want), 1e-9);
    CHECK(mismatch == "");
  }
}

TEST_CASE("analyze reports findings with exit code 0") {
  std::string out;
  CHECK(qlsr_run("analyze " + fixture("zero_coupling.json"), out) == 0);
  CHECK(out.find("n_min: 0") != std::string::npos);
  CHECK(qlsr_run("analyze --json " + fixture("df.json"), out) == 0);
  const Json j = Json::parse(out);
  CHECK(j["decoherence_free"]["pairs"] == 1);
  CHECK(j["controllable"] == false);
  CHECK(j["observable"] == false);
  CHECK(qlsr_run("analyze --json " + fixture("minimal_siso.json"), out) == 0);
  const Json k = Json::parse(out);
  CHECK(k["passive"]["hurwitz"] == true);
  CHECK(k["passive"]["n_min"] == 2);
}

TEST_CASE("analyze writes the JSON report with -o") {
  const std::string path = temp_path("report.json");
  std::string out;
  REQUIRE(qlsr_run("analyze " + fixture("mimo.json") + " -o " + path, out) == 0);
  const Json j = Json::parse(slurp(path));
  std::remove(path.c_str());
  CHECK(j["m"] == 2);
}

TEST_CASE("errors exit with status 2 and a message") {
  std::string out;
  CHECK(qlsr_run("analyze " + fixture("non_hermitian.json"), out) == 2);
  CHECK(out.find("Omega_minus") != std::string::npos);
  CHECK(qlsr_run("synthesize " + fixture("mimo.json") + " --form indep -o " + temp_path("x.json"), out) == 2);
  CHECK(out.find("requires single-input single-output") != std::string::npos);
  CHECK(qlsr_run("synthesize " + fixture("general.json") + " --form cascade", out) == 2);
  CHECK(qlsr_run("analyze " + fixture("missing.json"), out) == 2);
  CHECK(qlsr_run("--tol bogus=1 analyze " + fixture("df.json"), out) == 2);
  CHECK(qlsr_run("synthesize " + fixture("df.json") + " --form nope", out) != 0);
}

TEST_CASE("tolerance overrides from flag and environment") {
  std::string out;
  // A huge coupling floor hides every mode.
  CHECK(qlsr_run("--tol coup=1e6 analyze --json " + fixture("minimal_siso.json"), out) == 0);
  CHECK(Json::parse(out)["passive"]["n_min"] == 0);
  CHECK(run_command("QLSR_TOL=coup=1e6 " + kCli + " analyze --json " + fixture("minimal_siso.json"), out) == 0);
  CHECK(Json::parse(out)["passive"]["n_min"] == 0);
  // The flag wins over the environment.
  CHECK(run_command("QLSR_TOL=coup=1e6 " + kCli + " --tol coup=1e-10 analyze --json " + fixture("minimal_siso.json"),
                    out) == 0);
  CHECK(Json::parse(out)["passive"]["n_min"] == 2);
}

TEST_CASE("repair flag accepts a nearly Hermitian file") {
  const std::string path = temp_path("near.json");
  write_text_file(path, R"({"kind": "passive", "m": 1, "n": 2, "S": [[1]], "C_minus": [[1, 1]],
    "Omega_minus": [[1, [0.2, 1e-7]], [0.2, 2]]})");
  std::string out;
  CHECK(qlsr_run("analyze " + path, out) == 2);
  CHECK(qlsr_run("--repair analyze " + path, out) == 0);
  std::remove(path.c_str());
}

TEST_CASE("synthesis artifact residual matches an independent re-evaluation") {
  for (const char* form : {"cascade", "mimo", "indep", "chain"}) {
    CAPTURE(form);
    const std::string path = temp_path(std::string("artifact_") + form + ".json");
    std::string out;
    REQUIRE(qlsr_run("synthesize " + fixture("degenerate.json") + " --form " + form + " -o " + path, out) == 0);
    const Json art = Json::parse(slurp(path));
    std::remove(path.c_str());
    const PassiveSystem src = load_system(fixture("degenerate.json")).as_passive();
    const PassiveSystem real = system_from_json(art["realization"], {}, Validation::repair).as_passive();
    CMat rot = CMat::Identity(1, 1);
    if (art.contains("field_transform")) rot = matrix_from_json(art["field_transform"], "field_transform", 1, 1);
    const RationalMatrix g = transfer_of(src), h = transfer_of(real);
    double worst = 0.0;
    for (double w : standard_grid(g)) {
      const cdouble s{0.0, w};
      if (g.pole_near(s) || h.pole_near(s)) continue;
      const CMat a = g(s);
      worst = std::max(worst, opnorm(a - rot.adjoint() * h(s) * rot) / std::max(1.0, opnorm(a)));
    }
    const double recorded = art["verification"]["max_transfer_residual"].get<double>();
    CHECK(art["verification"]["pass"] == true);
    CHECK(worst <= 1e-8);
    CHECK(std::abs(worst - recorded) <= 1e-12);
  }
}

TEST_CASE("chain synthesis on a non-minimal input emits a notice") {
  const std::string path = temp_path("chain_notice.json");
  std::string out;
  REQUIRE(qlsr_run("synthesize " + fixture("degenerate.json") + " --form chain -o " + path, out) == 0);
  CHECK(out.find("minimal subsystem") != std::string::npos);
  const Json art = Json::parse(slurp(path));
  std::remove(path.c_str());
  CHECK(art["realization"]["n"] == 2);
  CHECK_FALSE(art["notices"].empty());
}

TEST_CASE("frequency sweeps") {
  std::string out;
  REQUIRE(qlsr_run("freqresp " + fixture("single_mode.json") + " --wmin 0.001 --wmax 1000 --points 61", out) == 0);
  const auto re = csv_column(out, 1), im = csv_column(out, 2);
  REQUIRE(re.size() == 61);
  for (std::size_t k = 0; k < re.size(); ++k) CHECK(std::abs(std::hypot(re[k], im[k]) - 1.0) <= 1e-10);

  REQUIRE(qlsr_run("freqresp " + fixture("zero_coupling.json") + " --wmin 1.5 --wmax 3 --points 4", out) == 0);
  for (double v : csv_column(out, 1)) CHECK(v == 1.0);

  REQUIRE(qlsr_run("freqresp " + fixture("mimo.json"), out) == 0);
  CHECK(csv_rows(out).size() == 404);
  CHECK(csv_rows(out)[0].size() == 11);
}

TEST_CASE("sweeps of unitarily equivalent systems agree row by row") {
  Rng rng(91);
  const PassiveSystem src = load_system(fixture("mimo.json")).as_passive();
  const PassiveSystem rotated = rotate_modes(src, random_unitary(src.n(), rng));
  const std::string path = temp_path("rotated.json");
  save_system(path, SystemFile{rotated, Json::object()});
  std::string a, b;
  REQUIRE(qlsr_run("freqresp " + fixture("mimo.json") + " --wmin 0.01 --wmax 100 --points 101", a) == 0);
  REQUIRE(qlsr_run("freqresp " + path + " --wmin 0.01 --wmax 100 --points 101", b) == 0);
  std::remove(path.c_str());
  const auto ra = csv_rows(a), rb = csv_rows(b);
  REQUIRE(ra.size() == rb.size());
  for (std::size_t r = 1; r < ra.size(); ++r)
    for (std::size_t c = 0; c < 9; ++c)
      CHECK(std::abs(std::strtod(ra[r][c].c_str(), nullptr) - std::strtod(rb[r][c].c_str(), nullptr)) <= 1e-9);
}

TEST_CASE("verify runs the invariant suite") {
  std::string out;
  for (const char* name : {"single_mode.json", "df.json", "mimo.json", "degenerate.json", "general.json", "qnd.json"}) {
    CAPTURE(name);
    CHECK(qlsr_run("verify " + fixture(name), out) == 0);
    CHECK(out.find("FAIL") == std::string::npos);
  }
  // Shrinking the transfer-identity tolerance below roundoff makes a check fail.
  CHECK(qlsr_run("--tol tf=1e-300 verify " + fixture("mimo.json"), out) == 1);
}
