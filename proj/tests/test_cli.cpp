#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "corec/report_io.hpp"
#include "corec/scenarios.hpp"

using namespace corec;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

#ifndef CLI_BIN
#error "CLI_BIN must point at the cocycle-rectify binary"
#endif

struct Cmd {
  int exit_code;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "corec-cli-test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Cmd run(const std::string& args) {
  const fs::path out = work_dir() / "stdout.txt";
  const fs::path err = work_dir() / "stderr.txt";
  const std::string cmd = std::string(CLI_BIN) + " " + args + " >" +
                          out.string() + " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  Cmd r;
  r.exit_code = WEXITSTATUS(raw);
  r.out = read_text_file(out.string());
  r.err = read_text_file(err.string());
  return r;
}

std::string slurp(const fs::path& p) { return read_text_file(p.string()); }

}  // namespace

TEST_CASE("gen: writes a valid scenario; unknown template exits 2") {
  const fs::path sc = work_dir() / "s3.json";
  Cmd r = run("gen s3-gl2 --output " + sc.string());
  CHECK(r.exit_code == 0);
  Scenario parsed = scenario_from_json(json::parse(slurp(sc)));
  CHECK(parsed.name == "s3-gl2");

  r = run("gen not-a-template --output " + (work_dir() / "x.json").string());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("s3-gl2") != std::string::npos);  // lists templates
}

TEST_CASE("gen then rectify converges on every fast finite template") {
  for (const std::string name :
       {"s3-gl2", "q8-u2", "c4-twisted-r2", "c2c2-abelian-n2"}) {
    const fs::path sc = work_dir() / (name + ".json");
    REQUIRE(run("gen " + name + " --output " + sc.string()).exit_code == 0);
    const fs::path rep = work_dir() / (name + ".report.json");
    Cmd r = run("rectify " + sc.string() + " --output " + rep.string());
    CHECK(r.exit_code == 0);
    json j = json::parse(slurp(rep));
    CHECK(j.at("status") == "Converged");
    CHECK(j.at("final_defect").get<double>() <= 1e-12);
  }
  // Trace CSV sits next to the report.
  const std::string csv = slurp(work_dir() / "s3-gl2.report.trace.csv");
  CHECK(csv.rfind("iteration,defect\n", 0) == 0);
  CHECK_FALSE(fs::exists(work_dir() / "s3-gl2.report.json.tmp"));
}

TEST_CASE("rectify: epsilon above the admissible bound exits 5") {
  const fs::path sc = work_dir() / "s3c.json";
  REQUIRE(run("gen s3-gl2 --output " + sc.string()).exit_code == 0);
  json j = json::parse(slurp(sc));
  j["perturbation"]["epsilon"] = 0.5;
  atomic_write_file((work_dir() / "s3c.json").string(), j.dump(2));
  Cmd r = run("rectify " + sc.string() + " --output " +
              (work_dir() / "rep5.json").string());
  CHECK(r.exit_code == 5);
}

TEST_CASE("rectify: malformed scenario exits 2") {
  const fs::path bad = work_dir() / "bad.json";
  atomic_write_file(bad.string(), "{\"schema\": 1, \"group\": 7}");
  Cmd r = run("rectify " + bad.string() + " --output " +
              (work_dir() / "r.json").string());
  CHECK(r.exit_code == 2);
}

TEST_CASE("rectify: u1 template floors with exit 3") {
  const fs::path sc = work_dir() / "u1.json";
  REQUIRE(run("gen u1-u2 --output " + sc.string()).exit_code == 0);
  const fs::path rep = work_dir() / "u1rep.json";
  Cmd r = run("rectify " + sc.string() + " --output " + rep.string());
  CHECK(r.exit_code == 3);
  json j = json::parse(slurp(rep));
  CHECK(j.at("status") == "QuadratureFloor");
}

TEST_CASE("determinism: equal seeds give byte-identical reports sans timestamp") {
  const fs::path sc = work_dir() / "q8.json";
  REQUIRE(run("gen q8-u2 --output " + sc.string()).exit_code == 0);
  const fs::path r1 = work_dir() / "r1.json";
  const fs::path r2 = work_dir() / "r2.json";
  REQUIRE(run("rectify " + sc.string() + " --output " + r1.string()).exit_code == 0);
  REQUIRE(run("rectify " + sc.string() + " --output " + r2.string()).exit_code == 0);
  json a = json::parse(slurp(r1));
  json b = json::parse(slurp(r2));
  a.erase("timestamp");
  b.erase("timestamp");
  CHECK(a.dump() == b.dump());
  CHECK(slurp(work_dir() / "r1.trace.csv") == slurp(work_dir() / "r2.trace.csv"));
}

TEST_CASE("verify: exact table exits 0, reported defect is bit-consistent") {
  const fs::path sc_path = work_dir() / "s3v.json";
  REQUIRE(run("gen s3-gl2 --output " + sc_path.string()).exit_code == 0);
  Scenario sc = scenario_from_json(json::parse(slurp(sc_path)));
  Cochain base = base_cocycle(sc);
  const fs::path table = work_dir() / "table.json";
  atomic_write_file(table.string(), cochain_to_json(base).dump(2));
  const fs::path out = work_dir() / "verify.json";
  Cmd r = run("verify " + table.string() + " " + sc_path.string() +
              " --output " + out.string());
  CHECK(r.exit_code == 0);

  // Perturbed table: defect above tol, value matches the library's.
  Cochain pert = perturb(base, 1e-2, 99, "uniform-ball");
  std::vector<Matrix> tab;
  for (int i = 0; i < sc.group->order; ++i) {
    tab.push_back(pert(GroupElement::finite(i)));
  }
  Cochain pert_tabulated = Cochain::from_table(1, sc.group, sc.target,
                                               sc.action, tab,
                                               ValueSpace::GroupValued);
  atomic_write_file(table.string(), cochain_to_json(pert_tabulated).dump(2));
  r = run("verify " + table.string() + " " + sc_path.string() + " --output " +
          out.string());
  CHECK(r.exit_code == 1);
  const double reported = json::parse(slurp(out)).at("defect").get<double>();
  const double expected =
      defect(pert_tabulated, exhaustive_eval_set(sc.group, 2)).value;
  CHECK(reported == expected);

  // Wrong arity: malformed.
  json broken = cochain_to_json(pert_tabulated);
  broken["arity"] = 2;
  atomic_write_file(table.string(), broken.dump(2));
  r = run("verify " + table.string() + " " + sc_path.string());
  CHECK(r.exit_code == 2);
}

TEST_CASE("sweep: empty list, slope fit, and per-row isolation") {
  const fs::path sc = work_dir() / "s3s.json";
  REQUIRE(run("gen s3-gl2 --output " + sc.string()).exit_code == 0);
  const fs::path csv = work_dir() / "sweep.csv";

  Cmd r = run("sweep " + sc.string() + " --epsilons \"\" --output " + csv.string());
  CHECK(r.exit_code == 0);
  CHECK(slurp(csv) == "epsilon,final_defect,distance,fitted_order,status\n");

  r = run("sweep " + sc.string() +
          " --epsilons 1e-4,1e-3,1e-2 --jobs 2 --output " + csv.string());
  CHECK(r.exit_code == 0);
  json slope = json::parse(slurp(work_dir() / "sweep.slope.json"));
  CHECK(slope.at("slope_valid").get<bool>());
  CHECK(slope.at("slope").get<double>() >= 0.9);
  CHECK(slope.at("slope").get<double>() <= 1.1);

  // A too-large epsilon only fails its own row.
  r = run("sweep " + sc.string() + " --epsilons 1e-3,9e-2 --output " +
          csv.string());
  CHECK(r.exit_code == 0);
  std::istringstream lines(slurp(csv));
  std::string header, row1, row2;
  std::getline(lines, header);
  std::getline(lines, row1);
  std::getline(lines, row2);
  CHECK(row1.find("Converged") != std::string::npos);
  CHECK(row2.find("GateRejected") != std::string::npos);
}

TEST_CASE("selftest: passes, and flags a corrupted Cayley file") {
  Cmd r = run("selftest");
  CHECK(r.exit_code == 0);

  const fs::path bad = work_dir() / "bad_table.json";
  atomic_write_file(bad.string(),
                    R"({"order": 5, "table": [[0,1,2,3,4],[1,0,3,4,2],)"
                    R"([2,4,0,1,3],[3,2,4,0,1],[4,3,1,2,0]]})");
  r = run("selftest --cayley " + bad.string());
  CHECK(r.exit_code == 1);
  CHECK(r.out.find("associativity") != std::string::npos);
}

TEST_CASE("seed overrides: flag beats environment beats scenario") {
  const fs::path sc = work_dir() / "s3seed.json";
  REQUIRE(run("gen s3-gl2 --output " + sc.string()).exit_code == 0);
  const fs::path ra = work_dir() / "ra.json";
  const fs::path rb = work_dir() / "rb.json";
  const fs::path rc = work_dir() / "rc.json";
  REQUIRE(run("rectify " + sc.string() + " --seed 7 --output " + ra.string())
              .exit_code == 0);
  Cmd env_run = run("env COCYCLE_RECTIFIER_SEED=7 " + std::string(CLI_BIN) +
                        " rectify " + sc.string() + " --output " + rb.string() +
                        " >/dev/null 2>&1; echo done");
  (void)env_run;
  const int rb_code = WEXITSTATUS(
      std::system(("env COCYCLE_RECTIFIER_SEED=7 " + std::string(CLI_BIN) +
                   " rectify " + sc.string() + " --output " + rb.string() +
                   " >/dev/null 2>&1")
                      .c_str()));
  REQUIRE(rb_code == 0);
  REQUIRE(run("rectify " + sc.string() + " --output " + rc.string()).exit_code == 0);
  json a = json::parse(slurp(ra));
  json b = json::parse(slurp(rb));
  json c = json::parse(slurp(rc));
  CHECK(a.at("seed") == 7);
  CHECK(b.at("seed") == 7);
  CHECK(c.at("seed") == 42);  // scenario default
  a.erase("timestamp");
  b.erase("timestamp");
  CHECK(a.dump() == b.dump());
}
