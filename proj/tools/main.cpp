// cocycle-rectify: deform almost-cocycles on compact groups into exact
// cocycles and report the convergence diagnostics.
//
// Exit codes: 0 success/Converged; 2 malformed input or unknown template;
// 3 QuadratureFloor; 4 Diverged or ChartError; 5 GateRejected;
// 1 internal error (selftest failures also exit 1).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "corec/report_io.hpp"
#include "corec/scenarios.hpp"
#include "corec/selftest.hpp"

namespace {

using namespace corec;
using nlohmann::json;

int status_exit_code(RectifyStatus s) {
  switch (s) {
    case RectifyStatus::Converged:
      return 0;
    case RectifyStatus::QuadratureFloor:
      return 3;
    case RectifyStatus::Diverged:
    case RectifyStatus::ChartError:
      return 4;
    case RectifyStatus::GateRejected:
      return 5;
  }
  return 1;
}

std::string sibling_path(const std::string& output, const std::string& suffix) {
  std::filesystem::path p(output);
  p.replace_extension();
  p += suffix;
  return p.string();
}

Scenario load_scenario(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw FormatError(std::string("cannot parse '") + path + "': " + e.what());
  }
  return scenario_from_json(j);
}

struct Overrides {
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::uint64_t> seed;
};

void apply_overrides(Scenario& sc, const Overrides& ov) {
  if (ov.tol) sc.settings.tol = *ov.tol;
  if (ov.max_iter) sc.settings.max_iter = *ov.max_iter;
  if (ov.seed) {
    sc.perturbation.seed = *ov.seed;
  } else if (const char* env = std::getenv("COCYCLE_RECTIFIER_SEED")) {
    sc.perturbation.seed = std::strtoull(env, nullptr, 10);
  }
}

std::vector<double> parse_epsilons(const std::string& list) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < list.size()) {
    std::size_t comma = list.find(',', pos);
    if (comma == std::string::npos) comma = list.size();
    const std::string tok = list.substr(pos, comma - pos);
    if (!tok.empty()) {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw FormatError("bad epsilon '" + tok + "'");
      out.push_back(v);
    }
    pos = comma + 1;
  }
  return out;
}

int cmd_gen(const std::string& tmpl, const std::string& output) {
  Scenario sc;
  try {
    sc = template_scenario(tmpl);
  } catch (const FormatError&) {
    std::cerr << "unknown template '" << tmpl << "'; available:";
    for (const auto& n : template_names()) std::cerr << " " << n;
    std::cerr << "\n";
    return 2;
  }
  atomic_write_file(output, scenario_to_json(sc).dump(2) + "\n");
  std::cout << "wrote " << output << "\n";
  return 0;
}

int cmd_rectify(const std::string& scenario_path, const std::string& output,
                const Overrides& ov) {
  Scenario sc;
  try {
    sc = load_scenario(scenario_path);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  apply_overrides(sc, ov);
  if (sc.perturbation.epsilon > 0.1) {
    // Outside the perturbation model, hence outside any admissible input
    // neighborhood: reject before running.
    std::cerr << "gate: epsilon " << sc.perturbation.epsilon
              << " exceeds the perturbation bound 0.1\n";
    return 5;
  }
  RunResult rr = run_scenario(sc);
  const json rep = report_to_json(rr.report, sc.perturbation.seed, sc.settings);
  atomic_write_file(output, rep.dump(2) + "\n");
  atomic_write_file(sibling_path(output, ".trace.csv"), trace_csv(rr.report));
  std::cout << "status " << status_name(rr.report.status) << ", final defect "
            << rr.report.final_defect << ", distance " << rr.report.distance
            << "\n";
  return status_exit_code(rr.report.status);
}

int cmd_verify(const std::string& cochain_path, const std::string& scenario_path,
               const Overrides& ov, const std::string& output) {
  Scenario sc;
  Cochain rho;
  try {
    sc = load_scenario(scenario_path);
    apply_overrides(sc, ov);
    const json cj = json::parse(read_text_file(cochain_path));
    rho = cochain_from_json(cj, sc.group, sc.target, sc.action);
  } catch (const json::exception& e) {
    std::cerr << "error: cannot parse '" << cochain_path << "': " << e.what()
              << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const KindMismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  const HaarScheme scheme = haar_scheme(*sc.group);
  const EvaluationSet eval = default_eval_set(
      sc.group, scheme, rho.arity() + 1, sc.settings.eval_seed,
      sc.settings.lie_random_tuples, sc.settings.lie_node_tuple_cap);
  DefectResult d;
  std::string gate = "pass";
  try {
    d = defect(rho, eval);
    if (!sc.target->abelian()) {
      const GateResult g = gate_check(rho, sc.settings, scheme);
      if (!g.pass) gate = "reject: " + g.reason;
    }
  } catch (const BranchCutError& e) {
    std::cerr << "defect outside chart: " << e.what() << "\n";
    return 1;
  }
  std::cout << "defect " << d.value << " at tuple " << describe_tuple(d.argmax)
            << "\ngate " << gate << "\n";
  if (!output.empty()) {
    const json j = {{"schema", 1},
                    {"defect", d.value},
                    {"argmax", describe_tuple(d.argmax)},
                    {"gate", gate},
                    {"tol", sc.settings.tol}};
    atomic_write_file(output, j.dump(2) + "\n");
  }
  return d.value <= sc.settings.tol ? 0 : 1;
}

int cmd_sweep(const std::string& scenario_path, const std::string& epsilons,
              const std::string& output, int jobs, const Overrides& ov) {
  Scenario sc;
  std::vector<double> eps;
  try {
    sc = load_scenario(scenario_path);
    eps = parse_epsilons(epsilons);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument&) {
    std::cerr << "error: bad --epsilons list\n";
    return 2;
  }
  apply_overrides(sc, ov);
  const SweepResult res = sweep(sc, eps, jobs);
  atomic_write_file(output, sweep_csv(res));
  atomic_write_file(sibling_path(output, ".slope.json"),
                    sweep_to_json(res).dump(2) + "\n");
  std::cout << "rows " << res.rows.size();
  if (res.slope_valid) std::cout << ", distance slope " << res.slope;
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deform almost-cocycles on compact groups into exact cocycles"};
  app.require_subcommand(1);

  std::string tmpl, scenario_path, cochain_path, output, epsilons;
  Overrides ov;
  double tol_flag = 0.0;
  int max_iter_flag = 0;
  std::uint64_t seed_flag = 0;
  int jobs = 1;
  std::string cayley_path;

  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--tol", tol_flag, "override target defect");
    cmd->add_option("--max-iter", max_iter_flag, "override iteration cap");
    cmd->add_option("--seed", seed_flag,
                    "override perturbation seed (falls back to "
                    "COCYCLE_RECTIFIER_SEED)");
  };
  auto collect_overrides = [&](CLI::App* cmd) {
    if (cmd->count("--tol")) ov.tol = tol_flag;
    if (cmd->count("--max-iter")) ov.max_iter = max_iter_flag;
    if (cmd->count("--seed")) ov.seed = seed_flag;
  };

  CLI::App* gen = app.add_subcommand("gen", "write a built-in scenario file");
  gen->add_option("template", tmpl, "template name")->required();
  gen->add_option("--output,-o", output, "scenario path")->required();

  CLI::App* rec = app.add_subcommand("rectify", "run the deformation");
  rec->add_option("scenario", scenario_path, "scenario JSON")->required();
  rec->add_option("--output,-o", output, "report JSON path")->required();
  add_overrides(rec);

  CLI::App* ver = app.add_subcommand("verify", "measure a cochain's defect");
  ver->add_option("cochain", cochain_path, "cochain table JSON")->required();
  ver->add_option("scenario", scenario_path, "scenario JSON for context")
      ->required();
  ver->add_option("--output,-o", output, "optional defect report path");
  add_overrides(ver);

  CLI::App* swp = app.add_subcommand("sweep", "rectify across epsilons");
  swp->add_option("scenario", scenario_path, "scenario JSON")->required();
  swp->add_option("--epsilons", epsilons, "comma-separated list")->required();
  swp->add_option("--output,-o", output, "sweep CSV path")->required();
  swp->add_option("--jobs", jobs, "worker pool size");
  add_overrides(swp);

  CLI::App* st = app.add_subcommand("selftest", "run the oracle suite");
  st->add_option("--cayley", cayley_path, "also validate a Cayley table JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(tmpl, output);
    if (rec->parsed()) {
      collect_overrides(rec);
      return cmd_rectify(scenario_path, output, ov);
    }
    if (ver->parsed()) {
      collect_overrides(ver);
      return cmd_verify(cochain_path, scenario_path, ov, output);
    }
    if (swp->parsed()) {
      collect_overrides(swp);
      return cmd_sweep(scenario_path, epsilons, output, jobs, ov);
    }
    if (st->parsed()) {
      std::optional<std::string> cayley;
      if (!cayley_path.empty()) cayley = cayley_path;
      return corec::run_selftest(std::cout, cayley) ? 0 : 1;
    }
  } catch (const corec::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
