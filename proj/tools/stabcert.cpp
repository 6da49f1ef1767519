#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stabcert/config.hpp"
#include "stabcert/report.hpp"

namespace {

std::size_t worker_count() {
  if (const char* env = std::getenv("STABCERT_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw stabcert::ConfigError("STABCERT_WORKERS must be a positive integer, got '" + std::string(env) + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
  using namespace stabcert;

  CLI::App app{"Stability constants and lattice verification for relativistic magnetic matter"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string config_path;
  std::vector<std::string> sets;
  std::string output_path;
  bool csv = false;
  app.add_option("-c,--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("-s,--set", sets, "Override one setting, e.g. chain.alpha=1/137")->allow_extra_args(false);
  app.add_option("-o,--output", output_path, "Output path prefix for the report files");
  app.add_flag("--csv", csv, "Also write curves and profiles as CSV");

  auto* chain = app.add_subcommand("chain", "Compute the constant chain at one parameter point");
  bool solve = false;
  chain->add_flag("--alpha-c", solve, "Also solve for the critical coupling");

  app.add_subcommand("optimize", "Search profile and chain parameters for the largest critical coupling");

  auto* verify = app.add_subcommand("verify", "Run the lattice verification battery");
  std::string suite;
  bool supercritical = false;
  verify->add_option("--suite", suite, "exact, continuum or all")->check(CLI::IsMember({"exact", "continuum", "all"}));
  verify->add_flag("--supercritical", supercritical, "Add the supercritical Kato trend as an informational check");

  app.add_subcommand("reproduce-paper", "Recompute the published constants and critical couplings");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();
  CLI11_PARSE(app, argc, argv);

  const std::string mode = app.get_subcommands().front()->get_name();
  try {
    nlohmann::json document = mode == "reproduce-paper" ? reproduce_paper_preset() : nlohmann::json::object();
    if (!config_path.empty()) document.merge_patch(load_json_file(config_path));

    std::vector<std::string> assignments{"mode=\"" + mode + "\""};
    if (solve) assignments.push_back("chain.solve_alpha_c=true");
    if (!suite.empty()) assignments.push_back("suite=\"" + suite + "\"");
    if (supercritical) assignments.push_back("lattice.kato.include_supercritical=true");
    if (csv) assignments.push_back("output.csv=true");
    if (!output_path.empty()) assignments.push_back("output_path=" + nlohmann::json(output_path).dump());
    assignments.insert(assignments.end(), sets.begin(), sets.end());

    const RunConfig config = resolve_config(document, assignments);
    const Report report = run(config, worker_count());
    std::cout << report.summary;
    emit_report(report, config.output.csv, utc_timestamp());
    std::cout << "report written to " << config.output_path << ".json\n";
    return report.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}
