#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "stabcert/checks.hpp"
#include "stabcert/config.hpp"

namespace stabcert {

inline constexpr const char* kToolVersion = "0.3.0";

enum ExitCode : int {
  kExitPass = 0,
  kExitCheckFailed = 1,
  kExitConfigError = 2,
  kExitBudgetExhausted = 3,
};

struct CsvTable {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct Report {
  RunConfig config;
  nlohmann::json results = nlohmann::json::object();
  std::vector<CsvTable> tables;
  std::string summary;
  std::string verdict;
  int exit_code = kExitPass;

  /// Complete document; only provenance.timestamp varies between identical runs.
  nlohmann::json document(const std::string& timestamp) const;
};

// Non-finite values are stored as the strings "inf", "-inf" and "nan".
nlohmann::json to_json(const ConstantsReport& r);
ConstantsReport constants_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CheckResult& c);
nlohmann::json to_json(const RieszMeanCurve& c);

/// Chain table in reading order: Omega/eps, theta_sup, U*max, F~max, C, A~, J,
/// margin, alpha_c.
std::string chain_summary(const ConstantsReport& r);

Report run_chain(const RunConfig& config);
Report run_optimize(const RunConfig& config);
Report run_verify(const RunConfig& config, std::size_t workers);
Report run_reproduce(const RunConfig& config);
Report run(const RunConfig& config, std::size_t workers);

std::string utc_timestamp();

/// Writes <output_path>.json and, when requested, <output_path>.<table>.csv.
/// Throws std::runtime_error on unwritable paths.
void emit_report(const Report& report, bool csv, const std::string& timestamp);
void write_csv(const CsvTable& table, std::ostream& out);

}  // namespace stabcert
