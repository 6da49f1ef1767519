#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "stabcert/chain.hpp"

namespace stabcert {

/// Invalid or inconsistent configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunMode { chain, optimize, verify, reproduce_paper };
enum class Suite { exact, continuum, all };

std::string to_string(RunMode m);
std::string to_string(Suite s);
RunMode parse_mode(const std::string& s);
Suite parse_suite(const std::string& s);

/// Settings of the lattice identities on one periodic grid.
struct ExactSettings {
  int n = 12;
  double spacing = 0.25;
  int random_fields = 5;
  double field_amplitude = 2.0;
  std::vector<double> times{0.1, 0.5, 1.0, 2.0};
  double uniform_b = 1.0;
  double trace_radius = 1.0;
  double ims_time = 0.5;
  int ims_vectors = 20;
  std::vector<double> transfer_lambdas{0.5, 1.0, 4.0};
};

/// Riesz-mean and localization checks. Ball grids use spacing proportional to
/// the radius so every ball is resolved alike.
struct ContinuumSettings {
  int n = 14;
  double spacing_per_radius = 0.25;
  std::vector<double> radii{0.5, 1.0};
  int lambda_points = 40;
  double uniform_b = 1.0;
  int localization_n = 12;
  double localization_spacing = 0.25;
  int density_seeds = 10;
  int density_rank = 10;
  double density_bound = 2.0;
  int lowest_modes = 5;
};

struct KatoSettings {
  std::vector<int> sizes{10, 12, 14};
  double extent = 3.0;
  double radius = 1.0;
  double supercritical_factor = 1.2;
  /// Adds the supercritical trend as an informational, expected-fail entry.
  bool include_supercritical = false;
};

struct LatticeSettings {
  ExactSettings exact;
  ContinuumSettings continuum;
  KatoSettings kato;
};

struct ProfileSettings {
  double plateau = 0.4;
  double h_exponent = 0.5;
};

struct OutputSettings {
  bool csv = false;
  int profile_samples = 100;
};

struct RunConfig {
  RunMode mode = RunMode::chain;
  ChainParams chain;
  bool solve_alpha_c = false;
  /// Spin multiplicities whose critical coupling reproduce-paper solves for.
  std::vector<int> spin_states{1, 2};
  ProfileSettings profile;
  Overrides overrides;
  QuadratureConfig quadrature;
  SupSearch sup_search;
  /// Search settings; the start point is taken from chain and profile.
  OptimizeOptions optimize;
  LatticeSettings lattice;
  Suite suite = Suite::all;
  OutputSettings output;
  std::string output_path = "stabcert_report";
  std::uint64_t seed = 1;

  CutoffProfile cutoff_profile() const { return CutoffProfile(chain.sigma, profile.plateau, profile.h_exponent); }
  OptimizeOptions optimize_options() const;
  /// Validates every sub-configuration; throws ConfigError.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
/// Strict conversion: unknown keys and wrongly typed values raise ConfigError.
RunConfig config_from_json(const nlohmann::json& j);

/// Defaults, then `document` merged over them, then each "dotted.path=value"
/// assignment. Values parse as JSON and fall back to strings; numbers may be
/// written as "1/66.5".
RunConfig resolve_config(const nlohmann::json& document, const std::vector<std::string>& assignments);
nlohmann::json load_json_file(const std::string& path);

/// The shipped preset for reproducing the published chain.
nlohmann::json reproduce_paper_preset();

}  // namespace stabcert
