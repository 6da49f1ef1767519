#include "stabcert/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "stabcert/lattice.hpp"
#include "stabcert/preset_data.hpp"

namespace stabcert {

using nlohmann::json;

std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::chain: return "chain";
    case RunMode::optimize: return "optimize";
    case RunMode::verify: return "verify";
    case RunMode::reproduce_paper: return "reproduce-paper";
  }
  return "chain";
}

std::string to_string(Suite s) {
  switch (s) {
    case Suite::exact: return "exact";
    case Suite::continuum: return "continuum";
    case Suite::all: return "all";
  }
  return "all";
}

RunMode parse_mode(const std::string& s) {
  for (RunMode m : {RunMode::chain, RunMode::optimize, RunMode::verify, RunMode::reproduce_paper})
    if (to_string(m) == s) return m;
  throw ConfigError("mode: unknown value '" + s + "' (chain, optimize, verify, reproduce-paper)");
}

Suite parse_suite(const std::string& s) {
  for (Suite v : {Suite::exact, Suite::continuum, Suite::all})
    if (to_string(v) == s) return v;
  throw ConfigError("suite: unknown value '" + s + "' (exact, continuum, all)");
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

/// Typed access to a resolved document; every failure names the dotted path.
class Reader {
 public:
  explicit Reader(const json& root) : root_(root) {}

  const json& at(const std::string& path) const {
    const json* node = &root_;
    std::istringstream parts(path);
    std::string key;
    while (std::getline(parts, key, '.')) {
      if (!node->is_object() || !node->contains(key)) throw ConfigError(path + ": missing");
      node = &(*node)[key];
    }
    return *node;
  }

  double number(const std::string& path) const { return to_number(at(path), path); }

  std::optional<double> optional(const std::string& path) const {
    const json& v = at(path);
    if (v.is_null()) return std::nullopt;
    return to_number(v, path);
  }

  int integer(const std::string& path) const {
    const json& v = at(path);
    if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
    return v.get<int>();
  }

  std::uint64_t unsigned_integer(const std::string& path) const {
    const json& v = at(path);
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(path + ": expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& path) const {
    const json& v = at(path);
    if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& path) const {
    const json& v = at(path);
    if (!v.is_string()) throw ConfigError(path + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& path) const {
    const json& v = at(path);
    if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  std::vector<int> integers(const std::string& path) const {
    const json& v = at(path);
    if (!v.is_array()) throw ConfigError(path + ": expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) throw ConfigError(path + "[" + std::to_string(i) + "]: expected an integer");
      out.push_back(v[i].get<int>());
    }
    return out;
  }

  template <std::size_t N>
  std::array<double, N> fixed_numbers(const std::string& path) const {
    const auto v = numbers(path);
    if (v.size() != N) throw ConfigError(path + ": expected " + std::to_string(N) + " entries");
    std::array<double, N> out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
  }

  template <std::size_t N>
  std::array<bool, N> fixed_booleans(const std::string& path) const {
    const json& v = at(path);
    if (!v.is_array() || v.size() != N) throw ConfigError(path + ": expected " + std::to_string(N) + " booleans");
    std::array<bool, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
      if (!v[i].is_boolean()) throw ConfigError(path + "[" + std::to_string(i) + "]: expected true or false");
      out[i] = v[i].get<bool>();
    }
    return out;
  }

 private:
  static double to_number(const json& v, const std::string& path) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      const auto slash = s.find('/');
      try {
        std::size_t used = 0;
        if (slash == std::string::npos) {
          const double x = std::stod(s, &used);
          if (used == s.size()) return x;
        } else {
          const std::string num = s.substr(0, slash), den = s.substr(slash + 1);
          std::size_t u1 = 0, u2 = 0;
          const double a = std::stod(num, &u1), b = std::stod(den, &u2);
          if (u1 == num.size() && u2 == den.size() && b != 0.0) return a / b;
        }
      } catch (const std::exception&) {
      }
    }
    throw ConfigError(path + ": expected a number");
  }

  const json& root_;
};

void merge_checked(json& base, const json& patch, const std::string& path) {
  if (!patch.is_object()) throw ConfigError((path.empty() ? std::string("configuration") : path) + ": expected an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError(key + ": unknown configuration key");
    json& target = base[it.key()];
    if (target.is_object()) {
      merge_checked(target, it.value(), key);
    } else {
      target = it.value();
    }
  }
}

void assign_dotted(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set " + assignment + ": expected key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json* node = &root;
  std::istringstream parts(path);
  std::string key;
  while (std::getline(parts, key, '.')) {
    if (!node->is_object() || !node->contains(key)) throw ConfigError(path + ": unknown configuration key");
    node = &(*node)[key];
  }
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  if (node->is_object()) throw ConfigError(path + ": cannot replace a whole section");
  *node = value;
}

template <class F>
void guarded(const std::string& field, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void require_grid(int n, double spacing, const std::string& path) {
  require(n >= 2, path + ".n must be at least 2");
  guarded(path, [&] { LatticeGrid{n, spacing}.validate(); });
}

}  // namespace

OptimizeOptions RunConfig::optimize_options() const {
  OptimizeOptions o = optimize;
  o.start = {chain.sigma, chain.eps, chain.lambda, profile.plateau, profile.h_exponent};
  o.q = chain.q;
  o.overrides = overrides;
  o.search = sup_search;
  return o;
}

void RunConfig::validate() const {
  guarded("chain", [&] { chain.validate(); });
  guarded("profile", [&] { (void)cutoff_profile(); });
  guarded("quad", [&] { quadrature.validate(); });
  require(sup_search.grid_points >= 2, "sup_search.grid_points must be at least 2");
  require(sup_search.golden_tol > 0.0, "sup_search.golden_tol must be positive");
  if (overrides.omega_over_eps) require(*overrides.omega_over_eps >= 0.0, "overrides.omega_over_eps must be nonnegative");
  if (overrides.theta_sup) require(*overrides.theta_sup >= 0.0, "overrides.theta_sup must be nonnegative");
  if (overrides.j_value) require(*overrides.j_value >= 0.0, "overrides.j_value must be nonnegative");
  require(!spin_states.empty(), "reproduce.spin_states must not be empty");
  for (int q : spin_states) require(q >= 1, "reproduce.spin_states entries must be at least 1");

  require(optimize.max_evaluations >= 1, "optimize.max_evaluations must be positive");
  require(optimize.x_tol > 0.0 && optimize.f_tol > 0.0, "optimize.x_tol and optimize.f_tol must be positive");
  for (double s : optimize.step) require(s > 0.0, "optimize.step entries must be positive");

  const auto& ex = lattice.exact;
  require_grid(ex.n, ex.spacing, "lattice.exact");
  require(ex.random_fields >= 1, "lattice.exact.random_fields must be at least 1");
  require(ex.field_amplitude >= 0.0, "lattice.exact.field_amplitude must be nonnegative");
  require(!ex.times.empty(), "lattice.exact.times must not be empty");
  for (double t : ex.times) require(t > 0.0, "lattice.exact.times entries must be positive");
  require(ex.trace_radius > 0.0, "lattice.exact.trace_radius must be positive");
  require(ex.ims_time > 0.0, "lattice.exact.ims_time must be positive");
  require(ex.ims_vectors >= 1, "lattice.exact.ims_vectors must be at least 1");
  for (double l : ex.transfer_lambdas) require(l > 0.0, "lattice.exact.transfer_lambdas entries must be positive");

  const auto& co = lattice.continuum;
  require(co.spacing_per_radius > 0.0, "lattice.continuum.spacing_per_radius must be positive");
  require(!co.radii.empty(), "lattice.continuum.radii must not be empty");
  for (double r : co.radii) {
    require(r > 0.0, "lattice.continuum.radii entries must be positive");
    require_grid(co.n, co.spacing_per_radius * r, "lattice.continuum");
  }
  require(co.lambda_points >= 1, "lattice.continuum.lambda_points must be at least 1");
  require_grid(co.localization_n, co.localization_spacing, "lattice.continuum.localization");
  require(co.density_seeds >= 0, "lattice.continuum.density_seeds must be nonnegative");
  require(co.density_rank >= 0 && co.density_rank <= std::pow(co.localization_n, 3),
          "lattice.continuum.density_rank must lie in [0, sites]");
  require(co.density_bound >= 0.0, "lattice.continuum.density_bound must be nonnegative");
  require(co.lowest_modes >= 0 && co.lowest_modes <= std::pow(co.localization_n, 3),
          "lattice.continuum.lowest_modes must lie in [0, sites]");

  const auto& ka = lattice.kato;
  require(ka.sizes.size() >= 3, "lattice.kato.sizes needs at least three grids");
  for (std::size_t i = 0; i < ka.sizes.size(); ++i) {
    require_grid(ka.sizes[i], ka.extent / ka.sizes[i], "lattice.kato");
    if (i) require(ka.sizes[i] > ka.sizes[i - 1], "lattice.kato.sizes must increase");
  }
  require(ka.extent > 0.0 && ka.radius > 0.0, "lattice.kato.extent and radius must be positive");
  require(ka.supercritical_factor > 1.0, "lattice.kato.supercritical_factor must exceed 1");

  require(output.profile_samples >= 1, "output.profile_samples must be at least 1");
  require(!output_path.empty(), "output_path must not be empty");
}

json to_json(const RunConfig& c) {
  json j;
  j["mode"] = to_string(c.mode);
  j["chain"] = {{"sigma", c.chain.sigma},   {"eps", c.chain.eps}, {"lambda", c.chain.lambda},
                {"alpha", c.chain.alpha},   {"q", c.chain.q},     {"solve_alpha_c", c.solve_alpha_c}};
  j["reproduce"] = {{"spin_states", c.spin_states}};
  j["profile"] = {{"plateau", c.profile.plateau}, {"h_exponent", c.profile.h_exponent}};
  j["overrides"] = {{"omega_over_eps", optional_number(c.overrides.omega_over_eps)},
                    {"theta_sup", optional_number(c.overrides.theta_sup)},
                    {"j_value", optional_number(c.overrides.j_value)}};
  j["quad"] = {{"abs_tol", c.quadrature.abs_tol},
               {"rel_tol", c.quadrature.rel_tol},
               {"max_evaluations", c.quadrature.max_evaluations},
               {"tail_cut", c.quadrature.tail_cut}};
  j["sup_search"] = {{"grid_points", c.sup_search.grid_points}, {"golden_tol", c.sup_search.golden_tol}};
  j["optimize"] = {{"free", c.optimize.free},
                   {"step", c.optimize.step},
                   {"max_evaluations", c.optimize.max_evaluations},
                   {"x_tol", c.optimize.x_tol},
                   {"f_tol", c.optimize.f_tol}};
  const auto& ex = c.lattice.exact;
  const auto& co = c.lattice.continuum;
  const auto& ka = c.lattice.kato;
  j["lattice"] = {
      {"exact",
       {{"n", ex.n},
        {"spacing", ex.spacing},
        {"random_fields", ex.random_fields},
        {"field_amplitude", ex.field_amplitude},
        {"times", ex.times},
        {"uniform_b", ex.uniform_b},
        {"trace_radius", ex.trace_radius},
        {"ims_time", ex.ims_time},
        {"ims_vectors", ex.ims_vectors},
        {"transfer_lambdas", ex.transfer_lambdas}}},
      {"continuum",
       {{"n", co.n},
        {"spacing_per_radius", co.spacing_per_radius},
        {"radii", co.radii},
        {"lambda_points", co.lambda_points},
        {"uniform_b", co.uniform_b},
        {"localization_n", co.localization_n},
        {"localization_spacing", co.localization_spacing},
        {"density_seeds", co.density_seeds},
        {"density_rank", co.density_rank},
        {"density_bound", co.density_bound},
        {"lowest_modes", co.lowest_modes}}},
      {"kato",
       {{"sizes", ka.sizes},
        {"extent", ka.extent},
        {"radius", ka.radius},
        {"supercritical_factor", ka.supercritical_factor},
        {"include_supercritical", ka.include_supercritical}}}};
  j["suite"] = to_string(c.suite);
  j["output"] = {{"csv", c.output.csv}, {"profile_samples", c.output.profile_samples}};
  j["output_path"] = c.output_path;
  j["seed"] = c.seed;
  return j;
}

RunConfig config_from_json(const json& document) {
  json resolved = to_json(RunConfig{});
  merge_checked(resolved, document, "");
  const Reader r(resolved);
  RunConfig c;
  c.mode = parse_mode(r.string("mode"));
  c.chain.sigma = r.number("chain.sigma");
  c.chain.eps = r.number("chain.eps");
  c.chain.lambda = r.number("chain.lambda");
  c.chain.alpha = r.number("chain.alpha");
  c.chain.q = r.integer("chain.q");
  c.solve_alpha_c = r.boolean("chain.solve_alpha_c");
  c.spin_states = r.integers("reproduce.spin_states");
  c.profile.plateau = r.number("profile.plateau");
  c.profile.h_exponent = r.number("profile.h_exponent");
  c.overrides.omega_over_eps = r.optional("overrides.omega_over_eps");
  c.overrides.theta_sup = r.optional("overrides.theta_sup");
  c.overrides.j_value = r.optional("overrides.j_value");
  c.quadrature.abs_tol = r.number("quad.abs_tol");
  c.quadrature.rel_tol = r.number("quad.rel_tol");
  c.quadrature.max_evaluations = r.unsigned_integer("quad.max_evaluations");
  c.quadrature.tail_cut = r.number("quad.tail_cut");
  c.sup_search.grid_points = r.integer("sup_search.grid_points");
  c.sup_search.golden_tol = r.number("sup_search.golden_tol");
  c.optimize.free = r.fixed_booleans<kSearchDims>("optimize.free");
  c.optimize.step = r.fixed_numbers<kSearchDims>("optimize.step");
  c.optimize.max_evaluations = r.integer("optimize.max_evaluations");
  c.optimize.x_tol = r.number("optimize.x_tol");
  c.optimize.f_tol = r.number("optimize.f_tol");

  auto& ex = c.lattice.exact;
  ex.n = r.integer("lattice.exact.n");
  ex.spacing = r.number("lattice.exact.spacing");
  ex.random_fields = r.integer("lattice.exact.random_fields");
  ex.field_amplitude = r.number("lattice.exact.field_amplitude");
  ex.times = r.numbers("lattice.exact.times");
  ex.uniform_b = r.number("lattice.exact.uniform_b");
  ex.trace_radius = r.number("lattice.exact.trace_radius");
  ex.ims_time = r.number("lattice.exact.ims_time");
  ex.ims_vectors = r.integer("lattice.exact.ims_vectors");
  ex.transfer_lambdas = r.numbers("lattice.exact.transfer_lambdas");
  auto& co = c.lattice.continuum;
  co.n = r.integer("lattice.continuum.n");
  co.spacing_per_radius = r.number("lattice.continuum.spacing_per_radius");
  co.radii = r.numbers("lattice.continuum.radii");
  co.lambda_points = r.integer("lattice.continuum.lambda_points");
  co.uniform_b = r.number("lattice.continuum.uniform_b");
  co.localization_n = r.integer("lattice.continuum.localization_n");
  co.localization_spacing = r.number("lattice.continuum.localization_spacing");
  co.density_seeds = r.integer("lattice.continuum.density_seeds");
  co.density_rank = r.integer("lattice.continuum.density_rank");
  co.density_bound = r.number("lattice.continuum.density_bound");
  co.lowest_modes = r.integer("lattice.continuum.lowest_modes");
  auto& ka = c.lattice.kato;
  ka.sizes = r.integers("lattice.kato.sizes");
  ka.extent = r.number("lattice.kato.extent");
  ka.radius = r.number("lattice.kato.radius");
  ka.supercritical_factor = r.number("lattice.kato.supercritical_factor");
  ka.include_supercritical = r.boolean("lattice.kato.include_supercritical");

  c.suite = parse_suite(r.string("suite"));
  c.output.csv = r.boolean("output.csv");
  c.output.profile_samples = r.integer("output.profile_samples");
  c.output_path = r.string("output_path");
  c.seed = r.unsigned_integer("seed");
  return c;
}

RunConfig resolve_config(const json& document, const std::vector<std::string>& assignments) {
  json resolved = to_json(RunConfig{});
  if (!document.is_null()) merge_checked(resolved, document, "");
  for (const auto& a : assignments) assign_dotted(resolved, a);
  RunConfig c = config_from_json(resolved);
  c.validate();
  return c;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config: '" + path + "' is not valid JSON");
  return j;
}

json reproduce_paper_preset() { return json::parse(kReproducePaperPreset); }

}  // namespace stabcert
