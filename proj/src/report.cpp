#include "stabcert/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "stabcert/battery.hpp"

namespace stabcert {

using nlohmann::json;

namespace {

json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double read_num(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw std::invalid_argument("report: unexpected string '" + s + "' for a number");
  }
  return v.get<double>();
}

json params_json(const ChainParams& p) {
  return {{"sigma", num(p.sigma)}, {"eps", num(p.eps)}, {"lambda", num(p.lambda)}, {"alpha", num(p.alpha)}, {"q", p.q}};
}

ChainParams params_from(const json& j) {
  ChainParams p;
  p.sigma = read_num(j.at("sigma"));
  p.eps = read_num(j.at("eps"));
  p.lambda = read_num(j.at("lambda"));
  p.alpha = read_num(j.at("alpha"));
  p.q = j.at("q").get<int>();
  return p;
}

std::string line(const char* label, double value, const char* note = "") {
  char buf[160];
  std::snprintf(buf, sizeof buf, "  %-12s %14.7g  %s\n", label, value, note);
  return buf;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.') ? c : '_';
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

std::vector<CsvTable> curve_tables(const std::vector<CheckResult>& checks) {
  std::vector<CsvTable> out;
  for (const auto& c : checks) {
    for (std::size_t i = 0; i < c.curves.size(); ++i) {
      const auto& curve = c.curves[i];
      CsvTable t;
      t.name = sanitize(c.name) + (c.curves.size() > 1 ? "_" + std::to_string(i) : "");
      t.header = {"lambda", "riesz_mean"};
      for (std::size_t k = 0; k < curve.lambdas.size(); ++k) t.rows.push_back({curve.lambdas[k], curve.values[k]});
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<CsvTable> profile_tables(const RunConfig& config) {
  const auto profile = config.cutoff_profile();
  CsvTable th{"theta", {"r", "theta"}, {}};
  CsvTable ue{"u_eps", {"r", "u_eps_star"}, {}};
  const int n = config.output.profile_samples;
  for (int i = 0; i < n; ++i) {
    const double r = static_cast<double>(i) / n;
    th.rows.push_back({r, theta(r, profile, config.quadrature).value});
    ue.rows.push_back({r, u_eps_star(r, config.chain, profile, config.quadrature)});
  }
  return {th, ue};
}

std::string check_line(const CheckResult& c) {
  const char* tag = c.expected_fail ? (c.passed ? "INFO" : "XFAIL") : (c.passed ? "PASS" : "FAIL");
  char buf[512];
  std::snprintf(buf, sizeof buf, "  %-5s %-40s measured %-13.6g tolerance %-13.6g %s\n", tag, c.name.c_str(), c.measured,
                c.tolerance, c.detail.c_str());
  return buf;
}

}  // namespace

json Report::document(const std::string& timestamp) const {
  json j;
  j["tool"] = "stabcert";
  j["config"] = to_json(config);
  j["results"] = results;
  j["verdict"] = {{"status", verdict}, {"exit_code", exit_code}, {"passed", exit_code == kExitPass}};
  j["provenance"] = {{"version", kToolVersion}, {"seed", config.seed}, {"timestamp", timestamp}};
  return j;
}

json to_json(const ConstantsReport& r) {
  json j;
  j["params"] = params_json(r.params);
  j["omega"] = num(r.omega);
  j["omega_over_eps"] = num(r.omega_over_eps);
  j["theta_sup"] = num(r.theta_sup);
  j["theta_argmax"] = num(r.theta_argmax);
  j["u_eps_max"] = num(r.u_eps_max);
  j["ftilde_max"] = num(r.ftilde_max);
  j["c_raw"] = num(r.c_raw);
  j["c"] = num(r.c_value);
  j["a_tilde"] = num(r.a_tilde);
  j["j"] = num(r.j_value);
  j["margin"] = num(r.margin);
  j["stable"] = r.stable;
  j["alpha_c"] = r.alpha_c ? num(*r.alpha_c) : json(nullptr);
  j["alpha_c_certified"] = r.alpha_c_certified;
  j["alpha_c_margin"] = num(r.alpha_c_margin);
  j["error_bounds"] = {{"omega", num(r.errors.omega)}, {"theta_sup", num(r.errors.theta_sup)}, {"j", num(r.errors.j)}};
  j["imported"] = {{"omega_over_eps", r.overridden.omega_over_eps},
                   {"theta_sup", r.overridden.theta_sup},
                   {"j", r.overridden.j_value}};
  j["converged"] = r.converged;
  j["status"] = r.converged ? "converged" : "tolerance not reached";
  j["evaluations"] = r.evaluations;
  return j;
}

ConstantsReport constants_report_from_json(const json& j) {
  ConstantsReport r;
  r.params = params_from(j.at("params"));
  r.omega = read_num(j.at("omega"));
  r.omega_over_eps = read_num(j.at("omega_over_eps"));
  r.theta_sup = read_num(j.at("theta_sup"));
  r.theta_argmax = read_num(j.at("theta_argmax"));
  r.u_eps_max = read_num(j.at("u_eps_max"));
  r.ftilde_max = read_num(j.at("ftilde_max"));
  r.c_raw = read_num(j.at("c_raw"));
  r.c_value = read_num(j.at("c"));
  r.a_tilde = read_num(j.at("a_tilde"));
  r.j_value = read_num(j.at("j"));
  r.margin = read_num(j.at("margin"));
  r.stable = j.at("stable").get<bool>();
  if (!j.at("alpha_c").is_null()) r.alpha_c = read_num(j.at("alpha_c"));
  r.alpha_c_certified = j.at("alpha_c_certified").get<bool>();
  r.alpha_c_margin = read_num(j.at("alpha_c_margin"));
  const auto& e = j.at("error_bounds");
  r.errors = {read_num(e.at("omega")), read_num(e.at("theta_sup")), read_num(e.at("j"))};
  const auto& o = j.at("imported");
  r.overridden = {o.at("omega_over_eps").get<bool>(), o.at("theta_sup").get<bool>(), o.at("j").get<bool>()};
  r.converged = j.at("converged").get<bool>();
  r.evaluations = j.at("evaluations").get<std::size_t>();
  return r;
}

json to_json(const RieszMeanCurve& c) {
  json lams = json::array(), vals = json::array();
  for (double l : c.lambdas) lams.push_back(num(l));
  for (double v : c.values) vals.push_back(num(v));
  return {{"label", c.label}, {"lambdas", lams}, {"values", vals}, {"fitted_m", num(c.fitted_m)}};
}

json to_json(const CheckResult& c) {
  json rows = json::array();
  for (const auto& row : c.rows) {
    json r = json::object();
    for (const auto& [k, v] : row) r[k] = num(v);
    rows.push_back(r);
  }
  json curves = json::array();
  for (const auto& curve : c.curves) curves.push_back(to_json(curve));
  return {{"name", c.name},         {"passed", c.passed}, {"expected_fail", c.expected_fail},
          {"measured", num(c.measured)}, {"tolerance", num(c.tolerance)}, {"detail", c.detail},
          {"rows", rows},           {"curves", curves}};
}

std::string chain_summary(const ConstantsReport& r) {
  auto note = [](bool imported) { return imported ? "(imported)" : ""; };
  std::string s;
  char head[160];
  std::snprintf(head, sizeof head, "chain at sigma=%g eps=%g lambda=%g alpha=%.9g q=%d\n", r.params.sigma, r.params.eps,
                r.params.lambda, r.params.alpha, r.params.q);
  s += head;
  s += line("Omega/eps", r.omega_over_eps, note(r.overridden.omega_over_eps));
  s += line("theta_sup", r.theta_sup, note(r.overridden.theta_sup));
  s += line("U*max", r.u_eps_max);
  s += line("F~max", r.ftilde_max);
  s += line("C", r.c_value);
  s += line("A~", r.a_tilde);
  s += line("J", r.j_value, note(r.overridden.j_value));
  s += line("margin", r.margin);
  if (r.alpha_c) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "(1/%.4f)", 1.0 / (*r.alpha_c * r.params.q));
    s += line("alpha_c", *r.alpha_c, buf);
  } else {
    s += "  alpha_c      not computed\n";
  }
  s += std::string("  verdict      ") + (r.converged ? (r.stable ? "stable" : "unstable") : "tolerance not reached") + "\n";
  return s;
}

Report run_chain(const RunConfig& config) {
  Report rep;
  rep.config = config;
  const auto r = compute_chain(config.chain, config.cutoff_profile(), config.overrides, config.quadrature,
                               config.solve_alpha_c, config.sup_search);
  rep.results["chain"] = to_json(r);
  rep.summary = chain_summary(r);
  if (!r.converged) {
    rep.verdict = "tolerance not reached";
    rep.exit_code = kExitBudgetExhausted;
  } else if (!r.stable) {
    rep.verdict = "unstable";
    rep.exit_code = kExitCheckFailed;
  } else if (config.solve_alpha_c && !r.alpha_c_certified) {
    rep.verdict = "critical coupling not certified";
    rep.exit_code = kExitCheckFailed;
  } else {
    rep.verdict = "stable";
  }
  if (config.output.csv) rep.tables = profile_tables(config);
  return rep;
}

Report run_optimize(const RunConfig& config) {
  Report rep;
  rep.config = config;
  const auto opts = config.optimize_options();
  const auto res = optimize_parameters(opts, config.quadrature);
  json start = json::array(), best = json::array();
  for (double v : opts.start) start.push_back(num(v));
  json opt;
  opt["start"] = start;
  opt["start_alpha_c"] = num(res.start_alpha_c);
  opt["params"] = params_json(res.params);
  opt["profile"] = {{"sigma", num(res.profile.sigma())},
                    {"plateau", num(res.profile.plateau())},
                    {"h_exponent", num(res.profile.h_exponent())}};
  opt["alpha_c"] = res.report.alpha_c ? num(*res.report.alpha_c) : json(nullptr);
  opt["evaluations"] = res.evaluations;
  opt["certified"] = res.certified;
  rep.results["optimize"] = opt;
  rep.results["chain"] = to_json(res.report);

  char buf[256];
  std::snprintf(buf, sizeof buf, "optimizer: %d evaluations, alpha_c %.9g -> %.9g\n  plateau %g  h exponent %g\n",
                res.evaluations, res.start_alpha_c, res.report.alpha_c.value_or(0.0), res.profile.plateau(),
                res.profile.h_exponent());
  rep.summary = buf + chain_summary(res.report);
  if (!res.report.converged) {
    rep.verdict = "tolerance not reached";
    rep.exit_code = kExitBudgetExhausted;
  } else if (!res.certified) {
    rep.verdict = "no certified coupling";
    rep.exit_code = kExitCheckFailed;
  } else {
    rep.verdict = "certified";
  }
  if (config.output.csv) {
    RunConfig at_best = config;
    at_best.chain = res.params;
    at_best.profile = {res.profile.plateau(), res.profile.h_exponent()};
    rep.tables = profile_tables(at_best);
  }
  return rep;
}

Report run_verify(const RunConfig& config, std::size_t workers) {
  Report rep;
  rep.config = config;
  const auto checks = run_battery(config, workers);
  json arr = json::array();
  bool ok = true;
  std::string text = "verification suite: " + to_string(config.suite) + "\n";
  for (const auto& c : checks) {
    arr.push_back(to_json(c));
    if (!c.expected_fail) ok = ok && c.passed;
    text += check_line(c);
  }
  rep.results["checks"] = arr;
  rep.tables = curve_tables(checks);
  rep.verdict = ok ? "all checks passed" : "check failed";
  rep.exit_code = ok ? kExitPass : kExitCheckFailed;
  rep.summary = text + "  verdict      " + rep.verdict + "\n";
  return rep;
}

Report run_reproduce(const RunConfig& config) {
  Report rep;
  rep.config = config;
  const auto profile = config.cutoff_profile();
  const ChainModel model(profile, config.chain.lambda, config.overrides, config.quadrature, config.sup_search);
  const auto r = model.report(config.chain);
  rep.results["chain"] = to_json(r);
  rep.summary = chain_summary(r);

  bool certified = true;
  json crit = json::array();
  for (int q : config.spin_states) {
    ChainParams p = config.chain;
    p.q = q;
    const auto s = solve_alpha_c(model, p);
    certified = certified && s.certified;
    crit.push_back({{"q", q},
                    {"alpha_c", num(s.alpha_c)},
                    {"inverse_alpha_c", num(1.0 / s.alpha_c)},
                    {"margin", num(s.margin)},
                    {"certified", s.certified},
                    {"iterations", s.iterations}});
    char buf[160];
    std::snprintf(buf, sizeof buf, "  alpha_c(q=%d) %14.7g  (1/%.4f)%s\n", q, s.alpha_c, 1.0 / s.alpha_c,
                  s.certified ? "" : " not certified");
    rep.summary += buf;
  }
  rep.results["critical_coupling"] = crit;

  if (!r.converged) {
    rep.verdict = "tolerance not reached";
    rep.exit_code = kExitBudgetExhausted;
  } else if (!r.stable || !certified) {
    rep.verdict = r.stable ? "critical coupling not certified" : "unstable";
    rep.exit_code = kExitCheckFailed;
  } else {
    rep.verdict = "stable";
  }
  return rep;
}

Report run(const RunConfig& config, std::size_t workers) {
  switch (config.mode) {
    case RunMode::chain: return run_chain(config);
    case RunMode::optimize: return run_optimize(config);
    case RunMode::verify: return run_verify(config, workers);
    case RunMode::reproduce_paper: return run_reproduce(config);
  }
  return run_chain(config);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_csv(const CsvTable& table, std::ostream& out) {
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << "\n";
  out.precision(17);
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

void emit_report(const Report& report, bool csv, const std::string& timestamp) {
  const std::string path = report.config.output_path + ".json";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report to '" + path + "'");
  out << report.document(timestamp).dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write report to '" + path + "'");
  if (!csv) return;
  for (const auto& t : report.tables) {
    const std::string cpath = report.config.output_path + "." + t.name + ".csv";
    std::ofstream c(cpath);
    if (!c) throw std::runtime_error("cannot write curve to '" + cpath + "'");
    write_csv(t, c);
  }
}

}  // namespace stabcert
