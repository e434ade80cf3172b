#include "lagspec/cli.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "lagspec/errors.hpp"
#include "lagspec/limit_law.hpp"

extern char** environ;

namespace lagspec::cli {

namespace {

using nlohmann::json;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"", {"seed", "ensemble", "trials", "threads", "z_list", "t_list", "thresholds", "output",
            "n_values", "lag_modes", "k_values", "norm_bound", "tail_constant", "delta", "grid",
            "tv_pool", "singular_floor", "limit_law", "diagnostics"}},
      {"ensemble", {"n", "big_n", "k", "law", "gamma0"}},
      {"grid", {"x_min", "x_max", "y_min", "y_max", "h"}},
      {"limit_law", {"gamma0", "r_min", "r_max", "step"}},
      {"diagnostics", {"n", "samples", "laws"}},
  };
  return s;
}

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

// Looks up a dotted path; nullptr when any component is missing.
const json* find(const json& doc, const std::string& path) {
  const json* cur = &doc;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (!cur->is_object()) return nullptr;
    auto it = cur->find(key);
    if (it == cur->end()) return nullptr;
    cur = &*it;
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  return cur;
}

const json& require(const json& doc, const std::string& path) {
  const json* v = find(doc, path);
  if (!v) throw ConfigError("missing required configuration key '" + path + "'");
  return *v;
}

std::uint64_t as_uint(const json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
    throw ConfigError("configuration key '" + path + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError("configuration key '" + path + "' must be a number");
  return v.get<double>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError("configuration key '" + path + "' must be a string");
  return v.get<std::string>();
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError("configuration key '" + path + "' must be a list");
  return v;
}

std::uint64_t uint_or(const json& doc, const std::string& path, std::uint64_t fallback) {
  const json* v = find(doc, path);
  return v ? as_uint(*v, path) : fallback;
}

double double_or(const json& doc, const std::string& path, double fallback) {
  const json* v = find(doc, path);
  return v ? as_double(*v, path) : fallback;
}

Complex as_complex(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ConfigError("configuration key '" + path + "' must be a number or a [re, im] pair");
}

std::vector<Complex> complex_list(const json& doc, const std::string& path) {
  std::vector<Complex> out;
  if (const json* v = find(doc, path)) {
    const auto& arr = as_array(*v, path);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      out.push_back(as_complex(arr[i], path + "[" + std::to_string(i) + "]"));
    }
  }
  return out;
}

std::vector<Eigen::Index> index_list(const json& doc, const std::string& path) {
  std::vector<Eigen::Index> out;
  if (const json* v = find(doc, path)) {
    const auto& arr = as_array(*v, path);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      out.push_back(static_cast<Eigen::Index>(as_uint(arr[i], path + "[" + std::to_string(i) + "]")));
    }
  }
  return out;
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json read_json_file(const std::filesystem::path& path, bool config) {
  std::ifstream in(path);
  if (!in) {
    const std::string msg = "cannot open " + path.string();
    if (config) throw ConfigError(msg);
    throw IoError(msg);
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + " is not valid JSON: " + e.what());
  }
}

struct Outcome {
  json report;
  std::vector<CsvTable> tables;
  bool pass = true;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> warnings;
};

std::uint64_t master_seed(const json& doc) { return as_uint(require(doc, "seed"), "seed"); }

Outcome run_limit_law_table(const json& doc) {
  const double gamma0 = as_double(require(doc, "limit_law.gamma0"), "limit_law.gamma0");
  if (!(gamma0 > 0.0)) throw ConfigError("configuration key 'limit_law.gamma0' must be > 0");
  const Gamma0Law law(gamma0);
  const double r_min = double_or(doc, "limit_law.r_min", 0.0);
  const double r_max = double_or(doc, "limit_law.r_max", law.support_radius());
  const double step = double_or(doc, "limit_law.step", 0.01);
  const auto rows = cdf_table(law, r_min, r_max, step);

  Outcome o;
  CsvTable table{"limit_law_table", {"r", "cdf"}, {}};
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table.add_row({cell(rows[i].r), cell(rows[i].cdf)});
    if (rows[i].cdf < 0.0 || rows[i].cdf > 1.0) monotone = false;
    if (i && rows[i].cdf < rows[i - 1].cdf) monotone = false;
  }
  o.tables = {table};
  o.pass = monotone;
  o.report = {{"kind", "limit-law-table"}, {"pass", o.pass}, {"gamma0", gamma0},
              {"rows", rows.size()}, {"final_cdf", rows.empty() ? 0.0 : rows.back().cdf},
              {"support_radius", law.support_radius()}, {"atom_mass", law.atom_mass()},
              {"checks", {{"cdf_monotone_in_unit_interval", monotone}}}};
  return o;
}

Outcome run_law_diagnostics(const json& doc) {
  const std::uint64_t seed = master_seed(doc);
  const auto n = static_cast<Eigen::Index>(as_uint(require(doc, "diagnostics.n"), "diagnostics.n"));
  const std::size_t samples = uint_or(doc, "diagnostics.samples", 100000);
  std::vector<LawKind> kinds;
  if (const json* v = find(doc, "diagnostics.laws")) {
    for (std::size_t i = 0; i < as_array(*v, "diagnostics.laws").size(); ++i) {
      const std::string path = "diagnostics.laws[" + std::to_string(i) + "]";
      try {
        kinds.push_back(law_kind_from_string(as_string((*v)[i], path)));
      } catch (const DomainError& e) {
        throw ConfigError("configuration key '" + path + "': " + e.what());
      }
    }
  } else {
    kinds = {LawKind::ComplexGaussian, LawKind::UniformPhase, LawKind::TwoPointComplex,
             LawKind::RealGaussian};
  }

  Outcome o;
  CsvTable table{"law_diagnostics",
                 {"law", "n", "samples", "seed", "abs_n_ex2", "abs_n_ex2_se", "n_var", "n2_e_abs4",
                  "estimated_c0", "declared_c0", "declared_m4", "declared_c0_inconsistent",
                  "c2_violated", "m4_exceeded", "consistent"},
                 {}};
  json laws = json::array();
  json checks = json::object();
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const EntryLaw law = EntryLaw::make(kinds[i], n);
    const std::uint64_t s = derive_seed(seed, i);
    o.seeds.push_back(s);
    const MomentReport m = moment_diagnostics(law, samples, s);
    // The flags should agree with what the law declares about itself.
    const bool consistent = (m.c2_violated == !law.non_degenerate()) &&
                            !m.declared_c0_inconsistent && !m.m4_exceeded;
    o.pass = o.pass && consistent;
    const std::string name(to_string(kinds[i]));
    checks[name] = consistent;
    table.add_row({name, cell(static_cast<long long>(n)), cell(static_cast<unsigned long long>(samples)),
                   cell(static_cast<unsigned long long>(s)), cell(m.abs_n_ex2), cell(m.abs_n_ex2_se),
                   cell(m.n_var), cell(m.n2_e_abs4), cell(m.estimated_c0), cell(law.declared_c0),
                   cell(law.declared_m4), cell(m.declared_c0_inconsistent), cell(m.c2_violated),
                   cell(m.m4_exceeded), cell(consistent)});
    laws.push_back({{"law", name}, {"seed", s}, {"abs_n_ex2", m.abs_n_ex2},
                    {"estimated_c0", m.estimated_c0}, {"c2_violated", m.c2_violated},
                    {"declared_c0_inconsistent", m.declared_c0_inconsistent},
                    {"m4_exceeded", m.m4_exceeded}});
  }
  o.tables = {table};
  o.report = {{"kind", "law-diagnostics"}, {"pass", o.pass}, {"laws", laws}, {"checks", checks}};
  return o;
}

Outcome run_sampling(const std::string& sub, const json& doc) {
  const ExperimentConfig config = experiment_config(doc, sub);
  Outcome o;
  const auto take = [&o](const auto& report) {
    o.report = report.to_json();
    o.tables = report.tables;
    o.pass = report.pass();
    o.seeds = report.seeds;
  };
  if (sub == "esd") {
    const auto r = esd_experiment(config);
    take(r);
    o.warnings = r.warnings;
  } else if (sub == "lsv-tail") {
    take(lsv_tail_experiment(config));
  } else if (sub == "linearize-check") {
    take(linearization_sweep(config));
  } else if (sub == "rank-perturbation") {
    take(rank_perturbation_sweep(config));
  } else if (sub == "hermitize") {
    take(hermitization_pipeline(config, config.grid, config.singular_floor));
  } else if (sub == "large-k") {
    take(large_k_experiment(config));
  } else if (sub == "fixed-point") {
    if (config.z_list.empty() || config.t_list.empty()) {
      throw ConfigError("fixed-point needs non-empty 'z_list' and 't_list'");
    }
    const auto rows = resolvent_comparison(config);
    json res = json::array();
    double worst = 0.0, worst_residual = 0.0;
    for (const auto& r : rows) {
      worst = std::max(worst, r.abs_error);
      worst_residual = std::max(worst_residual, r.solution.residual);
      res.push_back({{"z", {r.z.real(), r.z.imag()}}, {"t", r.t}, {"s", r.solution.s},
                     {"residual", r.solution.residual}, {"multiple_roots", r.solution.multiple_roots},
                     {"abs_error", r.abs_error}});
    }
    json checks = {{"resolvent_match", worst <= config.threshold("resolvent_abs_error_max")},
                   {"solver_residual", worst_residual <= 1e-12}};
    o.pass = checks["resolvent_match"].get<bool>() && checks["solver_residual"].get<bool>();
    for (std::size_t t = 0; t < config.trials; ++t) {
      o.seeds.push_back(SeededTrial::make(config.spec.master_seed, t).derived_seed);
    }
    o.tables = {resolvent_table(rows)};
    o.report = {{"kind", "fixed-point"}, {"pass", o.pass}, {"rows", res}, {"checks", checks},
                {"max_abs_error", worst}, {"seeds", o.seeds}};
  } else {
    throw ConfigError("unknown subcommand '" + sub + "'");
  }
  return o;
}

// Removes files owned by a previous manifest in `dir` that this run does not rewrite.
void drop_stale_outputs(const std::filesystem::path& dir, const std::vector<std::string>& keep) {
  const auto manifest = dir / "manifest.json";
  if (!std::filesystem::exists(manifest)) return;
  json old;
  try {
    std::ifstream in(manifest);
    old = json::parse(in);
  } catch (const std::exception&) {
    return;
  }
  if (!old.contains("outputs") || !old["outputs"].is_array()) return;
  for (const auto& f : old["outputs"]) {
    if (!f.is_string()) continue;
    const std::string name = f.get<std::string>();
    if (name.find('/') != std::string::npos || name == "manifest.json") continue;
    if (std::find(keep.begin(), keep.end(), name) != keep.end()) continue;
    std::error_code ec;
    std::filesystem::remove(dir / name, ec);
  }
}

RunResult execute(const std::string& sub, json doc, std::ostream& out, std::ostream& err) {
  check_schema(doc);
  const std::string started = timestamp_utc();
  const auto clock_start = std::chrono::steady_clock::now();

  if (!doc.contains("output")) doc["output"] = "out/" + sub;
  const std::filesystem::path dir = as_string(doc["output"], "output");

  Outcome o;
  if (sub == "limit-law-table") {
    o = run_limit_law_table(doc);
  } else if (sub == "law-diagnostics") {
    o = run_law_diagnostics(doc);
  } else {
    o = run_sampling(sub, doc);
  }
  for (const auto& w : o.warnings) err << "warning: " << w << '\n';

  RunResult result;
  result.output_dir = dir;
  for (const auto& t : o.tables) result.outputs.push_back(t.name + ".csv");
  result.outputs.push_back("report.json");
  drop_stale_outputs(dir, result.outputs);
  for (const auto& t : o.tables) write_csv(dir, t);
  o.report["runtime_seconds_total"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  write_json(dir / "report.json", o.report);

  json manifest = {
      {"artifact", "lagspec"},
      {"version", kArtifactVersion},
      {"manifest_format", 1},
      {"subcommand", sub},
      {"config", doc},
      {"seeds", {{"master", doc.contains("seed") ? doc["seed"] : json(nullptr)},
                 {"derived", o.seeds}}},
      {"started_at", started},
      {"finished_at", timestamp_utc()},
      {"outputs", result.outputs},
      {"pass", o.pass},
  };
  write_json(dir / "manifest.json", manifest);

  result.exit_code = o.pass ? kExitOk : kExitAssertion;
  out << sub << ": " << (o.pass ? "PASS" : "FAIL");
  if (o.report.contains("checks") && o.report["checks"].is_object()) {
    std::size_t ok = 0;
    for (const auto& [k, v] : o.report["checks"].items()) ok += v.get<bool>() ? 1 : 0;
    out << " (" << ok << "/" << o.report["checks"].size() << " checks)";
  } else if (o.report.contains("checks_run")) {
    out << " (" << o.report["checks_run"].get<std::size_t>() - o.report["checks_failed"].get<std::size_t>()
        << "/" << o.report["checks_run"] << " checks)";
  }
  out << " -> " << dir.string() << '\n';
  if (!o.pass && o.report.contains("checks") && o.report["checks"].is_object()) {
    for (const auto& [k, v] : o.report["checks"].items()) {
      if (!v.get<bool>()) err << "failed check: " << k << '\n';
    }
  }
  return result;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{
      "esd",         "lsv-tail", "linearize-check", "rank-perturbation", "hermitize",
      "fixed-point", "large-k",  "limit-law-table", "law-diagnostics"};
  return names;
}

EnvMap process_env() {
  EnvMap env;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = entry.substr(0, eq);
    if (key.rfind(kEnvPrefix, 0) == 0) env[key] = entry.substr(eq + 1);
  }
  return env;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* cur = &doc;
  std::size_t pos = 0;
  for (;;) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty key component");
    if (!cur->is_object()) {
      throw ConfigError("override '" + assignment + "' descends into a non-object value");
    }
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    cur = &(*cur)[key];
    if (cur->is_null()) *cur = json::object();
    pos = dot + 1;
  }
}

void apply_env(json& doc, const EnvMap& env) {
  const std::string prefix(kEnvPrefix);
  for (const auto& [name, value] : env) {
    if (name.rfind(prefix, 0) != 0) continue;
    std::string path = name.substr(prefix.size());
    std::transform(path.begin(), path.end(), path.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::string dotted;
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (path.compare(i, 2, "__") == 0) {
        dotted += '.';
        ++i;
      } else {
        dotted += path[i];
      }
    }
    apply_override(doc, dotted + "=" + value);
  }
}

void check_schema(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  std::vector<std::string> unknown;
  const auto& sections = schema();
  for (const auto& [key, value] : doc.items()) {
    if (!sections.at("").contains(key)) {
      unknown.push_back(key);
      continue;
    }
    if (key == "thresholds") {
      if (!value.is_object()) throw ConfigError("configuration key 'thresholds' must be an object");
      for (const auto& [name, v] : value.items()) {
        if (!default_thresholds().contains(name)) unknown.push_back("thresholds." + name);
        else as_double(v, "thresholds." + name);
      }
      continue;
    }
    if (auto it = sections.find(key); it != sections.end()) {
      if (!value.is_object()) throw ConfigError("configuration key '" + key + "' must be an object");
      for (const auto& [sub, v] : value.items()) {
        if (!it->second.contains(sub)) unknown.push_back(key + "." + sub);
      }
    }
  }
  if (!unknown.empty()) {
    throw ConfigError("unknown configuration key(s): " + join(unknown, ", "));
  }
}

ExperimentConfig experiment_config(const json& doc, const std::string& subcommand) {
  check_schema(doc);
  ExperimentConfig c;
  const auto seed = master_seed(doc);
  const auto n = static_cast<Eigen::Index>(as_uint(require(doc, "ensemble.n"), "ensemble.n"));
  const auto big_n = static_cast<Eigen::Index>(
      uint_or(doc, "ensemble.big_n", static_cast<std::uint64_t>(n)));
  const auto k = static_cast<Eigen::Index>(as_uint(require(doc, "ensemble.k"), "ensemble.k"));
  LawKind kind = LawKind::ComplexGaussian;
  if (const json* v = find(doc, "ensemble.law")) {
    try {
      kind = law_kind_from_string(as_string(*v, "ensemble.law"));
    } catch (const DomainError& e) {
      throw ConfigError(std::string("configuration key 'ensemble.law': ") + e.what());
    }
  }
  if (n < 2) throw ConfigError("configuration key 'ensemble.n' must be >= 2");
  c.spec = EnsembleSpec::make(n, big_n, k, kind, seed);
  if (const json* v = find(doc, "ensemble.gamma0")) c.spec.declared_gamma0 = as_double(*v, "ensemble.gamma0");

  c.trials = uint_or(doc, "trials", 1);
  c.threads = static_cast<unsigned>(uint_or(doc, "threads", 1));
  c.z_list = complex_list(doc, "z_list");
  if (const json* v = find(doc, "t_list")) {
    const auto& arr = as_array(*v, "t_list");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      c.t_list.push_back(as_double(arr[i], "t_list[" + std::to_string(i) + "]"));
    }
  }
  if (const json* v = find(doc, "thresholds")) {
    for (const auto& [name, value] : v->items()) c.thresholds[name] = as_double(value, "thresholds." + name);
  }
  if (const json* v = find(doc, "output")) c.output_path = as_string(*v, "output");
  c.n_values = index_list(doc, "n_values");
  c.k_values = index_list(doc, "k_values");
  if (const json* v = find(doc, "lag_modes")) {
    c.lag_modes.clear();
    const auto& arr = as_array(*v, "lag_modes");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "lag_modes[" + std::to_string(i) + "]";
      try {
        c.lag_modes.push_back(lag_mode_from_string(as_string(arr[i], path)));
      } catch (const DomainError& e) {
        throw ConfigError("configuration key '" + path + "': " + e.what());
      }
    }
  }
  if (const json* v = find(doc, "norm_bound")) c.norm_bound = as_double(*v, "norm_bound");
  c.tail_constant = double_or(doc, "tail_constant", c.tail_constant);
  c.delta = double_or(doc, "delta", c.delta);
  c.grid.x_min = double_or(doc, "grid.x_min", c.grid.x_min);
  c.grid.x_max = double_or(doc, "grid.x_max", c.grid.x_max);
  c.grid.y_min = double_or(doc, "grid.y_min", c.grid.y_min);
  c.grid.y_max = double_or(doc, "grid.y_max", c.grid.y_max);
  c.grid.h = double_or(doc, "grid.h", c.grid.h);
  c.tv_pool = static_cast<int>(uint_or(doc, "tv_pool", static_cast<std::uint64_t>(c.tv_pool)));
  c.singular_floor = double_or(doc, "singular_floor", c.singular_floor);

  if ((subcommand == "lsv-tail" || subcommand == "linearize-check") && c.z_list.empty()) {
    throw ConfigError("missing required configuration key 'z_list'");
  }
  for (std::size_t i = 0; i < c.z_list.size(); ++i) {
    if (c.z_list[i] == Complex{0.0, 0.0} &&
        (subcommand == "lsv-tail" || subcommand == "linearize-check" || subcommand == "fixed-point")) {
      throw ConfigError("configuration key 'z_list[" + std::to_string(i) + "]': z = 0 is not allowed for " +
                        subcommand);
    }
  }
  try {
    c.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunResult run(const RunOptions& options, const EnvMap& env, std::ostream& out, std::ostream& err) {
  const auto& subs = subcommands();
  if (std::find(subs.begin(), subs.end(), options.subcommand) == subs.end()) {
    throw ConfigError("unknown subcommand '" + options.subcommand + "'");
  }
  json doc = options.config_file ? read_json_file(*options.config_file, true) : json::object();
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  apply_env(doc, env);
  for (const auto& o : options.overrides) apply_override(doc, o);
  if (options.output) doc["output"] = options.output->string();
  if (options.threads) doc["threads"] = *options.threads;
  return execute(options.subcommand, std::move(doc), out, err);
}

RunResult replay(const std::filesystem::path& manifest, std::optional<std::filesystem::path> output,
                 std::optional<unsigned> threads, std::ostream& out, std::ostream& err) {
  const json m = read_json_file(manifest, false);
  if (!m.contains("subcommand") || !m.contains("config") || !m["subcommand"].is_string()) {
    throw ConfigError(manifest.string() + " is not a lagspec manifest");
  }
  const std::string sub = m["subcommand"].get<std::string>();
  const auto& subs = subcommands();
  if (std::find(subs.begin(), subs.end(), sub) == subs.end()) {
    throw ConfigError("manifest names unknown subcommand '" + sub + "'");
  }
  json doc = m["config"];
  if (output) doc["output"] = output->string();
  if (threads) doc["threads"] = *threads;
  return execute(sub, std::move(doc), out, err);
}

int main_entry(int argc, const char* const* argv, const EnvMap& env, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"lagspec: spectra of lag-k sample auto-covariance matrices"};
  app.require_subcommand(1);

  RunOptions options;
  std::string config_file, output_dir, manifest_path;
  unsigned threads = 0;

  const std::map<std::string, std::string> help{
      {"esd", "eigenvalue distribution vs the limit law, with KS trend over n"},
      {"lsv-tail", "least singular value tail of Y - zI"},
      {"linearize-check", "linearization inequalities on sampled X"},
      {"rank-perturbation", "rank-one interlacing between Y and its circular variant"},
      {"hermitize", "density recovery from the hermitized log potential"},
      {"fixed-point", "resolvent fixed point vs simulation (k >= n/2)"},
      {"large-k", "large-lag stability, resolvent match and atom at zero"},
      {"limit-law-table", "tabulate the radial CDF of the limit law"},
      {"law-diagnostics", "moment diagnostics of the entry laws"},
  };
  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("-c,--config", config_file, "JSON config file");
    sub->add_option("-s,--set", options.overrides, "override key.path=value (repeatable)");
    sub->add_option("-o,--output", output_dir, "output directory");
    sub->add_option("-j,--threads", threads, "worker threads");
  }
  auto* rep = app.add_subcommand("replay", "re-run the config stored in a manifest");
  rep->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required();
  rep->add_option("-o,--output", output_dir, "output directory");
  rep->add_option("-j,--threads", threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    std::optional<std::filesystem::path> output;
    if (!output_dir.empty()) output = output_dir;
    std::optional<unsigned> thread_override;
    if (threads > 0) thread_override = threads;
    RunResult result;
    if (name == "replay") {
      result = replay(manifest_path, output, thread_override, out, err);
    } else {
      options.subcommand = name;
      if (!config_file.empty()) options.config_file = config_file;
      options.output = output;
      options.threads = thread_override;
      result = run(options, env, out, err);
    }
    return result.exit_code;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError& e) {
    err << "i/o failure: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o failure: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "unexpected error: " << e.what() << '\n';
    return kExitUnexpected;
  }
}

}  // namespace lagspec::cli
