#include "occupact/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "occupact/error.hpp"

namespace occupact {

namespace {

constexpr const char* kStateNames[kStates] = {"U", "S", "L"};
constexpr double kDefaultMedians[kStates] = {7.0, 1.0 / 48.0, 1.0 / 6.0};
constexpr const char* kParamKinds[] = {"c", "median", "rate", "pdf"};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  double value = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(value))
    throw ConfigError(key + ": expected a finite number, got '" + text + "'");
  return value;
}

template <class Int>
Int parse_integer(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  Int value = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return value;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_double(key, item));
  if (!text.empty() && text.back() == ',') throw ConfigError(key + ": trailing comma in list");
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_number(v[i]);
  return out;
}

HoldingDistribution read_empirical(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read empirical pdf file " + path);
  std::vector<double> xs, pdf;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected x,pdf");
    const std::string where = path + ":" + std::to_string(lineno);
    try {
      xs.push_back(parse_double(where, line.substr(0, comma)));
      pdf.push_back(parse_double(where, line.substr(comma + 1)));
    } catch (const ConfigError&) {
      if (xs.empty() && lineno == 1) continue;  // header row
      throw;
    }
  }
  if (xs.size() < 3) throw ConfigError(path + ": empirical pdf needs at least three rows");
  if (xs.front() != 0.0) throw ConfigError(path + ": empirical pdf grid must start at 0");
  const int steps = static_cast<int>(xs.size()) - 1;
  const GridSpec grid{xs.back(), steps};
  for (int i = 0; i <= steps; ++i)
    if (std::abs(xs[i] - grid.node(i)) > 1e-9 * grid.upper)
      throw ConfigError(path + ": empirical pdf grid must be uniform");
  return HoldingDistribution::gridded(grid, std::move(pdf));
}

}  // namespace

std::string format_number(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k{"p1",       "t",         "target",        "cost",       "eps_term",
                               "n_min",    "n_max",     "grid_steps",    "panels_1d",  "panels_2d",
                               "reps",     "seed",      "marginal_bins", "joint_bins", "density_points",
                               "joint_points", "out",   "format"};
    for (const char* s : kStateNames) {
      k.push_back(std::string("dist_") + s);
      for (const char* p : kParamKinds) k.push_back(std::string(p) + "_" + s);
    }
    return k;
  }();
  return keys;
}

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  const auto& known = known_config_keys();
  KeyValues out;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(where + ": unknown key '" + key + "'");
    if (out.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str(), path);
}

HoldingDistribution StateConfig::build() const {
  if (source == "c") return HoldingDistribution::levy(value);
  if (source == "median") return HoldingDistribution::levy_from_median(value);
  if (source == "rate") return HoldingDistribution::exponential(value);
  return read_empirical(path);
}

double RunConfig::t() const {
  if (t_values.size() != 1) throw ConfigError("t: this command takes a single time");
  return t_values.front();
}

double RunConfig::p1() const {
  if (p1_values.size() != 1) throw ConfigError("p1: this command takes a single switch probability");
  return p1_values.front();
}

ProcessSpec RunConfig::spec(double p1) const {
  return ProcessSpec(states[0].build(), states[1].build(), states[2].build(), p1);
}

OccupationModel RunConfig::model(double t, double p1) const {
  return OccupationModel(spec(p1), t, series, grid_steps, quad);
}

KeyValues RunConfig::effective() const {
  KeyValues kv;
  for (int i = 0; i < kStates; ++i) {
    const auto& s = states[i];
    kv[std::string("dist_") + kStateNames[i]] = s.family;
    kv[s.source + "_" + kStateNames[i]] = s.source == "pdf" ? s.path : format_number(s.value);
  }
  kv["t"] = join(t_values);
  kv["p1"] = join(p1_values);
  kv["target"] = target == OccupationTarget::ShortOff ? "S" : "L";
  kv["cost"] = join({cost.c0, cost.c1, cost.c2});
  kv["eps_term"] = format_number(series.eps_term);
  kv["n_min"] = std::to_string(series.n_min);
  kv["n_max"] = std::to_string(series.n_max);
  kv["grid_steps"] = std::to_string(grid_steps);
  kv["panels_1d"] = std::to_string(quad.panels_1d);
  kv["panels_2d"] = std::to_string(quad.panels_2d);
  kv["reps"] = std::to_string(reps);
  kv["seed"] = std::to_string(seed);
  kv["marginal_bins"] = std::to_string(bins.marginal_bins);
  kv["joint_bins"] = std::to_string(bins.joint_bins);
  kv["density_points"] = std::to_string(density_points);
  kv["joint_points"] = std::to_string(joint_points);
  kv["out"] = out;
  kv["format"] = format == OutputFormat::Csv ? "csv" : "json";
  return kv;
}

RunConfig resolve_config(const KeyValues& file, const KeyValues& overrides, CommandKind command) {
  const auto& known = known_config_keys();
  for (const auto& [key, value] : overrides)
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown key '" + key + "'");

  // A state redefined by an override drops every parameter the file gave it.
  KeyValues kv = file;
  for (const char* s : kStateNames) {
    bool redefined = false;
    for (const char* p : kParamKinds) redefined = redefined || overrides.count(std::string(p) + "_" + s);
    if (!redefined) continue;
    for (const char* p : kParamKinds) kv.erase(std::string(p) + "_" + s);
    kv.erase(std::string("dist_") + s);
  }
  for (const auto& [key, value] : overrides) kv[key] = value;

  auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  RunConfig cfg;
  for (int i = 0; i < kStates; ++i) {
    const std::string name = kStateNames[i];
    std::vector<std::string> given;
    for (const char* p : kParamKinds)
      if (kv.count(std::string(p) + "_" + name)) given.push_back(p);
    const auto dist = get("dist_" + name);
    auto& st = cfg.states[i];
    if (given.size() > 1)
      throw ConfigError("state " + name + ": exactly one of c_" + name + ", median_" + name + ", rate_" + name +
                        ", pdf_" + name + " may be given");
    if (given.empty()) {
      if (dist) throw ConfigError("dist_" + name + "=" + *dist + " needs a parameter for state " + name);
      st = {"levy", "median", kDefaultMedians[i], {}};
    } else {
      const std::string source = given.front();
      const std::string key = source + "_" + name;
      const std::string family = source == "rate" ? "exponential" : source == "pdf" ? "empirical" : "levy";
      if (dist && *dist != family)
        throw ConfigError("dist_" + name + "=" + *dist + " conflicts with " + key);
      st.family = family;
      st.source = source;
      if (source == "pdf") {
        st.path = kv.at(key);
        if (st.path.empty()) throw ConfigError(key + ": empty path");
      } else {
        st.value = parse_double(key, kv.at(key));
        if (!(st.value > 0.0)) throw ConfigError(key + " must be positive");
      }
    }
    if (dist && *dist != "levy" && *dist != "exponential" && *dist != "empirical")
      throw ConfigError("dist_" + name + ": expected levy, exponential or empirical");
  }

  const bool table = command == CommandKind::Table;
  cfg.t_values = get("t") ? parse_list("t", *get("t")) : table ? std::vector<double>{30.0, 60.0} : std::vector{30.0};
  cfg.p1_values = get("p1") ? parse_list("p1", *get("p1"))
                  : table   ? std::vector<double>{0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 0.99}
                            : std::vector{0.9};
  if (cfg.t_values.empty()) throw ConfigError("t: list is empty");
  if (cfg.p1_values.empty()) throw ConfigError("p1: list is empty");
  if (!table && cfg.t_values.size() != 1) throw ConfigError("t: only the table command accepts a list");
  if (!table && cfg.p1_values.size() != 1) throw ConfigError("p1: only the table command accepts a list");
  for (double t : cfg.t_values)
    if (!(t > 0.0)) throw ConfigError("t must be positive, got " + format_number(t));
  for (double p : cfg.p1_values)
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p1 must lie in (0, 1], got " + format_number(p));
  {
    std::set<double> unique(cfg.t_values.begin(), cfg.t_values.end());
    if (unique.size() != cfg.t_values.size()) throw ConfigError("t: duplicate values");
    unique = std::set<double>(cfg.p1_values.begin(), cfg.p1_values.end());
    if (unique.size() != cfg.p1_values.size()) throw ConfigError("p1: duplicate values");
  }

  if (const auto v = get("target")) {
    if (*v == "S") cfg.target = OccupationTarget::ShortOff;
    else if (*v == "L") cfg.target = OccupationTarget::LongOff;
    else throw ConfigError("target: expected S or L, got '" + *v + "'");
  }
  if (const auto v = get("cost")) {
    const auto c = parse_list("cost", *v);
    if (c.size() != 3) throw ConfigError("cost: expected C0,C1,C2");
    cfg.cost = {c[0], c[1], c[2]};
  }

  if (const auto v = get("eps_term")) cfg.series.eps_term = parse_double("eps_term", *v);
  if (const auto v = get("n_max")) cfg.series.n_max = parse_integer<int>("n_max", *v);
  // A lowered n_max pulls the default n_min down with it.
  cfg.series.n_min = get("n_min") ? parse_integer<int>("n_min", *get("n_min")) : std::min(5, cfg.series.n_max);
  if (!(cfg.series.eps_term > 0.0)) throw ConfigError("eps_term must be positive");
  if (cfg.series.n_min < 1) throw ConfigError("n_min must be at least 1");
  if (cfg.series.n_max < cfg.series.n_min) throw ConfigError("n_max must be at least n_min");

  if (const auto v = get("grid_steps")) cfg.grid_steps = parse_integer<int>("grid_steps", *v);
  if (cfg.grid_steps < 2) throw ConfigError("grid_steps must be at least 2");
  if (const auto v = get("panels_1d")) cfg.quad.panels_1d = parse_integer<int>("panels_1d", *v);
  if (const auto v = get("panels_2d")) cfg.quad.panels_2d = parse_integer<int>("panels_2d", *v);
  if (cfg.quad.panels_1d < 1 || cfg.quad.panels_2d < 1) throw ConfigError("panel counts must be positive");

  if (const auto v = get("reps")) {
    const auto reps = parse_integer<long long>("reps", *v);
    if (reps < 1) throw ConfigError("reps must be at least 1");
    cfg.reps = static_cast<std::uint64_t>(reps);
  }
  if (const auto v = get("seed")) cfg.seed = parse_integer<std::uint64_t>("seed", *v);
  if (const auto v = get("marginal_bins")) cfg.bins.marginal_bins = parse_integer<int>("marginal_bins", *v);
  if (const auto v = get("joint_bins")) cfg.bins.joint_bins = parse_integer<int>("joint_bins", *v);
  if (cfg.bins.marginal_bins < 1 || cfg.bins.joint_bins < 1)
    throw ConfigError("histogram bin counts must be at least 1");
  if (const auto v = get("density_points")) cfg.density_points = parse_integer<int>("density_points", *v);
  if (const auto v = get("joint_points")) cfg.joint_points = parse_integer<int>("joint_points", *v);
  if (cfg.density_points < 1 || cfg.joint_points < 1) throw ConfigError("point counts must be at least 1");

  if (const auto v = get("out")) cfg.out = *v;
  if (const auto v = get("format")) {
    if (*v == "csv") cfg.format = OutputFormat::Csv;
    else if (*v == "json") cfg.format = OutputFormat::Json;
    else throw ConfigError("format: expected csv or json, got '" + *v + "'");
  }

  // Building the distributions checks their parameters and files up front.
  for (int i = 0; i < kStates; ++i) {
    try {
      (void)cfg.states[i].build();
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("state ") + kStateNames[i] + ": " + e.what());
    }
  }
  return cfg;
}

}  // namespace occupact
