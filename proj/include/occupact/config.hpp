#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "occupact/model.hpp"
#include "occupact/moments.hpp"
#include "occupact/montecarlo.hpp"

namespace occupact {

/// Flat key=value settings. Later layers override earlier ones key by key.
using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines; `#` starts a comment. Throws ConfigError for
/// malformed lines, unknown keys and duplicate keys (naming the line).
KeyValues parse_key_values(const std::string& text, const std::string& origin = "config");
KeyValues read_config_file(const std::string& path);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double x);

/// Keys accepted in config files and through --set.
const std::vector<std::string>& known_config_keys();

enum class OutputFormat { Csv, Json };

/// Holding-law definition of one state as configured.
struct StateConfig {
  std::string family;  // levy, exponential, empirical
  std::string source;  // c, median, rate, pdf
  double value = 0.0;  // c, median or rate
  std::string path;    // pdf file for empirical laws

  HoldingDistribution build() const;
};

/// Effective run configuration after defaults and overrides.
struct RunConfig {
  std::array<StateConfig, kStates> states;
  std::vector<double> t_values;
  std::vector<double> p1_values;
  OccupationTarget target = OccupationTarget::ShortOff;
  CostSpec cost;
  SeriesControl series;
  int grid_steps = kDefaultGridSteps;
  QuadratureControl quad;
  HistogramLayout bins;
  std::uint64_t reps = 1000000;
  std::uint64_t seed = 1;
  int density_points = 500;
  int joint_points = 150;
  std::string out;
  OutputFormat format = OutputFormat::Csv;

  /// The single t (or p1) of commands other than table; ConfigError otherwise.
  double t() const;
  double p1() const;

  ProcessSpec spec(double p1) const;
  ProcessSpec spec() const { return spec(p1()); }
  /// Model whose grid covers [0, t].
  OccupationModel model(double t, double p1) const;

  /// Flat view of the effective settings, for JSON provenance.
  KeyValues effective() const;
};

/// Which command the configuration is for; only table accepts lists of t and p1.
enum class CommandKind { Density, Joint, Table, Simulate, Check };

/// Merges the layers (file first, then overrides), applies defaults and
/// validates every field. Throws ConfigError naming the offending key.
RunConfig resolve_config(const KeyValues& file, const KeyValues& overrides, CommandKind command);

}  // namespace occupact
