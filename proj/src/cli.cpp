#include <iostream>

#include <CLI11.hpp>

#include "occupact/commands.hpp"
#include "occupact/error.hpp"

namespace occupact {

namespace {

struct FlagValues {
  std::string config;
  std::vector<std::string> sets;
  KeyValues flags;
};

// Flags shared by every subcommand. Each maps onto one config key.
void add_common_flags(CLI::App& cmd, FlagValues& v) {
  cmd.add_option("--config", v.config, "key=value config file");
  cmd.add_option("--set", v.sets, "override any config key, KEY=VALUE (repeatable)");
  const std::pair<const char*, const char*> flags[] = {
      {"--t", "t"},       {"--p1", "p1"},         {"--target", "target"}, {"--cost", "cost"},
      {"--reps", "reps"}, {"--seed", "seed"},     {"--grid-steps", "grid_steps"},
      {"--eps-term", "eps_term"}, {"--out", "out"}, {"--format", "format"}};
  for (const auto& [flag, key] : flags) {
    const std::string k = key;
    cmd.add_option_function<std::string>(
        flag, [&v, k](const std::string& value) { v.flags[k] = value; }, "sets " + k);
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Occupation-time distributions of an on-off process with two off-states", "occupact"};
  app.require_subcommand(1);
  FlagValues values;
  struct Sub {
    const char* name;
    const char* help;
    CommandKind kind;
    int (*run)(const RunConfig&, std::ostream&, std::ostream&);
  };
  const Sub subs[] = {
      {"density", "marginal defective densities and atoms of S or L", CommandKind::Density, cmd_density},
      {"joint", "joint densities on the simplex, line densities and atoms", CommandKind::Joint, cmd_joint},
      {"table", "moment table over t and p1 lists", CommandKind::Table, cmd_table},
      {"simulate", "Monte Carlo ensemble with histograms", CommandKind::Simulate, cmd_simulate},
      {"check", "full consistency suite; exit 1 on any failure", CommandKind::Check, cmd_check}};
  std::vector<CLI::App*> commands;
  for (const auto& s : subs) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    add_common_flags(*cmd, values);
    commands.push_back(cmd);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitConfig;
  }

  try {
    for (std::size_t i = 0; i < commands.size(); ++i) {
      if (!commands[i]->parsed()) continue;
      const KeyValues file = values.config.empty() ? KeyValues{} : read_config_file(values.config);
      KeyValues overrides;
      for (const auto& s : values.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + s + "'");
        overrides[s.substr(0, eq)] = s.substr(eq + 1);
      }
      for (const auto& [k, v] : values.flags) overrides[k] = v;
      const RunConfig cfg = resolve_config(file, overrides, subs[i].kind);
      return subs[i].run(cfg, out, err);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const RangeError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitConfig;
}

}  // namespace occupact
