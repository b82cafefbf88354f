#include "occupact/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "occupact/error.hpp"
#include "occupact/joint.hpp"
#include "occupact/marginal.hpp"
#include "occupact/montecarlo.hpp"
#include "occupact/parallel.hpp"

namespace occupact {

using Json = nlohmann::ordered_json;

namespace {

const char* target_name(OccupationTarget t) { return t == OccupationTarget::ShortOff ? "S" : "L"; }

Json config_json(const RunConfig& cfg) {
  Json j = Json::object();
  for (const auto& [k, v] : cfg.effective()) j[k] = v;
  return j;
}

// Files (path, contents) plus stdout text, written only once everything is computed.
struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;
  std::string stdout_text;

  void commit(std::ostream& out) const {
    for (const auto& [path, text] : files) {
      std::ofstream f(path, std::ios::binary);
      if (!f) throw IoError("cannot open output file " + path);
      f << text;
      f.close();
      if (!f) throw IoError("failed writing output file " + path);
    }
    out << stdout_text;
    out.flush();
  }
};

void require_writable(const std::string& path) {
  if (path.empty()) return;
  const std::filesystem::path p(path);
  const auto dir = p.has_parent_path() ? p.parent_path() : std::filesystem::path(".");
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("output directory does not exist for " + path);
  if (std::filesystem::is_directory(p, ec)) throw IoError("output path is a directory: " + path);
}

std::string csv_bool(bool b) { return b ? "1" : "0"; }

std::string atom_label(OccupationTarget target, int j) {
  return std::string(target_name(target)) + "=0,X=" + std::to_string(j);
}

// Main output: CSV text or the whole document as JSON.
void emit(Outputs& o, const RunConfig& cfg, const std::string& csv, const Json& doc,
          std::vector<std::pair<std::string, std::string>> sidecars) {
  if (cfg.format == OutputFormat::Json) {
    if (cfg.out.empty()) o.stdout_text = doc.dump(2) + "\n";
    else o.files.emplace_back(cfg.out, doc.dump(2) + "\n");
    return;
  }
  if (cfg.out.empty()) {
    o.stdout_text = csv;
    return;
  }
  o.files.emplace_back(cfg.out, csv);
  for (auto& s : sidecars) o.files.emplace_back(sidecar_path(cfg.out, s.first), std::move(s.second));
}

}  // namespace

std::string sidecar_path(const std::string& out, const std::string& suffix) {
  std::filesystem::path p(out);
  p.replace_extension();
  return p.string() + "." + suffix;
}

//------------------------------------------------------------------------------

int cmd_density(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  require_writable(cfg.out);
  const double t = cfg.t();
  const auto model = cfg.model(t, cfg.p1());
  const int points = cfg.density_points;

  struct Row {
    double s;
    std::array<SeriesValue, kStates> d;
  };
  std::vector<Row> rows(static_cast<std::size_t>(points));
  detail::parallel_for(rows.size(), default_thread_count(), [&](std::size_t i) {
    const double s = t * static_cast<double>(i + 1) / (points + 1);
    rows[i].s = s;
    for (int j = 0; j < kStates; ++j) rows[i].d[j] = marginal_density(model, cfg.target, j, s, t);
  });

  Json atoms = Json::array();
  for (int j = 0; j < kStates; ++j) {
    const auto a = atom_probability(model, cfg.target, j, t);
    atoms.push_back({{"case", atom_label(cfg.target, j)}, {"probability", a.value}, {"converged", a.converged}});
  }

  std::string csv = "s,j,target,density,converged\n";
  Json json_rows = Json::array();
  bool converged = true;
  for (int j = 0; j < kStates; ++j)
    for (const auto& r : rows) {
      const auto& v = r.d[j];
      converged = converged && v.converged;
      csv += format_number(r.s) + "," + std::to_string(j) + "," + target_name(cfg.target) + "," +
             format_number(v.value) + "," + csv_bool(v.converged) + "\n";
      json_rows.push_back({{"s", r.s}, {"j", j}, {"target", target_name(cfg.target)}, {"density", v.value},
                           {"converged", v.converged}});
    }
  if (!converged) log << "warning: series truncated at n_max before reaching eps_term\n";

  Json sidecar = {{"config", config_json(cfg)}, {"atoms", atoms}};
  Json doc = sidecar;
  doc["rows"] = std::move(json_rows);
  Outputs o;
  emit(o, cfg, csv, doc, {{"atoms.json", sidecar.dump(2) + "\n"}});
  o.commit(out);
  return kExitOk;
}

int cmd_joint(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  require_writable(cfg.out);
  const double t = cfg.t();
  const auto model = cfg.model(t, cfg.p1());
  const int n = cfg.joint_points;
  const double h = t / n;
  auto center = [h](int i) { return (i + 0.5) * h; };

  std::vector<std::string> row_csv(static_cast<std::size_t>(n));
  std::vector<Json> row_json(static_cast<std::size_t>(n));
  detail::parallel_for(static_cast<std::size_t>(n), default_thread_count(), [&](std::size_t a) {
    SimplexEvaluator plane(model, t);
    const double u = center(static_cast<int>(a));
    Json cells = Json::array();
    std::string text;
    for (int b = 0; b < n; ++b) {
      const double v = center(b);
      if (!(u + v < t)) break;
      const auto d = plane.densities(u, v);
      for (int j = 0; j < kStates; ++j) {
        text += format_number(u) + "," + format_number(v) + "," + std::to_string(j) + "," + format_number(d[j]) +
                "," + csv_bool(plane.converged()) + "\n";
        cells.push_back({{"u", u}, {"v", v}, {"j", j}, {"density", d[j]}, {"converged", plane.converged()}});
      }
    }
    row_csv[a] = std::move(text);
    row_json[a] = std::move(cells);
  });

  // Line densities along the two axes.
  const JointCase line_cases[] = {{Part::Density, Part::AtomZero, 0},
                                  {Part::Density, Part::AtomZero, 1},
                                  {Part::AtomZero, Part::Density, 0},
                                  {Part::AtomZero, Part::Density, 2}};
  std::string lines_csv = "x,case,density,converged\n";
  Json lines = Json::array();
  for (const auto& c : line_cases)
    for (int i = 0; i < n; ++i) {
      const double x = center(i);
      const auto v = joint_eval(model, c, x, x, t);
      lines_csv += format_number(x) + "," + c.label() + "," + format_number(v.value) + "," + csv_bool(v.converged) +
                   "\n";
      lines.push_back({{"x", x}, {"case", c.label()}, {"density", v.value}, {"converged", v.converged}});
    }

  const auto mass = joint_total_mass(model, t);
  const auto marginal = total_mass_check(model, OccupationTarget::ShortOff, t);
  Json cases = Json::array();
  for (int i = 0; i < kJointCases; ++i)
    cases.push_back({{"case", JointCase::from_index(i).label()}, {"mass", mass.cases[i]}});
  Json states = Json::array();
  for (int j = 0; j < kStates; ++j) {
    double slice = 0.0;
    for (int i = 4 * j; i < 4 * j + 4; ++i) slice += mass.cases[i];
    const double state = marginal.atoms[j] + marginal.densities[j];
    states.push_back({{"j", j}, {"joint_slice_mass", slice}, {"marginal_state_mass", state},
                      {"difference", slice - state}});
  }
  Json atoms = Json::array();
  for (auto target : {OccupationTarget::ShortOff, OccupationTarget::LongOff})
    for (int j = 0; j < kStates; ++j)
      atoms.push_back({{"case", atom_label(target, j)}, {"probability", atom_probability(model, target, j, t).value}});
  Json summary = {{"config", config_json(cfg)},
                  {"atoms", atoms},
                  {"case_masses", cases},
                  {"total_mass", mass.total},
                  {"state_masses", states},
                  {"mass_method", "composite Gauss-Legendre quadrature"},
                  {"converged", mass.converged}};
  if (!mass.converged) log << "warning: series truncated at n_max before reaching eps_term\n";

  std::string csv = "u,v,j,density,converged\n";
  Json cells = Json::array();
  for (int a = 0; a < n; ++a) {
    csv += row_csv[a];
    for (auto& c : row_json[a]) cells.push_back(std::move(c));
  }
  Json doc = summary;
  doc["lines"] = std::move(lines);
  doc["cells"] = std::move(cells);
  Outputs o;
  emit(o, cfg, csv, doc, {{"lines.csv", lines_csv}, {"summary.json", summary.dump(2) + "\n"}});
  o.commit(out);
  return kExitOk;
}

int cmd_table(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  require_writable(cfg.out);
  const auto rows = reproduce_table(cfg.spec(cfg.p1_values.front()), cfg.t_values, cfg.p1_values, cfg.cost,
                                    cfg.series, cfg.grid_steps, cfg.quad);
  std::string csv = "t,p1,E_S,Var_S,E_L,Var_L,E_C,Var_C,rho\n";
  Json json_rows = Json::array();
  bool converged = true;
  for (const auto& r : rows) {
    converged = converged && r.converged;
    for (double x : {r.t, r.p1, r.mean_s, r.var_s, r.mean_l, r.var_l, r.mean_c, r.var_c})
      csv += format_number(x) + ",";
    csv += format_number(r.rho) + "\n";
    json_rows.push_back({{"t", r.t},
                         {"p1", r.p1},
                         {"E_S", r.mean_s},
                         {"Var_S", r.var_s},
                         {"E_L", r.mean_l},
                         {"Var_L", r.var_l},
                         {"E_C", r.mean_c},
                         {"Var_C", r.var_c},
                         {"rho", r.rho},
                         {"cov", r.cov},
                         {"converged", r.converged}});
  }
  if (!converged) log << "warning: series truncated at n_max before reaching eps_term\n";
  Json doc = {{"config", config_json(cfg)}, {"rows", json_rows}};
  Outputs o;
  emit(o, cfg, csv, doc, {});
  o.commit(out);
  return kExitOk;
}

namespace {

Json estimate_json(const RunConfig& cfg, const EnsembleEstimate& e) {
  const double n = static_cast<double>(e.reps);
  auto freq = [n](double f) { return Json{{"frequency", f}, {"se", std::sqrt(f * (1.0 - f) / n)}}; };
  Json cases = Json::array();
  for (int i = 0; i < kJointCases; ++i) {
    Json c = freq(e.frequencies.cases[i]);
    c["case"] = JointCase::from_index(i).label();
    c["count"] = e.case_counts[i];
    cases.push_back(std::move(c));
  }
  Json atoms = Json::array();
  for (auto target : {OccupationTarget::ShortOff, OccupationTarget::LongOff})
    for (int j = 0; j < kStates; ++j) {
      const double f =
          target == OccupationTarget::ShortOff ? e.frequencies.atoms_s[j] : e.frequencies.atoms_l[j];
      Json a = freq(f);
      a["case"] = atom_label(target, j);
      atoms.push_back(std::move(a));
    }
  auto est = [](const Estimate& m) { return Json{{"value", m.value}, {"se", m.se}}; };
  const auto& m = e.moments;
  Json moments = {{"E_S", est(m.mean_s)}, {"Var_S", est(m.var_s)}, {"E_L", est(m.mean_l)},
                  {"Var_L", est(m.var_l)}, {"Cov", est(m.cov)},    {"rho", est(m.rho)},
                  {"E_C", est(m.mean_c)}, {"Var_C", est(m.var_c)}};
  return {{"config", config_json(cfg)}, {"t", e.t},         {"reps", e.reps},
          {"seed", e.seed},             {"cases", cases},   {"atoms", atoms},
          {"moments", moments},         {"cycles", e.frequencies.cycles}};
}

std::string range(double lo, double hi) { return format_number(lo) + "," + format_number(hi); }

}  // namespace

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& /*log*/) {
  require_writable(cfg.out);
  const double t = cfg.t();
  const auto e = estimate_ensemble(cfg.spec(), t, cfg.reps, cfg.bins, cfg.seed, cfg.cost);
  const auto& f = e.frequencies;
  const double wm = f.marginal_width();
  const double wj = f.joint_width();
  const int nm = f.layout.marginal_bins;
  const int nj = f.layout.joint_bins;

  std::string marginal = "target,j,lo,hi,frequency\n";
  for (int target = 0; target < 2; ++target)
    for (int j = 0; j < kStates; ++j)
      for (int b = 0; b < nm; ++b)
        marginal += std::string(target ? "L" : "S") + "," + std::to_string(j) + "," + range(b * wm, (b + 1) * wm) +
                    "," + format_number(f.marginal[target][j][b]) + "\n";
  std::string lines = "case,lo,hi,frequency\n";
  for (int j = 0; j < kStates; ++j)
    for (int b = 0; b < nm; ++b) {
      lines += JointCase{Part::Density, Part::AtomZero, j}.label() + "," + range(b * wm, (b + 1) * wm) + "," +
               format_number(f.line_s[j][b]) + "\n";
      lines += JointCase{Part::AtomZero, Part::Density, j}.label() + "," + range(b * wm, (b + 1) * wm) + "," +
               format_number(f.line_l[j][b]) + "\n";
    }
  std::string joint = "j,u_lo,u_hi,v_lo,v_hi,frequency\n";
  for (int j = 0; j < kStates; ++j)
    for (int a = 0; a < nj; ++a)
      for (int b = 0; a + b < nj; ++b)
        joint += std::to_string(j) + "," + range(a * wj, (a + 1) * wj) + "," + range(b * wj, (b + 1) * wj) + "," +
                 format_number(f.plane[j][static_cast<std::size_t>(a) * nj + b]) + "\n";

  const std::string doc = estimate_json(cfg, e).dump(2) + "\n";
  Outputs o;
  if (cfg.out.empty()) {
    o.stdout_text = doc;
  } else {
    o.files.emplace_back(cfg.out, doc);
    o.files.emplace_back(sidecar_path(cfg.out, "marginal.csv"), marginal);
    o.files.emplace_back(sidecar_path(cfg.out, "lines.csv"), lines);
    o.files.emplace_back(sidecar_path(cfg.out, "joint.csv"), joint);
  }
  o.commit(out);
  return kExitOk;
}

//------------------------------------------------------------------------------

namespace {

struct CheckLine {
  std::string name;
  bool pass;
  std::string detail;
};

std::string sci(double x) {
  std::ostringstream s;
  s << std::setprecision(3) << std::scientific << x;
  return s.str();
}

}  // namespace

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  require_writable(cfg.out);
  const double t = cfg.t();
  const auto model = cfg.model(t, cfg.p1());
  std::vector<CheckLine> checks;
  constexpr double kMassTol = 2e-3;

  for (auto target : {OccupationTarget::ShortOff, OccupationTarget::LongOff}) {
    const auto m = total_mass_check(model, target, t);
    const double err = std::abs(m.total - 1.0);
    checks.push_back({std::string("marginal total mass (") + target_name(target) + ")",
                      err <= kMassTol && m.converged,
                      "total " + format_number(m.total) + ", |err| " + sci(err) + (m.converged ? "" : ", truncated")});
  }
  {
    const auto m = joint_total_mass(model, t);
    const double err = std::abs(m.total - 1.0);
    checks.push_back({"joint total mass", err <= kMassTol && m.converged,
                      "total " + format_number(m.total) + ", |err| " + sci(err) + (m.converged ? "" : ", truncated")});
  }
  {
    double worst = 0.0;
    for (int j = 0; j < kStates; ++j)
      for (double frac : {1.0 / 300.0, 1.0 / 60.0, 1.0 / 30.0, 0.1, 1.0 / 3.0}) {
        const double u = frac * t;
        const double direct = marginal_density(model, OccupationTarget::ShortOff, j, u, t).value;
        const double via_joint = marginalize_from_joint(model, j, u, t).value;
        const double scale = std::max(std::abs(direct), 1e-300);
        worst = std::max(worst, direct == via_joint ? 0.0 : std::abs(via_joint - direct) / scale);
      }
    checks.push_back({"marginalization identity (15 probes)", worst <= 1e-4, "max rel err " + sci(worst)});
  }
  {
    const OccupationModel swapped(model.spec().swapped(), t, cfg.series, cfg.grid_steps, cfg.quad);
    int mismatches = 0, probes = 0;
    for (int j = 0; j < kStates; ++j) {
      ++probes;
      if (atom_probability(model, OccupationTarget::LongOff, j, t).value !=
          atom_probability(swapped, OccupationTarget::ShortOff, swap_state(j), t).value)
        ++mismatches;
      for (int i = 1; i <= 33; ++i) {
        const double s = t * i / 34.0;
        ++probes;
        if (marginal_density(model, OccupationTarget::LongOff, j, s, t).value !=
            marginal_density(swapped, OccupationTarget::ShortOff, swap_state(j), s, t).value)
          ++mismatches;
      }
    }
    checks.push_back({"symmetry S/L bit equality", mismatches == 0,
                      std::to_string(probes - mismatches) + "/" + std::to_string(probes) + " identical"});
  }

  const auto estimate = estimate_ensemble(model.spec(), t, cfg.reps, cfg.bins, cfg.seed, cfg.cost);
  const auto report = compare_to_analytic(estimate, model);
  {
    std::ostringstream d;
    d << report.atoms.size() << " cells, " << report.atom_failures() << " beyond 4 SE";
    checks.push_back({"simulator atoms and cases", report.atom_failures() == 0, d.str()});
  }
  {
    std::ostringstream d;
    d << report.moments.size() << " moments, " << report.moment_failures() << " beyond 4 SE";
    checks.push_back({"simulator moments", report.moment_failures() == 0, d.str()});
  }
  {
    std::ostringstream d;
    d << report.cycles.size() << " cycle counts, " << report.cycle_failures() << " beyond 4 SE";
    checks.push_back({"simulator cycle counts", report.cycle_failures() == 0, d.str()});
  }
  {
    std::ostringstream d;
    d << report.densities.size() << " bins, " << std::setprecision(3) << 100.0 * report.density_warn_fraction()
      << "% beyond 2 SE, " << report.density_failures() << " beyond 4 SE";
    checks.push_back({"simulator density bins",
                      report.density_failures() <= report.options.max_density_failures &&
                          report.density_warn_fraction() <= report.options.max_warn_fraction,
                      d.str()});
  }
  checks.push_back({"structural zeros", report.structural_violations.empty(),
                    std::to_string(report.structural_violations.size()) + " violations"});

  bool all = true;
  std::ostringstream table;
  Json jchecks = Json::array();
  for (const auto& c : checks) {
    all = all && c.pass;
    table << (c.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(40) << c.name << c.detail << "\n";
    jchecks.push_back({{"check", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  for (const auto& v : report.structural_violations) log << "structural violation: " << v << "\n";

  Outputs o;
  o.stdout_text = table.str();
  if (!cfg.out.empty()) {
    Json zs = Json::array();
    for (const auto* group : {&report.atoms, &report.moments, &report.cycles})
      for (const auto& z : *group)
        zs.push_back({{"group", z.group}, {"label", z.label}, {"empirical", z.empirical}, {"analytic", z.analytic},
                      {"se", z.se}, {"z", z.z}});
    Json doc = {{"config", config_json(cfg)}, {"passed", all}, {"checks", jchecks}, {"z_scores", zs}};
    o.files.emplace_back(cfg.out, doc.dump(2) + "\n");
  }
  o.commit(out);
  return all ? kExitOk : kExitCheckFailed;
}

}  // namespace occupact
