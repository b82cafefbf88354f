#include "occupact/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "occupact/error.hpp"
#include "occupact/marginal.hpp"
#include "occupact/parallel.hpp"
#include "occupact/quadrature.hpp"
#include "occupact/rng.hpp"

namespace occupact {

namespace {

constexpr int kAxisPanels = 48;  // graded panels for cells touching 0

int bin_of(double x, double t, int bins) {
  const int b = static_cast<int>(x / t * bins);
  return std::clamp(b, 0, bins - 1);
}

QuadratureRule bin_rule(double lo, double hi) {
  return lo == 0.0 ? graded_panels(lo, hi, kAxisPanels) : uniform_panels(lo, hi, 2);
}

// Var of an influence-function sum, as the squared standard error of the mean.
double influence_se(double sum_sq, double n) { return n > 1.0 ? std::sqrt(sum_sq / (n * (n - 1.0))) : 0.0; }

MomentEstimates sample_moments(const std::vector<PathOutcome>& paths, const CostSpec& cost) {
  const double n = static_cast<double>(paths.size());
  auto cost_of = [&](const PathOutcome& p) { return cost.c0 * p.u + cost.c1 * p.s + cost.c2 * p.l; };

  double sum_s = 0.0, sum_l = 0.0, sum_c = 0.0;
  for (const auto& p : paths) {
    sum_s += p.s;
    sum_l += p.l;
    sum_c += cost_of(p);
  }
  const double mean_s = sum_s / n, mean_l = sum_l / n, mean_c = sum_c / n;

  double ss = 0.0, ll = 0.0, sl = 0.0, cc = 0.0;
  for (const auto& p : paths) {
    const double a = p.s - mean_s, b = p.l - mean_l, c = cost_of(p) - mean_c;
    ss += a * a;
    ll += b * b;
    sl += a * b;
    cc += c * c;
  }
  const double pop_ss = ss / n, pop_ll = ll / n, pop_sl = sl / n, pop_cc = cc / n;
  const double scale = std::sqrt(pop_ss * pop_ll);
  const double rho = scale > 0.0 ? pop_sl / scale : 0.0;

  double if_ss = 0.0, if_ll = 0.0, if_sl = 0.0, if_rho = 0.0, if_cc = 0.0;
  for (const auto& p : paths) {
    const double a = p.s - mean_s, b = p.l - mean_l, c = cost_of(p) - mean_c;
    const double d_ss = a * a - pop_ss, d_ll = b * b - pop_ll, d_sl = a * b - pop_sl, d_cc = c * c - pop_cc;
    if_ss += d_ss * d_ss;
    if_ll += d_ll * d_ll;
    if_sl += d_sl * d_sl;
    if_cc += d_cc * d_cc;
    if (scale > 0.0) {
      const double d_rho = a * b / scale - 0.5 * rho * (a * a / pop_ss + b * b / pop_ll);
      if_rho += d_rho * d_rho;
    }
  }

  const double denom = n > 1.0 ? n - 1.0 : 1.0;
  MomentEstimates m;
  m.mean_s = {mean_s, influence_se(ss, n)};
  m.mean_l = {mean_l, influence_se(ll, n)};
  m.mean_c = {mean_c, influence_se(cc, n)};
  m.var_s = {ss / denom, influence_se(if_ss, n)};
  m.var_l = {ll / denom, influence_se(if_ll, n)};
  m.var_c = {cc / denom, influence_se(if_cc, n)};
  m.cov = {sl / denom, influence_se(if_sl, n)};
  m.rho = {rho, influence_se(if_rho, n)};
  return m;
}

// G[n] = Pr(T_{2n} <= t), n = 0..last. With all-Levy laws each binomial
// component is a Levy law with summed scale-roots; otherwise the collapsed
// cycle law (on period plus p1/p2 mixture off period) is convolved on the grid.
std::vector<double> cycle_hitting_cdfs(const OccupationModel& model, int last, double t) {
  const auto& spec = model.spec();
  std::vector<double> g(static_cast<std::size_t>(last) + 1, 0.0);
  g[0] = 1.0;
  const bool levy = spec.on().family() == Family::Levy && spec.short_off().family() == Family::Levy &&
                    spec.long_off().family() == Family::Levy;
  if (levy) {
    const BinomialWeights w(spec.p1(), spec.p2(), last);
    const double cu = spec.on().levy_scale(), cs = spec.short_off().levy_scale(), cl = spec.long_off().levy_scale();
    for (int n = 1; n <= last; ++n) {
      double sum = 0.0;
      for (int k = 0; k <= n; ++k) sum += w(n, k) * levy_cdf(n * cu + k * cs + (n - k) * cl, t);
      g[n] = sum;
    }
    return g;
  }

  const auto& engine = model.engine();
  const GridSpec grid = engine.grid();
  // Node samples from tabulate() keep the density's value at x = 0.
  const auto short_table = tabulate(spec.short_off(), 1, grid);
  const auto long_table = tabulate(spec.long_off(), 1, grid);
  std::vector<double> off(static_cast<std::size_t>(grid.steps) + 1);
  for (std::size_t i = 0; i < off.size(); ++i)
    off[i] = spec.p1() * short_table.pdf_samples()[i] + spec.p2() * long_table.pdf_samples()[i];
  const ConvolutionTable cycle = convolve(*engine.nfold_table(spec.on(), 1), ConvolutionTable(grid, 1, off));
  ConvolutionTable folded = cycle;
  for (int n = 1; n <= last; ++n) {
    if (n > 1) folded = convolve(folded, cycle);
    g[n] = std::clamp(folded.cdf(t), 0.0, 1.0);
  }
  return g;
}

}  // namespace

void HistogramLayout::validate() const {
  if (marginal_bins < 1 || joint_bins < 1) throw ConfigError("histogram bin counts must be at least 1");
}

BinnedSummary::BinnedSummary(double t_in, HistogramLayout layout_in) : t(t_in), layout(layout_in) {
  layout.validate();
  const auto nm = static_cast<std::size_t>(layout.marginal_bins);
  const auto nj = static_cast<std::size_t>(layout.joint_bins);
  for (auto& per_target : marginal)
    for (auto& h : per_target) h.assign(nm, 0.0);
  for (int j = 0; j < kStates; ++j) {
    line_s[j].assign(nm, 0.0);
    line_l[j].assign(nm, 0.0);
    plane[j].assign(nj * nj, 0.0);
  }
}

int default_thread_count() {
  if (const char* env = std::getenv("OCCUPACT_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(std::min<long>(n, 1024));
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

EnsembleEstimate estimate_ensemble(const ProcessSpec& spec, double t, std::uint64_t reps, const HistogramLayout& bins,
                                   std::uint64_t seed, const CostSpec& cost, int threads) {
  require_time(t);
  bins.validate();
  cost.validate();
  if (reps < 1) throw ConfigError("reps must be at least 1");
  if (threads <= 0) threads = default_thread_count();

  std::vector<PathOutcome> paths(reps);
  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t blocks = (reps + kBlock - 1) / kBlock;
  detail::parallel_for(blocks, threads, [&](std::size_t block) {
    const std::uint64_t first = block * kBlock;
    const std::uint64_t end = std::min(reps, first + kBlock);
    for (std::uint64_t i = first; i < end; ++i) {
      auto rng = substream(seed, i);
      paths[i] = simulate_path(spec, t, rng);
    }
  });

  EnsembleEstimate est;
  est.t = t;
  est.reps = reps;
  est.seed = seed;
  est.cost = cost;
  BinnedSummary& f = est.frequencies;
  f = BinnedSummary(t, bins);
  const int nm = bins.marginal_bins;
  const int nj = bins.joint_bins;

  std::vector<std::uint64_t> cycle_counts;
  for (const auto& p : paths) {
    const bool s_pos = p.s > 0.0;
    const bool l_pos = p.l > 0.0;
    const int j = p.state;
    ++est.case_counts[JointCase{s_pos ? Part::Density : Part::AtomZero, l_pos ? Part::Density : Part::AtomZero, j}
                          .index()];
    if (s_pos) f.marginal[0][j][bin_of(p.s, t, nm)] += 1.0;
    else f.atoms_s[j] += 1.0;
    if (l_pos) f.marginal[1][j][bin_of(p.l, t, nm)] += 1.0;
    else f.atoms_l[j] += 1.0;
    if (s_pos && !l_pos) f.line_s[j][bin_of(p.s, t, nm)] += 1.0;
    if (!s_pos && l_pos) f.line_l[j][bin_of(p.l, t, nm)] += 1.0;
    if (s_pos && l_pos) f.plane[j][static_cast<std::size_t>(bin_of(p.s, t, nj)) * nj + bin_of(p.l, t, nj)] += 1.0;
    const auto n = static_cast<std::size_t>(p.cycles);
    if (cycle_counts.size() <= n) cycle_counts.resize(n + 1, 0);
    ++cycle_counts[n];
  }

  const double total = static_cast<double>(reps);
  auto normalize = [total](std::vector<double>& v) {
    for (double& x : v) x /= total;
  };
  for (int c = 0; c < kJointCases; ++c) f.cases[c] = static_cast<double>(est.case_counts[c]) / total;
  for (int j = 0; j < kStates; ++j) {
    f.atoms_s[j] /= total;
    f.atoms_l[j] /= total;
    normalize(f.marginal[0][j]);
    normalize(f.marginal[1][j]);
    normalize(f.line_s[j]);
    normalize(f.line_l[j]);
    normalize(f.plane[j]);
  }
  f.cycles.resize(cycle_counts.size());
  for (std::size_t n = 0; n < cycle_counts.size(); ++n) f.cycles[n] = static_cast<double>(cycle_counts[n]) / total;

  est.moments = sample_moments(paths, cost);
  return est;
}

double cycle_count_probability(const OccupationModel& model, int n, double t) {
  require_time(t);
  if (n < 0) throw DomainError("cycle count must be nonnegative");
  const auto g = cycle_hitting_cdfs(model, n + 1, t);
  return std::max(0.0, g[n] - g[n + 1]);
}

BinnedSummary analytic_summary(const OccupationModel& model, double t, const HistogramLayout& bins, int max_cycles) {
  require_time(t);
  bins.validate();
  if (max_cycles < 1) throw ConfigError("max_cycles must be at least 1");
  BinnedSummary out(t, bins);
  const int nm = bins.marginal_bins;
  const int nj = bins.joint_bins;
  const double wm = out.marginal_width();
  const double wj = out.joint_width();
  const int threads = default_thread_count();

  const auto mass = joint_total_mass(model, t);
  out.cases = mass.cases;
  for (int j = 0; j < kStates; ++j) {
    out.atoms_s[j] = atom_probability(model, OccupationTarget::ShortOff, j, t).value;
    out.atoms_l[j] = atom_probability(model, OccupationTarget::LongOff, j, t).value;
  }

  // Marginal and line histograms: one task per (histogram, bin).
  constexpr int kOneDim = 2 * kStates + 2 * kStates;
  detail::parallel_for(static_cast<std::size_t>(kOneDim) * nm, threads, [&](std::size_t task) {
    const int h = static_cast<int>(task) / nm;
    const int b = static_cast<int>(task) % nm;
    const double lo = b * wm;
    const double hi = b + 1 == nm ? t : (b + 1) * wm;
    const auto rule = bin_rule(lo, hi);
    if (h < 2 * kStates) {
      const auto target = h < kStates ? OccupationTarget::ShortOff : OccupationTarget::LongOff;
      const int j = h % kStates;
      out.marginal[h / kStates][j][b] =
          rule.integrate([&](double x) { return marginal_density(model, target, j, x, t).value; });
      return;
    }
    const int line = h - 2 * kStates;
    const int j = line % kStates;
    const bool along_s = line < kStates;
    const JointCase c = along_s ? JointCase{Part::Density, Part::AtomZero, j} : JointCase{Part::AtomZero, Part::Density, j};
    if ((along_s && j == 2) || (!along_s && j == 1)) return;
    auto& target = along_s ? out.line_s[j][b] : out.line_l[j][b];
    target = rule.integrate([&](double x) { return joint_eval(model, c, x, x, t).value; });
  });

  // Joint histograms: one task per u bin. Cells crossing the diagonal are
  // clipped to u + v < t, with u split where the clipping changes shape.
  detail::parallel_for(static_cast<std::size_t>(nj), threads, [&](std::size_t row) {
    const int a = static_cast<int>(row);
    const double ua = a * wj;
    const double ub = a + 1 == nj ? t : (a + 1) * wj;
    SimplexEvaluator plane(model, t);
    for (int b = 0; b < nj; ++b) {
      const double vc = b * wj;
      const double vd = b + 1 == nj ? t : (b + 1) * wj;
      if (ua + vc >= t) break;
      std::vector<double> cuts{ua};
      for (double x : {t - vd, t - vc})
        if (x > ua && x < ub) cuts.push_back(x);
      cuts.push_back(ub);
      std::sort(cuts.begin(), cuts.end());
      std::array<double, kStates> cell{};
      for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
        const auto outer = bin_rule(cuts[piece], cuts[piece + 1]);
        for (std::size_t i = 0; i < outer.size(); ++i) {
          const double u = outer.nodes[i];
          const double top = std::min(vd, t - u);
          if (!(top > vc)) continue;
          const auto inner = bin_rule(vc, top);
          std::array<double, kStates> acc{};
          for (std::size_t k = 0; k < inner.size(); ++k) {
            const auto d = plane.densities(u, inner.nodes[k]);
            for (int j = 0; j < kStates; ++j) acc[j] += inner.weights[k] * d[j];
          }
          for (int j = 0; j < kStates; ++j) cell[j] += outer.weights[i] * acc[j];
        }
      }
      for (int j = 0; j < kStates; ++j) out.plane[j][static_cast<std::size_t>(a) * nj + b] = cell[j];
    }
  });

  const auto g = cycle_hitting_cdfs(model, max_cycles + 1, t);
  std::size_t count = 1;
  while (count <= static_cast<std::size_t>(max_cycles) && g[count] > 1e-15) ++count;
  out.cycles.resize(count);
  for (std::size_t n = 0; n < count; ++n) out.cycles[n] = std::max(0.0, g[n] - g[n + 1]);
  return out;
}

//------------------------------------------------------------------------------

int ComparisonReport::atom_failures() const {
  return static_cast<int>(std::count_if(atoms.begin(), atoms.end(), [&](const ZScore& z) {
    return !(std::abs(z.z) <= options.fail_z);
  }));
}

int ComparisonReport::moment_failures() const {
  return static_cast<int>(std::count_if(moments.begin(), moments.end(), [&](const ZScore& z) {
    return !(std::abs(z.z) <= options.fail_z);
  }));
}

int ComparisonReport::cycle_failures() const {
  return static_cast<int>(std::count_if(cycles.begin(), cycles.end(), [&](const ZScore& z) {
    return !(std::abs(z.z) <= options.fail_z);
  }));
}

int ComparisonReport::density_failures() const {
  return static_cast<int>(std::count_if(densities.begin(), densities.end(), [&](const ZScore& z) {
    return !(std::abs(z.z) <= options.fail_z);
  }));
}

double ComparisonReport::density_warn_fraction() const {
  if (densities.empty()) return 0.0;
  const auto n = std::count_if(densities.begin(), densities.end(),
                               [&](const ZScore& z) { return !(std::abs(z.z) <= options.warn_z); });
  return static_cast<double>(n) / static_cast<double>(densities.size());
}

bool ComparisonReport::passed() const {
  return structural_violations.empty() && atom_failures() == 0 && moment_failures() == 0 && cycle_failures() == 0 &&
         density_failures() <= options.max_density_failures && density_warn_fraction() <= options.max_warn_fraction;
}

namespace {

class CellTester {
 public:
  CellTester(ComparisonReport& report, double reps) : report_(report), reps_(reps) {}

  // Binomial z-score of one probability cell. Cells with too few expected
  // hits are skipped unless the analytic value is exactly zero, which is
  // checked structurally.
  void test(std::vector<ZScore>& into, const std::string& group, const std::string& label, double empirical,
            double analytic, bool always = false) {
    if (analytic <= 0.0) {
      if (empirical > 0.0) report_.structural_violations.push_back(group + " " + label);
      else if (always) into.push_back({group, label, empirical, 0.0, 0.0, 0.0});
      return;
    }
    if (!always && analytic * reps_ < report_.options.min_expected_count) return;
    const double p = std::min(analytic, 1.0);
    const double se = std::sqrt(p * (1.0 - p) / reps_);
    const double diff = empirical - analytic;
    into.push_back({group, label, empirical, analytic, se, diff == 0.0 ? 0.0 : diff / se});
  }

 private:
  ComparisonReport& report_;
  double reps_;
};

void moment_z(std::vector<ZScore>& into, const std::string& label, const Estimate& e, double analytic) {
  const double diff = e.value - analytic;
  into.push_back({"moment", label, e.value, analytic, e.se, diff == 0.0 ? 0.0 : diff / e.se});
}

}  // namespace

ComparisonReport compare(const EnsembleEstimate& estimate, const BinnedSummary& analytic, const MomentSummary& moments,
                         const CompareOptions& options) {
  const BinnedSummary& f = estimate.frequencies;
  if (!(f.layout == analytic.layout) || f.t != analytic.t || f.t != estimate.t)
    throw ConfigError("simulated and analytic summaries use different bins or times");
  if (moments.t != estimate.t) throw ConfigError("moment summary evaluated at a different time");
  if (estimate.reps < 1) throw ConfigError("estimate holds no replications");

  ComparisonReport report;
  report.options = options;
  CellTester cells(report, static_cast<double>(estimate.reps));

  for (int c = 0; c < kJointCases; ++c)
    cells.test(report.atoms, "case", JointCase::from_index(c).label(), f.cases[c], analytic.cases[c], true);
  for (int j = 0; j < kStates; ++j) {
    const std::string x = "X=" + std::to_string(j);
    cells.test(report.atoms, "atom", "S=0," + x, f.atoms_s[j], analytic.atoms_s[j], true);
    cells.test(report.atoms, "atom", "L=0," + x, f.atoms_l[j], analytic.atoms_l[j], true);
  }

  const int nm = f.layout.marginal_bins;
  const int nj = f.layout.joint_bins;
  const char* names[2] = {"S", "L"};
  for (int j = 0; j < kStates; ++j) {
    const std::string x = ",X=" + std::to_string(j);
    for (int b = 0; b < nm; ++b) {
      const std::string bin = ",bin=" + std::to_string(b);
      for (int target = 0; target < 2; ++target)
        cells.test(report.densities, std::string("marginal ") + names[target], names[target] + x + bin,
                   f.marginal[target][j][b], analytic.marginal[target][j][b]);
      cells.test(report.densities, "line S", "L=0" + x + bin, f.line_s[j][b], analytic.line_s[j][b]);
      cells.test(report.densities, "line L", "S=0" + x + bin, f.line_l[j][b], analytic.line_l[j][b]);
    }
    for (int a = 0; a < nj; ++a)
      for (int b = 0; b < nj; ++b) {
        const auto idx = static_cast<std::size_t>(a) * nj + b;
        cells.test(report.densities, "joint", "u=" + std::to_string(a) + ",v=" + std::to_string(b) + x,
                   f.plane[j][idx], analytic.plane[j][idx]);
      }
  }

  const std::size_t n_cycles = std::max(f.cycles.size(), analytic.cycles.size());
  for (std::size_t n = 0; n < n_cycles; ++n) {
    const double emp = n < f.cycles.size() ? f.cycles[n] : 0.0;
    const double ana = n < analytic.cycles.size() ? analytic.cycles[n] : 0.0;
    // Counts beyond the analytic table are a tail of mass below 1e-15.
    if (ana == 0.0 && n >= analytic.cycles.size()) {
      if (emp > 0.0) report.structural_violations.push_back("cycles N=" + std::to_string(n));
      continue;
    }
    cells.test(report.cycles, "cycles", "N=" + std::to_string(n), emp, ana);
  }

  const auto& m = estimate.moments;
  moment_z(report.moments, "E_S", m.mean_s, moments.mean_s);
  moment_z(report.moments, "Var_S", m.var_s, moments.var_s);
  moment_z(report.moments, "E_L", m.mean_l, moments.mean_l);
  moment_z(report.moments, "Var_L", m.var_l, moments.var_l);
  moment_z(report.moments, "Cov", m.cov, moments.cov);
  moment_z(report.moments, "rho", m.rho, moments.rho);
  moment_z(report.moments, "E_C", m.mean_c, moments.mean_c);
  moment_z(report.moments, "Var_C", m.var_c, moments.var_c);
  return report;
}

ComparisonReport compare_to_analytic(const EnsembleEstimate& estimate, const OccupationModel& model,
                                     const CompareOptions& options) {
  const auto binned = analytic_summary(model, estimate.t, estimate.frequencies.layout);
  const auto moments = moment_summary(model, estimate.cost, estimate.t);
  return compare(estimate, binned, moments, options);
}

}  // namespace occupact
