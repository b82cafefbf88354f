#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "occupact/joint.hpp"
#include "occupact/model.hpp"
#include "occupact/moments.hpp"

namespace occupact {

/// One simulated trajectory observed at time t.
struct PathOutcome {
  double s = 0.0;  // S(t)
  double l = 0.0;  // L(t)
  double u = 0.0;  // U(t)
  int state = 0;   // X(t)
  std::int64_t cycles = 0;  // N(t), completed on-off cycles
};

/// Runs the alternating construction until the clock passes t: an on period,
/// then an off period whose type is short with probability p1.
template <class Rng>
PathOutcome simulate_path(const ProcessSpec& spec, double t, Rng& rng) {
  PathOutcome out;
  double clock = 0.0;
  for (;;) {
    const double on = spec.on().sample(rng);
    if (clock + on >= t) {
      out.u += t - clock;
      out.state = 0;
      return out;
    }
    out.u += on;
    clock += on;
    const bool short_off = uniform_open01(rng) < spec.p1();
    const double off = short_off ? spec.short_off().sample(rng) : spec.long_off().sample(rng);
    double& bucket = short_off ? out.s : out.l;
    if (clock + off >= t) {
      bucket += t - clock;
      out.state = short_off ? 1 : 2;
      return out;
    }
    bucket += off;
    clock += off;
    ++out.cycles;
  }
}

/// Uniform bin counts on (0, t). Marginal and line histograms use
/// marginal_bins; the joint histograms use joint_bins per axis on the
/// bounding box of the simplex.
struct HistogramLayout {
  int marginal_bins = 150;
  int joint_bins = 75;

  /// Throws ConfigError for a bin count below 1 (zero-width bins).
  void validate() const;
  friend bool operator==(const HistogramLayout&, const HistogramLayout&) = default;
};

/// Probabilities of every case, atom and histogram cell of one layout, either
/// estimated (relative frequencies) or computed from the series.
struct BinnedSummary {
  double t = 0.0;
  HistogramLayout layout;
  std::array<double, kJointCases> cases{};
  std::array<double, kStates> atoms_s{};  // Pr(S = 0, X = j)
  std::array<double, kStates> atoms_l{};  // Pr(L = 0, X = j)
  /// [target][j][bin]: S or L in the bin (and > 0), X = j.
  std::array<std::array<std::vector<double>, kStates>, 2> marginal;
  /// [j][bin]: S in the bin, L = 0, X = j.
  std::array<std::vector<double>, kStates> line_s;
  /// [j][bin]: S = 0, L in the bin, X = j.
  std::array<std::vector<double>, kStates> line_l;
  /// [j][u bin * joint_bins + v bin]: S, L both positive, X = j.
  std::array<std::vector<double>, kStates> plane;
  /// Pr(N(t) = n) for n = 0, 1, ...
  std::vector<double> cycles;

  BinnedSummary() = default;
  BinnedSummary(double t, HistogramLayout layout);

  double marginal_width() const { return t / layout.marginal_bins; }
  double joint_width() const { return t / layout.joint_bins; }
};

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

struct MomentEstimates {
  Estimate mean_s, var_s, mean_l, var_l, cov, rho, mean_c, var_c;
};

struct EnsembleEstimate {
  double t = 0.0;
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;
  CostSpec cost;
  std::array<std::uint64_t, kJointCases> case_counts{};
  BinnedSummary frequencies;
  MomentEstimates moments;
};

/// Threads to use: OCCUPACT_THREADS if set and positive, else the hardware count.
int default_thread_count();

/// Simulates reps paths. Replication i draws from substream(seed, i) and the
/// aggregation runs in index order, so the result is independent of threads.
EnsembleEstimate estimate_ensemble(const ProcessSpec& spec, double t, std::uint64_t reps, const HistogramLayout& bins,
                                   std::uint64_t seed, const CostSpec& cost = {}, int threads = 0);

/// Exact cell probabilities of `bins` for the model at time t. Pr(N(t) = n)
/// comes from the collapsed on-off process with the p1/p2 off-time mixture.
BinnedSummary analytic_summary(const OccupationModel& model, double t, const HistogramLayout& bins,
                               int max_cycles = 60);

/// Pr(N(t) = n) from the collapsed two-state process.
double cycle_count_probability(const OccupationModel& model, int n, double t);

struct CompareOptions {
  /// Cells expected to hold fewer hits than this are not tested.
  double min_expected_count = 10.0;
  double fail_z = 4.0;
  double warn_z = 2.0;
  double max_warn_fraction = 0.05;
  /// Density cells allowed beyond fail_z, the expected false-positive count.
  int max_density_failures = 1;
};

struct ZScore {
  std::string group;
  std::string label;
  double empirical = 0.0;
  double analytic = 0.0;
  double se = 0.0;
  double z = 0.0;
};

struct ComparisonReport {
  std::vector<ZScore> atoms;      // joint cases and marginal atoms
  std::vector<ZScore> densities;  // histogram cells with enough expected hits
  std::vector<ZScore> moments;
  std::vector<ZScore> cycles;
  /// Cells whose analytic probability is exactly 0 but which were hit.
  std::vector<std::string> structural_violations;
  CompareOptions options;

  int atom_failures() const;
  int moment_failures() const;
  int cycle_failures() const;
  int density_failures() const;
  double density_warn_fraction() const;
  bool passed() const;
};

/// z = (empirical - analytic) / se, with se from the null binomial law for
/// cells and from the sample for moments. Throws ConfigError when the layouts
/// differ.
ComparisonReport compare(const EnsembleEstimate& estimate, const BinnedSummary& analytic,
                         const MomentSummary& moments, const CompareOptions& options = {});

ComparisonReport compare_to_analytic(const EnsembleEstimate& estimate, const OccupationModel& model,
                                     const CompareOptions& options = {});

}  // namespace occupact
