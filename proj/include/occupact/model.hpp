#pragma once

#include <memory>
#include <vector>

#include "occupact/dist.hpp"

namespace occupact {

/// States of the process: 0 = on, 1 = short off, 2 = long off.
inline constexpr int kStates = 3;

/// Which off-state occupation time is evaluated: S(t) or L(t).
enum class OccupationTarget { ShortOff, LongOff };

/// Maps a state index under the exchange of the two off-states.
constexpr int swap_state(int j) { return j == 0 ? 0 : 3 - j; }

/// Holding laws of the three states plus the probability p1 that an off
/// period is of the short type.
class ProcessSpec {
 public:
  /// Requires 0 < p1 <= 1.
  ProcessSpec(HoldingDistribution on, HoldingDistribution short_off, HoldingDistribution long_off, double p1);

  const HoldingDistribution& on() const { return on_; }
  const HoldingDistribution& short_off() const { return short_off_; }
  const HoldingDistribution& long_off() const { return long_off_; }
  double p1() const { return p1_; }
  double p2() const { return p2_; }

  /// Exchanges the roles of the two off-states (and p1 with p2). The result
  /// may carry p1 = 0, which only arises internally.
  ProcessSpec swapped() const;
  ProcessSpec with_p1(double p1) const;

 private:
  struct Unchecked {};
  ProcessSpec(Unchecked, HoldingDistribution on, HoldingDistribution short_off, HoldingDistribution long_off,
              double p1, double p2);

  HoldingDistribution on_;
  HoldingDistribution short_off_;
  HoldingDistribution long_off_;
  double p1_;
  double p2_;
};

/// Truncation of the infinite cycle-count series.
struct SeriesControl {
  double eps_term = 1e-12;
  int n_min = 5;
  int n_max = 200;

  void validate() const;
};

/// Panel counts for the composite Gauss-Legendre rules (eight nodes each).
struct QuadratureControl {
  int panels_1d = 256;
  int panels_2d = 64;

  void validate() const;
};

/// A series evaluation; `converged` is false when truncation hit n_max.
struct SeriesValue {
  double value = 0.0;
  bool converged = true;
};

/// w(n, k) = C(n, k) p1^k p2^(n-k), built row by row with the Pascal
/// recurrence so no factorial or large power is ever formed.
class BinomialWeights {
 public:
  BinomialWeights(double p1, double p2, int n_max);

  double operator()(int n, int k) const { return w_[index(n, k)]; }
  int n_max() const { return n_max_; }

 private:
  static std::size_t index(int n, int k) {
    return static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) + 1) / 2 + static_cast<std::size_t>(k);
  }

  int n_max_;
  std::vector<double> w_;
};

/// A process spec as seen from one occupation target, with its weights.
struct Orientation {
  ProcessSpec spec;
  std::shared_ptr<const BinomialWeights> weights;
};

struct Truncation {
  int last = 0;  // highest cycle index summed
  bool converged = true;
};

/// Everything needed to evaluate the series: the spec in both orientations,
/// a (shared) convolution engine and the numerical controls.
class OccupationModel {
 public:
  /// Builds an engine whose grid covers [0, horizon].
  OccupationModel(ProcessSpec spec, double horizon, SeriesControl series = {}, int grid_steps = kDefaultGridSteps,
                  QuadratureControl quad = {});
  OccupationModel(ProcessSpec spec, std::shared_ptr<const ConvolutionEngine> engine, SeriesControl series = {},
                  QuadratureControl quad = {});

  const ProcessSpec& spec() const { return forward_.spec; }
  const SeriesControl& series() const { return series_; }
  const QuadratureControl& quadrature() const { return quad_; }
  const ConvolutionEngine& engine() const { return *engine_; }
  std::shared_ptr<const ConvolutionEngine> shared_engine() const { return engine_; }

  /// ShortOff sees the spec as given; LongOff sees the swapped spec.
  const Orientation& oriented(OccupationTarget target) const {
    return target == OccupationTarget::ShortOff ? forward_ : backward_;
  }

  /// Same engine, off-states exchanged.
  OccupationModel swapped() const;
  /// Same engine and distributions, new switch probability.
  OccupationModel with_p1(double p1) const;

  /// First n >= n_min with F_U^{(n)}(t) < eps_term, which bounds every cdf
  /// factor of later terms; n_max (not converged) if there is none.
  Truncation truncation(double t) const;

 private:
  OccupationModel(Orientation forward, Orientation backward, std::shared_ptr<const ConvolutionEngine> engine,
                  SeriesControl series, QuadratureControl quad);

  Orientation forward_;
  Orientation backward_;
  std::shared_ptr<const ConvolutionEngine> engine_;
  SeriesControl series_;
  QuadratureControl quad_;
};

/// The example server of the Levy study: medians of 7 days, 30 minutes and
/// 4 hours in days, converted to scale-roots.
ProcessSpec levy_server_spec(double p1);

/// Same, with the scale-roots rounded to three decimals (1.785, 0.097, 0.275).
ProcessSpec levy_server_spec_rounded(double p1);

void require_time(double t);
void require_state(int j);

}  // namespace occupact
