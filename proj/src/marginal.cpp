#include "occupact/marginal.hpp"

#include <cmath>
#include <limits>

#include "occupact/fold_cache.hpp"
#include "occupact/quadrature.hpp"

namespace occupact {

namespace {

// F_U^{(a)} * F_L^{(b)}(x) for 0 <= a, b <= size - 1, computed on first use.
class MixedCdfCache {
 public:
  MixedCdfCache(const ConvolutionEngine& engine, const ProcessSpec& spec, double x, int size)
      : engine_(engine),
        spec_(spec),
        x_(x),
        size_(static_cast<std::size_t>(size)),
        values_(size_ * size_, std::numeric_limits<double>::quiet_NaN()) {}

  double operator()(int a, int b) {
    double& v = values_[static_cast<std::size_t>(a) * size_ + static_cast<std::size_t>(b)];
    if (std::isnan(v)) v = engine_.mixed_cdf(spec_.on(), a, spec_.long_off(), b, x_);
    return v;
  }

 private:
  const ConvolutionEngine& engine_;
  const ProcessSpec& spec_;
  double x_;
  std::size_t size_;
  std::vector<double> values_;
};

// Pr(S(t) = 0, X(t) = j) for the orientation's short off-state.
double short_atom(const Orientation& o, const ConvolutionEngine& engine, int last, int j, double t) {
  if (j == 1) return 0.0;
  const auto& w = *o.weights;
  MixedCdfCache mixed(engine, o.spec, t, last + 2);
  double sum = 0.0;
  for (int n = 0; n <= last; ++n) {
    const double p2_pow = w(n, 0);  // p2^n
    if (p2_pow == 0.0) break;
    if (j == 0)
      sum += (mixed(n, n) - mixed(n + 1, n)) * p2_pow;
    else
      sum += (mixed(n + 1, n) - mixed(n + 1, n + 1)) * p2_pow * o.spec.p2();
  }
  return sum;
}

double short_density(const Orientation& o, const ConvolutionEngine& engine, int last, int j, double s, double t) {
  if (!(s > 0.0 && s < t)) return 0.0;
  const auto& spec = o.spec;
  const auto& w = *o.weights;
  const double x = t - s;

  if (j == 1) {
    // f_U^{(n+1)} * f_L^{(n-k)}(t - s) [F_S^{(k)}(s) - F_S^{(k+1)}(s)]
    const detail::FoldFactors short_off(engine, spec.short_off(), s, last + 1);
    double sum = 0.0;
    for (int n = 0; n <= last; ++n) {
      double inner = 0.0;
      for (int k = 0; k <= n; ++k) {
        const double weight = w(n, k);
        const double gap = short_off.cdf[k] - short_off.cdf[k + 1];
        if (weight == 0.0 || gap == 0.0) continue;
        inner += weight * engine.mixed_pdf(spec.on(), n + 1, spec.long_off(), n - k, x) * gap;
      }
      sum += spec.p1() * inner;
    }
    return sum;
  }

  // j = 0 and j = 2 share the shape f_S^{(k)}(s) [cdf difference at t - s].
  const detail::FoldFactors short_off(engine, spec.short_off(), s, last);
  MixedCdfCache mixed(engine, spec, x, last + 2);
  double sum = 0.0;
  for (int n = 1; n <= last; ++n) {
    double inner = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double weight = w(n, k);
      const double density = short_off.pdf[k];
      if (weight == 0.0 || density == 0.0) continue;
      const double gap = j == 0 ? mixed(n, n - k) - mixed(n + 1, n - k) : mixed(n + 1, n - k) - mixed(n + 1, n - k + 1);
      inner += weight * density * gap;
    }
    sum += inner;
  }
  return j == 0 ? sum : spec.p2() * sum;
}

}  // namespace

SeriesValue atom_probability(const OccupationModel& model, OccupationTarget target, int j, double t) {
  require_time(t);
  require_state(j);
  const int oriented_state = target == OccupationTarget::ShortOff ? j : swap_state(j);
  if (oriented_state == 1) return {0.0, true};
  const auto trunc = model.truncation(t);
  return {short_atom(model.oriented(target), model.engine(), trunc.last, oriented_state, t), trunc.converged};
}

SeriesValue marginal_density(const OccupationModel& model, OccupationTarget target, int j, double s, double t) {
  require_time(t);
  require_state(j);
  const auto trunc = model.truncation(t);
  const int oriented_state = target == OccupationTarget::ShortOff ? j : swap_state(j);
  return {short_density(model.oriented(target), model.engine(), trunc.last, oriented_state, s, t), trunc.converged};
}

MarginalMass total_mass_check(const OccupationModel& model, OccupationTarget target, double t) {
  require_time(t);
  MarginalMass mass;
  const auto rule = graded_panels(0.0, t, model.quadrature().panels_1d);
  for (int j = 0; j < kStates; ++j) {
    const auto atom = atom_probability(model, target, j, t);
    mass.atoms[j] = atom.value;
    mass.converged = mass.converged && atom.converged;
    mass.densities[j] = rule.integrate([&](double s) {
      const auto d = marginal_density(model, target, j, s, t);
      mass.converged = mass.converged && d.converged;
      return d.value;
    });
    mass.total += mass.atoms[j] + mass.densities[j];
  }
  return mass;
}

SeriesValue atom_probability(const ProcessSpec& spec, OccupationTarget target, int j, double t,
                             const SeriesControl& ctl) {
  require_time(t);
  return atom_probability(OccupationModel(spec, t, ctl), target, j, t);
}

SeriesValue marginal_density(const ProcessSpec& spec, OccupationTarget target, int j, double s, double t,
                             const SeriesControl& ctl) {
  require_time(t);
  return marginal_density(OccupationModel(spec, t, ctl), target, j, s, t);
}

MarginalMass total_mass_check(const ProcessSpec& spec, OccupationTarget target, double t, const SeriesControl& ctl) {
  require_time(t);
  return total_mass_check(OccupationModel(spec, t, ctl), target, t);
}

}  // namespace occupact
