#include "occupact/moments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "occupact/error.hpp"
#include "occupact/joint.hpp"
#include "occupact/marginal.hpp"
#include "occupact/quadrature.hpp"

namespace occupact {

void CostSpec::validate() const {
  if (!std::isfinite(c0) || !std::isfinite(c1) || !std::isfinite(c2)) throw ParameterError("cost rates must be finite");
}

MeanVar occupation_mean_var(const OccupationModel& model, OccupationTarget target, double t) {
  require_time(t);
  const auto rule = graded_panels(0.0, t, model.quadrature().panels_1d);
  MeanVar out;
  double first = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double s = rule.nodes[i];
    double density = 0.0;
    for (int j = 0; j < kStates; ++j) {
      const auto d = marginal_density(model, target, j, s, t);
      density += d.value;
      out.converged = out.converged && d.converged;
    }
    first += rule.weights[i] * s * density;
    second += rule.weights[i] * s * s * density;
  }
  out.mean = first;
  out.variance = second - first * first;
  if (out.variance < -1e-9) {
    std::ostringstream msg;
    msg << "negative occupation-time variance " << out.variance << " at t = " << t;
    throw ConsistencyError(msg.str());
  }
  out.variance = std::max(out.variance, 0.0);
  return out;
}

double occupation_cross_moment(const OccupationModel& model, double t) {
  require_time(t);
  const int panels = model.quadrature().panels_2d;
  SimplexEvaluator plane(model, t);
  const auto outer = graded_panels(0.0, t, panels);
  double sum = 0.0;
  for (std::size_t a = 0; a < outer.size(); ++a) {
    const double u = outer.nodes[a];
    const auto inner = graded_panels(0.0, t - u, panels);
    double row = 0.0;
    for (std::size_t b = 0; b < inner.size(); ++b) {
      const double v = inner.nodes[b];
      const auto d = plane.densities(u, v);
      row += inner.weights[b] * v * (d[0] + d[1] + d[2]);
    }
    sum += outer.weights[a] * u * row;
  }
  return sum;
}

double occupation_cov(const OccupationModel& model, double t) {
  const auto s = occupation_mean_var(model, OccupationTarget::ShortOff, t);
  const auto l = occupation_mean_var(model, OccupationTarget::LongOff, t);
  return occupation_cross_moment(model, t) - s.mean * l.mean;
}

MeanVar cost_mean_var(const MeanVar& s, const MeanVar& l, double cov, const CostSpec& cost, double t) {
  cost.validate();
  const double ds = cost.c1 - cost.c0;
  const double dl = cost.c2 - cost.c0;
  MeanVar out;
  out.mean = cost.c0 * (t - s.mean - l.mean) + cost.c1 * s.mean + cost.c2 * l.mean;
  out.variance = std::max(0.0, ds * ds * s.variance + dl * dl * l.variance + 2.0 * ds * dl * cov);
  out.converged = s.converged && l.converged;
  return out;
}

MeanVar cost_mean_var(const OccupationModel& model, const CostSpec& cost, double t) {
  const auto s = occupation_mean_var(model, OccupationTarget::ShortOff, t);
  const auto l = occupation_mean_var(model, OccupationTarget::LongOff, t);
  const double cov = occupation_cross_moment(model, t) - s.mean * l.mean;
  return cost_mean_var(s, l, cov, cost, t);
}

MomentSummary moment_summary(const OccupationModel& model, const CostSpec& cost, double t) {
  const auto s = occupation_mean_var(model, OccupationTarget::ShortOff, t);
  const auto l = occupation_mean_var(model, OccupationTarget::LongOff, t);
  const double cov = occupation_cross_moment(model, t) - s.mean * l.mean;
  const auto c = cost_mean_var(s, l, cov, cost, t);

  MomentSummary out;
  out.t = t;
  out.p1 = model.spec().p1();
  out.mean_s = s.mean;
  out.var_s = s.variance;
  out.mean_l = l.mean;
  out.var_l = l.variance;
  out.mean_c = c.mean;
  out.var_c = c.variance;
  out.cov = cov;
  const double scale = std::sqrt(s.variance * l.variance);
  out.rho = scale > 0.0 ? std::clamp(cov / scale, -1.0, 1.0) : 0.0;
  out.converged = s.converged && l.converged && model.truncation(t).converged;
  return out;
}

std::vector<MomentSummary> reproduce_table(const ProcessSpec& family, std::vector<double> t_values,
                                           std::vector<double> p1_values, const CostSpec& cost,
                                           const SeriesControl& series, int grid_steps,
                                           const QuadratureControl& quad) {
  if (t_values.empty() || p1_values.empty()) throw ParameterError("table needs at least one t and one p1");
  std::sort(t_values.begin(), t_values.end());
  std::sort(p1_values.begin(), p1_values.end());
  std::vector<MomentSummary> rows;
  rows.reserve(t_values.size() * p1_values.size());
  for (double t : t_values) {
    require_time(t);
    const OccupationModel base(family, t, series, grid_steps, quad);
    for (double p1 : p1_values) rows.push_back(moment_summary(base.with_p1(p1), cost, t));
  }
  return rows;
}

}  // namespace occupact
