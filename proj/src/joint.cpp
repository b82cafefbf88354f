#include "occupact/joint.hpp"

#include "occupact/error.hpp"
#include "occupact/quadrature.hpp"

namespace occupact {

using detail::FoldFactors;

namespace {

// p_SL0: X = 0 with both off-states visited. Symmetric in the two roles.
double plane_on(const BinomialWeights& w, int last, const FoldFactors& short_u, const FoldFactors& long_v,
                const FoldFactors& on_r) {
  double sum = 0.0;
  for (int n = 2; n <= last; ++n) {
    const double gap = on_r.cdf[n] - on_r.cdf[n + 1];
    if (gap == 0.0) continue;
    double inner = 0.0;
    for (int k = 1; k <= n - 1; ++k) inner += w(n, k) * short_u.pdf[k] * long_v.pdf[n - k];
    sum += gap * inner;
  }
  return sum;
}

// p_SL1: currently in the short off-state, long off-state visited before.
double plane_short(double p1, const BinomialWeights& w, int last, const FoldFactors& short_u,
                   const FoldFactors& long_v, const FoldFactors& on_r) {
  double sum = 0.0;
  for (int n = 1; n <= last; ++n) {
    const double on_density = on_r.pdf[n + 1];
    if (on_density == 0.0) continue;
    double inner = 0.0;
    for (int k = 0; k <= n - 1; ++k) inner += w(n, k) * long_v.pdf[n - k] * (short_u.cdf[k] - short_u.cdf[k + 1]);
    sum += p1 * on_density * inner;
  }
  return sum;
}

// Pr(S = 0, L in dv, X = 0) / dv.
double line_on(const Orientation& o, const ConvolutionEngine& engine, int last, double v, double t) {
  if (!(v > 0.0 && v < t)) return 0.0;
  const FoldFactors long_v(engine, o.spec.long_off(), v, last);
  const FoldFactors on_x(engine, o.spec.on(), t - v, last + 1);
  const auto& w = *o.weights;
  double sum = 0.0;
  for (int n = 1; n <= last; ++n) sum += long_v.pdf[n] * (on_x.cdf[n] - on_x.cdf[n + 1]) * w(n, 0);
  return sum;
}

// Pr(S in du, L = 0, X = 1) / du.
double line_short(const Orientation& o, const ConvolutionEngine& engine, int last, double u, double t) {
  if (!(u > 0.0 && u < t)) return 0.0;
  const FoldFactors short_u(engine, o.spec.short_off(), u, last + 1);
  const FoldFactors on_x(engine, o.spec.on(), t - u, last + 1);
  const auto& w = *o.weights;
  double sum = 0.0;
  for (int n = 0; n <= last; ++n)
    sum += o.spec.p1() * w(n, n) * on_x.pdf[n + 1] * (short_u.cdf[n] - short_u.cdf[n + 1]);
  return sum;
}

bool in_simplex(double u, double v, double t) { return u > 0.0 && v > 0.0 && u + v < t; }

ValueKind kind_of(const JointCase& c) {
  if (c.s_part == Part::AtomZero && c.l_part == Part::AtomZero) return ValueKind::Probability;
  if (c.s_part == Part::Density && c.l_part == Part::Density) return ValueKind::PlaneDensity;
  return ValueKind::LineDensity;
}

}  // namespace

//------------------------------------------------------------------------------

int JointCase::index() const {
  return 4 * j + (s_part == Part::Density ? 2 : 0) + (l_part == Part::Density ? 1 : 0);
}

JointCase JointCase::from_index(int index) {
  if (index < 0 || index >= kJointCases) throw DomainError("joint case index out of range");
  return {(index & 2) ? Part::Density : Part::AtomZero, (index & 1) ? Part::Density : Part::AtomZero, index / 4};
}

JointCase JointCase::swapped() const { return {l_part, s_part, swap_state(j)}; }

std::string JointCase::label() const {
  std::string out = s_part == Part::AtomZero ? "S=0," : "S>0,";
  out += l_part == Part::AtomZero ? "L=0," : "L>0,";
  out += "X=" + std::to_string(j);
  return out;
}

JointValue joint_eval(const OccupationModel& model, JointCase jcase, double u, double v, double t) {
  require_time(t);
  require_state(jcase.j);
  JointValue out{jcase, 0.0, kind_of(jcase), true};
  const bool s_atom = jcase.s_part == Part::AtomZero;
  const bool l_atom = jcase.l_part == Part::AtomZero;

  // Structurally impossible: state 1 at t forces S > 0, state 2 forces L > 0.
  if ((jcase.j == 1 && s_atom) || (jcase.j == 2 && l_atom)) return out;

  const auto& engine = model.engine();
  if (s_atom && l_atom) {  // only j = 0 remains
    out.value = 1.0 - engine.nfold_cdf(model.spec().on(), 1, t);
    return out;
  }

  const auto trunc = model.truncation(t);
  out.converged = trunc.converged;
  const auto& forward = model.oriented(OccupationTarget::ShortOff);
  const auto& backward = model.oriented(OccupationTarget::LongOff);
  const int last = trunc.last;

  if (!s_atom && !l_atom) {
    if (!in_simplex(u, v, t)) return out;
    const double r = t - (u + v);
    const FoldFactors on_r(engine, model.spec().on(), r, last + 1);
    if (jcase.j == 0) {
      const FoldFactors short_u(engine, forward.spec.short_off(), u, last + 1);
      const FoldFactors long_v(engine, forward.spec.long_off(), v, last + 1);
      out.value = plane_on(*forward.weights, last, short_u, long_v, on_r);
    } else if (jcase.j == 1) {
      const FoldFactors short_u(engine, forward.spec.short_off(), u, last + 1);
      const FoldFactors long_v(engine, forward.spec.long_off(), v, last + 1);
      out.value = plane_short(forward.spec.p1(), *forward.weights, last, short_u, long_v, on_r);
    } else {
      const FoldFactors short_v(engine, backward.spec.short_off(), v, last + 1);
      const FoldFactors long_u(engine, backward.spec.long_off(), u, last + 1);
      out.value = plane_short(backward.spec.p1(), *backward.weights, last, short_v, long_u, on_r);
    }
    return out;
  }

  if (s_atom) {  // S = 0, L in dv; j is 0 or 2
    out.value = jcase.j == 0 ? line_on(forward, engine, last, v, t) : line_short(backward, engine, last, v, t);
  } else {  // S in du, L = 0; j is 0 or 1
    out.value = jcase.j == 0 ? line_on(backward, engine, last, u, t) : line_short(forward, engine, last, u, t);
  }
  return out;
}

SeriesValue marginalize_from_joint(const OccupationModel& model, int j, double u, double t) {
  require_time(t);
  require_state(j);
  if (!(u > 0.0 && u < t)) throw DomainError("marginalization point must satisfy 0 < u < t");
  const auto line = joint_eval(model, {Part::Density, Part::AtomZero, j}, u, 0.0, t);
  SimplexEvaluator plane(model, t);
  const auto rule = graded_panels(0.0, t - u, model.quadrature().panels_2d);
  const double integral = rule.integrate([&](double v) { return plane.densities(u, v)[j]; });
  return {line.value + integral, line.converged && plane.converged()};
}

JointMass joint_total_mass(const OccupationModel& model, double t) {
  require_time(t);
  JointMass mass;
  const auto& quad = model.quadrature();

  for (int index = 0; index < kJointCases; ++index) {
    const auto c = JointCase::from_index(index);
    if (c.s_part == Part::AtomZero && c.l_part == Part::AtomZero) {
      mass.cases[index] = joint_eval(model, c, 0.0, 0.0, t).value;
    } else if (kind_of(c) == ValueKind::LineDensity) {
      const auto rule = graded_panels(0.0, t, quad.panels_1d);
      mass.cases[index] = rule.integrate([&](double x) {
        const auto value = joint_eval(model, c, x, x, t);
        mass.converged = mass.converged && value.converged;
        return value.value;
      });
    }
  }

  SimplexEvaluator plane(model, t);
  mass.converged = mass.converged && plane.converged();
  const auto outer = graded_panels(0.0, t, quad.panels_2d);
  std::array<double, kStates> plane_mass{};
  for (std::size_t a = 0; a < outer.size(); ++a) {
    const double u = outer.nodes[a];
    const auto inner = graded_panels(0.0, t - u, quad.panels_2d);
    std::array<double, kStates> row{};
    for (std::size_t b = 0; b < inner.size(); ++b) {
      const auto d = plane.densities(u, inner.nodes[b]);
      for (int j = 0; j < kStates; ++j) row[j] += inner.weights[b] * d[j];
    }
    for (int j = 0; j < kStates; ++j) plane_mass[j] += outer.weights[a] * row[j];
  }
  for (int j = 0; j < kStates; ++j) mass.cases[JointCase{Part::Density, Part::Density, j}.index()] = plane_mass[j];

  for (double p : mass.cases) mass.total += p;
  return mass;
}

//------------------------------------------------------------------------------

SimplexEvaluator::SimplexEvaluator(const OccupationModel& model, double t)
    : model_(model), t_(t), truncation_(model.truncation(t)) {}

std::array<double, kStates> SimplexEvaluator::densities(double u, double v) {
  if (!in_simplex(u, v, t_)) return {0.0, 0.0, 0.0};
  const auto& engine = model_.engine();
  const auto& forward = model_.oriented(OccupationTarget::ShortOff);
  const auto& backward = model_.oriented(OccupationTarget::LongOff);
  const int last = truncation_.last;
  if (u != cached_u_) {
    short_at_u_ = FoldFactors(engine, forward.spec.short_off(), u, last + 1);
    cached_u_ = u;
  }
  const FoldFactors long_v(engine, forward.spec.long_off(), v, last + 1);
  const FoldFactors on_r(engine, forward.spec.on(), t_ - (u + v), last + 1);
  return {plane_on(*forward.weights, last, short_at_u_, long_v, on_r),
          plane_short(forward.spec.p1(), *forward.weights, last, short_at_u_, long_v, on_r),
          plane_short(backward.spec.p1(), *backward.weights, last, long_v, short_at_u_, on_r)};
}

}  // namespace occupact
