#include "occupact/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "occupact/error.hpp"

namespace occupact {

namespace {

using Gauss = boost::math::quadrature::gauss<double, kGaussOrder>;

void append_panel(QuadratureRule& rule, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const auto& x = Gauss::abscissa();
  const auto& w = Gauss::weights();
  // Boost stores the nonnegative half of a symmetric rule; x[0] is 0 for odd orders.
  for (std::size_t i = x.size(); i-- > 0;) {
    if (x[i] == 0.0) continue;
    rule.nodes.push_back(mid - half * x[i]);
    rule.weights.push_back(half * w[i]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      rule.nodes.push_back(mid);
      rule.weights.push_back(half * w[i]);
      continue;
    }
    rule.nodes.push_back(mid + half * x[i]);
    rule.weights.push_back(half * w[i]);
  }
}

void check_interval(double a, double b, int panels) {
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) throw DomainError("quadrature interval must be nonempty");
  if (panels < 1) throw ParameterError("quadrature needs at least one panel");
}

}  // namespace

QuadratureRule uniform_panels(double a, double b, int panels) {
  check_interval(a, b, panels);
  QuadratureRule rule;
  rule.nodes.reserve(static_cast<std::size_t>(panels) * kGaussOrder);
  rule.weights.reserve(rule.nodes.capacity());
  for (int p = 0; p < panels; ++p) {
    const double lo = a + (b - a) * p / panels;
    const double hi = p + 1 == panels ? b : a + (b - a) * (p + 1) / panels;
    append_panel(rule, lo, hi);
  }
  return rule;
}

QuadratureRule graded_panels(double a, double b, int panels) {
  check_interval(a, b, panels);
  if (panels < 4) return uniform_panels(a, b, panels);
  const double length = b - a;
  const int geometric = std::max(2, panels * 3 / 8);
  const int uniform = panels - geometric;
  const double first = length * 1e-10;
  const double split = length / 16.0;

  QuadratureRule rule;
  rule.nodes.reserve(static_cast<std::size_t>(panels) * kGaussOrder);
  rule.weights.reserve(rule.nodes.capacity());

  // Breakpoints a, a + first, ..., a + split with a constant ratio between
  // consecutive geometric breakpoints.
  const double ratio = std::pow(split / first, 1.0 / (geometric - 1));
  double lo = a;
  double edge = first;
  for (int p = 0; p < geometric; ++p) {
    const double hi = p + 1 == geometric ? a + split : a + edge;
    append_panel(rule, lo, hi);
    lo = hi;
    edge *= ratio;
  }
  for (int p = 0; p < uniform; ++p) {
    const double hi = p + 1 == uniform ? b : a + split + (length - split) * (p + 1) / uniform;
    append_panel(rule, lo, hi);
    lo = hi;
  }
  return rule;
}

}  // namespace occupact
