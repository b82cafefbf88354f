#pragma once

#include <vector>

namespace occupact {

/// Nodes and weights of a composite Gauss-Legendre rule. Nodes are interior,
/// so integrands are never evaluated at the interval ends.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

inline constexpr int kGaussOrder = 8;

/// `panels` equal panels on (a, b), eight nodes each.
QuadratureRule uniform_panels(double a, double b, int panels);

/// `panels` panels on (a, b), geometrically refined toward a. Three eighths of
/// the panels cover (a, a + (b - a) / 16] with widths growing by a constant
/// ratio from (b - a) * 1e-10; the rest split the remainder uniformly. Suited
/// to integrands with structure at scales far below b - a next to a.
QuadratureRule graded_panels(double a, double b, int panels);

}  // namespace occupact
