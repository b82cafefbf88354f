#pragma once

#include <array>

#include "occupact/model.hpp"

namespace occupact {

/// Pr(target occupation = 0, X(t) = j). Pr(S(t) = 0, X(t) = 1) and
/// Pr(L(t) = 0, X(t) = 2) are exactly 0 without evaluating a series.
SeriesValue atom_probability(const OccupationModel& model, OccupationTarget target, int j, double t);

/// Defective density Pr(occupation in ds, X(t) = j) / ds on the open interval
/// 0 < s < t; zero elsewhere. LongOff is the ShortOff series on the swapped
/// spec with states 1 and 2 exchanged.
SeriesValue marginal_density(const OccupationModel& model, OccupationTarget target, int j, double s, double t);

struct MarginalMass {
  std::array<double, kStates> atoms{};
  std::array<double, kStates> densities{};  // integral of each defective density over (0, t)
  double total = 0.0;
  bool converged = true;
};

/// Atoms plus integrated densities; equals 1 up to truncation and quadrature error.
MarginalMass total_mass_check(const OccupationModel& model, OccupationTarget target, double t);

// Convenience overloads building a model whose grid covers [0, t].
SeriesValue atom_probability(const ProcessSpec& spec, OccupationTarget target, int j, double t,
                             const SeriesControl& ctl = {});
SeriesValue marginal_density(const ProcessSpec& spec, OccupationTarget target, int j, double s, double t,
                             const SeriesControl& ctl = {});
MarginalMass total_mass_check(const ProcessSpec& spec, OccupationTarget target, double t,
                              const SeriesControl& ctl = {});

}  // namespace occupact
