#pragma once

#include <vector>

#include "occupact/model.hpp"

namespace occupact {

/// Cost rates per unit time in states 0, 1 and 2:
/// C(t) = C0 U(t) + C1 S(t) + C2 L(t), with U(t) = t - S(t) - L(t).
struct CostSpec {
  double c0 = 0.0;
  double c1 = 1.0;
  double c2 = 2.0;

  void validate() const;
};

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;
  bool converged = true;
};

/// Summary of one (t, p1) configuration.
struct MomentSummary {
  double t = 0.0;
  double p1 = 0.0;
  double mean_s = 0.0;
  double var_s = 0.0;
  double mean_l = 0.0;
  double var_l = 0.0;
  double mean_c = 0.0;
  double var_c = 0.0;
  double rho = 0.0;
  double cov = 0.0;
  bool converged = true;
};

/// Mean and variance of S(t) or L(t) from the three defective densities. The
/// atom at 0 contributes nothing. Throws ConsistencyError when the variance
/// comes out below -1e-9.
MeanVar occupation_mean_var(const OccupationModel& model, OccupationTarget target, double t);

/// E[S(t) L(t)] over the three plane densities; only those contribute to the
/// cross moment.
double occupation_cross_moment(const OccupationModel& model, double t);

/// Cov(S(t), L(t)).
double occupation_cov(const OccupationModel& model, double t);

/// Mean and variance of C(t) = C0 t + (C1 - C0) S(t) + (C2 - C0) L(t).
MeanVar cost_mean_var(const MeanVar& s, const MeanVar& l, double cov, const CostSpec& cost, double t);
MeanVar cost_mean_var(const OccupationModel& model, const CostSpec& cost, double t);

MomentSummary moment_summary(const OccupationModel& model, const CostSpec& cost, double t);

/// One summary per (t, p1), ordered by t then p1 ascending. Models for the
/// same t share one convolution engine.
std::vector<MomentSummary> reproduce_table(const ProcessSpec& family, std::vector<double> t_values,
                                           std::vector<double> p1_values, const CostSpec& cost,
                                           const SeriesControl& series = {}, int grid_steps = kDefaultGridSteps,
                                           const QuadratureControl& quad = {});

}  // namespace occupact
