#pragma once

#include <array>
#include <string>

#include "occupact/fold_cache.hpp"
#include "occupact/model.hpp"

namespace occupact {

/// Whether an occupation time sits at its atom (exactly 0) or is positive.
enum class Part { AtomZero, Density };

/// One of the twelve cases of the joint law of (S(t), L(t), X(t)).
struct JointCase {
  Part s_part = Part::AtomZero;
  Part l_part = Part::AtomZero;
  int j = 0;

  /// 4 j + 2 [S > 0] + [L > 0].
  int index() const;
  static JointCase from_index(int index);
  /// Case with S and L (and states 1, 2) exchanged.
  JointCase swapped() const;
  /// E.g. "S=0,L>0,X=2".
  std::string label() const;

  friend bool operator==(const JointCase&, const JointCase&) = default;
};

inline constexpr int kJointCases = 12;

enum class ValueKind { Probability, LineDensity, PlaneDensity };

struct JointValue {
  JointCase jcase;
  double value = 0.0;
  ValueKind kind = ValueKind::Probability;
  bool converged = true;
};

/// Evaluates one joint case. Coordinates of AtomZero parts are ignored; a
/// density part is zero outside its support (u, v > 0, u + v < t).
JointValue joint_eval(const OccupationModel& model, JointCase jcase, double u, double v, double t);

/// Line density of S at (u, L = 0) plus the integral of the plane density
/// over v in (0, t - u). Reproduces marginal_density(ShortOff, j, u, t).
SeriesValue marginalize_from_joint(const OccupationModel& model, int j, double u, double t);

struct JointMass {
  std::array<double, kJointCases> cases{};  // probability of each case, by JointCase::index()
  double total = 0.0;
  bool converged = true;
};

/// Probabilities of all twelve cases; their sum is the total mass.
JointMass joint_total_mass(const OccupationModel& model, double t);

/// Evaluates the three plane densities at many points, reusing the fold
/// factors of the most recent u. One instance per thread.
class SimplexEvaluator {
 public:
  SimplexEvaluator(const OccupationModel& model, double t);

  /// p_SL0, p_SL1, p_SL2 at (u, v); zeros outside the open simplex.
  std::array<double, kStates> densities(double u, double v);
  bool converged() const { return truncation_.converged; }
  int truncation() const { return truncation_.last; }

 private:
  const OccupationModel& model_;
  double t_;
  Truncation truncation_;
  double cached_u_ = -1.0;
  detail::FoldFactors short_at_u_;
};

}  // namespace occupact
