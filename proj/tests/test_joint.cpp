#include <doctest.h>

#include <cmath>

#include "occupact/error.hpp"
#include "occupact/joint.hpp"
#include "occupact/marginal.hpp"
#include "occupact/montecarlo.hpp"
#include "occupact/quadrature.hpp"
#include "occupact/rng.hpp"
#include "oracles.hpp"

using namespace occupact;

namespace {

const OccupationModel& levy_model() {
  static const OccupationModel model(levy_server_spec(0.9), 30.0);
  return model;
}

ProcessSpec exponential_spec() {
  return ProcessSpec(HoldingDistribution::exponential(1.0), HoldingDistribution::exponential(2.0),
                     HoldingDistribution::exponential(0.5), 0.7);
}

std::vector<JointCase> all_cases() {
  std::vector<JointCase> out;
  for (int i = 0; i < kJointCases; ++i) out.push_back(JointCase::from_index(i));
  return out;
}

}  // namespace

TEST_CASE("case indexing and labels") {
  for (int i = 0; i < kJointCases; ++i) {
    const auto c = JointCase::from_index(i);
    CHECK(c.index() == i);
    CHECK(c.swapped().swapped().index() == i);
  }
  CHECK(JointCase{Part::Density, Part::AtomZero, 1}.label() == "S>0,L=0,X=1");
  CHECK(JointCase{Part::Density, Part::AtomZero, 1}.swapped().label() == "S=0,L>0,X=2");
  CHECK_THROWS_AS(JointCase::from_index(12), DomainError);
}

TEST_CASE("both atoms in state 0 is the probability the first on period covers t") {
  const OccupationModel model(levy_server_spec_rounded(0.9), 30.0);
  const auto v = joint_eval(model, {Part::AtomZero, Part::AtomZero, 0}, 0.0, 0.0, 30.0);
  CHECK(v.kind == ValueKind::Probability);
  CHECK(v.value == doctest::Approx(1.0 - oracle::levy_cdf(1.785, 30.0)).epsilon(1e-12));
  CHECK(std::abs(v.value - 0.2554) < 5e-4);
}

TEST_CASE("structurally impossible cases are exactly zero") {
  const auto& m = levy_model();
  for (double u : {0.0, 0.3, 5.0})
    for (double v : {0.0, 0.2, 7.0}) {
      CHECK(joint_eval(m, {Part::AtomZero, Part::AtomZero, 1}, u, v, 30.0).value == 0.0);
      CHECK(joint_eval(m, {Part::AtomZero, Part::AtomZero, 2}, u, v, 30.0).value == 0.0);
      CHECK(joint_eval(m, {Part::AtomZero, Part::Density, 1}, u, v, 30.0).value == 0.0);
      CHECK(joint_eval(m, {Part::Density, Part::AtomZero, 2}, u, v, 30.0).value == 0.0);
    }
}

TEST_CASE("value kinds and support") {
  const auto& m = levy_model();
  for (const auto& c : all_cases()) {
    const auto v = joint_eval(m, c, 1.0, 2.0, 30.0);
    const int atoms = (c.s_part == Part::AtomZero) + (c.l_part == Part::AtomZero);
    CHECK(v.kind == (atoms == 2 ? ValueKind::Probability : atoms == 1 ? ValueKind::LineDensity : ValueKind::PlaneDensity));
    CHECK(v.value >= 0.0);
  }
  for (int j = 0; j < kStates; ++j) {
    const JointCase plane{Part::Density, Part::Density, j};
    CHECK(joint_eval(m, plane, 10.0, 20.0, 30.0).value == 0.0);
    CHECK(joint_eval(m, plane, 15.0, 20.0, 30.0).value == 0.0);
    CHECK(joint_eval(m, plane, 0.0, 2.0, 30.0).value == 0.0);
    CHECK(joint_eval(m, plane, 2.0, -1.0, 30.0).value == 0.0);
    CHECK(joint_eval(m, plane, 1.0, 2.0, 30.0).value > 0.0);
  }
  CHECK_THROWS_AS(joint_eval(m, {Part::Density, Part::Density, 0}, 1.0, 1.0, 0.0), DomainError);
}

TEST_CASE("plane densities are nonnegative on the simplex") {
  const OccupationModel exp_model(exponential_spec(), 10.0);
  for (const auto* model : {&levy_model(), &exp_model}) {
    const double t = model == &levy_model() ? 30.0 : 10.0;
    SimplexEvaluator plane(*model, t);
    for (int a = 1; a < 30; ++a)
      for (int b = 1; a + b < 30; ++b) {
        const auto d = plane.densities(t * a / 30.0, t * b / 30.0);
        for (double x : d) CHECK(x >= 0.0);
      }
  }
}

TEST_CASE("marginalizing the joint law recovers the marginal density") {
  const auto& m = levy_model();
  const std::pair<int, double> probes[] = {{1, 0.1}, {0, 0.5}, {2, 0.5}, {0, 3.0}, {1, 10.0}, {2, 0.1}};
  for (const auto& [j, u] : probes) {
    const double direct = marginal_density(m, OccupationTarget::ShortOff, j, u, 30.0).value;
    const double via = marginalize_from_joint(m, j, u, 30.0).value;
    CAPTURE(j);
    CAPTURE(u);
    CHECK(via == doctest::Approx(direct).epsilon(1e-4));
  }
  CHECK_THROWS_AS(marginalize_from_joint(m, 0, 0.0, 30.0), DomainError);
  CHECK_THROWS_AS(marginalize_from_joint(m, 0, 30.0, 30.0), DomainError);
}

TEST_CASE("with p1 = 1 only the line term survives marginalization") {
  const OccupationModel m(levy_server_spec(1.0), 30.0);
  for (double u : {0.1, 2.0}) {
    const double line = joint_eval(m, {Part::Density, Part::AtomZero, 1}, u, 0.0, 30.0).value;
    CHECK(marginalize_from_joint(m, 1, u, 30.0).value == line);
    SimplexEvaluator plane(m, 30.0);
    for (double v : {0.01, 0.5, 5.0}) {
      const auto d = plane.densities(u, v);
      CHECK(d[0] == 0.0);
      CHECK(d[1] == 0.0);
      CHECK(d[2] == 0.0);
    }
  }
}

TEST_CASE("joint total mass") {
  const auto lm = joint_total_mass(levy_model(), 30.0);
  CHECK(std::abs(lm.total - 1.0) < 2e-3);
  CHECK(lm.converged);
  const OccupationModel exp_model(exponential_spec(), 10.0);
  CHECK(std::abs(joint_total_mass(exp_model, 10.0).total - 1.0) < 2e-3);

  // For t far below the on-law's bulk the first on period covers t.
  const OccupationModel tiny(levy_server_spec(0.9), 0.01);
  const auto small = joint_total_mass(tiny, 0.01);
  CHECK(small.cases[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(small.total - 1.0) < 1e-9);
}

TEST_CASE("joint state slices agree with the marginal state masses") {
  const auto joint = joint_total_mass(levy_model(), 30.0);
  const auto marg = total_mass_check(levy_model(), OccupationTarget::ShortOff, 30.0);
  for (int j = 0; j < kStates; ++j) {
    double slice = 0.0;
    for (int i = 4 * j; i < 4 * j + 4; ++i) slice += joint.cases[i];
    CHECK(std::abs(slice - (marg.atoms[j] + marg.densities[j])) < 1e-3);
  }
}

TEST_CASE("exchanging the off-states mirrors the joint law") {
  const auto& m = levy_model();
  const auto swapped = m.swapped();
  const auto again = swapped.swapped();
  for (const auto& c : all_cases())
    for (const auto& [u, v] : {std::pair{0.2, 0.7}, std::pair{3.0, 1.0}, std::pair{0.05, 12.0}}) {
      const double direct = joint_eval(m, c, u, v, 30.0).value;
      CHECK(joint_eval(again, c, u, v, 30.0).value == direct);
      CHECK(joint_eval(swapped, c.swapped(), v, u, 30.0).value == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("joint density in state 1 matches a simulated 2-D histogram cell") {
  const auto& model = levy_model();
  const double t = 30.0, u0 = 0.04, u1 = 0.06, v0 = 0.09, v1 = 0.11;
  constexpr std::uint64_t kReps = 1000000;
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < kReps; ++i) {
    auto rng = substream(77, i);
    const auto p = simulate_path(model.spec(), t, rng);
    hits += p.state == 1 && p.s >= u0 && p.s < u1 && p.l >= v0 && p.l < v1;
  }
  SimplexEvaluator plane(model, t);
  const auto outer = uniform_panels(u0, u1, 4);
  double analytic = 0.0;
  for (std::size_t a = 0; a < outer.size(); ++a) {
    const auto inner = uniform_panels(v0, v1, 4);
    analytic += outer.weights[a] *
                inner.integrate([&](double v) { return plane.densities(outer.nodes[a], v)[1]; });
  }
  const double freq = static_cast<double>(hits) / kReps;
  const double se = std::sqrt(analytic * (1.0 - analytic) / kReps);
  CAPTURE(freq);
  CAPTURE(analytic);
  CHECK(analytic > 0.0);
  CHECK(std::abs(freq - analytic) < 4.0 * se);
}
