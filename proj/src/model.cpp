#include "occupact/model.hpp"

#include <cmath>
#include <sstream>

#include "occupact/error.hpp"

namespace occupact {

ProcessSpec::ProcessSpec(HoldingDistribution on, HoldingDistribution short_off, HoldingDistribution long_off,
                         double p1)
    : on_(std::move(on)), short_off_(std::move(short_off)), long_off_(std::move(long_off)), p1_(p1), p2_(1.0 - p1) {
  if (!(p1 > 0.0 && p1 <= 1.0)) {
    std::ostringstream msg;
    msg << "p1 must lie in (0, 1], got " << p1;
    throw ParameterError(msg.str());
  }
}

ProcessSpec::ProcessSpec(Unchecked, HoldingDistribution on, HoldingDistribution short_off,
                         HoldingDistribution long_off, double p1, double p2)
    : on_(std::move(on)), short_off_(std::move(short_off)), long_off_(std::move(long_off)), p1_(p1), p2_(p2) {}

ProcessSpec ProcessSpec::swapped() const { return ProcessSpec(Unchecked{}, on_, long_off_, short_off_, p2_, p1_); }

ProcessSpec ProcessSpec::with_p1(double p1) const { return ProcessSpec(on_, short_off_, long_off_, p1); }

void SeriesControl::validate() const {
  if (!(eps_term > 0.0) || !std::isfinite(eps_term)) throw ParameterError("eps_term must be positive");
  if (n_min < 1) throw ParameterError("n_min must be at least 1");
  if (n_max < n_min) throw ParameterError("n_max must be at least n_min");
}

void QuadratureControl::validate() const {
  if (panels_1d < 1 || panels_2d < 1) throw ParameterError("quadrature panel counts must be positive");
}

BinomialWeights::BinomialWeights(double p1, double p2, int n_max) : n_max_(n_max) {
  if (n_max < 0) throw ParameterError("negative binomial table size");
  w_.assign(index(n_max + 1, 0), 0.0);
  w_[index(0, 0)] = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    w_[index(n, 0)] = p2 * w_[index(n - 1, 0)];
    for (int k = 1; k < n; ++k) w_[index(n, k)] = p1 * w_[index(n - 1, k - 1)] + p2 * w_[index(n - 1, k)];
    w_[index(n, n)] = p1 * w_[index(n - 1, n - 1)];
  }
}

namespace {

Orientation orient(const ProcessSpec& spec, int n_max) {
  return Orientation{spec, std::make_shared<const BinomialWeights>(spec.p1(), spec.p2(), n_max + 1)};
}

}  // namespace

OccupationModel::OccupationModel(ProcessSpec spec, double horizon, SeriesControl series, int grid_steps,
                                 QuadratureControl quad)
    : OccupationModel(std::move(spec), std::make_shared<const ConvolutionEngine>(GridSpec{horizon, grid_steps}),
                      series, quad) {}

OccupationModel::OccupationModel(ProcessSpec spec, std::shared_ptr<const ConvolutionEngine> engine,
                                 SeriesControl series, QuadratureControl quad)
    : forward_(orient(spec, series.n_max)),
      backward_(orient(spec.swapped(), series.n_max)),
      engine_(std::move(engine)),
      series_(series),
      quad_(quad) {
  series_.validate();
  quad_.validate();
  if (!engine_) throw ParameterError("missing convolution engine");
}

OccupationModel::OccupationModel(Orientation forward, Orientation backward,
                                 std::shared_ptr<const ConvolutionEngine> engine, SeriesControl series,
                                 QuadratureControl quad)
    : forward_(std::move(forward)),
      backward_(std::move(backward)),
      engine_(std::move(engine)),
      series_(series),
      quad_(quad) {}

OccupationModel OccupationModel::swapped() const { return OccupationModel(backward_, forward_, engine_, series_, quad_); }

OccupationModel OccupationModel::with_p1(double p1) const {
  return OccupationModel(forward_.spec.with_p1(p1), engine_, series_, quad_);
}

Truncation OccupationModel::truncation(double t) const {
  require_time(t);
  const auto& on = spec().on();
  for (int n = series_.n_min; n <= series_.n_max; ++n)
    if (engine_->nfold_cdf(on, n, t) < series_.eps_term) return {n, true};
  return {series_.n_max, false};
}

ProcessSpec levy_server_spec(double p1) {
  return ProcessSpec(HoldingDistribution::levy_from_median(7.0), HoldingDistribution::levy_from_median(1.0 / 48.0),
                     HoldingDistribution::levy_from_median(1.0 / 6.0), p1);
}

ProcessSpec levy_server_spec_rounded(double p1) {
  return ProcessSpec(HoldingDistribution::levy(1.785), HoldingDistribution::levy(0.097),
                     HoldingDistribution::levy(0.275), p1);
}

void require_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    std::ostringstream msg;
    msg << "time horizon t must be positive and finite, got " << t;
    throw DomainError(msg.str());
  }
}

void require_state(int j) {
  if (j < 0 || j >= kStates) throw DomainError("state index must be 0, 1 or 2");
}

}  // namespace occupact
