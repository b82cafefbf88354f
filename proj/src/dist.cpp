#include "occupact/dist.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "occupact/error.hpp"

namespace occupact {

namespace {

void require_scale(double c, const char* what) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    std::ostringstream msg;
    msg << what << " must be a positive finite number, got " << c;
    throw ParameterError(msg.str());
  }
}

void require_not_nan(double x) {
  if (std::isnan(x)) throw DomainError("argument is NaN");
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& pdf, double h) {
  std::vector<double> cdf(pdf.size(), 0.0);
  for (std::size_t i = 1; i < pdf.size(); ++i) cdf[i] = cdf[i - 1] + 0.5 * h * (pdf[i - 1] + pdf[i]);
  return cdf;
}

// sum_j a[j] * b[i - j] over the index range where both factors can be nonzero.
double convolution_sum(const double* a, const double* reversed_b, std::size_t count) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t j = 0;
  for (; j + 4 <= count; j += 4) {
    s0 += a[j] * reversed_b[j];
    s1 += a[j + 1] * reversed_b[j + 1];
    s2 += a[j + 2] * reversed_b[j + 2];
    s3 += a[j + 3] * reversed_b[j + 3];
  }
  for (; j < count; ++j) s0 += a[j] * reversed_b[j];
  return (s0 + s1) + (s2 + s3);
}

std::size_t first_nonzero(std::span<const double> v) {
  const auto it = std::find_if(v.begin(), v.end(), [](double x) { return x != 0.0; });
  return static_cast<std::size_t>(it - v.begin());
}

}  // namespace

//------------------------------------------------------------------------------

double erfc_eval(double x) {
  if (!std::isfinite(x)) throw DomainError("erfc argument must be finite");
  return std::erfc(x);
}

double erfc_inverse_half() {
  static const double value = [] {
    double lo = 0.0;  // erfc(0) = 1
    double hi = 2.0;  // erfc(2) ~ 0.0047
    while (hi - lo > 1e-15) {
      const double mid = 0.5 * (lo + hi);
      if (std::erfc(mid) > 0.5)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return value;
}

double levy_pdf(double c, double x) {
  require_scale(c, "Levy scale c");
  require_not_nan(x);
  if (x <= 0.0) return 0.0;
  constexpr double half_log_two_pi = 0.91893853320467274178;
  return std::exp(std::log(c) - c * c / (2.0 * x) - 1.5 * std::log(x) - half_log_two_pi);
}

double levy_cdf(double c, double x) {
  require_scale(c, "Levy scale c");
  require_not_nan(x);
  if (x <= 0.0) return 0.0;
  return std::erfc(c / std::sqrt(2.0 * x));
}

double median_to_scale(double median) {
  require_scale(median, "median");
  return erfc_inverse_half() * std::sqrt(2.0 * median);
}

double levy_median(double c) {
  require_scale(c, "Levy scale c");
  const double r = erfc_inverse_half();
  return 0.5 * c * c / (r * r);
}

double erlang_pdf(double rate, int n, double x) {
  require_scale(rate, "exponential rate");
  require_not_nan(x);
  if (n < 1) throw DomainError("Erlang density needs at least one fold");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 0.0;
  return rate * boost::math::gamma_p_derivative(static_cast<double>(n), rate * x);
}

double erlang_cdf(double rate, int n, double x) {
  require_scale(rate, "exponential rate");
  require_not_nan(x);
  if (n < 0) throw DomainError("negative fold count");
  if (n == 0) return x >= 0.0 ? 1.0 : 0.0;
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(static_cast<double>(n), rate * x);
}

void GridSpec::validate() const {
  if (!(upper > 0.0) || !std::isfinite(upper)) throw ParameterError("grid upper bound must be positive and finite");
  if (steps < 1) throw ParameterError("grid must have at least one step");
}

//------------------------------------------------------------------------------
// HoldingDistribution

HoldingDistribution HoldingDistribution::levy(double c) {
  require_scale(c, "Levy scale c");
  return HoldingDistribution(Levy{c});
}

HoldingDistribution HoldingDistribution::levy_from_median(double median) {
  return levy(median_to_scale(median));
}

HoldingDistribution HoldingDistribution::exponential(double rate) {
  require_scale(rate, "exponential rate");
  return HoldingDistribution(Exponential{rate});
}

HoldingDistribution HoldingDistribution::gridded(GridSpec grid, std::vector<double> pdf) {
  grid.validate();
  if (pdf.size() != static_cast<std::size_t>(grid.steps) + 1)
    throw ParameterError("gridded pdf needs steps + 1 samples");
  for (double v : pdf)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("gridded pdf samples must be finite and nonnegative");
  auto cdf = cumulative_trapezoid(pdf, grid.step());
  if (cdf.back() > 1.0 + 1e-9) {
    std::ostringstream msg;
    msg << "gridded pdf integrates to " << cdf.back() << " > 1";
    throw ParameterError(msg.str());
  }
  if (!(cdf.back() > 0.0)) throw ParameterError("gridded pdf has zero mass");
  auto data = std::make_shared<EmpiricalPdf>(EmpiricalPdf{grid, std::move(pdf), std::move(cdf)});
  return HoldingDistribution(Gridded{std::move(data)});
}

Family HoldingDistribution::family() const {
  switch (rep_.index()) {
    case 0:
      return Family::Levy;
    case 1:
      return Family::Exponential;
    default:
      return Family::GriddedEmpirical;
  }
}

double HoldingDistribution::levy_scale() const {
  if (const auto* l = std::get_if<Levy>(&rep_)) return l->c;
  throw ParameterError("distribution is not Levy");
}

double HoldingDistribution::rate() const {
  if (const auto* e = std::get_if<Exponential>(&rep_)) return e->rate;
  throw ParameterError("distribution is not exponential");
}

const EmpiricalPdf& HoldingDistribution::empirical() const {
  if (const auto* g = std::get_if<Gridded>(&rep_)) return *g->data;
  throw ParameterError("distribution is not gridded");
}

double HoldingDistribution::pdf(double x) const {
  require_not_nan(x);
  switch (family()) {
    case Family::Levy:
      return levy_pdf(levy_scale(), x);
    case Family::Exponential:
      return erlang_pdf(rate(), 1, x);
    case Family::GriddedEmpirical: {
      const auto& e = empirical();
      if (x <= 0.0 || x > e.grid.upper) return 0.0;
      const double pos = x / e.grid.step();
      const auto i = std::min(static_cast<std::size_t>(pos), e.pdf.size() - 2);
      const double frac = pos - static_cast<double>(i);
      return e.pdf[i] + frac * (e.pdf[i + 1] - e.pdf[i]);
    }
  }
  return 0.0;
}

double HoldingDistribution::cdf(double x) const {
  require_not_nan(x);
  switch (family()) {
    case Family::Levy:
      return levy_cdf(levy_scale(), x);
    case Family::Exponential:
      return x <= 0.0 ? 0.0 : -std::expm1(-rate() * x);
    case Family::GriddedEmpirical: {
      const auto& e = empirical();
      if (x <= 0.0) return 0.0;
      if (x >= e.grid.upper) return e.cdf.back();
      const double pos = x / e.grid.step();
      const auto i = std::min(static_cast<std::size_t>(pos), e.cdf.size() - 2);
      const double frac = pos - static_cast<double>(i);
      return e.cdf[i] + frac * (e.cdf[i + 1] - e.cdf[i]);
    }
  }
  return 0.0;
}

double HoldingDistribution::empirical_quantile(double p) const {
  const auto& e = empirical();
  const double target = std::clamp(p, 0.0, 1.0) * e.cdf.back();
  auto it = std::lower_bound(e.cdf.begin(), e.cdf.end(), target);
  if (it == e.cdf.begin()) return 0.0;
  if (it == e.cdf.end()) return e.grid.upper;
  const auto i = static_cast<std::size_t>(it - e.cdf.begin());
  const double lo = e.cdf[i - 1];
  const double hi = e.cdf[i];
  const double frac = hi > lo ? (target - lo) / (hi - lo) : 0.0;
  return e.grid.node(static_cast<int>(i - 1)) + frac * e.grid.step();
}

std::string HoldingDistribution::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (family()) {
    case Family::Levy:
      out << "levy(c=" << levy_scale() << ")";
      break;
    case Family::Exponential:
      out << "exponential(rate=" << rate() << ")";
      break;
    case Family::GriddedEmpirical:
      out << "gridded(upper=" << empirical().grid.upper << ", steps=" << empirical().grid.steps << ")";
      break;
  }
  return out.str();
}

HoldingDistribution::Key HoldingDistribution::key() const {
  switch (family()) {
    case Family::Levy:
      return {0, levy_scale(), nullptr};
    case Family::Exponential:
      return {1, rate(), nullptr};
    case Family::GriddedEmpirical:
      return {2, 0.0, &empirical()};
  }
  return {};
}

//------------------------------------------------------------------------------
// ConvolutionTable

ConvolutionTable ConvolutionTable::point_mass(GridSpec grid) {
  grid.validate();
  ConvolutionTable table;
  table.grid_ = grid;
  table.folds_ = 0;
  table.cdf_.assign(static_cast<std::size_t>(grid.steps) + 1, 1.0);
  return table;
}

ConvolutionTable::ConvolutionTable(GridSpec grid, int folds, std::vector<double> pdf)
    : grid_(grid), folds_(folds), pdf_(std::move(pdf)) {
  grid_.validate();
  if (folds_ < 1) throw DomainError("a tabulated density needs at least one fold");
  if (pdf_.size() != static_cast<std::size_t>(grid_.steps) + 1) throw ParameterError("table size does not match grid");
  cdf_ = cumulative_trapezoid(pdf_, grid_.step());
}

ConvolutionTable::ConvolutionTable(GridSpec grid, int folds, std::vector<double> pdf, std::vector<double> cdf)
    : grid_(grid), folds_(folds), pdf_(std::move(pdf)), cdf_(std::move(cdf)) {
  grid_.validate();
  if (folds_ < 1) throw DomainError("a tabulated density needs at least one fold");
  const auto n = static_cast<std::size_t>(grid_.steps) + 1;
  if (pdf_.size() != n || cdf_.size() != n) throw ParameterError("table size does not match grid");
}

double ConvolutionTable::interpolate(const std::vector<double>& v, double x) const {
  if (x > grid_.upper * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "x = " << x << " lies beyond the convolution grid upper bound " << grid_.upper;
    throw RangeError(msg.str());
  }
  const double pos = std::min(x / grid_.step(), static_cast<double>(grid_.steps));
  const auto i = std::min(static_cast<std::size_t>(pos), v.size() - 2);
  const double frac = pos - static_cast<double>(i);
  return v[i] + frac * (v[i + 1] - v[i]);
}

double ConvolutionTable::pdf(double x) const {
  require_not_nan(x);
  if (is_point_mass()) throw DomainError("the zero-fold convolution has no density");
  if (x <= 0.0) return 0.0;
  return interpolate(pdf_, x);
}

double ConvolutionTable::cdf(double x) const {
  require_not_nan(x);
  if (x < 0.0) return 0.0;
  if (is_point_mass()) return 1.0;
  if (x == 0.0) return cdf_.front();
  return interpolate(cdf_, x);
}

ConvolutionTable convolve(const ConvolutionTable& a, const ConvolutionTable& b) {
  if (!(a.grid() == b.grid())) throw ParameterError("convolution tables live on different grids");
  if (a.is_point_mass()) return b;
  if (b.is_point_mass()) return a;

  const auto pa = a.pdf_samples();
  const auto pb = b.pdf_samples();
  const std::size_t n = pa.size();
  const double h = a.grid().step();
  std::vector<double> reversed_b(pb.rbegin(), pb.rend());
  const std::size_t za = first_nonzero(pa);
  const std::size_t zb = first_nonzero(pb);

  std::vector<double> out(n, 0.0);
  for (std::size_t i = za + zb; i < n; ++i) {
    // j runs over [za, i - zb]; b index i - j maps to reversed index n - 1 - i + j.
    const std::size_t count = i - zb - za + 1;
    double sum = convolution_sum(pa.data() + za, reversed_b.data() + (n - 1 - i + za), count);
    sum -= 0.5 * (pa[0] * pb[i] + pa[i] * pb[0]);
    out[i] = h * sum;
  }
  return ConvolutionTable(a.grid(), a.folds() + b.folds(), std::move(out));
}

ConvolutionTable tabulate(const HoldingDistribution& d, int n, GridSpec grid) {
  grid.validate();
  if (n < 0) throw DomainError("negative fold count");
  if (n == 0) return ConvolutionTable::point_mass(grid);
  const auto size = static_cast<std::size_t>(grid.steps) + 1;
  std::vector<double> pdf(size, 0.0);
  std::vector<double> cdf(size, 0.0);
  switch (d.family()) {
    case Family::Levy: {
      const double c = n * d.levy_scale();
      for (std::size_t i = 1; i < size; ++i) {
        const double x = grid.node(static_cast<int>(i));
        pdf[i] = levy_pdf(c, x);
        cdf[i] = levy_cdf(c, x);
      }
      return ConvolutionTable(grid, n, std::move(pdf), std::move(cdf));
    }
    case Family::Exponential: {
      const double rate = d.rate();
      pdf[0] = n == 1 ? rate : 0.0;
      for (std::size_t i = 1; i < size; ++i) {
        const double x = grid.node(static_cast<int>(i));
        pdf[i] = erlang_pdf(rate, n, x);
        cdf[i] = erlang_cdf(rate, n, x);
      }
      return ConvolutionTable(grid, n, std::move(pdf), std::move(cdf));
    }
    case Family::GriddedEmpirical: {
      if (n != 1) throw DomainError("gridded laws are tabulated one fold at a time");
      pdf[0] = d.empirical().pdf.front();
      for (std::size_t i = 1; i < size; ++i) pdf[i] = d.pdf(grid.node(static_cast<int>(i)));
      return ConvolutionTable(grid, 1, std::move(pdf));
    }
  }
  throw DomainError("unknown distribution family");
}

//------------------------------------------------------------------------------
// ConvolutionEngine

ConvolutionEngine::ConvolutionEngine(GridSpec grid) : grid_(grid) { grid_.validate(); }

void ConvolutionEngine::check_range(double x) const {
  if (x > grid_.upper * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "x = " << x << " lies beyond the convolution grid upper bound " << grid_.upper;
    throw RangeError(msg.str());
  }
}

double ConvolutionEngine::nfold_cdf(const HoldingDistribution& d, int n, double x) const {
  require_not_nan(x);
  if (n < 0) throw DomainError("negative fold count");
  if (n == 0) return x >= 0.0 ? 1.0 : 0.0;
  if (x <= 0.0) return 0.0;
  switch (d.family()) {
    case Family::Levy:
      return levy_cdf(n * d.levy_scale(), x);
    case Family::Exponential:
      return erlang_cdf(d.rate(), n, x);
    case Family::GriddedEmpirical:
      check_range(x);
      return nfold_table(d, n)->cdf(x);
  }
  return 0.0;
}

double ConvolutionEngine::nfold_pdf(const HoldingDistribution& d, int n, double x) const {
  require_not_nan(x);
  if (n < 1) throw DomainError("density of a zero-fold convolution is undefined");
  if (x <= 0.0) return 0.0;
  switch (d.family()) {
    case Family::Levy:
      return levy_pdf(n * d.levy_scale(), x);
    case Family::Exponential:
      return erlang_pdf(d.rate(), n, x);
    case Family::GriddedEmpirical:
      check_range(x);
      return nfold_table(d, n)->pdf(x);
  }
  return 0.0;
}

double ConvolutionEngine::mixed_cdf(const HoldingDistribution& a, int m, const HoldingDistribution& b, int k,
                                    double x) const {
  require_not_nan(x);
  if (m < 0 || k < 0) throw DomainError("negative fold count");
  if (k == 0) return nfold_cdf(a, m, x);
  if (m == 0) return nfold_cdf(b, k, x);
  if (x <= 0.0) return 0.0;
  if (a.family() == Family::Levy && b.family() == Family::Levy)
    return levy_cdf(m * a.levy_scale() + k * b.levy_scale(), x);
  if (a.family() == Family::Exponential && b.family() == Family::Exponential && a.rate() == b.rate())
    return erlang_cdf(a.rate(), m + k, x);
  check_range(x);
  return mixed_table(a, m, b, k)->cdf(x);
}

double ConvolutionEngine::mixed_pdf(const HoldingDistribution& a, int m, const HoldingDistribution& b, int k,
                                    double x) const {
  require_not_nan(x);
  if (m < 0 || k < 0) throw DomainError("negative fold count");
  if (m + k < 1) throw DomainError("density of a zero-fold convolution is undefined");
  if (k == 0) return nfold_pdf(a, m, x);
  if (m == 0) return nfold_pdf(b, k, x);
  if (x <= 0.0) return 0.0;
  if (a.family() == Family::Levy && b.family() == Family::Levy)
    return levy_pdf(m * a.levy_scale() + k * b.levy_scale(), x);
  if (a.family() == Family::Exponential && b.family() == Family::Exponential && a.rate() == b.rate())
    return erlang_pdf(a.rate(), m + k, x);
  check_range(x);
  return mixed_table(a, m, b, k)->pdf(x);
}

std::shared_ptr<const ConvolutionTable> ConvolutionEngine::lookup(const TableKey& key) const {
  std::shared_lock lock(mutex_);
  const auto it = tables_.find(key);
  return it == tables_.end() ? nullptr : it->second;
}

std::shared_ptr<const ConvolutionTable> ConvolutionEngine::store(const TableKey& key, ConvolutionTable table) const {
  auto ptr = std::make_shared<const ConvolutionTable>(std::move(table));
  std::unique_lock lock(mutex_);
  // A concurrent builder may have won; keep the first table so readers agree.
  const auto [it, inserted] = tables_.emplace(key, std::move(ptr));
  return it->second;
}

std::shared_ptr<const ConvolutionTable> ConvolutionEngine::nfold_table(const HoldingDistribution& d, int n) const {
  if (n < 0) throw DomainError("negative fold count");
  const TableKey key{d.key(), n, HoldingDistribution::Key{}, 0};
  if (auto hit = lookup(key)) return hit;
  if (n == 0) return store(key, ConvolutionTable::point_mass(grid_));
  if (d.family() == Family::GriddedEmpirical && n > 1)
    return store(key, convolve(*nfold_table(d, n - 1), *nfold_table(d, 1)));
  return store(key, tabulate(d, n, grid_));
}

std::shared_ptr<const ConvolutionTable> ConvolutionEngine::mixed_table(const HoldingDistribution& a, int m,
                                                                       const HoldingDistribution& b, int k) const {
  if (m < 0 || k < 0) throw DomainError("negative fold count");
  if (k == 0) return nfold_table(a, m);
  if (m == 0) return nfold_table(b, k);
  // Convolution commutes, so order the factors canonically.
  auto first = std::make_tuple(a.key(), m);
  auto second = std::make_tuple(b.key(), k);
  const bool swap = second < first;
  const TableKey key = swap ? TableKey{b.key(), k, a.key(), m} : TableKey{a.key(), m, b.key(), k};
  if (auto hit = lookup(key)) return hit;
  const auto ta = swap ? nfold_table(b, k) : nfold_table(a, m);
  const auto tb = swap ? nfold_table(a, m) : nfold_table(b, k);
  return store(key, convolve(*ta, *tb));
}

std::size_t ConvolutionEngine::cached_tables() const {
  std::shared_lock lock(mutex_);
  return tables_.size();
}

}  // namespace occupact
