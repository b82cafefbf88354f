#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <shared_mutex>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "occupact/rng.hpp"

namespace occupact {

inline constexpr int kDefaultGridSteps = 4096;

//------------------------------------------------------------------------------
// Special functions and the closed-form Levy law
//------------------------------------------------------------------------------

/// Complementary error function (2/sqrt(pi)) * int_x^inf exp(-t^2) dt.
/// Throws DomainError for non-finite input.
double erfc_eval(double x);

/// erfc^{-1}(0.5), found once by bisection and cached.
double erfc_inverse_half();

/// Levy density with scale-root c (scale parameter c^2). Zero for x <= 0.
double levy_pdf(double c, double x);

/// Levy cdf, erfc(c / sqrt(2x)) for x > 0 and zero otherwise.
double levy_cdf(double c, double x);

/// Scale-root c whose Levy law has the given median.
double median_to_scale(double median);

/// Median of the Levy law with scale-root c.
double levy_median(double c);

/// Erlang(n, rate) density and cdf. n = 0 is the point mass at zero
/// (cdf only; the density of the point mass is not a function).
double erlang_pdf(double rate, int n, double x);
double erlang_cdf(double rate, int n, double x);

//------------------------------------------------------------------------------
// Grids
//------------------------------------------------------------------------------

/// Uniform grid 0 = x_0 < x_1 < ... < x_steps = upper.
struct GridSpec {
  double upper = 1.0;
  int steps = kDefaultGridSteps;

  double step() const { return upper / steps; }
  double node(int i) const { return upper * static_cast<double>(i) / steps; }
  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

//------------------------------------------------------------------------------
// Holding-time distributions
//------------------------------------------------------------------------------

enum class Family { Levy, Exponential, GriddedEmpirical };

/// Samples of a density on a uniform grid, with the cumulative trapezoid cdf.
struct EmpiricalPdf {
  GridSpec grid;
  std::vector<double> pdf;
  std::vector<double> cdf;
};

class HoldingDistribution {
 public:
  static HoldingDistribution levy(double c);
  static HoldingDistribution levy_from_median(double median);
  static HoldingDistribution exponential(double rate);
  /// pdf holds steps + 1 nonnegative samples on grid; mass may not exceed 1.
  static HoldingDistribution gridded(GridSpec grid, std::vector<double> pdf);

  Family family() const;
  /// Scale-root c of a Levy law, rate of an exponential law. Throws otherwise.
  double levy_scale() const;
  double rate() const;
  const EmpiricalPdf& empirical() const;

  double pdf(double x) const;
  double cdf(double x) const;
  /// Inverse of cdf normalized by the total mass; used for sampling.
  double empirical_quantile(double p) const;

  std::string describe() const;

  /// Identity used to key convolution caches. Gridded laws compare by data.
  using Key = std::tuple<int, double, const void*>;
  Key key() const;

  template <class Rng>
  double sample(Rng& rng) const;

  friend bool operator==(const HoldingDistribution& a, const HoldingDistribution& b) {
    return a.key() == b.key();
  }

 private:
  struct Levy {
    double c;
  };
  struct Exponential {
    double rate;
  };
  struct Gridded {
    std::shared_ptr<const EmpiricalPdf> data;
  };
  explicit HoldingDistribution(std::variant<Levy, Exponential, Gridded> rep) : rep_(std::move(rep)) {}

  std::variant<Levy, Exponential, Gridded> rep_;
};

template <class Rng>
double HoldingDistribution::sample(Rng& rng) const {
  switch (family()) {
    case Family::Levy: {
      const double c = levy_scale();
      std::normal_distribution<double> normal;
      double z = 0.0;
      while (z == 0.0) z = normal(rng);
      return c * c / (z * z);
    }
    case Family::Exponential:
      return -std::log(uniform_open01(rng)) / rate();
    case Family::GriddedEmpirical: {
      double x = 0.0;
      while (!(x > 0.0)) x = empirical_quantile(uniform_open01(rng));
      return x;
    }
  }
  return 0.0;
}

//------------------------------------------------------------------------------
// Convolution tables
//------------------------------------------------------------------------------

/// pdf and cdf of an n-fold (or mixed) convolution sampled on a GridSpec.
/// A zero-fold table is the point mass at 0: cdf == 1 on the grid, and it acts
/// as the identity under convolve().
class ConvolutionTable {
 public:
  static ConvolutionTable point_mass(GridSpec grid);
  /// Builds the cdf by cumulative trapezoid of pdf.
  ConvolutionTable(GridSpec grid, int folds, std::vector<double> pdf);
  ConvolutionTable(GridSpec grid, int folds, std::vector<double> pdf, std::vector<double> cdf);

  const GridSpec& grid() const { return grid_; }
  int folds() const { return folds_; }
  bool is_point_mass() const { return folds_ == 0; }
  std::span<const double> pdf_samples() const { return pdf_; }
  std::span<const double> cdf_samples() const { return cdf_; }

  /// Linear interpolation between nodes. Throws RangeError beyond grid().upper.
  double pdf(double x) const;
  double cdf(double x) const;

 private:
  ConvolutionTable() = default;
  double interpolate(const std::vector<double>& v, double x) const;

  GridSpec grid_{};
  int folds_ = 0;
  std::vector<double> pdf_;
  std::vector<double> cdf_;
};

/// Trapezoid-rule convolution of two tables on the same grid.
ConvolutionTable convolve(const ConvolutionTable& a, const ConvolutionTable& b);

/// Samples the n-fold law of d on grid. Closed-form families are tabulated
/// exactly at the nodes; gridded laws are resampled (n = 1 only).
ConvolutionTable tabulate(const HoldingDistribution& d, int n, GridSpec grid);

/// Evaluates n-fold and mixed convolutions, dispatching to closed forms where
/// they exist and to memoized grid tables otherwise.
///
/// Lookups are safe from concurrent readers; tables are built on demand under
/// an exclusive lock.
class ConvolutionEngine {
 public:
  explicit ConvolutionEngine(GridSpec grid);

  const GridSpec& grid() const { return grid_; }

  double nfold_cdf(const HoldingDistribution& d, int n, double x) const;
  double nfold_pdf(const HoldingDistribution& d, int n, double x) const;
  /// F_a^{(m)} * F_b^{(k)} at x.
  double mixed_cdf(const HoldingDistribution& a, int m, const HoldingDistribution& b, int k, double x) const;
  /// f_a^{(m)} * f_b^{(k)} at x, for m + k >= 1.
  double mixed_pdf(const HoldingDistribution& a, int m, const HoldingDistribution& b, int k, double x) const;

  std::shared_ptr<const ConvolutionTable> nfold_table(const HoldingDistribution& d, int n) const;
  std::shared_ptr<const ConvolutionTable> mixed_table(const HoldingDistribution& a, int m,
                                                      const HoldingDistribution& b, int k) const;
  std::size_t cached_tables() const;

 private:
  using TableKey = std::tuple<HoldingDistribution::Key, int, HoldingDistribution::Key, int>;

  std::shared_ptr<const ConvolutionTable> lookup(const TableKey& key) const;
  std::shared_ptr<const ConvolutionTable> store(const TableKey& key, ConvolutionTable table) const;
  void check_range(double x) const;

  GridSpec grid_;
  mutable std::shared_mutex mutex_;
  mutable std::map<TableKey, std::shared_ptr<const ConvolutionTable>> tables_;
};

}  // namespace occupact
