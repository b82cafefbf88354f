#pragma once

#include <vector>

#include "occupact/dist.hpp"

namespace occupact::detail {

// n-fold pdf and cdf of one law at one point, for folds 0..last.
// pdf[0] is unused (set to 0); cdf[0] is the point mass at zero.
struct FoldFactors {
  std::vector<double> pdf;
  std::vector<double> cdf;

  FoldFactors() = default;
  FoldFactors(const ConvolutionEngine& engine, const HoldingDistribution& d, double x, int last)
      : pdf(static_cast<std::size_t>(last) + 1, 0.0), cdf(static_cast<std::size_t>(last) + 1, 0.0) {
    cdf[0] = x >= 0.0 ? 1.0 : 0.0;
    for (int n = 1; n <= last; ++n) {
      pdf[n] = engine.nfold_pdf(d, n, x);
      cdf[n] = engine.nfold_cdf(d, n, x);
    }
  }
};

}  // namespace occupact::detail
