#pragma once

#include <cstddef>
#include <span>

namespace phonecap::stats {

struct CorrelationResult {
  double r = 0.0;
  double p = 1.0;  // two-tailed
  std::size_t n = 0;
};

// Pearson product-moment correlation with a two-tailed Student-t p-value
// (n - 2 degrees of freedom). Throws on n < 3, unequal lengths or a
// constant series ("zero variance").
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

// Two-tailed p for correlation r over n samples.
double correlation_p_value(double r, std::size_t n);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // population (divide by n)
};

MeanSd mean_sd(std::span<const double> values);

}  // namespace phonecap::stats
