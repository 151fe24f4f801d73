#pragma once

#include <span>
#include <vector>

namespace vigil::stats {

double mean(std::span<const double> x);
// Population variance (divides by n); 0 for fewer than two samples.
double variance(std::span<const double> x);
double median(std::vector<double> x);
// Median absolute deviation around the median (unscaled).
double mad(std::span<const double> x);
// Pearson correlation; throws ZeroVariance when either input is constant.
double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace vigil::stats
