#include "vigil/stats.hpp"

#include "vigil/error.hpp"

#include <algorithm>
#include <cmath>

namespace vigil::stats {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double sum = 0.0;
  for (double v : x) sum += v;
  return sum / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / static_cast<double>(x.size());
}

double median(std::vector<double> x) {
  if (x.empty()) throw Error(ErrorCode::EmptyInput, "median of empty sequence");
  const auto mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid), x.end());
  double hi = x[mid];
  if (x.size() % 2 == 1) return hi;
  double lo = *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double mad(std::span<const double> x) {
  const double med = median(std::vector<double>(x.begin(), x.end()));
  std::vector<double> dev(x.size());
  std::transform(x.begin(), x.end(), dev.begin(), [med](double v) { return std::abs(v - med); });
  return median(std::move(dev));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "pearson inputs differ in length");
  if (a.empty()) throw Error(ErrorCode::EmptyInput, "pearson of empty sequences");
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  const double n = static_cast<double>(a.size());
  const double floor_a = n * std::pow(1e-14 * std::max(1.0, std::abs(ma)), 2);
  const double floor_b = n * std::pow(1e-14 * std::max(1.0, std::abs(mb)), 2);
  if (saa <= floor_a || sbb <= floor_b) throw Error(ErrorCode::ZeroVariance, "correlation with a constant sequence");
  const double r = sab / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace vigil::stats
