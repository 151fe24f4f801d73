#pragma once

// Data-parallel inner loops. Each kernel exists twice: `serial` is the
// reference implementation kept for testing and benchmarking, `omp` is the
// OpenMP version the library calls. Both must agree bit-for-bit.

#include "vigil/recording.hpp"

#include <span>
#include <vector>

namespace vigil::kernels {

// One row per window and channel: row = window * channels + channel.
struct BandPowerRequest {
  const Matrix* samples = nullptr;  // [channels x time]
  std::span<const Eigen::Index> window_starts;
  Eigen::Index window_length = 0;
  double sample_rate_hz = 0.0;
  std::span<const Band> bands;
};

namespace serial {
// a: [n x d], b: [m x d] -> [n x m] squared euclidean distances.
Matrix squared_distances(const Matrix& a, const Matrix& b);
Matrix rbf_from_squared(const Matrix& sqdist, double gamma);
// "Same"-length correlation with an odd, centered kernel; mirror padding.
Signal correlate_same(const Signal& x, const Signal& kernel);
Matrix band_powers(const BandPowerRequest& req);
}  // namespace serial

namespace omp {
Matrix squared_distances(const Matrix& a, const Matrix& b);
Matrix rbf_from_squared(const Matrix& sqdist, double gamma);
Signal correlate_same(const Signal& x, const Signal& kernel);
Matrix band_powers(const BandPowerRequest& req);
}  // namespace omp

// Hann-tapered one-sided PSD of a single demeaned segment, integrated over
// each band with trapezoidal interpolation. Shared by both variants.
std::vector<double> segment_band_powers(std::span<const double> segment, double sample_rate_hz,
                                        std::span<const Band> bands);

}  // namespace vigil::kernels
