#pragma once

#include "vigil/recording.hpp"

namespace vigil {

// Per-column min-max scaling fitted on training rows.
struct MinMaxScaler {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static MinMaxScaler fit(const Matrix& train);
  // Constant training columns map to 0.5. With `clip`, results are clamped
  // to [-0.05, 1.05].
  Matrix transform(const Matrix& x, bool clip = true) const;
  Matrix inverse(const Matrix& scaled) const;
  Eigen::Index dims() const { return lo.size(); }
};

inline constexpr double kClipLow = -0.05;
inline constexpr double kClipHigh = 1.05;

}  // namespace vigil
