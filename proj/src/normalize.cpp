#include "vigil/normalize.hpp"

#include "vigil/error.hpp"

namespace vigil {

MinMaxScaler MinMaxScaler::fit(const Matrix& train) {
  if (train.rows() == 0 || train.cols() == 0) throw Error(ErrorCode::EmptyInput, "cannot fit a scaler on no data");
  return MinMaxScaler{train.colwise().minCoeff().transpose(), train.colwise().maxCoeff().transpose()};
}

Matrix MinMaxScaler::transform(const Matrix& x, bool clip) const {
  if (x.cols() != dims()) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(dims()) + " feature columns, got " + std::to_string(x.cols()));
  }
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double span = hi[j] - lo[j];
    if (span > 0.0) {
      out.col(j) = (x.col(j).array() - lo[j]) / span;
    } else {
      out.col(j).setConstant(0.5);
    }
  }
  if (clip) out = out.cwiseMax(kClipLow).cwiseMin(kClipHigh);
  return out;
}

Matrix MinMaxScaler::inverse(const Matrix& scaled) const {
  if (scaled.cols() != dims()) throw Error(ErrorCode::DimensionMismatch, "scaled matrix has the wrong width");
  Matrix out(scaled.rows(), scaled.cols());
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    const double span = hi[j] - lo[j];
    if (span > 0.0) {
      out.col(j) = scaled.col(j).array() * span + lo[j];
    } else {
      out.col(j).setConstant(lo[j]);
    }
  }
  return out;
}

}  // namespace vigil
