#include "vigil/sequences.hpp"

#include "vigil/error.hpp"

#include <algorithm>
#include <limits>

namespace vigil {

Matrix neighbor_matrix(Eigen::Index n) {
  Matrix s = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) s(i, i + 1) = s(i + 1, i) = 1.0;
  return s;
}

Matrix chain_laplacian(Eigen::Index n) {
  Matrix s = neighbor_matrix(n);
  Matrix l = -s;
  l.diagonal() = s.rowwise().sum();
  return l;
}

SequenceBatch chunk_sequences(const Matrix& x, const Eigen::VectorXd& y, std::span<const Eigen::Index> session_lengths,
                              Eigen::Index n) {
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "sequence length must be positive");
  if (y.size() != 0 && y.size() != x.rows()) throw Error(ErrorCode::LengthMismatch, "labels and features differ in rows");
  Eigen::Index total = 0;
  for (auto len : session_lengths) total += len;
  if (total != x.rows()) throw Error(ErrorCode::LengthMismatch, "session lengths do not sum to the row count");

  SequenceBatch batch;
  Eigen::Index start = 0;
  for (auto len : session_lengths) {
    if (len < n) {
      throw Error(ErrorCode::SessionTooShort,
                  "session of " + std::to_string(len) + " windows is shorter than sequence length " + std::to_string(n));
    }
    for (Eigen::Index a = 0; a < len; a += n) {
      const Eigen::Index m = std::min(n, len - a);
      Sequence s;
      s.offset = start + a;
      s.x = x.middleRows(s.offset, m);
      if (y.size() != 0) s.y = y.segment(s.offset, m);
      batch.push_back(std::move(s));
    }
    start += len;
  }
  return batch;
}

Eigen::VectorXd unchunk(const SequenceBatch& batch, std::span<const Eigen::VectorXd> predictions, Eigen::Index rows) {
  if (predictions.size() != batch.size()) throw Error(ErrorCode::LengthMismatch, "one prediction per sequence expected");
  Eigen::VectorXd out = Eigen::VectorXd::Constant(rows, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    if (predictions[k].size() != batch[k].x.rows()) throw Error(ErrorCode::LengthMismatch, "prediction length");
    out.segment(batch[k].offset, predictions[k].size()) = predictions[k];
  }
  return out;
}

}  // namespace vigil
