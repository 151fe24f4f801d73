#pragma once

#include "vigil/recording.hpp"

#include <span>
#include <vector>

namespace vigil {

inline constexpr Eigen::Index kDefaultSequenceLength = 7;

struct Sequence {
  Matrix x;            // [n x d]
  Eigen::VectorXd y;   // [n], may be empty at inference
  Eigen::Index offset = 0;  // row of the first node in the source table
};

using SequenceBatch = std::vector<Sequence>;

// Chain-graph neighbour indicator: S(i,j) = 1 iff |i - j| = 1.
Matrix neighbor_matrix(Eigen::Index n);
// Graph Laplacian of the chain, D - S.
Matrix chain_laplacian(Eigen::Index n);

// Consecutive non-overlapping chunks of length n within each session; a
// shorter remainder closes each session. `session_lengths` partitions the
// rows of x in order. Throws SessionTooShort when a session has fewer than n
// rows.
SequenceBatch chunk_sequences(const Matrix& x, const Eigen::VectorXd& y, std::span<const Eigen::Index> session_lengths,
                              Eigen::Index n = kDefaultSequenceLength);

// Writes per-sequence predictions back to one value per source row.
Eigen::VectorXd unchunk(const SequenceBatch& batch, std::span<const Eigen::VectorXd> predictions, Eigen::Index rows);

}  // namespace vigil
