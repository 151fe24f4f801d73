#pragma once

#include "vigil/crf.hpp"
#include "vigil/normalize.hpp"
#include "vigil/svr.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vigil {

enum class ModelKind { Svr, Ccrf, Ccnf };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct ModelOptions {
  SvrGrid svr_grid = SvrGrid::standard();
  SvrSolverOptions svr_solver;
  CrfTrainOptions crf;
  Eigen::Index sequence_length = kDefaultSequenceLength;
};

struct TrainedModel {
  ModelKind kind = ModelKind::Svr;
  MinMaxScaler scaler;
  SvrModel svr;    // svr and ccrf
  CcrfModel ccrf;
  CcnfModel ccnf;
  Eigen::Index sequence_length = kDefaultSequenceLength;
  std::vector<std::string> feature_names;
  std::string manifest_hash;
};

// Rows of x are windows in time order; `session_lengths` partitions them.
// CCRF is trained on SVR outputs that are cross-fitted across the training
// sessions (each session predicted by an SVR fitted on the others); CCNF on
// the scaled features. CRF hyperparameters are validated by holding training
// sessions out in turn.
TrainedModel train_model(ModelKind kind, const Matrix& x, const Eigen::VectorXd& y,
                         std::span<const Eigen::Index> session_lengths, const std::vector<std::string>& feature_names,
                         const ModelOptions& options = {});

// Raw (unclipped) predictions, one per row.
Eigen::VectorXd predict_model(const TrainedModel& model, const Matrix& x, std::span<const Eigen::Index> session_lengths);

Eigen::VectorXd clip_unit(const Eigen::VectorXd& v);

}  // namespace vigil
