#pragma once

#include "vigil/labels.hpp"
#include "vigil/models.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vigil {

// Root mean squared error; LengthMismatch / EmptyInput.
double rmse(std::span<const double> y, std::span<const double> yhat);
// Pearson correlation; ZeroVariance when either side is constant.
double cor(std::span<const double> y, std::span<const double> yhat);

// Correlation that may be undefined (a constant prediction series).
struct CorResult {
  std::optional<double> value;
  std::string undefined_reason;  // set when value is empty
};
CorResult try_cor(std::span<const double> y, std::span<const double> yhat);

inline constexpr int kFolds = 5;

// Equal contiguous sessions; the first `rows % sessions` get one extra row.
std::vector<Eigen::Index> split_sessions(Eigen::Index rows, int sessions = kFolds);
// Throws UnevenSessions when lengths differ by more than one window; returns
// a warning message when they differ by exactly one.
std::optional<std::string> check_sessions(std::span<const Eigen::Index> lengths);

// What a fold's model sees. Test rows are a single held-out session.
struct FoldData {
  int fold = 0;
  Matrix x_train;
  Eigen::VectorXd y_train;
  std::vector<Eigen::Index> train_sessions;
  Matrix x_test;
  std::vector<Eigen::Index> test_sessions;
};

// Returns predictions for x_test.
using FitPredict = std::function<Eigen::VectorXd(const FoldData&)>;

struct FoldReport {
  std::string modality;
  std::string model;
  std::vector<double> fold_rmse;
  double rmse_mean = 0.0;
  double rmse_std = 0.0;
  double rmse_concatenated = 0.0;
  CorResult cor;  // over the concatenated held-out predictions
  std::vector<Eigen::Index> session_lengths;
  std::vector<int> fold_of_session;  // fold k tests session k
  Eigen::VectorXd predictions;       // raw, session order
  bool metrics_clipped = true;
  Eigen::VectorXd truth;
  std::vector<std::string> warnings;
};

// Leave-one-session-out over the given contiguous sessions (five expected).
// Metrics use predictions clipped to [0, 1] unless `clip` is false; the
// report keeps the raw values.
FoldReport five_fold(const Matrix& x, const Eigen::VectorXd& y, std::span<const Eigen::Index> session_lengths,
                     const FitPredict& fit_predict, bool clip = true);

// five_fold with train_model / predict_model.
FoldReport five_fold_model(ModelKind kind, const Matrix& x, const Eigen::VectorXd& y,
                           std::span<const Eigen::Index> session_lengths, const std::vector<std::string>& names,
                           const ModelOptions& options);

struct ConfusionGraph {
  Eigen::Matrix3d rates = Eigen::Matrix3d::Zero();  // row = true state, col = predicted
  Eigen::Matrix3i counts = Eigen::Matrix3i::Zero();
};

// Predictions are clipped to [0, 1] before state assignment. Rows for states
// absent from the truth stay zero.
ConfusionGraph confusion(std::span<const double> pred, std::span<const double> truth);

}  // namespace vigil
