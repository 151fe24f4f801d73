#pragma once

#include "vigil/recording.hpp"

#include <vector>

namespace vigil {

struct SvrHyperParams {
  double c = 1.0;
  double g = 1.0;  // RBF width: k(a, b) = exp(-g * |a - b|^2)
  double epsilon = 0.01;
};

struct SvrSolverOptions {
  double tolerance = 1e-3;  // maximal KKT violation
  long max_iterations = 10'000'000;
};

struct SvrModel {
  Matrix support;          // [s x d]
  Eigen::VectorXd coef;    // alpha - alpha*, |coef| <= c
  double bias = 0.0;
  SvrHyperParams params;
  long iterations = 0;
  bool converged = true;

  Eigen::Index dims() const { return support.cols(); }
};

// Solves the epsilon-SVR dual on a precomputed kernel matrix; returns one
// coefficient per row plus the bias.
struct SvrDual {
  Eigen::VectorXd coef;
  double bias = 0.0;
  long iterations = 0;
  bool converged = true;
};
SvrDual svr_solve(const Matrix& kernel, const Eigen::VectorXd& y, double c, double epsilon,
                  const SvrSolverOptions& options = {});

// Single fit with fixed hyperparameters. Constant targets give a bias-only
// model with no support vectors.
SvrModel svr_fit(const Matrix& x, const Eigen::VectorXd& y, const SvrHyperParams& params,
                 const SvrSolverOptions& options = {});

struct SvrGrid {
  std::vector<double> c;
  std::vector<double> g;
  double epsilon = 0.01;
  int folds = 3;

  // c in 2^-2..2^8, g in 2^-8..2^2.
  static SvrGrid standard();
  static SvrGrid single(const SvrHyperParams& params);
};

struct SvrTrainResult {
  SvrModel model;
  Matrix cv_rmse;  // [c x g]
};

// Grid search by contiguous k-fold RMSE on the given rows only, then a refit
// on all of them. Ties go to the first grid point in (c, g) order. Throws
// DegenerateLabels when the label range is within the tube (no support
// vectors could exist).
SvrTrainResult svr_train(const Matrix& x, const Eigen::VectorXd& y, const SvrGrid& grid,
                         const SvrSolverOptions& options = {});

// Raw decision values; DimensionMismatch on width mismatch.
Eigen::VectorXd svr_predict(const SvrModel& model, const Matrix& x);

}  // namespace vigil
