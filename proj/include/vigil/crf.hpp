#pragma once

#include "vigil/sequences.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vigil {

// Gaussian conditional field over a chain of n nodes:
//   Psi(y) = -sum_k alpha_k |y - h_k|^2 - beta * y'Ly
// with h_k the k-th vertex input column and L the chain Laplacian. Hence
// y ~ N(mu, (2M)^-1) with M = (sum alpha) I + beta L and mu = M^-1 H alpha.

struct CrfRegularization {
  double alpha = 1.0;
  double beta = 1e-3;
  double theta = 1e-3;
};

struct FitReport {
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;  // max-norm at the solution
  std::string termination;
};

// Gaussian mean for one sequence given vertex inputs H [n x K].
Eigen::VectorXd crf_mean(const Eigen::VectorXd& alpha, double beta, const Matrix& h);
// Precision matrix 2M of the induced Gaussian.
Matrix crf_precision(const Eigen::VectorXd& alpha, double beta, Eigen::Index n);
// Log-density of y under the induced Gaussian.
double crf_log_likelihood(const Eigen::VectorXd& alpha, double beta, const Matrix& h, const Eigen::VectorXd& y);

// Packed parameters: [log alpha (K1), log beta, theta row-major (K1 x (d+1))].
// Objective = -sum log-likelihood + 1/2 (l_a |alpha|^2 + l_b beta^2 + l_t |theta|^2).
// The gradient span may be empty.
double ccrf_objective(const SequenceBatch& batch, std::span<const double> packed, const CrfRegularization& reg,
                      std::span<double> gradient);
double ccnf_objective(const SequenceBatch& batch, std::span<const double> packed, int k1, const CrfRegularization& reg,
                      std::span<double> gradient);

struct CcrfModel {
  Eigen::VectorXd alpha;
  double beta = 0.0;
  CrfRegularization reg;
  FitReport fit;
};

struct CcnfModel {
  Eigen::VectorXd alpha;
  double beta = 0.0;
  Matrix theta;  // [K1 x (d+1)], last column is the bias weight
  CrfRegularization reg;
  FitReport fit;

  int k1() const { return static_cast<int>(theta.rows()); }
  Eigen::Index dims() const { return theta.cols() - 1; }
};

// Sigmoid neuron outputs [n x K1] for features x [n x d].
Matrix ccnf_vertex_inputs(const Matrix& theta, const Matrix& x);

struct CrfTrainOptions {
  int max_iterations = 1000;
  double gradient_tolerance = 1e-7;
  double function_tolerance = 1e-10;
  bool strict = false;  // throw NonConvergence instead of flagging it
  int restarts = 5;
  std::uint64_t seed = 0;
  double theta_init_scale = 0.1;
  // Training sessions that take a turn as validation during selection,
  // counted from the last one (0 = all of them).
  int validation_sessions = 0;
  std::vector<double> lambda_alpha{1.0, 10.0, 100.0};
  std::vector<double> lambda_beta{1e-3, 1e-2, 1e-1, 1.0};
  std::vector<int> k1{10, 20, 30};
};

// Fit with fixed hyperparameters from an initial model.
CcrfModel ccrf_fit(const SequenceBatch& batch, const CrfRegularization& reg, const CrfTrainOptions& options,
                   const CcrfModel* init = nullptr);
CcnfModel ccnf_fit(const SequenceBatch& batch, int k1, const CrfRegularization& reg, const CrfTrainOptions& options,
                   const CcnfModel* init = nullptr);

// `sessions` holds one batch per training session. Hyperparameters (and, for
// CCNF, restarts) are chosen by the summed validation log-likelihood with each
// selected session held out in turn; the winner is refitted on all sessions,
// warm-started from its fit without the last session. A single session skips
// selection and uses the first grid entry.
CcrfModel ccrf_train(const std::vector<SequenceBatch>& sessions, const CrfTrainOptions& options);
CcnfModel ccnf_train(const std::vector<SequenceBatch>& sessions, const CrfTrainOptions& options);

// x: [n x 1] predictor (SVR output) for CCRF, [n x d] features for CCNF.
Eigen::VectorXd ccrf_infer(const CcrfModel& model, const Matrix& x);
Eigen::VectorXd ccnf_infer(const CcnfModel& model, const Matrix& x);

double batch_log_likelihood(const CcrfModel& model, const SequenceBatch& batch);
double batch_log_likelihood(const CcnfModel& model, const SequenceBatch& batch);

}  // namespace vigil
