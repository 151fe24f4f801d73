#include "vigil/crf.hpp"

#include "vigil/error.hpp"

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>

#include <Eigen/Cholesky>

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>

namespace vigil {

namespace {

struct ChainTerms {
  Matrix minv;
  Matrix lap;
  double logdet_2m = 0.0;
  double trace_minv = 0.0;
  double trace_minv_l = 0.0;
};

ChainTerms chain_terms(double alpha_sum, double beta, Eigen::Index n) {
  ChainTerms t;
  t.lap = chain_laplacian(n);
  const Matrix m = alpha_sum * Matrix::Identity(n, n) + beta * t.lap;
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularPrecision, "CRF precision is not positive definite");
  t.minv = llt.solve(Matrix::Identity(n, n));
  t.logdet_2m = static_cast<double>(n) * std::log(2.0) + 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  t.trace_minv = t.minv.trace();
  t.trace_minv_l = (t.minv * t.lap).trace();
  return t;
}

using ChainCache = std::map<Eigen::Index, ChainTerms>;

const ChainTerms& cached(ChainCache& cache, double alpha_sum, double beta, Eigen::Index n) {
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, chain_terms(alpha_sum, beta, n)).first;
  return it->second;
}

// Log-likelihood of one sequence; accumulates dLL/dalpha, dLL/dbeta and
// returns r = dLL/db = 2 (y - mu) through `residual`.
double sequence_terms(const ChainTerms& c, const Eigen::VectorXd& alpha, double beta, const Matrix& h,
                      const Eigen::VectorXd& y, Eigen::VectorXd* d_alpha, double* d_beta, Eigen::VectorXd* residual) {
  const Eigen::Index n = y.size();
  const double alpha_sum = alpha.sum();
  const Eigen::VectorXd b = h * alpha;
  const Eigen::VectorXd mu = c.minv * b;
  const Eigen::VectorXd ly = c.lap * y;
  const double y_my = alpha_sum * y.squaredNorm() + beta * y.dot(ly);
  const double ll = -y_my + 2.0 * y.dot(b) - b.dot(mu) + 0.5 * c.logdet_2m -
                    0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  if (d_alpha != nullptr) {
    const Eigen::VectorXd diff = y - mu;
    const double common = -y.squaredNorm() + mu.squaredNorm() + 0.5 * c.trace_minv;
    d_alpha->array() += common + 2.0 * (h.transpose() * diff).array();
    *d_beta += -y.dot(ly) + mu.dot(c.lap * mu) + 0.5 * c.trace_minv_l;
    if (residual != nullptr) *residual = 2.0 * diff;
  }
  return ll;
}

Matrix with_bias(const Matrix& x) {
  Matrix out(x.rows(), x.cols() + 1);
  out.leftCols(x.cols()) = x;
  out.col(x.cols()).setOnes();
  return out;
}

Matrix sigmoid_inputs(const Matrix& theta, const Matrix& x_bias) {
  return (1.0 + (-(x_bias * theta.transpose()).array()).exp()).inverse().matrix();
}

void check_batch(const SequenceBatch& batch, bool need_labels) {
  if (batch.empty()) throw Error(ErrorCode::EmptyInput, "empty sequence batch");
  const Eigen::Index d = batch.front().x.cols();
  for (const auto& s : batch) {
    if (s.x.cols() != d) throw Error(ErrorCode::DimensionMismatch, "sequences differ in feature width");
    if (s.x.rows() == 0) throw Error(ErrorCode::EmptyInput, "empty sequence");
    if (need_labels && s.y.size() != s.x.rows()) throw Error(ErrorCode::LengthMismatch, "sequence labels missing");
    if (!s.x.allFinite()) throw Error(ErrorCode::InvalidRecording, "non-finite sequence inputs");
  }
}

class Objective final : public ceres::FirstOrderFunction {
 public:
  Objective(int size, std::function<double(std::span<const double>, std::span<double>)> fn)
      : size_(size), fn_(std::move(fn)) {}

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    const std::span<const double> p(parameters, static_cast<std::size_t>(size_));
    std::span<double> g;
    if (gradient != nullptr) g = std::span<double>(gradient, static_cast<std::size_t>(size_));
    try {
      *cost = fn_(p, g);
    } catch (const Error&) {
      return false;
    }
    if (!std::isfinite(*cost)) return false;
    for (double v : g) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }
  int NumParameters() const override { return size_; }

 private:
  int size_;
  std::function<double(std::span<const double>, std::span<double>)> fn_;
};

FitReport minimize(std::vector<double>& params, std::function<double(std::span<const double>, std::span<double>)> fn,
                   const CrfTrainOptions& options) {
  const int size = static_cast<int>(params.size());
  ceres::GradientProblem problem(new Objective(size, fn));
  ceres::GradientProblemSolver::Options o;
  o.line_search_direction_type = ceres::LBFGS;
  o.max_num_iterations = options.max_iterations;
  o.gradient_tolerance = options.gradient_tolerance;
  o.function_tolerance = options.function_tolerance;
  o.parameter_tolerance = 1e-14;
  o.logging_type = ceres::SILENT;
  o.minimizer_progress_to_stdout = false;
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(o, problem, params.data(), &summary);

  FitReport report;
  std::vector<double> grad(params.size());
  report.objective = fn(params, grad);
  for (double g : grad) report.gradient_norm = std::max(report.gradient_norm, std::abs(g));
  report.iterations = static_cast<int>(summary.iterations.size());
  report.converged = summary.termination_type == ceres::CONVERGENCE;
  report.termination = ceres::TerminationTypeToString(summary.termination_type);
  if (options.strict && !report.converged) {
    throw Error(ErrorCode::NonConvergence, "optimizer stopped (" + report.termination +
                                               ") with gradient norm " + std::to_string(report.gradient_norm));
  }
  return report;
}

}  // namespace

Matrix crf_precision(const Eigen::VectorXd& alpha, double beta, Eigen::Index n) {
  return 2.0 * (alpha.sum() * Matrix::Identity(n, n) + beta * chain_laplacian(n));
}

Eigen::VectorXd crf_mean(const Eigen::VectorXd& alpha, double beta, const Matrix& h) {
  if (h.cols() != alpha.size()) throw Error(ErrorCode::DimensionMismatch, "one vertex input per alpha expected");
  const Eigen::Index n = h.rows();
  const Matrix m = alpha.sum() * Matrix::Identity(n, n) + beta * chain_laplacian(n);
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularPrecision, "CRF precision is not positive definite");
  return llt.solve(h * alpha);
}

double crf_log_likelihood(const Eigen::VectorXd& alpha, double beta, const Matrix& h, const Eigen::VectorXd& y) {
  const ChainTerms c = chain_terms(alpha.sum(), beta, y.size());
  return sequence_terms(c, alpha, beta, h, y, nullptr, nullptr, nullptr);
}

double ccrf_objective(const SequenceBatch& batch, std::span<const double> packed, const CrfRegularization& reg,
                      std::span<double> gradient) {
  const Eigen::Index k = batch.front().x.cols();
  if (static_cast<Eigen::Index>(packed.size()) != k + 1) throw Error(ErrorCode::DimensionMismatch, "CCRF parameters");
  Eigen::VectorXd alpha(k);
  for (Eigen::Index i = 0; i < k; ++i) alpha[i] = std::exp(packed[i]);
  const double beta = std::exp(packed[k]);
  const bool want = !gradient.empty();
  Eigen::VectorXd d_alpha = Eigen::VectorXd::Zero(k);
  double d_beta = 0.0;
  double ll = 0.0;
  ChainCache cache;
  for (const auto& s : batch) {
    const auto& c = cached(cache, alpha.sum(), beta, s.x.rows());
    ll += sequence_terms(c, alpha, beta, s.x, s.y, want ? &d_alpha : nullptr, &d_beta, nullptr);
  }
  const double value = -ll + 0.5 * (reg.alpha * alpha.squaredNorm() + reg.beta * beta * beta);
  if (want) {
    for (Eigen::Index i = 0; i < k; ++i) gradient[i] = alpha[i] * (-d_alpha[i] + reg.alpha * alpha[i]);
    gradient[k] = beta * (-d_beta + reg.beta * beta);
  }
  return value;
}

Matrix ccnf_vertex_inputs(const Matrix& theta, const Matrix& x) {
  if (x.cols() + 1 != theta.cols()) throw Error(ErrorCode::DimensionMismatch, "CCNF feature width mismatch");
  return sigmoid_inputs(theta, with_bias(x));
}

double ccnf_objective(const SequenceBatch& batch, std::span<const double> packed, int k1, const CrfRegularization& reg,
                      std::span<double> gradient) {
  const Eigen::Index d1 = batch.front().x.cols() + 1;
  const Eigen::Index k = k1;
  if (static_cast<Eigen::Index>(packed.size()) != k + 1 + k * d1) {
    throw Error(ErrorCode::DimensionMismatch, "CCNF parameter vector has the wrong size");
  }
  Eigen::VectorXd alpha(k);
  for (Eigen::Index i = 0; i < k; ++i) alpha[i] = std::exp(packed[i]);
  const double beta = std::exp(packed[k]);
  const Matrix theta = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      packed.data() + k + 1, k, d1);
  const bool want = !gradient.empty();
  Eigen::VectorXd d_alpha = Eigen::VectorXd::Zero(k);
  double d_beta = 0.0;
  Matrix d_theta = Matrix::Zero(k, d1);
  double ll = 0.0;
  ChainCache cache;
  Eigen::VectorXd r;
  for (const auto& s : batch) {
    const Matrix xb = with_bias(s.x);
    const Matrix h = sigmoid_inputs(theta, xb);
    const auto& c = cached(cache, alpha.sum(), beta, s.x.rows());
    ll += sequence_terms(c, alpha, beta, h, s.y, want ? &d_alpha : nullptr, &d_beta, want ? &r : nullptr);
    if (want) {
      // d b_i / d theta_k = alpha_k h_ik (1 - h_ik) x_i
      const Matrix w = (h.array() * (1.0 - h.array())).colwise() * r.array();
      d_theta.noalias() += alpha.asDiagonal() * (w.transpose() * xb);
    }
  }
  const double value =
      -ll + 0.5 * (reg.alpha * alpha.squaredNorm() + reg.beta * beta * beta + reg.theta * theta.squaredNorm());
  if (want) {
    for (Eigen::Index i = 0; i < k; ++i) gradient[i] = alpha[i] * (-d_alpha[i] + reg.alpha * alpha[i]);
    gradient[k] = beta * (-d_beta + reg.beta * beta);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < d1; ++j) {
        gradient[k + 1 + i * d1 + j] = -d_theta(i, j) + reg.theta * theta(i, j);
      }
    }
  }
  return value;
}

CcrfModel ccrf_fit(const SequenceBatch& batch, const CrfRegularization& reg, const CrfTrainOptions& options,
                   const CcrfModel* init) {
  check_batch(batch, true);
  const Eigen::Index k = batch.front().x.cols();
  std::vector<double> p(static_cast<std::size_t>(k + 1), 0.0);
  if (init != nullptr && init->alpha.size() == k) {
    for (Eigen::Index i = 0; i < k; ++i) p[i] = std::log(init->alpha[i]);
    p[k] = std::log(init->beta);
  }
  CcrfModel m;
  m.reg = reg;
  m.fit = minimize(
      p, [&](std::span<const double> q, std::span<double> g) { return ccrf_objective(batch, q, reg, g); }, options);
  m.alpha.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) m.alpha[i] = std::exp(p[i]);
  m.beta = std::exp(p[k]);
  return m;
}

CcnfModel ccnf_fit(const SequenceBatch& batch, int k1, const CrfRegularization& reg, const CrfTrainOptions& options,
                   const CcnfModel* init) {
  check_batch(batch, true);
  if (k1 < 1) throw Error(ErrorCode::InvalidConfig, "K1 must be positive");
  const Eigen::Index d1 = batch.front().x.cols() + 1;
  const Eigen::Index k = k1;
  std::vector<double> p(static_cast<std::size_t>(k + 1 + k * d1), 0.0);
  if (init != nullptr && init->k1() == k1 && init->theta.cols() == d1) {
    for (Eigen::Index i = 0; i < k; ++i) p[i] = std::log(init->alpha[i]);
    p[k] = std::log(init->beta);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < d1; ++j) p[k + 1 + i * d1 + j] = init->theta(i, j);
    }
  } else {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> u(-options.theta_init_scale, options.theta_init_scale);
    for (std::size_t i = static_cast<std::size_t>(k + 1); i < p.size(); ++i) p[i] = u(rng);
  }
  CcnfModel m;
  m.reg = reg;
  m.fit = minimize(
      p, [&](std::span<const double> q, std::span<double> g) { return ccnf_objective(batch, q, k1, reg, g); },
      options);
  m.alpha.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) m.alpha[i] = std::exp(p[i]);
  m.beta = std::exp(p[k]);
  m.theta.resize(k, d1);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < d1; ++j) m.theta(i, j) = p[k + 1 + i * d1 + j];
  }
  return m;
}

namespace {

SequenceBatch flatten(const std::vector<SequenceBatch>& sessions, std::size_t skip) {
  SequenceBatch out;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    if (s != skip) out.insert(out.end(), sessions[s].begin(), sessions[s].end());
  }
  return out;
}

struct Split {
  SequenceBatch train;
  const SequenceBatch* validation = nullptr;
};

// Held-out splits, ending with the last session held out.
std::vector<Split> validation_splits(const std::vector<SequenceBatch>& sessions, int count) {
  std::vector<Split> splits;
  const std::size_t n = sessions.size();
  if (n < 2) return splits;
  const std::size_t v = count <= 0 ? n : std::min<std::size_t>(static_cast<std::size_t>(count), n);
  for (std::size_t j = n - v; j < n; ++j) splits.push_back({flatten(sessions, j), &sessions[j]});
  return splits;
}

void check_sessions(const std::vector<SequenceBatch>& sessions) {
  if (sessions.empty()) throw Error(ErrorCode::InvalidConfig, "CRF training needs at least one session");
  for (const auto& s : sessions) check_batch(s, true);
}

struct GridPoint {
  int k1 = 0;
  CrfRegularization reg;
  int restart = 0;
};

std::size_t best_index(const std::vector<double>& score) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < score.size(); ++i) {
    if (score[i] > score[best]) best = i;
  }
  return best;
}

}  // namespace

CcrfModel ccrf_train(const std::vector<SequenceBatch>& sessions, const CrfTrainOptions& options) {
  check_sessions(sessions);
  if (options.lambda_alpha.empty() || options.lambda_beta.empty()) {
    throw Error(ErrorCode::InvalidConfig, "empty CRF regularization grid");
  }
  std::vector<CrfRegularization> grid;
  for (double la : options.lambda_alpha) {
    for (double lb : options.lambda_beta) grid.push_back({la, lb, lb});
  }
  const SequenceBatch all = flatten(sessions, sessions.size());
  const auto splits = validation_splits(sessions, options.validation_sessions);
  if (splits.empty()) return ccrf_fit(all, grid.front(), options);

  const std::size_t ns = splits.size();
  std::vector<CcrfModel> last_fit(grid.size());
  std::vector<double> ll(grid.size() * ns);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < grid.size() * ns; ++t) {
    const std::size_t g = t / ns, s = t % ns;
    CcrfModel m = ccrf_fit(splits[s].train, grid[g], options);
    ll[t] = batch_log_likelihood(m, *splits[s].validation);
    if (s + 1 == ns) last_fit[g] = std::move(m);
  }
  std::vector<double> score(grid.size(), 0.0);
  for (std::size_t t = 0; t < ll.size(); ++t) score[t / ns] += ll[t];
  const std::size_t best = best_index(score);
  return ccrf_fit(all, grid[best], options, &last_fit[best]);
}

CcnfModel ccnf_train(const std::vector<SequenceBatch>& sessions, const CrfTrainOptions& options) {
  check_sessions(sessions);
  if (options.lambda_alpha.empty() || options.lambda_beta.empty() || options.k1.empty()) {
    throw Error(ErrorCode::InvalidConfig, "empty CCNF hyperparameter grid");
  }
  const int restarts = std::max(1, options.restarts);
  std::vector<GridPoint> grid;
  for (int k1 : options.k1) {
    for (double la : options.lambda_alpha) {
      for (double lb : options.lambda_beta) {
        for (int r = 0; r < restarts; ++r) grid.push_back({k1, {la, lb, lb}, r});
      }
    }
  }
  const auto seeded = [&](const GridPoint& p) {
    CrfTrainOptions local = options;
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(p.k1), static_cast<std::uint32_t>(p.restart)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    local.seed = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    return local;
  };
  const SequenceBatch all = flatten(sessions, sessions.size());
  const auto splits = validation_splits(sessions, options.validation_sessions);
  if (splits.empty()) return ccnf_fit(all, grid.front().k1, grid.front().reg, seeded(grid.front()));

  const std::size_t ns = splits.size();
  std::vector<CcnfModel> last_fit(grid.size());
  std::vector<double> ll(grid.size() * ns);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < grid.size() * ns; ++t) {
    const std::size_t g = t / ns, s = t % ns;
    CcnfModel m = ccnf_fit(splits[s].train, grid[g].k1, grid[g].reg, seeded(grid[g]));
    ll[t] = batch_log_likelihood(m, *splits[s].validation);
    if (s + 1 == ns) last_fit[g] = std::move(m);
  }
  std::vector<double> score(grid.size(), 0.0);
  for (std::size_t t = 0; t < ll.size(); ++t) score[t / ns] += ll[t];
  const std::size_t best = best_index(score);
  return ccnf_fit(all, grid[best].k1, grid[best].reg, options, &last_fit[best]);
}

Eigen::VectorXd ccrf_infer(const CcrfModel& model, const Matrix& x) { return crf_mean(model.alpha, model.beta, x); }

Eigen::VectorXd ccnf_infer(const CcnfModel& model, const Matrix& x) {
  return crf_mean(model.alpha, model.beta, ccnf_vertex_inputs(model.theta, x));
}

double batch_log_likelihood(const CcrfModel& model, const SequenceBatch& batch) {
  double ll = 0.0;
  for (const auto& s : batch) ll += crf_log_likelihood(model.alpha, model.beta, s.x, s.y);
  return ll;
}

double batch_log_likelihood(const CcnfModel& model, const SequenceBatch& batch) {
  double ll = 0.0;
  for (const auto& s : batch) {
    ll += crf_log_likelihood(model.alpha, model.beta, ccnf_vertex_inputs(model.theta, s.x), s.y);
  }
  return ll;
}

}  // namespace vigil
