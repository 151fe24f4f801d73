#include "vigil/svr.hpp"

#include "vigil/error.hpp"
#include "vigil/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vigil {

namespace {

constexpr double kTau = 1e-12;

// Contiguous fold f of k over n rows: [n*f/k, n*(f+1)/k).
std::pair<Eigen::Index, Eigen::Index> fold_range(Eigen::Index n, int k, int f) {
  return {n * f / k, n * (f + 1) / k};
}

Eigen::VectorXd drop_rows(const Eigen::VectorXd& v, Eigen::Index a, Eigen::Index b) {
  Eigen::VectorXd out(v.size() - (b - a));
  out.head(a) = v.head(a);
  out.tail(v.size() - b) = v.tail(v.size() - b);
  return out;
}

// Kernel rows/cols with [a, b) removed.
Matrix drop_block(const Matrix& k, Eigen::Index a, Eigen::Index b) {
  const Eigen::Index n = k.rows();
  const Eigen::Index m = n - (b - a);
  Matrix out(m, m);
  const Eigen::Index tail = n - b;
  out.topLeftCorner(a, a) = k.topLeftCorner(a, a);
  out.topRightCorner(a, tail) = k.topRightCorner(a, tail);
  out.bottomLeftCorner(tail, a) = k.bottomLeftCorner(tail, a);
  out.bottomRightCorner(tail, tail) = k.bottomRightCorner(tail, tail);
  return out;
}

}  // namespace

SvrGrid SvrGrid::standard() {
  SvrGrid grid;
  for (int e = -2; e <= 8; ++e) grid.c.push_back(std::ldexp(1.0, e));
  for (int e = -8; e <= 2; ++e) grid.g.push_back(std::ldexp(1.0, e));
  return grid;
}

SvrGrid SvrGrid::single(const SvrHyperParams& params) {
  SvrGrid grid;
  grid.c = {params.c};
  grid.g = {params.g};
  grid.epsilon = params.epsilon;
  return grid;
}

// Dual over 2l variables a = [alpha; alpha*], sign s_t = +1 / -1:
//   min 1/2 a'Qa + p'a,  Q_ts = s_t s_s K,  p = [eps - y; eps + y],
//   0 <= a <= C,  s'a = 0.
// Working-set selection uses second-order information.
SvrDual svr_solve(const Matrix& kernel, const Eigen::VectorXd& y, double c, double epsilon,
                  const SvrSolverOptions& options) {
  const Eigen::Index l = y.size();
  if (kernel.rows() != l || kernel.cols() != l) throw Error(ErrorCode::DimensionMismatch, "kernel is not l x l");
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidConfig, "SVR penalty c must be positive");
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidConfig, "SVR epsilon must be non-negative");

  const Eigen::Index n2 = 2 * l;
  std::vector<double> a(n2, 0.0), grad(n2), sign(n2);
  for (Eigen::Index t = 0; t < l; ++t) {
    sign[t] = 1.0;
    sign[t + l] = -1.0;
    grad[t] = epsilon - y[t];
    grad[t + l] = epsilon + y[t];
  }
  auto idx = [l](Eigen::Index t) { return t < l ? t : t - l; };
  auto qd = [&](Eigen::Index t) { return kernel(idx(t), idx(t)); };

  SvrDual out;
  long iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n2; ++t) {
      if (sign[t] > 0) {
        if (a[t] < c && -grad[t] >= gmax) { gmax = -grad[t]; i = t; }
      } else {
        if (a[t] > 0 && grad[t] >= gmax) { gmax = grad[t]; i = t; }
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double best = std::numeric_limits<double>::infinity();
    if (i >= 0) {
      const double qii = qd(i);
      const auto ki = kernel.col(idx(i));
      for (Eigen::Index t = 0; t < n2; ++t) {
        const double kij = ki[idx(t)];
        if (sign[t] > 0) {
          if (a[t] > 0) {
            const double diff = gmax + grad[t];
            gmax2 = std::max(gmax2, grad[t]);
            if (diff > 0) {
              double quad = qii + qd(t) - 2.0 * sign[i] * sign[i] * kij;
              if (quad <= 0) quad = kTau;
              const double obj = -diff * diff / quad;
              if (obj <= best) { best = obj; j = t; }
            }
          }
        } else {
          if (a[t] < c) {
            const double diff = gmax - grad[t];
            gmax2 = std::max(gmax2, -grad[t]);
            if (diff > 0) {
              double quad = qii + qd(t) - 2.0 * kij;
              if (quad <= 0) quad = kTau;
              const double obj = -diff * diff / quad;
              if (obj <= best) { best = obj; j = t; }
            }
          }
        }
      }
    }
    if (i < 0 || j < 0 || gmax + gmax2 < options.tolerance) break;

    // Q_ij in the signed variables.
    const double kij = kernel(idx(i), idx(j));
    const double qij = sign[i] * sign[j] * kij;
    const double ai_old = a[i], aj_old = a[j];
    if (sign[i] != sign[j]) {
      double quad = qd(i) + qd(j) + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) { a[j] = 0; a[i] = diff; }
      } else {
        if (a[i] < 0) { a[i] = 0; a[j] = -diff; }
      }
      if (diff > 0) {
        if (a[i] > c) { a[i] = c; a[j] = c - diff; }
      } else {
        if (a[j] > c) { a[j] = c; a[i] = c + diff; }
      }
    } else {
      double quad = qd(i) + qd(j) - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > c) {
        if (a[i] > c) { a[i] = c; a[j] = sum - c; }
      } else {
        if (a[j] < 0) { a[j] = 0; a[i] = sum; }
      }
      if (sum > c) {
        if (a[j] > c) { a[j] = c; a[i] = sum - c; }
      } else {
        if (a[i] < 0) { a[i] = 0; a[j] = sum; }
      }
    }
    const double dai = a[i] - ai_old, daj = a[j] - aj_old;
    const auto ki = kernel.col(idx(i));
    const auto kj = kernel.col(idx(j));
    for (Eigen::Index t = 0; t < n2; ++t) {
      const double st = sign[t];
      const Eigen::Index r = idx(t);
      grad[t] += st * (sign[i] * ki[r] * dai + sign[j] * kj[r] * daj);
    }
  }
  out.iterations = iter;
  out.converged = iter < options.max_iterations;

  // Bias from free variables, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  long free = 0;
  for (Eigen::Index t = 0; t < n2; ++t) {
    const double yg = sign[t] * grad[t];
    if (a[t] >= c) {
      if (sign[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (a[t] <= 0) {
      if (sign[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free;
      sum_free += yg;
    }
  }
  const double rho = free > 0 ? sum_free / static_cast<double>(free) : 0.5 * (ub + lb);
  out.bias = -rho;
  out.coef.resize(l);
  for (Eigen::Index t = 0; t < l; ++t) out.coef[t] = a[t] - a[t + l];
  return out;
}

namespace {

SvrModel model_from_dual(const Matrix& x, const SvrDual& dual, const SvrHyperParams& params) {
  std::vector<Eigen::Index> sv;
  for (Eigen::Index t = 0; t < dual.coef.size(); ++t) {
    if (dual.coef[t] != 0.0) sv.push_back(t);
  }
  SvrModel m;
  m.support.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
  m.coef.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    m.support.row(static_cast<Eigen::Index>(k)) = x.row(sv[k]);
    m.coef[static_cast<Eigen::Index>(k)] = dual.coef[sv[k]];
  }
  m.bias = dual.bias;
  m.params = params;
  m.iterations = dual.iterations;
  m.converged = dual.converged;
  return m;
}

void check_inputs(const Matrix& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw Error(ErrorCode::LengthMismatch, "SVR rows and labels differ");
  if (x.rows() == 0) throw Error(ErrorCode::EmptyInput, "SVR needs at least one row");
  if (!x.allFinite() || !y.allFinite()) throw Error(ErrorCode::InvalidRecording, "SVR inputs must be finite");
}

}  // namespace

SvrModel svr_fit(const Matrix& x, const Eigen::VectorXd& y, const SvrHyperParams& params,
                 const SvrSolverOptions& options) {
  check_inputs(x, y);
  if (!(params.g > 0.0)) throw Error(ErrorCode::InvalidConfig, "SVR g must be positive");
  const Matrix k = kernels::omp::rbf_from_squared(kernels::omp::squared_distances(x, x), params.g);
  return model_from_dual(x, svr_solve(k, y, params.c, params.epsilon, options), params);
}

SvrTrainResult svr_train(const Matrix& x, const Eigen::VectorXd& y, const SvrGrid& grid,
                         const SvrSolverOptions& options) {
  check_inputs(x, y);
  if (x.rows() < 10) throw Error(ErrorCode::EmptyInput, "SVR training needs at least 10 rows");
  if (grid.c.empty() || grid.g.empty()) throw Error(ErrorCode::InvalidConfig, "empty SVR grid");
  if (grid.folds < 2) throw Error(ErrorCode::InvalidConfig, "SVR grid search needs at least 2 folds");
  if (y.maxCoeff() - y.minCoeff() <= 2.0 * grid.epsilon) {
    throw Error(ErrorCode::DegenerateLabels, "label range is inside the epsilon tube");
  }

  const Matrix d = kernels::omp::squared_distances(x, x);
  const auto nc = static_cast<Eigen::Index>(grid.c.size());
  const auto ng = static_cast<Eigen::Index>(grid.g.size());
  SvrTrainResult result;
  result.cv_rmse = Matrix::Zero(nc, ng);

  if (nc * ng > 1) {
    const Eigen::Index n = x.rows();
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index gi = 0; gi < ng; ++gi) {
      const Matrix k = kernels::serial::rbf_from_squared(d, grid.g[gi]);
      for (Eigen::Index ci = 0; ci < nc; ++ci) {
        double sse = 0.0;
        for (int f = 0; f < grid.folds; ++f) {
          const auto [a, b] = fold_range(n, grid.folds, f);
          const Matrix k_train = drop_block(k, a, b);
          const Eigen::VectorXd y_train = drop_rows(y, a, b);
          const SvrDual dual = svr_solve(k_train, y_train, grid.c[ci], grid.epsilon, options);
          // Held-out rows against training rows.
          Matrix k_test(b - a, n - (b - a));
          k_test.leftCols(a) = k.block(a, 0, b - a, a);
          k_test.rightCols(n - b) = k.block(a, b, b - a, n - b);
          const Eigen::VectorXd pred = (k_test * dual.coef).array() + dual.bias;
          sse += (pred - y.segment(a, b - a)).squaredNorm();
        }
        result.cv_rmse(ci, gi) = std::sqrt(sse / static_cast<double>(n));
      }
    }
  }

  Eigen::Index best_c = 0, best_g = 0;
  for (Eigen::Index ci = 0; ci < nc; ++ci) {
    for (Eigen::Index gi = 0; gi < ng; ++gi) {
      if (result.cv_rmse(ci, gi) < result.cv_rmse(best_c, best_g)) {
        best_c = ci;
        best_g = gi;
      }
    }
  }
  const SvrHyperParams best{grid.c[best_c], grid.g[best_g], grid.epsilon};
  const Matrix k = kernels::omp::rbf_from_squared(d, best.g);
  result.model = model_from_dual(x, svr_solve(k, y, best.c, best.epsilon, options), best);
  if (result.model.support.rows() == 0) {
    throw Error(ErrorCode::DegenerateLabels, "SVR training produced no support vectors");
  }
  return result;
}

Eigen::VectorXd svr_predict(const SvrModel& model, const Matrix& x) {
  if (x.cols() != model.dims() && model.support.rows() > 0) {
    throw Error(ErrorCode::DimensionMismatch, "SVR expects " + std::to_string(model.dims()) + " features, got " +
                                                  std::to_string(x.cols()));
  }
  if (model.support.rows() == 0) return Eigen::VectorXd::Constant(x.rows(), model.bias);
  const Matrix k = kernels::omp::rbf_from_squared(kernels::omp::squared_distances(x, model.support), model.params.g);
  return (k * model.coef).array() + model.bias;
}

}  // namespace vigil
