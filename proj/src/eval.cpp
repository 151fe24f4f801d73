#include "vigil/eval.hpp"

#include "vigil/error.hpp"
#include "vigil/stats.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

namespace vigil {

double rmse(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) throw Error(ErrorCode::LengthMismatch, "rmse inputs differ in length");
  if (y.empty()) throw Error(ErrorCode::EmptyInput, "rmse of empty series");
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - yhat[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(y.size()));
}

double cor(std::span<const double> y, std::span<const double> yhat) { return stats::pearson(y, yhat); }

CorResult try_cor(std::span<const double> y, std::span<const double> yhat) {
  CorResult r;
  try {
    r.value = cor(y, yhat);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroVariance) throw;
    r.undefined_reason = "zero_variance";
  }
  return r;
}

std::vector<Eigen::Index> split_sessions(Eigen::Index rows, int sessions) {
  if (sessions < 1 || rows < sessions) throw Error(ErrorCode::SessionTooShort, "too few windows for the session split");
  std::vector<Eigen::Index> lengths(static_cast<std::size_t>(sessions), rows / sessions);
  for (Eigen::Index i = 0; i < rows % sessions; ++i) ++lengths[static_cast<std::size_t>(i)];
  return lengths;
}

std::optional<std::string> check_sessions(std::span<const Eigen::Index> lengths) {
  if (lengths.empty()) throw Error(ErrorCode::EmptyInput, "no sessions");
  const auto [lo, hi] = std::minmax_element(lengths.begin(), lengths.end());
  if (*hi - *lo > 1) {
    throw Error(ErrorCode::UnevenSessions, "session lengths range from " + std::to_string(*lo) + " to " +
                                               std::to_string(*hi) + " windows");
  }
  if (*hi != *lo) return "session lengths differ by one window";
  return std::nullopt;
}

FoldReport five_fold(const Matrix& x, const Eigen::VectorXd& y, std::span<const Eigen::Index> session_lengths,
                     const FitPredict& fit_predict, bool clip) {
  if (x.rows() != y.size()) throw Error(ErrorCode::LengthMismatch, "features and labels differ in rows");
  if (session_lengths.size() != static_cast<std::size_t>(kFolds)) {
    throw Error(ErrorCode::InvalidConfig, "five sessions are required");
  }
  Eigen::Index total = 0;
  for (auto len : session_lengths) total += len;
  if (total != x.rows()) throw Error(ErrorCode::LengthMismatch, "session lengths do not cover the data");

  FoldReport report;
  if (auto warning = check_sessions(session_lengths)) report.warnings.push_back(*warning);
  report.session_lengths.assign(session_lengths.begin(), session_lengths.end());
  std::vector<Eigen::Index> starts;
  for (Eigen::Index at = 0; auto len : session_lengths) {
    starts.push_back(at);
    at += len;
  }

  std::vector<Eigen::VectorXd> preds(kFolds);
  std::vector<std::exception_ptr> errors(kFolds);
#pragma omp parallel for schedule(dynamic)
  for (int f = 0; f < kFolds; ++f) {
    try {
      FoldData d;
      d.fold = f;
      const Eigen::Index a = starts[f], len = session_lengths[f];
      d.x_test = x.middleRows(a, len);
      d.test_sessions = {len};
      d.x_train.resize(x.rows() - len, x.cols());
      d.y_train.resize(x.rows() - len);
      d.x_train << x.topRows(a), x.bottomRows(x.rows() - a - len);
      d.y_train << y.head(a), y.tail(y.size() - a - len);
      for (int s = 0; s < kFolds; ++s) {
        if (s != f) d.train_sessions.push_back(session_lengths[s]);
      }
      preds[f] = fit_predict(d);
      if (preds[f].size() != len) throw Error(ErrorCode::LengthMismatch, "fold prediction length");
    } catch (...) {
      errors[f] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  report.predictions.resize(x.rows());
  report.truth = y;
  report.metrics_clipped = clip;
  for (int f = 0; f < kFolds; ++f) {
    report.fold_of_session.push_back(f);
    report.predictions.segment(starts[f], session_lengths[f]) = preds[f];
    const Eigen::VectorXd t = y.segment(starts[f], session_lengths[f]);
    const Eigen::VectorXd p = clip ? clip_unit(preds[f]) : preds[f];
    report.fold_rmse.push_back(rmse({t.data(), static_cast<std::size_t>(t.size())},
                                    {p.data(), static_cast<std::size_t>(p.size())}));
  }
  report.rmse_mean = stats::mean(report.fold_rmse);
  report.rmse_std = std::sqrt(stats::variance(report.fold_rmse));
  const Eigen::VectorXd scored = clip ? clip_unit(report.predictions) : report.predictions;
  const std::span<const double> py(scored.data(), static_cast<std::size_t>(scored.size()));
  const std::span<const double> ty(y.data(), static_cast<std::size_t>(y.size()));
  report.rmse_concatenated = rmse(ty, py);
  report.cor = try_cor(ty, py);
  return report;
}

FoldReport five_fold_model(ModelKind kind, const Matrix& x, const Eigen::VectorXd& y,
                           std::span<const Eigen::Index> session_lengths, const std::vector<std::string>& names,
                           const ModelOptions& options) {
  FoldReport r = five_fold(x, y, session_lengths, [&](const FoldData& d) {
    const TrainedModel m = train_model(kind, d.x_train, d.y_train, d.train_sessions, names, options);
    return predict_model(m, d.x_test, d.test_sessions);
  });
  r.model = std::string(to_string(kind));
  return r;
}

ConfusionGraph confusion(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "confusion inputs differ in length");
  if (pred.empty()) throw Error(ErrorCode::EmptyInput, "confusion of empty series");
  ConfusionGraph g;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto t = static_cast<int>(split_states(std::clamp(truth[i], 0.0, 1.0)));
    const auto p = static_cast<int>(split_states(std::clamp(pred[i], 0.0, 1.0)));
    ++g.counts(t, p);
  }
  for (int r = 0; r < 3; ++r) {
    const int n = g.counts.row(r).sum();
    if (n > 0) g.rates.row(r) = g.counts.row(r).cast<double>() / static_cast<double>(n);
  }
  return g;
}

}  // namespace vigil
