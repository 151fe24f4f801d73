#include "vigil/models.hpp"

#include "vigil/error.hpp"
#include "vigil/features.hpp"

namespace vigil {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Svr: return "svr";
    case ModelKind::Ccrf: return "ccrf";
    case ModelKind::Ccnf: return "ccnf";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "svr") return ModelKind::Svr;
  if (text == "ccrf") return ModelKind::Ccrf;
  if (text == "ccnf") return ModelKind::Ccnf;
  throw Error(ErrorCode::InvalidConfig, "unknown model '" + std::string(text) + "'");
}

namespace {

std::vector<Eigen::Index> session_starts(std::span<const Eigen::Index> lengths) {
  std::vector<Eigen::Index> starts;
  Eigen::Index at = 0;
  for (auto len : lengths) {
    starts.push_back(at);
    at += len;
  }
  return starts;
}

// Out-of-session SVR outputs for every training row.
Eigen::VectorXd cross_fitted_svr(const Matrix& xs, const Eigen::VectorXd& y, std::span<const Eigen::Index> lengths,
                                 const SvrModel& full, const SvrSolverOptions& solver) {
  if (lengths.size() < 2) return svr_predict(full, xs);
  const auto starts = session_starts(lengths);
  Eigen::VectorXd out(xs.rows());
  for (std::size_t s = 0; s < lengths.size(); ++s) {
    const Eigen::Index a = starts[s], len = lengths[s], rest = xs.rows() - len;
    Matrix xr(rest, xs.cols());
    Eigen::VectorXd yr(rest);
    xr << xs.topRows(a), xs.bottomRows(xs.rows() - a - len);
    yr << y.head(a), y.tail(y.size() - a - len);
    const SvrModel m = svr_fit(xr, yr, full.params, solver);
    out.segment(a, len) = svr_predict(m, xs.middleRows(a, len));
  }
  return out;
}

// One sequence batch per session; offsets are global row indices.
void check_lengths(std::span<const Eigen::Index> lengths, Eigen::Index rows) {
  Eigen::Index total = 0;
  for (const Eigen::Index len : lengths) {
    if (len <= 0) throw Error(ErrorCode::LengthMismatch, "session lengths must be positive");
    total += len;
  }
  if (total != rows) throw Error(ErrorCode::LengthMismatch, "session lengths do not cover the rows");
}

std::vector<SequenceBatch> session_batches(const Matrix& x, const Eigen::VectorXd& y,
                                           std::span<const Eigen::Index> lengths, Eigen::Index n) {
  check_lengths(lengths, x.rows());
  std::vector<SequenceBatch> out;
  Eigen::Index start = 0;
  for (const Eigen::Index len : lengths) {
    const Eigen::Index one[] = {len};
    SequenceBatch b = chunk_sequences(x.middleRows(start, len), y.segment(start, len), one, n);
    for (auto& s : b) s.offset += start;
    out.push_back(std::move(b));
    start += len;
  }
  return out;
}

}  // namespace

TrainedModel train_model(ModelKind kind, const Matrix& x, const Eigen::VectorXd& y,
                         std::span<const Eigen::Index> session_lengths, const std::vector<std::string>& feature_names,
                         const ModelOptions& options) {
  if (x.rows() != y.size()) throw Error(ErrorCode::LengthMismatch, "features and labels differ in rows");
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != x.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "feature names do not match the feature width");
  }
  check_lengths(session_lengths, x.rows());
  TrainedModel m;
  m.kind = kind;
  m.sequence_length = options.sequence_length;
  m.feature_names = feature_names;
  m.manifest_hash = manifest_hash(feature_names);
  m.scaler = MinMaxScaler::fit(x);
  const Matrix xs = m.scaler.transform(x);

  switch (kind) {
    case ModelKind::Svr:
      m.svr = svr_train(xs, y, options.svr_grid, options.svr_solver).model;
      break;
    case ModelKind::Ccrf: {
      m.svr = svr_train(xs, y, options.svr_grid, options.svr_solver).model;
      const Matrix h = cross_fitted_svr(xs, y, session_lengths, m.svr, options.svr_solver);
      m.ccrf = ccrf_train(session_batches(h, y, session_lengths, options.sequence_length), options.crf);
      break;
    }
    case ModelKind::Ccnf: {
      m.ccnf = ccnf_train(session_batches(xs, y, session_lengths, options.sequence_length), options.crf);
      break;
    }
  }
  return m;
}

Eigen::VectorXd predict_model(const TrainedModel& model, const Matrix& x, std::span<const Eigen::Index> session_lengths) {
  const Matrix xs = model.scaler.transform(x);
  if (model.kind == ModelKind::Svr) return svr_predict(model.svr, xs);

  const Matrix inputs = model.kind == ModelKind::Ccrf ? Matrix(svr_predict(model.svr, xs)) : xs;
  const SequenceBatch batch = chunk_sequences(inputs, Eigen::VectorXd(), session_lengths, model.sequence_length);
  std::vector<Eigen::VectorXd> preds(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    preds[k] = model.kind == ModelKind::Ccrf ? ccrf_infer(model.ccrf, batch[k].x) : ccnf_infer(model.ccnf, batch[k].x);
  }
  return unchunk(batch, preds, x.rows());
}

Eigen::VectorXd clip_unit(const Eigen::VectorXd& v) { return v.cwiseMax(0.0).cwiseMin(1.0); }

}  // namespace vigil
