#include "vigil/bundle.hpp"

#include "vigil/digest.hpp"
#include "vigil/error.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace vigil {

using nlohmann::json;

namespace {

constexpr int kFormat = 1;

std::string pack(const Eigen::VectorXd& v) { return digest::encode_doubles({v.data(), static_cast<std::size_t>(v.size())}); }

// Row-major payload with an explicit shape.
json pack(const Matrix& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  return json{{"shape", {m.rows(), m.cols()}},
              {"data", digest::encode_doubles({rm.data(), static_cast<std::size_t>(rm.size())})}};
}

Eigen::VectorXd unpack_vector(const json& j) {
  const auto v = digest::decode_doubles(j.get<std::string>());
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix unpack_matrix(const json& j) {
  const auto rows = j.at("shape").at(0).get<Eigen::Index>();
  const auto cols = j.at("shape").at(1).get<Eigen::Index>();
  const auto v = digest::decode_doubles(j.at("data").get<std::string>());
  if (static_cast<Eigen::Index>(v.size()) != rows * cols) throw Error(ErrorCode::Parse, "matrix payload size");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(v.data(), rows, cols);
}

std::string pack_scalar(double v) { return digest::encode_doubles({&v, 1}); }
double unpack_scalar(const json& j) {
  const auto v = digest::decode_doubles(j.get<std::string>());
  if (v.size() != 1) throw Error(ErrorCode::Parse, "expected a single float64");
  return v[0];
}

json fit_json(const FitReport& f) {
  return json{{"converged", f.converged}, {"iterations", f.iterations}, {"objective", f.objective},
              {"gradient_norm", f.gradient_norm}, {"termination", f.termination}};
}

FitReport fit_from(const json& j) {
  FitReport f;
  f.converged = j.at("converged").get<bool>();
  f.iterations = j.at("iterations").get<int>();
  f.objective = j.at("objective").get<double>();
  f.gradient_norm = j.at("gradient_norm").get<double>();
  f.termination = j.at("termination").get<std::string>();
  return f;
}

}  // namespace

std::string bundle_to_json(const TrainedModel& m, const std::string& config_hash) {
  json j;
  j["model_type"] = std::string(to_string(m.kind));
  j["version"] = VIGIL_VERSION;
  j["format"] = kFormat;
  j["feature_manifest_hash"] = m.manifest_hash;
  j["feature_names"] = m.feature_names;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["normalization"] = {{"min", pack(m.scaler.lo)}, {"max", pack(m.scaler.hi)}};
  json hyper{{"sequence_length", m.sequence_length}};
  json params;
  if (m.kind != ModelKind::Ccnf) {
    hyper["c"] = m.svr.params.c;
    hyper["g"] = m.svr.params.g;
    hyper["epsilon"] = m.svr.params.epsilon;
    params["svr_support"] = pack(m.svr.support);
    params["svr_coef"] = pack(m.svr.coef);
    params["svr_bias"] = pack_scalar(m.svr.bias);
  }
  if (m.kind == ModelKind::Ccrf) {
    hyper["lambda_alpha"] = m.ccrf.reg.alpha;
    hyper["lambda_beta"] = m.ccrf.reg.beta;
    params["alpha"] = pack(m.ccrf.alpha);
    params["beta"] = pack_scalar(m.ccrf.beta);
    j["fit"] = fit_json(m.ccrf.fit);
  }
  if (m.kind == ModelKind::Ccnf) {
    hyper["k1"] = m.ccnf.k1();
    hyper["lambda_alpha"] = m.ccnf.reg.alpha;
    hyper["lambda_beta"] = m.ccnf.reg.beta;
    hyper["lambda_theta"] = m.ccnf.reg.theta;
    params["alpha"] = pack(m.ccnf.alpha);
    params["beta"] = pack_scalar(m.ccnf.beta);
    params["theta"] = pack(m.ccnf.theta);
    j["fit"] = fit_json(m.ccnf.fit);
  }
  j["hyperparameters"] = hyper;
  j["parameters"] = params;
  return j.dump(2);
}

TrainedModel bundle_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<int>() != kFormat) throw Error(ErrorCode::Parse, "unsupported bundle format");
    TrainedModel m;
    m.kind = parse_model_kind(j.at("model_type").get<std::string>());
    m.manifest_hash = j.at("feature_manifest_hash").get<std::string>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.scaler.lo = unpack_vector(j.at("normalization").at("min"));
    m.scaler.hi = unpack_vector(j.at("normalization").at("max"));
    const auto& hyper = j.at("hyperparameters");
    const auto& params = j.at("parameters");
    m.sequence_length = hyper.at("sequence_length").get<Eigen::Index>();
    if (m.kind != ModelKind::Ccnf) {
      m.svr.params = {hyper.at("c").get<double>(), hyper.at("g").get<double>(), hyper.at("epsilon").get<double>()};
      m.svr.support = unpack_matrix(params.at("svr_support"));
      m.svr.coef = unpack_vector(params.at("svr_coef"));
      m.svr.bias = unpack_scalar(params.at("svr_bias"));
    }
    if (m.kind == ModelKind::Ccrf) {
      m.ccrf.reg = {hyper.at("lambda_alpha").get<double>(), hyper.at("lambda_beta").get<double>(),
                    hyper.at("lambda_beta").get<double>()};
      m.ccrf.alpha = unpack_vector(params.at("alpha"));
      m.ccrf.beta = unpack_scalar(params.at("beta"));
      m.ccrf.fit = fit_from(j.at("fit"));
    }
    if (m.kind == ModelKind::Ccnf) {
      m.ccnf.reg = {hyper.at("lambda_alpha").get<double>(), hyper.at("lambda_beta").get<double>(),
                    hyper.at("lambda_theta").get<double>()};
      m.ccnf.alpha = unpack_vector(params.at("alpha"));
      m.ccnf.beta = unpack_scalar(params.at("beta"));
      m.ccnf.theta = unpack_matrix(params.at("theta"));
      m.ccnf.fit = fit_from(j.at("fit"));
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("model bundle: ") + e.what());
  }
}

void save_bundle(const std::filesystem::path& path, const TrainedModel& model, const std::string& config_hash) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  out << bundle_to_json(model, config_hash) << '\n';
}

TrainedModel load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  return bundle_from_json(ss.str());
}

}  // namespace vigil
