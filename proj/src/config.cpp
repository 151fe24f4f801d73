#include "vigil/config.hpp"

#include "vigil/digest.hpp"
#include "vigil/error.hpp"
#include "vigil/recording_io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vigil {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return io::parse_double(trim(v));
  } catch (const Error&) {
    throw Error(ErrorCode::InvalidConfig, key + ": '" + v + "' is not a number");
  }
}

long to_long(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw Error(ErrorCode::InvalidConfig, key + ": '" + v + "' is not an integer");
  return static_cast<long>(d);
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, key + " is empty");
  return out;
}

// "a:b" (inclusive integer exponent range) or a list of exponents, base 2.
std::vector<double> to_pow2(const std::string& key, const std::string& v) {
  std::vector<double> out;
  const auto colon = v.find(':');
  if (colon != std::string::npos) {
    const long a = to_long(key, v.substr(0, colon));
    const long b = to_long(key, v.substr(colon + 1));
    if (b < a) throw Error(ErrorCode::InvalidConfig, key + ": empty exponent range");
    for (long e = a; e <= b; ++e) out.push_back(std::ldexp(1.0, static_cast<int>(e)));
  } else {
    for (double e : to_doubles(key, v)) out.push_back(std::exp2(e));
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw Error(ErrorCode::InvalidConfig, key + ": '" + v + "' is not a boolean");
}

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> d{
      {"input.forehead", ""},
      {"input.gaze", ""},
      {"input.labels", ""},
      {"input.temporal", ""},
      {"input.posterior", ""},
      {"input.synthetic_duration_s", "1800"},
      {"pipeline.separation", "ica-minus"},
      {"pipeline.banding", "2hz"},
      {"pipeline.detection_rate_hz", "125"},
      {"pipeline.eeg_rate_hz", "200"},
      {"pipeline.window_s", "8"},
      {"eval.modalities", "eog, eeg-forehead, fusion-forehead"},
      {"eval.models", "svr, ccnf"},
      {"svr.c_exp", "-2:8"},
      {"svr.g_exp", "-8:2"},
      {"svr.epsilon", "0.01"},
      {"svr.folds", "3"},
      {"crf.k1", "10, 20, 30"},
      {"crf.lambda_alpha", "1, 10, 100"},
      {"crf.lambda_beta", "0.001, 0.01, 0.1, 1"},
      {"crf.restarts", "5"},
      {"crf.validation_sessions", "0"},
      {"crf.max_iterations", "1000"},
      {"crf.gradient_tolerance", "1e-7"},
      {"crf.strict", "false"},
      {"crf.sequence_length", "7"},
      {"run.seed", "7"},
      {"run.jobs", "0"},
      {"run.out", "vigil-out"},
  };
  return d;
}

void apply(std::map<std::string, std::string>& entries, const std::string& key, const std::string& value) {
  if (!defaults().contains(key)) throw Error(ErrorCode::InvalidConfig, "unknown setting '" + key + "'");
  entries[key] = trim(value);
}

}  // namespace

bool is_valid_modality(const std::string& name) {
  static const std::vector<std::string> known{"eog",          "eeg-forehead",    "eeg-temporal",   "eeg-posterior",
                                              "fusion-forehead", "fusion-temporal", "fusion-posterior"};
  return std::find(known.begin(), known.end(), name) != known.end();
}

ExperimentConfig config_from_entries(const std::map<std::string, std::string>& given) {
  std::map<std::string, std::string> e = defaults();
  for (const auto& [k, v] : given) apply(e, k, v);

  ExperimentConfig c;
  c.forehead = e.at("input.forehead");
  c.gaze = e.at("input.gaze");
  c.labels = e.at("input.labels");
  c.temporal = e.at("input.temporal");
  c.posterior = e.at("input.posterior");
  c.synthetic_duration_s = to_double("input.synthetic_duration_s", e.at("input.synthetic_duration_s"));
  c.separation = parse_separation_method(e.at("pipeline.separation"));
  c.banding = parse_banding(e.at("pipeline.banding"));
  c.detection_rate_hz = to_double("pipeline.detection_rate_hz", e.at("pipeline.detection_rate_hz"));
  c.eeg_rate_hz = to_double("pipeline.eeg_rate_hz", e.at("pipeline.eeg_rate_hz"));
  c.window_s = to_double("pipeline.window_s", e.at("pipeline.window_s"));
  c.modalities = split_list(e.at("eval.modalities"));
  for (const auto& m : c.modalities) {
    if (!is_valid_modality(m)) throw Error(ErrorCode::InvalidConfig, "unknown modality '" + m + "'");
  }
  c.models.clear();
  for (const auto& m : split_list(e.at("eval.models"))) c.models.push_back(parse_model_kind(m));
  if (c.modalities.empty() || c.models.empty()) throw Error(ErrorCode::InvalidConfig, "nothing to evaluate");

  auto& svr = c.model.svr_grid;
  svr.c = to_pow2("svr.c_exp", e.at("svr.c_exp"));
  svr.g = to_pow2("svr.g_exp", e.at("svr.g_exp"));
  svr.epsilon = to_double("svr.epsilon", e.at("svr.epsilon"));
  svr.folds = static_cast<int>(to_long("svr.folds", e.at("svr.folds")));
  auto& crf = c.model.crf;
  crf.k1.clear();
  for (double k : to_doubles("crf.k1", e.at("crf.k1"))) {
    if (k < 1 || k != std::floor(k)) throw Error(ErrorCode::InvalidConfig, "crf.k1 entries must be positive integers");
    crf.k1.push_back(static_cast<int>(k));
  }
  crf.lambda_alpha = to_doubles("crf.lambda_alpha", e.at("crf.lambda_alpha"));
  crf.lambda_beta = to_doubles("crf.lambda_beta", e.at("crf.lambda_beta"));
  crf.restarts = static_cast<int>(to_long("crf.restarts", e.at("crf.restarts")));
  crf.validation_sessions = static_cast<int>(to_long("crf.validation_sessions", e.at("crf.validation_sessions")));
  crf.max_iterations = static_cast<int>(to_long("crf.max_iterations", e.at("crf.max_iterations")));
  crf.gradient_tolerance = to_double("crf.gradient_tolerance", e.at("crf.gradient_tolerance"));
  crf.strict = to_bool("crf.strict", e.at("crf.strict"));
  c.model.sequence_length = to_long("crf.sequence_length", e.at("crf.sequence_length"));

  const long seed = to_long("run.seed", e.at("run.seed"));
  if (seed < 0) throw Error(ErrorCode::InvalidConfig, "run.seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  crf.seed = c.seed;
  c.jobs = static_cast<int>(to_long("run.jobs", e.at("run.jobs")));
  c.out_dir = e.at("run.out");

  if (!(c.window_s > 0.0) || !(c.detection_rate_hz > 0.0) || !(c.eeg_rate_hz > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "rates and window length must be positive");
  }
  if (svr.epsilon < 0.0 || svr.folds < 2) throw Error(ErrorCode::InvalidConfig, "invalid SVR settings");
  if (crf.restarts < 1 || crf.max_iterations < 1 || crf.validation_sessions < 0 || c.model.sequence_length < 1) {
    throw Error(ErrorCode::InvalidConfig, "invalid CRF settings");
  }
  for (const auto* p : {&c.forehead, &c.gaze, &c.labels, &c.temporal, &c.posterior}) {
    if (!p->empty() && !std::filesystem::exists(*p)) {
      throw Error(ErrorCode::InvalidConfig, "input file '" + p->string() + "' does not exist");
    }
  }
  if (!c.forehead.empty() && c.gaze.empty() == c.labels.empty()) {
    throw Error(ErrorCode::InvalidConfig, "a recorded forehead input needs exactly one of input.gaze and input.labels");
  }
  c.entries = std::move(e);
  return c;
}

ExperimentConfig default_config() { return config_from_entries({}); }

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::map<std::string, std::string> entries;
  if (!path.empty()) {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw Error(ErrorCode::InvalidConfig, e.what());
    }
    for (const auto& [section, body] : tree) {
      if (body.empty()) throw Error(ErrorCode::InvalidConfig, "setting '" + section + "' outside a section");
      for (const auto& [key, value] : body) entries[section + "." + key] = value.data();
    }
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "override '" + o + "' is not key=value");
    entries[trim(o.substr(0, eq))] = o.substr(eq + 1);
  }
  // Relative input paths are resolved against the config file's directory.
  if (!path.empty()) {
    for (const char* key : {"input.forehead", "input.gaze", "input.labels", "input.temporal", "input.posterior"}) {
      auto it = entries.find(key);
      if (it != entries.end() && !trim(it->second).empty()) {
        const std::filesystem::path p = trim(it->second);
        if (p.is_relative() && std::filesystem::exists(path.parent_path() / p)) {
          it->second = (path.parent_path() / p).string();
        }
      }
    }
  }
  return config_from_entries(entries);
}

std::string canonical_text(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [k, v] : config.entries) {
    if (k == "run.jobs" || k == "run.out") continue;  // do not change results
    out += k + " = " + v + "\n";
  }
  return out;
}

std::string config_hash(const ExperimentConfig& config) { return digest::sha256_hex(canonical_text(config)); }

}  // namespace vigil
