#include "doctest.h"
#include "oracles.hpp"

#include "vigil/bundle.hpp"
#include "vigil/error.hpp"

#include "json.hpp"

#include <filesystem>

using namespace vigil;

namespace {

TrainedModel trained(ModelKind kind) {
  std::mt19937_64 rng(181);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix x(42, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  const Eigen::VectorXd y = 0.3 + 0.5 * x.col(0).array() * x.col(1).array();
  ModelOptions o;
  o.svr_grid = SvrGrid::single({2.0, 0.5, 0.01});
  o.crf.lambda_alpha = {1.0};
  o.crf.lambda_beta = {0.1};
  o.crf.k1 = {3};
  o.crf.restarts = 1;
  const std::vector<Eigen::Index> lengths{21, 21};
  return train_model(kind, x, y, lengths, {"f0", "f1", "f2"}, o);
}

}  // namespace

TEST_SUITE("bundle") {
  TEST_CASE("round trip preserves predictions bit for bit") {
    std::mt19937_64 rng(191);
    std::uniform_real_distribution<double> u(-0.2, 1.2);
    Matrix x(15, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
    const std::vector<Eigen::Index> lengths{15};
    const auto path = std::filesystem::temp_directory_path() / "vigil_bundle_test.json";
    for (ModelKind kind : {ModelKind::Svr, ModelKind::Ccrf, ModelKind::Ccnf}) {
      CAPTURE(to_string(kind));
      const auto m = trained(kind);
      save_bundle(path, m, "cfg");
      const auto back = load_bundle(path);
      CHECK(back.kind == kind);
      CHECK(back.feature_names == m.feature_names);
      CHECK(back.manifest_hash == m.manifest_hash);
      CHECK(back.sequence_length == m.sequence_length);
      CHECK(predict_model(back, x, lengths) == predict_model(m, x, lengths));
    }
    std::filesystem::remove(path);
  }

  TEST_CASE("the document carries the declared fields") {
    const auto j = nlohmann::json::parse(bundle_to_json(trained(ModelKind::Ccnf), "abc"));
    for (const char* key : {"format", "model_type", "feature_manifest_hash", "feature_names", "normalization",
                            "hyperparameters", "parameters"})
      CHECK(j.contains(key));
    CHECK(j.at("model_type") == "ccnf");
  }

  TEST_CASE("malformed bundles are parse errors") {
    for (const std::string text : {"{", "{}", R"({"format": 999})"}) {
      try {
        bundle_from_json(text);
        FAIL("expected Parse");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Parse);
      }
    }
    CHECK_THROWS_AS(load_bundle("/nonexistent/vigil.json"), Error);
  }
}
