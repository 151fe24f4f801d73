#include "doctest.h"
#include "oracles.hpp"

#include "vigil/error.hpp"
#include "vigil/models.hpp"
#include "vigil/sequences.hpp"

using namespace vigil;

namespace {

struct Toy {
  Matrix x;
  Eigen::VectorXd y;
  std::vector<Eigen::Index> lengths;
};

// Slowly varying target observed through noisy features.
Toy toy(std::uint64_t seed, std::vector<Eigen::Index> lengths) {
  std::mt19937_64 rng(seed);
  Eigen::Index n = 0;
  for (auto l : lengths) n += l;
  Toy t{Matrix(n, 4), Eigen::VectorXd(n), lengths};
  std::normal_distribution<double> noise(0.0, 0.05);
  double phase = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    phase += 0.15;
    t.y[i] = 0.5 + 0.4 * std::sin(phase);
    for (Eigen::Index c = 0; c < 4; ++c) t.x(i, c) = (c + 1.0) * t.y[i] + noise(rng) + 3.0 * c;
  }
  return t;
}

ModelOptions small_options() {
  ModelOptions o;
  o.svr_grid.c = {1.0, 8.0};
  o.svr_grid.g = {0.25, 1.0};
  o.crf.lambda_alpha = {1.0};
  o.crf.lambda_beta = {0.1, 1.0};
  o.crf.k1 = {4};
  o.crf.restarts = 1;
  return o;
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("chunking 177 rows into sequences of 7") {
    const Matrix x = Matrix::Zero(177, 2);
    const Eigen::VectorXd y = Eigen::VectorXd::Zero(177);
    const std::vector<Eigen::Index> one{177};
    const auto b = chunk_sequences(x, y, one);
    REQUIRE(b.size() == 26);
    for (std::size_t i = 0; i < 25; ++i) CHECK(b[i].x.rows() == 7);
    CHECK(b[25].x.rows() == 2);
    CHECK(b[25].offset == 175);
  }

  TEST_CASE("chunks never cross a session boundary") {
    Matrix x(30, 1);
    for (Eigen::Index i = 0; i < 30; ++i) x(i, 0) = static_cast<double>(i);
    const Eigen::VectorXd y = x.col(0);
    const std::vector<Eigen::Index> lengths{10, 12, 8};
    const auto b = chunk_sequences(x, y, lengths);
    const std::vector<Eigen::Index> bounds{0, 10, 22, 30};
    for (const auto& s : b) {
      const Eigen::Index first = s.offset, last = s.offset + s.x.rows() - 1;
      const auto session = std::upper_bound(bounds.begin(), bounds.end(), first) - bounds.begin() - 1;
      CHECK(last < bounds[static_cast<std::size_t>(session) + 1]);
      CHECK(s.x(0, 0) == static_cast<double>(first));
    }
    CHECK(b.size() == 6);  // 7+3, 7+5, 7+1

    std::vector<Eigen::VectorXd> preds;
    for (const auto& s : b) preds.push_back(s.y);
    CHECK(unchunk(b, preds, 30) == y);

    const std::vector<Eigen::Index> short_session{10, 5, 15};
    try {
      chunk_sequences(x, y, short_session);
      FAIL("expected SessionTooShort");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SessionTooShort);
    }
  }

  TEST_CASE("each model kind fits the toy target") {
    const auto train = toy(1, {60, 60, 60});
    const auto test = toy(2, {70});
    std::vector<std::string> names{"a", "b", "c", "d"};
    for (ModelKind kind : {ModelKind::Svr, ModelKind::Ccrf, ModelKind::Ccnf}) {
      CAPTURE(to_string(kind));
      const auto m = train_model(kind, train.x, train.y, train.lengths, names, small_options());
      CHECK(m.kind == kind);
      CHECK(m.feature_names == names);
      const Eigen::VectorXd p = clip_unit(predict_model(m, test.x, test.lengths));
      CHECK(p.minCoeff() >= 0.0);
      CHECK(p.maxCoeff() <= 1.0);
      CHECK(oracle::pearson(oracle::to_vec(p), oracle::to_vec(test.y)) >= 0.9);
    }
  }

  TEST_CASE("training is reproducible and rejects mismatched lengths") {
    const auto train = toy(3, {50, 50});
    const std::vector<std::string> names{"a", "b", "c", "d"};
    const auto a = train_model(ModelKind::Ccnf, train.x, train.y, train.lengths, names, small_options());
    const auto b = train_model(ModelKind::Ccnf, train.x, train.y, train.lengths, names, small_options());
    CHECK(predict_model(a, train.x, train.lengths) == predict_model(b, train.x, train.lengths));
    const std::vector<Eigen::Index> wrong{50, 40};
    CHECK_THROWS_AS(train_model(ModelKind::Svr, train.x, train.y, wrong, names, small_options()), Error);
    CHECK_THROWS_AS(parse_model_kind("mlp"), Error);
  }

  TEST_CASE("clip_unit") {
    const Eigen::VectorXd v = (Eigen::VectorXd(4) << -0.2, 0.0, 0.6, 1.3).finished();
    CHECK(clip_unit(v) == (Eigen::VectorXd(4) << 0.0, 0.0, 0.6, 1.0).finished());
  }
}
