#include "doctest.h"
#include "oracles.hpp"

#include "vigil/crf.hpp"
#include "vigil/error.hpp"

using namespace vigil;

namespace {

Matrix uniform(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

SequenceBatch random_batch(std::mt19937_64& rng, int sequences, Eigen::Index n, Eigen::Index d) {
  SequenceBatch b;
  for (int s = 0; s < sequences; ++s) {
    Sequence q;
    q.x = uniform(rng, n, d);
    q.y = uniform(rng, n, 1).col(0);
    q.offset = s * n;
    b.push_back(std::move(q));
  }
  return b;
}

// Psi(y) written out edge by edge.
double psi(const Eigen::VectorXd& alpha, double beta, const Matrix& h, const Eigen::VectorXd& y) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    for (Eigen::Index k = 0; k < alpha.size(); ++k) v -= alpha[k] * (y[i] - h(i, k)) * (y[i] - h(i, k));
  for (Eigen::Index i = 0; i < y.size(); ++i)
    for (Eigen::Index j = 0; j < y.size(); ++j)
      if (std::abs(i - j) == 1) v -= 0.5 * beta * (y[i] - y[j]) * (y[i] - y[j]);
  return v;
}

template <typename F>
void check_gradient(F objective, std::vector<double> p) {
  std::vector<double> g(p.size());
  objective(p, g);
  const double h = 1e-5;
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto up = p, down = p;
    up[i] += h;
    down[i] -= h;
    const double fd = (objective(up, {}) - objective(down, {})) / (2 * h);
    CHECK(std::abs(fd - g[i]) <= 1e-4 * std::max(1.0, std::abs(fd)));
  }
}

}  // namespace

TEST_SUITE("crf") {
  TEST_CASE("chain matrices") {
    const Matrix s = neighbor_matrix(4);
    CHECK(s(0, 1) == 1.0);
    CHECK(s(1, 0) == 1.0);
    CHECK(s(0, 2) == 0.0);
    CHECK(s(2, 2) == 0.0);
    const Matrix l = chain_laplacian(4);
    CHECK(l(0, 0) == 1.0);
    CHECK(l(1, 1) == 2.0);
    CHECK(l.rowwise().sum().cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("ccrf gradient matches central differences") {
    std::mt19937_64 rng(131);
    const auto batch = random_batch(rng, 5, 7, 2);
    const CrfRegularization reg{0.5, 0.2, 0.0};
    check_gradient([&](const std::vector<double>& p, std::span<double> g) { return ccrf_objective(batch, p, reg, g); },
                   {0.3, -0.4, 0.1});
  }

  TEST_CASE("ccnf gradient matches central differences") {
    std::mt19937_64 rng(137);
    const auto batch = random_batch(rng, 4, 7, 3);
    const int k1 = 3;
    const CrfRegularization reg{1.0, 0.1, 0.05};
    std::vector<double> p(k1 + 1 + k1 * 4);
    std::normal_distribution<double> n(0.0, 0.7);
    for (auto& v : p) v = n(rng);
    check_gradient(
        [&](const std::vector<double>& q, std::span<double> g) { return ccnf_objective(batch, q, k1, reg, g); }, p);
  }

  TEST_CASE("the mean maximises Psi on a three-node chain") {
    Eigen::VectorXd alpha(2);
    double beta = 0.0;
    Matrix h(3, 2);
    SUBCASE("two inputs") {
      alpha << 1.5, 0.7;
      beta = 0.9;
      h << 0.1, 0.4, 0.8, 0.6, 0.3, 0.9;
    }
    SUBCASE("strong smoothing") {
      alpha << 1.0, 0.0;
      beta = 10.0;
      h << 0.1, 0.0, 0.9, 0.0, 0.4, 0.0;
    }
    const Eigen::VectorXd mu = crf_mean(alpha, beta, h);

    // Coarse grid over the unit cube, then a fine grid around the winner.
    Eigen::VectorXd best(3);
    double best_v = -1e300;
    const auto scan = [&](Eigen::VectorXd centre, double half, double step) {
      const int m = static_cast<int>(std::lround(half / step));
      Eigen::VectorXd y(3);
      for (int a = -m; a <= m; ++a)
        for (int b = -m; b <= m; ++b)
          for (int c = -m; c <= m; ++c) {
            y << centre[0] + a * step, centre[1] + b * step, centre[2] + c * step;
            const double v = psi(alpha, beta, h, y);
            if (v > best_v) best_v = v, best = y;
          }
    };
    scan(Eigen::VectorXd::Constant(3, 0.5), 0.5, 0.01);
    scan(Eigen::VectorXd(best), 0.02, 1e-3);
    CHECK((best - mu).cwiseAbs().maxCoeff() <= 2e-3);
  }

  TEST_CASE("log-likelihood against a two-node closed form") {
    const Eigen::VectorXd alpha = (Eigen::VectorXd(1) << 2.0).finished();
    const double beta = 0.5;
    Matrix h(2, 1);
    h << 0.2, 0.7;
    const Eigen::VectorXd y = (Eigen::VectorXd(2) << 0.3, 0.5).finished();
    // Precision 2M = [[2(a+b), -2b], [-2b, 2(a+b)]].
    const double p11 = 2 * (2.0 + beta), p12 = -2 * beta;
    const double det = p11 * p11 - p12 * p12;
    // Mean solves M mu = a h.
    const double m11 = 2.0 + beta, m12 = -beta, mdet = m11 * m11 - m12 * m12;
    const double mu0 = (m11 * 2.0 * 0.2 - m12 * 2.0 * 0.7) / mdet;
    const double mu1 = (m11 * 2.0 * 0.7 - m12 * 2.0 * 0.2) / mdet;
    const double e0 = y[0] - mu0, e1 = y[1] - mu1;
    const double quad = p11 * e0 * e0 + 2 * p12 * e0 * e1 + p11 * e1 * e1;
    const double expected = -std::log(2 * std::numbers::pi) + 0.5 * std::log(det) - 0.5 * quad;
    CHECK(crf_log_likelihood(alpha, beta, h, y) == doctest::Approx(expected).epsilon(1e-12));
  }

  TEST_CASE("beta limits") {
    std::mt19937_64 rng(139);
    const Matrix h = uniform(rng, 7, 3);
    const Eigen::VectorXd alpha = (Eigen::VectorXd(3) << 1.0, 2.0, 3.0).finished();
    // beta = 0: per-node weighted average of the inputs.
    const Eigen::VectorXd independent = (h * alpha) / alpha.sum();
    CHECK((crf_mean(alpha, 0.0, h) - independent).cwiseAbs().maxCoeff() <= 1e-12);
    // Large beta: every node takes the overall weighted average.
    const Eigen::VectorXd flat = crf_mean(alpha, 1e6, h);
    CHECK((flat.array() - independent.mean()).abs().maxCoeff() <= 1e-3);
    // Constant inputs are a fixed point, identical rows give identical outputs.
    CHECK((crf_mean(alpha, 5.0, Matrix::Constant(7, 3, 0.2)).array() - 0.2).abs().maxCoeff() <= 1e-12);
    Matrix twin = h;
    twin.row(4) = twin.row(2);
    const Eigen::VectorXd t = crf_mean(alpha, 0.0, twin);
    CHECK(t[4] == t[2]);
    // A single node reproduces its input.
    const Matrix one = (Matrix(1, 1) << 0.37).finished();
    CHECK(crf_mean((Eigen::VectorXd(1) << 4.2).finished(), 3.0, one)[0] == doctest::Approx(0.37));
  }

  TEST_CASE("precision is symmetric positive definite") {
    std::mt19937_64 rng(149);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd alpha = uniform(rng, 4, 1, 0.01, 5.0).col(0);
      const double beta = uniform(rng, 1, 1, 0.0, 10.0)(0, 0);
      const Matrix p = crf_precision(alpha, beta, 7);
      CHECK((p - p.transpose()).norm() == 0.0);
      Eigen::SelfAdjointEigenSolver<Matrix> es(p);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
  }

  TEST_CASE("larger beta never roughens the mean") {
    std::mt19937_64 rng(151);
    const Matrix h = uniform(rng, 7, 2);
    const Eigen::VectorXd alpha = (Eigen::VectorXd(2) << 1.0, 0.5).finished();
    const Matrix l = chain_laplacian(7);
    double last = 1e300;
    for (double beta : {0.0, 0.01, 0.1, 0.5, 1.0, 5.0, 50.0}) {
      const Eigen::VectorXd mu = crf_mean(alpha, beta, h);
      const double rough = mu.dot(l * mu);
      CHECK(rough <= last + 1e-15);
      last = rough;
    }
  }

  TEST_CASE("ccrf on single-node sequences learns the identity") {
    std::mt19937_64 rng(159);
    SequenceBatch b;
    for (int i = 0; i < 40; ++i) {
      Sequence q;
      q.x = uniform(rng, 1, 1);
      q.y = q.x.col(0);
      b.push_back(std::move(q));
    }
    const auto m = ccrf_fit(b, {1e-3, 1e-3, 0.0}, {});
    double mse = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Matrix x = uniform(rng, 1, 1);
      const double e = ccrf_infer(m, x)[0] - x(0, 0);
      mse += e * e / 20;
    }
    CHECK(mse <= 1e-8);
  }

  TEST_CASE("zero neuron weights give 0.5 everywhere") {
    std::mt19937_64 rng(157);
    const Matrix x = uniform(rng, 7, 5);
    const Matrix h = ccnf_vertex_inputs(Matrix::Zero(3, 6), x);
    CHECK((h.array() - 0.5).abs().maxCoeff() == 0.0);
    CcnfModel m;
    m.alpha = Eigen::VectorXd::Ones(3);
    m.beta = 0.4;
    m.theta = Matrix::Zero(3, 6);
    CHECK((ccnf_infer(m, x).array() - 0.5).abs().maxCoeff() <= 1e-12);
    CHECK_THROWS_AS(ccnf_vertex_inputs(Matrix::Zero(3, 4), x), Error);
  }

  TEST_CASE("near-zero beta objective has the independent-node closed form") {
    std::mt19937_64 rng(163);
    const auto batch = random_batch(rng, 3, 7, 1);
    const double a = 1.7;
    const std::vector<double> p{std::log(a), std::log(1e-12)};
    double expected = 0.0;
    for (const auto& s : batch)
      for (Eigen::Index i = 0; i < s.y.size(); ++i)
        expected += a * (s.y[i] - s.x(i, 0)) * (s.y[i] - s.x(i, 0)) - 0.5 * std::log(a / std::numbers::pi);
    CHECK(ccrf_objective(batch, p, {0.0, 0.0, 0.0}, {}) == doctest::Approx(expected).epsilon(1e-9));
  }

  TEST_CASE("ccnf recovers a model it generated") {
    std::mt19937_64 rng(167);
    const int k1 = 3;
    const Eigen::Index d = 3;
    Matrix theta = uniform(rng, k1, d + 1, -4.0, 4.0);
    const Eigen::VectorXd alpha = Eigen::VectorXd::Constant(k1, 15.0);
    const double beta = 2.0;
    std::normal_distribution<double> normal;
    const auto draw = [&](int sequences) {
      SequenceBatch b;
      for (int s = 0; s < sequences; ++s) {
        Sequence q;
        q.x = uniform(rng, 7, d);
        const Eigen::VectorXd mu = crf_mean(alpha, beta, ccnf_vertex_inputs(theta, q.x));
        // Smoothed neuron outputs plus light label noise.
        q.y = mu;
        for (auto& v : q.y) v += 0.02 * normal(rng);
        b.push_back(std::move(q));
      }
      return b;
    };
    const auto train = draw(200), test = draw(50);
    CrfTrainOptions opt;
    opt.seed = 5;
    const auto m = ccnf_fit(train, k1, {1e-3, 1e-3, 1e-3}, opt);
    std::vector<double> y, p;
    for (const auto& s : test) {
      const Eigen::VectorXd pred = ccnf_infer(m, s.x);
      for (Eigen::Index i = 0; i < 7; ++i) y.push_back(s.y[i]), p.push_back(pred[i]);
    }
    CHECK(oracle::pearson(y, p) >= 0.9);
  }

  TEST_CASE("training picks from the grid and is deterministic") {
    std::mt19937_64 rng(173);
    std::vector<SequenceBatch> sessions;
    for (int s = 0; s < 3; ++s) {
      auto b = random_batch(rng, 6, 7, 2);
      for (auto& q : b) q.y = 0.5 * q.x.col(0) + 0.5 * q.x.col(1);
      sessions.push_back(std::move(b));
    }
    CrfTrainOptions opt;
    opt.lambda_alpha = {1.0, 10.0};
    opt.lambda_beta = {0.1, 1.0};
    opt.k1 = {2};
    opt.restarts = 2;
    opt.seed = 3;
    const auto a = ccnf_train(sessions, opt);
    const auto b = ccnf_train(sessions, opt);
    CHECK(a.theta == b.theta);
    CHECK(a.k1() == 2);
    CHECK((a.reg.alpha == 1.0 || a.reg.alpha == 10.0));
    CHECK((a.reg.beta == 0.1 || a.reg.beta == 1.0));

    std::vector<SequenceBatch> ccrf_sessions;
    for (const auto& s : sessions) {
      SequenceBatch c = s;
      for (auto& q : c) q.x = q.x.col(0);
      ccrf_sessions.push_back(std::move(c));
    }
    const auto c = ccrf_train(ccrf_sessions, opt);
    CHECK(c.alpha.size() == 1);
    CHECK(c.alpha[0] > 0.0);
    CHECK(c.beta > 0.0);
  }
}
