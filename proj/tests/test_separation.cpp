#include "doctest.h"
#include "oracles.hpp"

#include "vigil/error.hpp"
#include "vigil/separation.hpp"
#include "vigil/synth.hpp"

using namespace vigil;

namespace {

Signal uniform_source(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(-std::sqrt(3.0), std::sqrt(3.0));
  Signal x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = u(rng);
  return x;
}

Signal laplace_source(std::mt19937_64& rng, Eigen::Index n) {
  std::exponential_distribution<double> e(std::sqrt(2.0));
  std::bernoulli_distribution sign(0.5);
  Signal x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = sign(rng) ? e(rng) : -e(rng);
  return x;
}

Signal blink_train(Eigen::Index n, double rate, double every_s) {
  Signal x = Signal::Zero(n);
  for (double t = 1.0; t + 0.3 < static_cast<double>(n) / rate; t += every_s) {
    const auto a = static_cast<Eigen::Index>(t * rate);
    const auto len = static_cast<Eigen::Index>(0.25 * rate);
    for (Eigen::Index i = 0; i <= len && a + i < n; ++i) x[a + i] += 100.0 * synth::blink_pulse(double(i) / double(len));
  }
  return x;
}

// Best |corr| of `source` against any row.
double best_match(const Matrix& components, const Signal& source) {
  double best = 0.0;
  for (Eigen::Index r = 0; r < components.rows(); ++r) {
    const Signal row = components.row(r).transpose();
    best = std::max(best, std::abs(oracle::pearson(oracle::to_vec(row), oracle::to_vec(source))));
  }
  return best;
}

ForeheadQuad quad_of(Signal a, Signal b, Signal c, Signal d, double rate = 200.0) {
  return ForeheadQuad{std::move(a), std::move(b), std::move(c), std::move(d), rate};
}

}  // namespace

TEST_SUITE("separation") {
  TEST_CASE("minus rule is plain subtraction") {
    const Signal ch5 = (Signal(3) << 1, 2, 3).finished();
    const Signal ch6 = (Signal(3) << 0, 1, 1).finished();
    const auto pair = separate_minus(quad_of(Signal::Zero(3), ch5, ch6, ch5));
    CHECK(pair.veo == Signal::Zero(3));
    CHECK(pair.heo == (Signal(3) << 1, 1, 2).finished());
    CHECK(pair.method == SeparationMethod::Minus);
    CHECK_THROWS_AS(separate_minus(quad_of(Signal::Zero(3), ch5, ch6, Signal::Zero(4))), Error);
  }

  TEST_CASE("minus rule recovers the vertical source") {
    std::mt19937_64 rng(4);
    const Eigen::Index n = 6000;
    const Signal sv = blink_train(n, 200, 2.0);
    const Signal sh = oracle::white_noise(rng, n, 20.0);
    const Signal noise = oracle::white_noise(rng, n, 5.0);
    const auto pair = separate_minus(quad_of(Signal::Zero(n), Signal(sv + sh + noise), Signal::Zero(n), Signal(sh + noise)));
    CHECK(similarity(pair.veo, sv) >= 0.9);
  }

  TEST_CASE("fastica with identity mixing returns the sources") {
    std::mt19937_64 rng(7);
    const Eigen::Index n = 20000;
    Matrix x(2, n);
    x.row(0) = uniform_source(rng, n).transpose();
    x.row(1) = laplace_source(rng, n).transpose();
    const auto r = fastica(x, 2, 1);
    CHECK(best_match(r.components, x.row(0).transpose()) >= 0.999);
    CHECK(best_match(r.components, x.row(1).transpose()) >= 0.999);
  }

  TEST_CASE("fastica unmixes a sinusoid and uniform noise") {
    std::mt19937_64 rng(8);
    const Eigen::Index n = 10000;
    const Signal s1 = oracle::sine(n, 200, 3.0);
    const Signal s2 = uniform_source(rng, n);
    Matrix a(2, 2);
    a << 0.8, 0.6, -0.3, 1.1;
    Matrix src(2, n);
    src.row(0) = s1.transpose();
    src.row(1) = s2.transpose();
    const auto r = fastica(a * src, 2, 3);
    CHECK(best_match(r.components, s1) >= 0.95);
    CHECK(best_match(r.components, s2) >= 0.95);

    // Components are uncorrelated.
    const Signal c0 = r.components.row(0).transpose(), c1 = r.components.row(1).transpose();
    CHECK(std::abs(oracle::pearson(oracle::to_vec(c0), oracle::to_vec(c1))) <= 0.05);

    // W^-1 (W X) reproduces the centered input.
    const Matrix centered = (a * src).colwise() - (a * src).rowwise().mean();
    const Matrix back = r.mixing_inverse * (r.unmixing * centered);
    CHECK((back - centered).norm() <= 1e-6 * centered.norm());
  }

  TEST_CASE("fastica is deterministic per seed and rejects rank deficiency") {
    std::mt19937_64 rng(9);
    Matrix x(2, 3000);
    x.row(0) = uniform_source(rng, 3000).transpose();
    x.row(1) = laplace_source(rng, 3000).transpose();
    CHECK(fastica(x, 2, 5).unmixing == fastica(x, 2, 5).unmixing);

    Matrix dup(2, 3000);
    dup.row(0) = x.row(0);
    dup.row(1) = 2.0 * x.row(0);
    try {
      fastica(dup, 2, 5);
      FAIL("expected RankDeficient");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RankDeficient);
    }
    CHECK_THROWS_AS(fastica(Matrix::Zero(2, 5), 2, 1), Error);
  }

  TEST_CASE("ica picks the blink component from two noisy copies") {
    std::mt19937_64 rng(10);
    const Eigen::Index n = 8000;
    const Signal blinks = blink_train(n, 200, 1.7);
    const Signal ch4 = blinks + oracle::white_noise(rng, n, 10.0);
    const Signal ch7 = 0.7 * blinks + oracle::white_noise(rng, n, 10.0);
    const Signal ch5 = oracle::white_noise(rng, n, 10.0);
    const Signal ch6 = oracle::white_noise(rng, n, 10.0);
    // Minus template ch5 - ch7 is anti-correlated with the blinks; the
    // returned component follows the template's sign.
    const auto pair = separate_ica(quad_of(ch4, ch5, ch6, ch7), 7);
    CHECK(std::abs(similarity(pair.veo, blinks)) >= 0.9);
    const Signal templ = ch5 - ch7;
    CHECK(similarity(pair.veo, templ) > 0.0);
  }

  TEST_CASE("component alignment ties go to the lowest index") {
    std::mt19937_64 rng(12);
    const Signal ref = oracle::white_noise(rng, 500);
    const Signal c = ref + oracle::white_noise(rng, 500, 0.5);
    Matrix comps(2, 500);
    comps.row(0) = c.transpose();
    comps.row(1) = c.transpose();
    CHECK(align_component(comps, ref).index == 0);
  }

  TEST_CASE("negating the ICA input pair leaves the aligned component unchanged") {
    std::mt19937_64 rng(13);
    const Eigen::Index n = 6000;
    const Signal blinks = blink_train(n, 200, 2.3);
    Matrix x(2, n);
    x.row(0) = (blinks + oracle::white_noise(rng, n, 8.0)).transpose();
    x.row(1) = (0.5 * blinks + oracle::white_noise(rng, n, 8.0)).transpose();
    const Signal templ = -blinks + oracle::white_noise(rng, n, 3.0);
    const auto a = align_component(fastica(x, 2, 4).components, templ);
    const auto b = align_component(fastica(Matrix(-x), 2, 4).components, templ);
    CHECK(a.index == b.index);
    CHECK((a.signal - b.signal).norm() <= 1e-6 * a.signal.norm());
  }

  TEST_CASE("ica-minus composition") {
    synth::SynthConfig c;
    c.duration_s = 240;
    c.scalp_sites = false;
    const auto s = synth::generate(c);
    const auto im = combine_ica_minus(s.quad, 7);
    const auto minus = separate_minus(s.quad);
    CHECK(im.method == SeparationMethod::IcaMinus);
    CHECK(im.heo == minus.heo);
    // Impulsive vertical events: ICA VEO tracks the vertical source at least as well.
    CHECK(similarity(im.veo, s.veo_source) >= similarity(minus.veo, s.veo_source));
  }

  TEST_CASE("similarity") {
    std::mt19937_64 rng(14);
    const Signal x = oracle::white_noise(rng, 10000);
    CHECK(similarity(x, x) == doctest::Approx(1.0));
    CHECK(similarity(x, Signal(-x)) == doctest::Approx(-1.0));
    std::vector<double> v = oracle::to_vec(x);
    std::shuffle(v.begin(), v.end(), rng);
    CHECK(std::abs(similarity(x, Eigen::Map<Signal>(v.data(), 10000))) <= 0.05);
    CHECK_THROWS_AS(similarity(x, Signal::Constant(10000, 1.0)), Error);
  }
}
