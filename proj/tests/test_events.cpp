#include "doctest.h"
#include "oracles.hpp"

#include "vigil/error.hpp"
#include "vigil/events.hpp"
#include "vigil/synth.hpp"

#include <filesystem>

using namespace vigil;

namespace {

PeakCode code(PeakSymbol s, Eigen::Index t, double mag, Eigen::Index half = 5) {
  return PeakCode{s, t, mag, t - half, t + half};
}

// Raised-cosine bump from a to b on a flat line.
Signal bump(Eigen::Index n, Eigen::Index a, Eigen::Index b, double amp) {
  Signal x = Signal::Zero(n);
  for (Eigen::Index i = a; i <= b; ++i) {
    const double u = double(i - a) / double(b - a);
    x[i] = amp * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * u));
  }
  return x;
}

Signal ramp(Eigen::Index n, Eigen::Index a, Eigen::Index b, double amp) {
  Signal x = Signal::Zero(n);
  for (Eigen::Index i = a; i < n; ++i) {
    const double u = std::min(1.0, double(i - a) / double(b - a));
    x[i] = amp * 0.5 * (1.0 - std::cos(std::numbers::pi * u));
  }
  return x;
}

EogPair suite_at_detection_rate(std::uint64_t seed = 1) {
  synth::EyeSuiteConfig c;
  c.seed = seed;
  const auto suite = synth::generate_eye_suite(c);
  return to_detection_rate(suite.eog);
}

}  // namespace

TEST_SUITE("events") {
  TEST_CASE("mother wavelet value and kernel moments") {
    CHECK(mexican_hat(0.0, 1.0) == doctest::Approx(0.8673).epsilon(1e-4));
    CHECK(mexican_hat(1.0, 1.0) == doctest::Approx(0.0).scale(1.0));
    const Signal k = mexican_hat_kernel(8.0, 1.0);
    CHECK(std::abs(k.sum()) <= 1e-12);
    CHECK(k.norm() == doctest::Approx(1.0));
    CHECK(k.size() % 2 == 1);
  }

  TEST_CASE("cwt of a constant is near zero") {
    const Signal c = Signal::Constant(2000, 42.0);
    const Signal w = cwt_mexican_hat(c, {});
    // Interior only; the edges see the zero padding.
    CHECK(w.segment(200, 1600).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK_THROWS_AS(cwt_mexican_hat(Signal::Zero(50), {}), Error);
  }

  TEST_CASE("auto thresholds on unit normal coefficients") {
    std::mt19937_64 rng(31);
    const Signal z = oracle::white_noise(rng, 200000);
    const auto t = auto_thresholds(z);
    CHECK(t.low == doctest::Approx(3.0).epsilon(0.2 / 3.0));
    CHECK(t.high == doctest::Approx(2.0 * t.low));

    const auto t5 = auto_thresholds(Signal(5.0 * z));
    CHECK(t5.low == doctest::Approx(5.0 * t.low).epsilon(1e-12));

    try {
      auto_thresholds(Signal::Zero(100));
      FAIL("expected DegenerateSignal");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateSignal);
    }
  }

  TEST_CASE("manual thresholds are validated") {
    WaveletConfig cfg;
    cfg.auto_thresholds = false;
    cfg.theta_l = 2.0;
    cfg.theta_h = 1.0;
    CHECK_THROWS_AS(resolve_thresholds(Signal::Ones(10), cfg), Error);
    cfg.theta_h = 4.0;
    const auto t = resolve_thresholds(Signal::Ones(10), cfg);
    CHECK(t.high == 4.0);
    CHECK(t.low == 2.0);
  }

  TEST_CASE("encode keeps peaks above theta_h with their extents") {
    Signal c = Signal::Zero(30);
    // Positive excursion peaking at 5 (above high), negative at 15 (above high),
    // positive at 24 reaching only the low threshold.
    c.segment(3, 5) << 1.5, 3.0, 5.0, 3.0, 1.0;
    c.segment(13, 5) << -1.2, -4.0, -6.0, -2.5, -0.5;
    c.segment(22, 4) << 1.1, 2.0, 3.5, 1.1;
    const auto codes = encode_peaks(c, {4.0, 1.0});
    REQUIRE(codes.size() == 2);
    CHECK(codes[0].symbol == PeakSymbol::Pos);
    CHECK(codes[0].time_idx == 5);
    CHECK(codes[0].magnitude == 5.0);
    CHECK(codes[0].extent_start == 3);
    CHECK(codes[0].extent_end == 7);
    CHECK(codes[1].symbol == PeakSymbol::Neg);
    CHECK(codes[1].time_idx == 15);
    CHECK(codes[1].magnitude == 6.0);
    CHECK(codes[1].extent_start == 13);
    CHECK(codes[1].extent_end == 16);
  }

  TEST_CASE("blink rule instances") {
    const double rate = 125.0;
    const Signal x = bump(1000, 100, 140, 120.0);
    const auto run = [&](std::vector<PeakCode> codes) {
      return detect_blinks(DetectionInput{codes, &x, rate, 5.0, 8.0});
    };

    const auto one = run({code(PeakSymbol::Neg, 100, 10), code(PeakSymbol::Pos, 120, 20), code(PeakSymbol::Neg, 140, 10)});
    REQUIRE(one.size() == 1);
    CHECK(one[0].start_idx == 100);
    CHECK(one[0].peak_idx == 120);
    CHECK(one[0].end_idx == 140);
    CHECK(one[0].amplitude == doctest::Approx(120.0));
    CHECK(one[0].duration_s == doctest::Approx(40.0 / rate));

    // Outer magnitudes out of balance.
    CHECK(run({code(PeakSymbol::Neg, 100, 10), code(PeakSymbol::Pos, 120, 20), code(PeakSymbol::Neg, 140, 40)}).empty());
    // Outer peaks too far apart (0.56 s).
    CHECK(run({code(PeakSymbol::Neg, 100, 10), code(PeakSymbol::Pos, 140, 20), code(PeakSymbol::Neg, 170, 10)}).empty());
    // Wrong symbol order.
    CHECK(run({code(PeakSymbol::Pos, 100, 10), code(PeakSymbol::Neg, 120, 20), code(PeakSymbol::Pos, 140, 10)}).empty());
    // Unordered codes are an error.
    CHECK_THROWS_AS(run({code(PeakSymbol::Neg, 120, 10), code(PeakSymbol::Pos, 100, 20)}), Error);
  }

  TEST_CASE("saccade rule instances") {
    const double rate = 125.0;
    const Signal x = ramp(1000, 200, 206, 80.0);
    const auto run = [&](std::vector<PeakCode> codes) {
      return detect_saccades(DetectionInput{codes, &x, rate, 5.0, 8.0});
    };
    const auto one = run({code(PeakSymbol::Neg, 198, 15), code(PeakSymbol::Pos, 208, 15)});
    REQUIRE(one.size() == 1);
    CHECK(one[0].kind == EyeEventKind::Saccade);
    CHECK(one[0].start_idx == 198);
    CHECK(one[0].end_idx == 208);
    CHECK(one[0].amplitude == doctest::Approx(80.0));

    // Same symbol twice.
    CHECK(run({code(PeakSymbol::Neg, 198, 15), code(PeakSymbol::Neg, 208, 15)}).empty());
    // Peaks 0.4 s apart.
    CHECK(run({code(PeakSymbol::Neg, 198, 15), code(PeakSymbol::Pos, 248, 15)}).empty());
  }

  TEST_CASE("eye suite detection counts") {
    synth::EyeSuiteConfig c;
    const auto suite = synth::generate_eye_suite(c);
    REQUIRE(suite.truth.size() == 80);
    const auto eog = to_detection_rate(suite.eog);
    const auto timed = to_timed(detect_eye_events(eog), eog.sample_rate_hz);
    const auto b = synth::match_events(timed, suite.truth, EyeEventKind::Blink);
    const auto s = synth::match_events(timed, suite.truth, EyeEventKind::Saccade);
    CHECK(b.true_positives >= 45);
    CHECK(s.true_positives >= 27);
    CHECK(b.precision() >= 0.9);
    CHECK(s.precision() >= 0.9);
  }

  TEST_CASE("detection is invariant to amplitude scaling") {
    const auto eog = suite_at_detection_rate(2);
    EogPair big = eog;
    big.veo *= 10.0;
    big.heo *= 10.0;
    const auto a = detect_eye_events(eog);
    const auto b = detect_eye_events(big);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].kind == b[i].kind);
      CHECK(a[i].start_idx == b[i].start_idx);
      CHECK(a[i].end_idx == b[i].end_idx);
      CHECK(b[i].amplitude == doctest::Approx(10.0 * a[i].amplitude));
    }
  }

  TEST_CASE("detection commutes with a time shift under fixed thresholds") {
    const auto eog = suite_at_detection_rate(3);
    const Signal vc = cwt_mexican_hat(eog.veo, {});
    const Signal hc = cwt_mexican_hat(eog.heo, {});
    // One threshold pair for both channels keeps the comparison exact.
    WaveletConfig cfg;
    cfg.auto_thresholds = false;
    cfg.theta_l = std::min(auto_thresholds(vc).low, auto_thresholds(hc).low);
    cfg.theta_h = 2.0 * cfg.theta_l;

    const Eigen::Index shift = 1000;
    EogPair cut = eog;
    cut.veo = eog.veo.tail(eog.veo.size() - shift);
    cut.heo = eog.heo.tail(eog.heo.size() - shift);
    const auto full = detect_eye_events(eog, cfg);
    const auto part = detect_eye_events(cut, cfg);

    const Eigen::Index margin = 200;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> a, b;
    for (const auto& e : full) {
      if (e.start_idx >= shift + margin) a.emplace_back(e.start_idx - shift, e.end_idx - shift);
    }
    for (const auto& e : part) {
      if (e.start_idx >= margin) b.emplace_back(e.start_idx, e.end_idx);
    }
    CHECK(!a.empty());
    CHECK(a == b);
  }

  TEST_CASE("merged events do not overlap and are ordered") {
    const auto eog = suite_at_detection_rate(4);
    const auto events = detect_eye_events(eog);
    for (std::size_t i = 1; i < events.size(); ++i) {
      CHECK(events[i - 1].start_idx <= events[i].start_idx);
      if (events[i - 1].kind != events[i].kind) CHECK(events[i - 1].end_idx < events[i].start_idx);
    }
  }

  TEST_CASE("events jsonl round trip skips the meta line") {
    const std::vector<TimedEyeEvent> ev{{EyeEventKind::Blink, 1.0, 1.1, 1.25, 130.0, 0.25},
                                        {EyeEventKind::Saccade, 3.5, 3.52, 3.55, 60.0, 0.05}};
    const auto path = std::filesystem::temp_directory_path() / "vigil_events_test.jsonl";
    write_events_jsonl(path, ev, {{"vigil", "test"}});
    const auto back = read_events_jsonl(path);
    REQUIRE(back.size() == 2);
    CHECK(back[1].kind == EyeEventKind::Saccade);
    CHECK(back[0].end_s == 1.25);
    CHECK(back[1].amplitude_uv == 60.0);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(parse_eye_event_kind("wink"), Error);
  }
}
