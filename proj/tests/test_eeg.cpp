#include "doctest.h"
#include "oracles.hpp"

#include "vigil/dsp.hpp"
#include "vigil/eeg.hpp"
#include "vigil/error.hpp"
#include "vigil/synth.hpp"

using namespace vigil;

namespace {

// Hand-built forehead quad: blink train (V), gaze steps (H), two
// independent alpha-band processes and a little sensor noise.
struct HandQuad {
  ForeheadQuad quad;
  Signal v, h;
  Matrix x;    // X = [ch4; ch5; -ch6; ch7]
  Matrix eeg;  // non-EOG part of each row of X
};

HandQuad hand_quad(std::uint64_t seed, Eigen::Index n = 24000, double rate = 200.0) {
  std::mt19937_64 rng(seed);
  HandQuad q;
  q.v = Signal::Zero(n);
  q.h = Signal::Zero(n);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  for (double t = 0.5; t + 0.5 < n / rate; t += 2.0 + jitter(rng)) {
    const auto a = static_cast<Eigen::Index>(t * rate);
    const auto len = static_cast<Eigen::Index>(0.25 * rate);
    for (Eigen::Index i = 0; i <= len; ++i) q.v[a + i] += 120.0 * synth::blink_pulse(double(i) / double(len));
  }
  double level = 0.0;
  for (double t = 1.3; t + 0.5 < n / rate; t += 0.4 + 0.6 * jitter(rng)) {
    const double next = (jitter(rng) - 0.5) * 150.0;
    const auto a = static_cast<Eigen::Index>(t * rate);
    const auto len = static_cast<Eigen::Index>(0.05 * rate);
    for (Eigen::Index i = a; i < n; ++i) q.h[i] = level + (next - level) * synth::step_ramp(std::min(1.0, double(i - a) / double(len)));
    level = next;
  }
  const Signal a1 = dsp::bandpass(oracle::white_noise(rng, n, 20.0), rate, {8, 13});
  const Signal a2 = dsp::bandpass(oracle::white_noise(rng, n, 20.0), rate, {8, 13});
  const synth::EogMixing m;
  const double wv[4] = {m.v4, m.v5, -m.v6, m.v7};
  const double wh[4] = {m.h4, m.h5, -m.h6, m.h7};
  const double w1[4] = {1.0, 0.8, -0.6, 0.3}, w2[4] = {0.2, -0.5, 0.7, 1.0};
  q.eeg.resize(4, n);
  q.x.resize(4, n);
  for (int r = 0; r < 4; ++r) {
    q.eeg.row(r) = (w1[r] * a1 + w2[r] * a2 + oracle::white_noise(rng, n, 0.1)).transpose();
    q.x.row(r) = wv[r] * q.v.transpose() + wh[r] * q.h.transpose() + q.eeg.row(r);
  }
  q.quad = ForeheadQuad{q.x.row(0).transpose(), q.x.row(1).transpose(), Signal(-q.x.row(2).transpose()),
                        q.x.row(3).transpose(), rate};
  return q;
}

double alpha_variance(const Signal& x, double rate) {
  return dsp::band_variance(oracle::single(x, rate), {8, 14})[0];
}

double low_variance(const Signal& x, double rate) {
  return dsp::band_variance(oracle::single(x, rate), {0.5, 4})[0];
}

}  // namespace

TEST_SUITE("eeg") {
  TEST_CASE("differential entropy closed forms") {
    CHECK(differential_entropy(1.0) == doctest::Approx(1.4189385).epsilon(1e-6));
    CHECK(differential_entropy(1.0 / (2.0 * std::numbers::pi * std::numbers::e)) == doctest::Approx(0.0).scale(1.0));
    CHECK(differential_entropy(2.0 * 3.7) - differential_entropy(3.7) == doctest::Approx(0.5 * std::log(2.0)));
    CHECK_THROWS_AS(differential_entropy(0.0), Error);
    CHECK_THROWS_AS(differential_entropy(-1.0), Error);
    for (double v = 1e-6; v < 1e6; v *= 3.7) CHECK(differential_entropy(v * 1.001) > differential_entropy(v));
  }

  TEST_CASE("bin layouts") {
    const auto& five = five_bands();
    REQUIRE(five.size() == 5);
    CHECK(five.front().low_hz == 1.0);
    CHECK(five.back().high_hz == 50.0);
    const auto& bins = two_hz_bins();
    REQUIRE(bins.size() == 25);
    CHECK(bins[0].low_hz == 1.0);
    CHECK(bins[0].high_hz == 2.0);
    for (std::size_t i = 1; i < bins.size(); ++i) {
      CHECK(bins[i].low_hz == bins[i - 1].high_hz);
      CHECK(bins[i].high_hz - bins[i].low_hz == 2.0);
    }
    CHECK(bins.back().high_hz == 50.0);
    CHECK(de_feature_names({"a", "b"}, Banding::TwoHz).size() == 50);
    CHECK(de_feature_names({"a"}, Banding::FiveBand)[2] == "a_alpha");
    CHECK_THROWS_AS(parse_banding("3band"), Error);
  }

  TEST_CASE("DE of white noise agrees with a long FIR oracle") {
    std::mt19937_64 rng(61);
    const double rate = 200.0;
    const Signal x = oracle::white_noise(rng, 80000, 3.0);
    const auto windows = extract_de_features(oracle::single(x, rate), Banding::FiveBand);
    REQUIRE(windows.size() == 50);
    for (std::size_t b = 0; b < 5; ++b) {
      double mean_de = 0.0;
      for (const auto& w : windows) mean_de += w.values[b];
      mean_de /= static_cast<double>(windows.size());
      const auto h = oracle::fir_bandpass(2001, rate, five_bands()[b].low_hz, five_bands()[b].high_hz);
      const double var = oracle::sample_variance(oracle::fir_valid(x, h));
      CHECK(std::abs(mean_de - differential_entropy(var)) <= 0.05);
    }
  }

  TEST_CASE("scaling a recording by 10 shifts every DE by ln 10") {
    std::mt19937_64 rng(67);
    const Signal x = oracle::white_noise(rng, 3200);
    const auto a = extract_de_features(oracle::single(x, 200.0), Banding::TwoHz);
    const auto b = extract_de_features(oracle::single(Signal(10.0 * x), 200.0), Banding::TwoHz);
    REQUIRE(a.size() == 2);
    for (std::size_t w = 0; w < a.size(); ++w)
      for (std::size_t i = 0; i < a[w].values.size(); ++i)
        CHECK(b[w].values[i] - a[w].values[i] == doctest::Approx(std::log(10.0)).epsilon(1e-9));
  }

  TEST_CASE("2 Hz bins add up to the five bands on white noise") {
    std::mt19937_64 rng(79);
    const Signal x = oracle::white_noise(rng, 1600 * 30);
    const auto var_of = [](double de) { return std::exp(2.0 * de) / (2.0 * std::numbers::pi * std::numbers::e); };
    const auto five = extract_de_features(oracle::single(x, 200.0), Banding::FiveBand);
    const auto bins = extract_de_features(oracle::single(x, 200.0), Banding::TwoHz);
    for (std::size_t b = 0; b < 5; ++b) {
      const Band band = five_bands()[b];
      double band_total = 0.0, bin_total = 0.0;
      for (std::size_t w = 0; w < five.size(); ++w) {
        band_total += var_of(five[w].values[b]);
        for (std::size_t k = 0; k < two_hz_bins().size(); ++k) {
          const Band bin = two_hz_bins()[k];
          // Share of a bin that straddles a band edge.
          const double overlap = std::max(0.0, std::min(bin.high_hz, band.high_hz) - std::max(bin.low_hz, band.low_hz));
          bin_total += var_of(bins[w].values[k]) * overlap / (bin.high_hz - bin.low_hz);
        }
      }
      CHECK(std::abs(bin_total / band_total - 1.0) <= 0.05);
    }
  }

  TEST_CASE("a 10 Hz rhythm peaks in alpha") {
    std::mt19937_64 rng(71);
    const Signal x = oracle::sine(1600, 200.0, 10.0, 20.0) + oracle::white_noise(rng, 1600);
    const auto v = extract_de_features(oracle::single(x, 200.0), Banding::FiveBand)[0];
    const auto best = std::max_element(v.values.begin(), v.values.end()) - v.values.begin();
    CHECK(best == 2);
    CHECK(v.window_start_s == 0.0);
  }

  TEST_CASE("reconstruction with no removal is the identity and removing all gives zero") {
    const auto q = hand_quad(3, 6000);
    const Matrix& x = q.x;
    const auto ica = fastica(x, 4, 1);
    const Matrix centered = x.colwise() - x.rowwise().mean();
    CHECK((reconstruct_without(ica, {}) - centered).norm() <= 1e-8 * centered.norm());
    CHECK(reconstruct_without(ica, {0, 1, 2, 3}).norm() <= 1e-8 * centered.norm());
    CHECK_THROWS_AS(reconstruct_without(ica, {4}), Error);
  }

  TEST_CASE("forehead reconstruction keeps alpha and removes the eye sources") {
    const auto q = hand_quad(5);
    const auto out = reconstruct_forehead_eeg(q.quad, 11);
    CHECK(out.report.eog_component_indices.size() == 2);
    CHECK(out.report.retained_indices.size() == 2);
    CHECK(out.eeg.channel_names[2] == "ch6n");
    for (int r = 0; r < 4; ++r) {
      const Signal rec = out.eeg.samples.row(r).transpose();
      const Signal clean = q.eeg.row(r).transpose();
      const Signal raw = q.x.row(r).transpose();
      CHECK(alpha_variance(rec, 200.0) / alpha_variance(clean, 200.0) >= 0.8);
      CHECK(low_variance(rec, 200.0) / low_variance(raw, 200.0) <= 0.2);
    }
  }

  TEST_CASE("the generator's eye components are flagged across seeds") {
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      synth::SynthConfig c;
      c.duration_s = 120;
      c.seed = seed;
      c.scalp_sites = false;
      const auto s = synth::generate(c);
      try {
        const auto out = reconstruct_forehead_eeg(s.quad, seed);
        if (out.report.eog_component_indices.size() != 2) continue;
        Matrix x(4, s.quad.ch4.size());
        x.row(0) = s.quad.ch4.transpose();
        x.row(1) = s.quad.ch5.transpose();
        x.row(2) = -s.quad.ch6.transpose();
        x.row(3) = s.quad.ch7.transpose();
        const Matrix u = out.report.unmixing * (x.colwise() - x.rowwise().mean());
        bool v_found = false, h_found = false;
        for (int i : out.report.eog_component_indices) {
          const auto row = oracle::to_vec(u.row(i).transpose());
          v_found = v_found || std::abs(oracle::pearson(row, oracle::to_vec(s.veo_source))) >= 0.7;
          h_found = h_found || std::abs(oracle::pearson(row, oracle::to_vec(s.heo_source))) >= 0.7;
        }
        if (v_found && h_found) ++hits;
      } catch (const Error&) {
      }
    }
    CHECK(hits >= 95);
  }

  TEST_CASE("flagging respects the threshold and the cap") {
    std::mt19937_64 rng(73);
    const Signal v = oracle::white_noise(rng, 2000), h = oracle::white_noise(rng, 2000);
    Matrix comps(3, 2000);
    comps.row(0) = oracle::white_noise(rng, 2000).transpose();
    comps.row(1) = (v + 0.1 * oracle::white_noise(rng, 2000)).transpose();
    comps.row(2) = (-h).transpose();
    const EogPair tpl{v, h, SeparationMethod::Minus, 200.0};
    CHECK(flag_eog_components(comps, tpl) == std::set<int>{1, 2});
    CHECK(flag_eog_components(comps, tpl, {0.5, 1}) == std::set<int>{2});
    CHECK(flag_eog_components(comps, tpl, {1.01, 2}).empty());
    CHECK_THROWS_AS(flag_eog_components(comps, EogPair{v.head(10), h, SeparationMethod::Minus, 200.0}), Error);
  }

  TEST_CASE("site presets") {
    CHECK(site_channels("posterior12").size() == 12);
    CHECK(site_channels("temporal6").size() == 6);
    CHECK(site_channels("forehead4").size() == 4);
    CHECK_THROWS_AS(site_channels("occipital"), Error);
  }
}
