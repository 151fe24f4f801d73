#include "vigil/synth.hpp"

#include "vigil/eeg.hpp"
#include "vigil/error.hpp"
#include "vigil/fft.hpp"
#include "vigil/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace vigil::synth {

namespace {

// Independent engine per purpose so one part of the generator can change
// without shifting the others.
std::mt19937_64 stream(std::uint64_t seed, std::uint32_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id};
  return std::mt19937_64(seq);
}

enum Stream : std::uint32_t { kTrajectory = 1, kDrift, kEyes, kEogRender, kEeg, kNoise, kSuite, kEegPosterior, kEegTemporal };

double reflect_unit(double x) {
  while (x < 0.0 || x > 1.0) x = x < 0.0 ? -x : 2.0 - x;
  return x;
}

// Knot values of a reflected random walk and cosine interpolation between them.
class Trajectory {
 public:
  Trajectory(std::mt19937_64& rng, double duration_s, double spacing_s, double step, double start_lo, double start_hi)
      : spacing_(spacing_s) {
    std::uniform_real_distribution<double> u(start_lo, start_hi);
    std::normal_distribution<double> n(0.0, step);
    const auto count = static_cast<std::size_t>(std::ceil(duration_s / spacing_s)) + 2;
    knots_.push_back(u(rng));
    while (knots_.size() < count) knots_.push_back(reflect_unit(knots_.back() + n(rng)));
  }

  double operator()(double t) const {
    const double x = std::max(0.0, t) / spacing_;
    const auto k = std::min(static_cast<std::size_t>(x), knots_.size() - 2);
    const double f = std::min(1.0, x - static_cast<double>(k));
    const double w = 0.5 * (1.0 - std::cos(std::numbers::pi * f));
    return (1.0 - w) * knots_[k] + w * knots_[k + 1];
  }

 private:
  double spacing_;
  std::vector<double> knots_;
};

double lerp(double a, double b, double v) { return a + (b - a) * v; }

struct PlannedEvent {
  GazeKind kind;
  double duration;
};

Eigen::Index sample_index(double t, double rate) { return static_cast<Eigen::Index>(std::ceil(t * rate - 1e-9)); }

// Gaussian noise shaped into the five EEG bands with time-varying gains.
Signal eeg_channel(std::mt19937_64& rng, Eigen::Index n, double rate, const std::vector<Signal>& envelopes,
                   double noise_uv) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> white(static_cast<std::size_t>(n));
  for (auto& x : white) x = normal(rng);
  const std::size_t nfft = fft::next_fast_size(white.size());
  const auto spectrum = fft::rfft(white, nfft);
  const auto& bands = five_bands();
  Signal out = Signal::Zero(n);
  for (std::size_t b = 0; b < bands.size(); ++b) {
    auto masked = spectrum;
    for (std::size_t k = 0; k < masked.size(); ++k) {
      const double f = static_cast<double>(k) * rate / static_cast<double>(nfft);
      if (f < bands[b].low_hz || f >= bands[b].high_hz) masked[k] = 0.0;
    }
    const auto full = fft::irfft(masked, nfft);
    Signal part = Eigen::Map<const Signal>(full.data(), n);
    const double sd = std::sqrt(stats::variance({part.data(), static_cast<std::size_t>(n)}));
    if (sd > 0.0) part /= sd;
    out.array() += envelopes[b].array() * part.array();
  }
  for (Eigen::Index i = 0; i < n; ++i) out[i] += noise_uv * normal(rng);
  return out;
}

std::vector<Signal> band_envelopes(const SynthConfig& c, const Signal& v_eeg, double site_gain,
                                   std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(0.8, 1.25);
  std::vector<Signal> env;
  for (std::size_t b = 0; b < c.band_log_var.size(); ++b) {
    const double factor = jitter(rng);
    env.push_back(
        ((c.band_log_var[b] + site_gain * c.band_slope[b] * (v_eeg.array() - 0.5)) * 0.5).exp() * factor);
  }
  return env;
}

MultichannelRecording eeg_site(const SynthConfig& c, const Signal& v_eeg, double gain,
                               const std::vector<std::string>& names, std::mt19937_64& rng) {
  const Eigen::Index n = v_eeg.size();
  Matrix samples(static_cast<Eigen::Index>(names.size()), n);
  for (std::size_t ch = 0; ch < names.size(); ++ch) {
    const auto env = band_envelopes(c, v_eeg, gain, rng);
    samples.row(static_cast<Eigen::Index>(ch)) = eeg_channel(rng, n, c.sample_rate_hz, env, c.eeg_noise_uv).transpose();
  }
  return make_recording(std::move(samples), names, c.sample_rate_hz);
}

void add_blink(Signal& veo, double rate, double start, double duration, double amplitude) {
  const Eigen::Index a = std::max<Eigen::Index>(0, sample_index(start, rate));
  const Eigen::Index b = std::min<Eigen::Index>(veo.size(), sample_index(start + duration, rate) + 1);
  for (Eigen::Index i = a; i < b; ++i) {
    const double u = (static_cast<double>(i) / rate - start) / duration;
    if (u >= 0.0 && u <= 1.0) veo[i] += amplitude * blink_pulse(u);
  }
}

// Saccade steps are collected as (start, duration, delta) and rendered in one
// pass: a cumulative level plus the local ramp correction.
struct Step {
  double start;
  double duration;
  double delta;
};

Signal render_steps(const std::vector<Step>& steps, Eigen::Index n, double rate) {
  Signal level = Signal::Zero(n);
  for (const auto& s : steps) {
    const Eigen::Index a = sample_index(s.start, rate);
    if (a < n) level[std::max<Eigen::Index>(0, a)] += s.delta;
  }
  for (Eigen::Index i = 1; i < n; ++i) level[i] += level[i - 1];
  for (const auto& s : steps) {
    const Eigen::Index a = std::max<Eigen::Index>(0, sample_index(s.start, rate));
    const Eigen::Index b = std::min<Eigen::Index>(n, sample_index(s.start + s.duration, rate));
    for (Eigen::Index i = a; i < b; ++i) {
      const double u = (static_cast<double>(i) / rate - s.start) / s.duration;
      level[i] += s.delta * (step_ramp(std::clamp(u, 0.0, 1.0)) - 1.0);
    }
  }
  return level;
}

// Next gaze target: a jump of random size whose sign keeps |position| bounded.
double saccade_delta(std::mt19937_64& rng, double position, double lo, double hi, double range) {
  std::uniform_real_distribution<double> size(lo, hi);
  std::bernoulli_distribution coin(0.5);
  double delta = size(rng) * (coin(rng) ? 1.0 : -1.0);
  if (std::abs(position + delta) > range) delta = -delta;
  return delta;
}

}  // namespace

double blink_pulse(double u) {
  constexpr double kPeak = 0.4;
  if (u <= 0.0 || u >= 1.0) return 0.0;
  if (u < kPeak) return 0.5 * (1.0 - std::cos(std::numbers::pi * u / kPeak));
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (u - kPeak) / (1.0 - kPeak)));
}

double step_ramp(double u) { return 0.5 * (1.0 - std::cos(std::numbers::pi * std::clamp(u, 0.0, 1.0))); }

void validate(const SynthConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, "synth: " + what); };
  if (!(c.sample_rate_hz >= 150.0)) fail("sample rate must be at least 150 Hz");
  if (!(c.window_s > 0.0)) fail("window length must be positive");
  if (!(c.duration_s >= c.window_s)) fail("duration must cover at least one window");
  if (!(c.knot_spacing_s > 0.0) || !(c.walk_step >= 0.0)) fail("invalid trajectory parameters");
  if (c.blink_rate_alert < 0 || c.blink_rate_drowsy < 0 || c.saccade_rate_alert < 0 || c.saccade_rate_drowsy < 0) {
    fail("event rates must be non-negative");
  }
  if (!(c.blink_dur_alert > 0.0 && c.blink_dur_drowsy > 0.0 && c.saccade_dur_s > 0.0)) fail("durations must be positive");
  if (!(c.max_perclos > 0.0 && c.max_perclos <= 1.0)) fail("max_perclos must lie in (0, 1]");
  if (c.band_log_var.size() != 5 || c.band_slope.size() != 5) fail("five band parameters expected");
  if (c.forehead_eeg_scale < 0) fail("negative forehead EEG scale");
  if (c.eye_jitter < 0 || c.eeg_drift < 0 || c.eeg_noise_uv < 0 || c.channel_noise_uv < 0) fail("negative noise level");
}

SynthSession generate(const SynthConfig& c) {
  validate(c);
  const double rate = c.sample_rate_hz;
  const Eigen::Index n = static_cast<Eigen::Index>(std::floor(c.duration_s * rate));
  const auto windows = static_cast<std::size_t>(std::floor(c.duration_s / c.window_s));

  auto traj_rng = stream(c.seed, kTrajectory);
  const Trajectory vig(traj_rng, c.duration_s, c.knot_spacing_s, c.walk_step, 0.1, 0.6);
  auto drift_rng = stream(c.seed, kDrift);
  const Trajectory drift(drift_rng, c.duration_s, c.knot_spacing_s, 0.3, 0.0, 1.0);

  SynthSession s;
  s.veo_source = Signal::Zero(n);
  std::vector<Step> steps;
  auto eye_rng = stream(c.seed, kEyes);
  auto render_rng = stream(c.seed, kEogRender);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double gaze_position = 0.0;

  for (std::size_t w = 0; w < windows; ++w) {
    const double t0 = static_cast<double>(w) * c.window_s;
    const double v = vig(t0 + 0.5 * c.window_s);
    s.vigilance.push_back(v);
    const double ve = std::clamp(v + c.eye_jitter * normal(eye_rng), 0.0, 1.0);

    const double closed_target = std::min(c.max_perclos, ve) * c.window_s;
    const double blink_dur = lerp(c.blink_dur_alert, c.blink_dur_drowsy, ve);
    std::poisson_distribution<int> blinks_dist(lerp(c.blink_rate_alert, c.blink_rate_drowsy, ve) * c.window_s);
    std::poisson_distribution<int> saccades_dist(lerp(c.saccade_rate_alert, c.saccade_rate_drowsy, ve) * c.window_s);
    int n_blinks = std::min(blinks_dist(eye_rng), static_cast<int>(closed_target / blink_dur));
    int n_saccades = saccades_dist(eye_rng);

    // Shrink the plan until events and their guard gaps fit in the window.
    std::vector<PlannedEvent> plan;
    double slack = 0.0;
    for (;;) {
      plan.clear();
      std::vector<double> durs;
      for (int i = 0; i < n_blinks; ++i) {
        durs.push_back(blink_dur * (0.9 + 0.2 * unit(eye_rng)));
        plan.push_back({GazeKind::Blink, durs.back()});
      }
      double clos = closed_target;
      for (double d : durs) clos -= d;
      if (clos >= 0.5) plan.push_back({GazeKind::Clos, clos});
      for (int i = 0; i < n_saccades; ++i) plan.push_back({GazeKind::Saccade, c.saccade_dur_s});
      double need = 0.1;
      for (const auto& e : plan) need += e.duration + (e.kind == GazeKind::Clos ? 0.1 : c.min_event_gap_s);
      slack = c.window_s - need;
      if (slack >= 0.0) break;
      if (n_saccades > 0) --n_saccades;
      else if (n_blinks > 0) --n_blinks;
      else {
        plan.back().duration += slack;  // a lone closure: trim it
        slack = 0.0;
        break;
      }
    }
    std::shuffle(plan.begin(), plan.end(), eye_rng);

    // Random split of the slack over the gaps before each event and at the end.
    std::vector<double> share(plan.size() + 1);
    double total = 0.0;
    for (auto& x : share) total += (x = -std::log(1.0 - unit(eye_rng)));
    double t = t0;
    double closed = 0.0;
    for (std::size_t i = 0; i < plan.size(); ++i) {
      const auto& e = plan[i];
      const double gap = (e.kind == GazeKind::Clos ? 0.1 : c.min_event_gap_s) * (i == 0 ? 0.5 : 1.0) +
                         slack * share[i] / total;
      if (gap > 0.0) s.gaze.push_back({GazeKind::Fixation, t, t + gap});
      t += gap;
      s.gaze.push_back({e.kind, t, t + e.duration});
      if (e.kind == GazeKind::Blink || e.kind == GazeKind::Clos) closed += e.duration;
      if (e.kind == GazeKind::Blink) {
        const double amp = c.blink_amp_uv * (0.75 + 0.5 * unit(render_rng)) * (1.0 - 0.3 * ve);
        add_blink(s.veo_source, rate, t, e.duration, amp);
        s.truth_events.push_back({EyeEventKind::Blink, t, t + 0.4 * e.duration, t + e.duration, amp, e.duration});
      } else if (e.kind == GazeKind::Saccade) {
        const double delta =
            saccade_delta(render_rng, gaze_position, c.saccade_amp_min_uv, c.saccade_amp_max_uv, c.gaze_range_uv);
        gaze_position += delta;
        steps.push_back({t, e.duration, delta});
        s.truth_events.push_back(
            {EyeEventKind::Saccade, t, t + 0.5 * e.duration, t + e.duration, std::abs(delta), e.duration});
      }
      t += e.duration;
    }
    const double end = t0 + c.window_s;
    if (end > t) s.gaze.push_back({GazeKind::Fixation, t, end});
    s.truth_perclos.push_back(closed / c.window_s);
  }
  const double tail = static_cast<double>(windows) * c.window_s;
  if (c.duration_s > tail) s.gaze.push_back({GazeKind::Fixation, tail, c.duration_s});
  s.heo_source = render_steps(steps, n, rate);

  // EEG sees the latent vigilance plus its own slow drift.
  Signal v_eeg(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ti = static_cast<double>(i) / rate;
    v_eeg[i] = std::clamp(vig(ti) + c.eeg_drift * (2.0 * drift(ti) - 1.0), 0.0, 1.0);
  }
  if (c.scalp_sites) {
    auto posterior_rng = stream(c.seed, kEegPosterior);
    auto temporal_rng = stream(c.seed, kEegTemporal);
    s.posterior = eeg_site(c, v_eeg, c.posterior_gain, site_channels("posterior12"), posterior_rng);
    s.temporal = eeg_site(c, v_eeg, c.temporal_gain, site_channels("temporal6"), temporal_rng);
  }
  auto eeg_rng = stream(c.seed, kEeg);
  MultichannelRecording forehead = eeg_site(c, v_eeg, c.forehead_gain, {"ch4", "ch5", "ch6", "ch7"}, eeg_rng);
  forehead.samples *= c.forehead_eeg_scale;

  auto noise_rng = stream(c.seed, kNoise);
  auto noisy = [&](Signal x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += c.channel_noise_uv * normal(noise_rng);
    return x;
  };
  const auto& m = c.mixing;
  const Signal& V = s.veo_source;
  const Signal& H = s.heo_source;
  s.quad.sample_rate_hz = rate;
  s.quad.ch4 = noisy(m.v4 * V + m.h4 * H + Signal(forehead.samples.row(0).transpose()));
  s.quad.ch5 = noisy(m.v5 * V + m.h5 * H + Signal(forehead.samples.row(1).transpose()));
  s.quad.ch6 = noisy(m.v6 * V + m.h6 * H + Signal(forehead.samples.row(2).transpose()));
  s.quad.ch7 = noisy(m.v7 * V + m.h7 * H + Signal(forehead.samples.row(3).transpose()));
  return s;
}

EyeSuite generate_eye_suite(const EyeSuiteConfig& c) {
  if (c.blinks < 0 || c.saccades < 0 || c.blinks + c.saccades == 0) {
    throw Error(ErrorCode::InvalidConfig, "eye suite needs events");
  }
  if (!(c.sample_rate_hz > 0.0) || !(c.duration_s > 0.0)) throw Error(ErrorCode::InvalidConfig, "eye suite timing");
  const int events = c.blinks + c.saccades;
  const double slot = c.duration_s / events;
  if (slot < 1.5) throw Error(ErrorCode::InvalidConfig, "eye suite events too dense");

  auto rng = stream(c.seed, kSuite);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<EyeEventKind> kinds(static_cast<std::size_t>(c.blinks), EyeEventKind::Blink);
  kinds.insert(kinds.end(), static_cast<std::size_t>(c.saccades), EyeEventKind::Saccade);
  std::shuffle(kinds.begin(), kinds.end(), rng);

  const auto n = static_cast<Eigen::Index>(std::floor(c.duration_s * c.sample_rate_hz));
  EyeSuite s;
  s.clean_veo = Signal::Zero(n);
  std::vector<Step> steps;
  double position = 0.0;
  for (int k = 0; k < events; ++k) {
    const bool blink = kinds[static_cast<std::size_t>(k)] == EyeEventKind::Blink;
    const double dur = blink ? lerp(c.blink_dur_min_s, c.blink_dur_max_s, unit(rng)) : c.saccade_dur_s;
    const double start = k * slot + 0.6 + unit(rng) * (slot - 1.2 - dur);
    if (blink) {
      const double amp = lerp(c.blink_amp_min_uv, c.blink_amp_max_uv, unit(rng));
      add_blink(s.clean_veo, c.sample_rate_hz, start, dur, amp);
      s.truth.push_back({EyeEventKind::Blink, start, start + 0.4 * dur, start + dur, amp, dur});
    } else {
      const double delta = saccade_delta(rng, position, c.saccade_amp_min_uv, c.saccade_amp_max_uv, c.gaze_range_uv);
      position += delta;
      steps.push_back({start, dur, delta});
      s.truth.push_back({EyeEventKind::Saccade, start, start + 0.5 * dur, start + dur, std::abs(delta), dur});
    }
  }
  s.clean_heo = render_steps(steps, n, c.sample_rate_hz);

  const double snr = std::pow(10.0, c.snr_db / 10.0);
  auto var = [](const Signal& x) { return stats::variance({x.data(), static_cast<std::size_t>(x.size())}); };
  s.veo_noise_sigma = std::sqrt(var(s.clean_veo) / snr);
  s.heo_noise_sigma = std::sqrt(var(s.clean_heo) / snr);
  std::normal_distribution<double> normal(0.0, 1.0);
  s.eog.veo = s.clean_veo;
  s.eog.heo = s.clean_heo;
  for (Eigen::Index i = 0; i < n; ++i) s.eog.veo[i] += s.veo_noise_sigma * normal(rng);
  for (Eigen::Index i = 0; i < n; ++i) s.eog.heo[i] += s.heo_noise_sigma * normal(rng);
  s.eog.sample_rate_hz = c.sample_rate_hz;
  return s;
}

MatchCounts match_events(std::span<const TimedEyeEvent> detected, std::span<const TimedEyeEvent> truth,
                         EyeEventKind kind, double tolerance_s) {
  MatchCounts m;
  std::vector<const TimedEyeEvent*> pool;
  for (const auto& d : detected) {
    if (d.kind == kind) pool.push_back(&d);
  }
  m.detected = static_cast<int>(pool.size());
  std::vector<bool> used(pool.size(), false);
  for (const auto& t : truth) {
    if (t.kind != kind) continue;
    ++m.truth;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!used[i] && pool[i]->peak_s >= t.start_s - tolerance_s && pool[i]->peak_s <= t.end_s + tolerance_s) {
        used[i] = true;
        ++m.true_positives;
        break;
      }
    }
  }
  return m;
}

}  // namespace vigil::synth
