#include "vigil/eog_features.hpp"

#include "vigil/error.hpp"

#include <algorithm>
#include <cmath>

namespace vigil {

namespace {

constexpr std::array<std::string_view, kEogFeatureCount> kManifest = {
    "blink_rate_max",       "blink_rate_mean",       "blink_rate_sum",        "blink_amp_max",
    "blink_amp_min",        "blink_amp_mean",        "blink_rate_var_mean",   "blink_rate_var_max",
    "blink_amp_var_mean",   "blink_amp_var_max",     "blink_amp_power",       "blink_amp_mean_power",
    "blink_count",          "saccade_rate_max",      "saccade_rate_min",      "saccade_rate_mean",
    "saccade_amp_max",      "saccade_amp_min",       "saccade_amp_mean",      "saccade_rate_var_max",
    "saccade_rate_var_mean", "saccade_amp_var_max",  "saccade_amp_var_mean",  "saccade_amp_power",
    "saccade_amp_mean_power", "saccade_count",       "blink_dur_var_mean",    "blink_dur_var_max",
    "saccade_dur_var_mean", "saccade_dur_var_max",   "blink_dur_max",         "blink_dur_min",
    "blink_dur_mean",       "saccade_dur_max",       "saccade_dur_min",       "saccade_dur_mean",
};

double pop_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size());
}

struct Summary {
  double max = 0.0, min = 0.0, mean = 0.0, sum = 0.0;
};

Summary summarise(const std::vector<double>& v) {
  Summary s;
  if (v.empty()) return s;
  s.max = v[0];
  s.min = v[0];
  for (double x : v) {
    s.sum += x;
    s.max = std::max(s.max, x);
    s.min = std::min(s.min, x);
  }
  s.mean = s.sum / static_cast<double>(v.size());
  return s;
}

// Per-kind statistics inside one window.
struct KindStats {
  std::vector<double> rates;           // per sub-bin
  std::vector<double> amplitudes;      // per event
  std::vector<double> durations;       // per event
  std::vector<double> rate_vars;       // per span
  std::vector<double> amp_vars;        // per span
  std::vector<double> dur_vars;        // per span
};

KindStats kind_stats(std::span<const TimedEyeEvent> events, EyeEventKind kind, double t0, double t1,
                     const EogFeatureOptions& opt) {
  const double length = t1 - t0;
  const auto bins = static_cast<std::size_t>(std::max<long long>(1, std::llround(length / opt.sub_bin_s)));
  const double width = length / static_cast<double>(bins);

  KindStats ks;
  ks.rates.assign(bins, 0.0);
  std::vector<std::size_t> bin_of;
  for (const auto& e : events) {
    if (e.kind != kind || e.peak_s < t0 || e.peak_s >= t1) continue;
    auto b = static_cast<std::size_t>(std::floor((e.peak_s - t0) / width));
    b = std::min(b, bins - 1);
    ks.rates[b] += 1.0;
    ks.amplitudes.push_back(e.amplitude_uv);
    ks.durations.push_back(e.duration_s);
    bin_of.push_back(b);
  }
  for (double& r : ks.rates) r /= width;

  const auto span = static_cast<std::size_t>(std::max(1, opt.variance_span));
  const std::size_t spans = bins >= span ? bins - span + 1 : 1;
  const std::size_t span_len = std::min(span, bins);
  for (std::size_t s = 0; s < spans; ++s) {
    std::vector<double> r(ks.rates.begin() + static_cast<std::ptrdiff_t>(s),
                          ks.rates.begin() + static_cast<std::ptrdiff_t>(s + span_len));
    std::vector<double> a, d;
    for (std::size_t k = 0; k < bin_of.size(); ++k) {
      if (bin_of[k] >= s && bin_of[k] < s + span_len) {
        a.push_back(ks.amplitudes[k]);
        d.push_back(ks.durations[k]);
      }
    }
    ks.rate_vars.push_back(pop_variance(r));
    ks.amp_vars.push_back(pop_variance(a));
    ks.dur_vars.push_back(pop_variance(d));
  }
  return ks;
}

double power(const std::vector<double>& amps) {
  double p = 0.0;
  for (double a : amps) p += a * a;
  return p;
}

}  // namespace

const std::array<std::string_view, kEogFeatureCount>& eog_feature_manifest() { return kManifest; }

EogFeatureVector extract_eog_features(std::span<const TimedEyeEvent> events, double t0, double t1,
                                      const EogFeatureOptions& opt) {
  if (!(t1 > t0)) throw Error(ErrorCode::EmptyInterval, "feature window must have positive length");
  if (!(opt.sub_bin_s > 0.0)) throw Error(ErrorCode::InvalidConfig, "sub-bin width must be positive");

  const KindStats b = kind_stats(events, EyeEventKind::Blink, t0, t1, opt);
  const KindStats s = kind_stats(events, EyeEventKind::Saccade, t0, t1, opt);

  const Summary b_rate = summarise(b.rates), b_amp = summarise(b.amplitudes), b_dur = summarise(b.durations);
  const Summary b_rv = summarise(b.rate_vars), b_av = summarise(b.amp_vars), b_dv = summarise(b.dur_vars);
  const Summary s_rate = summarise(s.rates), s_amp = summarise(s.amplitudes), s_dur = summarise(s.durations);
  const Summary s_rv = summarise(s.rate_vars), s_av = summarise(s.amp_vars), s_dv = summarise(s.dur_vars);

  const double b_count = static_cast<double>(b.amplitudes.size());
  const double s_count = static_cast<double>(s.amplitudes.size());
  const double b_pow = power(b.amplitudes);
  const double s_pow = power(s.amplitudes);

  EogFeatureVector out;
  out.window_start_s = t0;
  out.values = {
      b_rate.max, b_rate.mean, b_rate.sum, b_amp.max, b_amp.min, b_amp.mean,
      b_rv.mean, b_rv.max, b_av.mean, b_av.max, b_pow, b_count > 0 ? b_pow / b_count : 0.0,
      b_count,
      s_rate.max, s_rate.min, s_rate.mean, s_amp.max, s_amp.min, s_amp.mean,
      s_rv.max, s_rv.mean, s_av.max, s_av.mean, s_pow, s_count > 0 ? s_pow / s_count : 0.0,
      s_count,
      b_dv.mean, b_dv.max, s_dv.mean, s_dv.max,
      b_dur.max, b_dur.min, b_dur.mean, s_dur.max, s_dur.min, s_dur.mean,
  };
  return out;
}

std::vector<EogFeatureVector> extract_eog_feature_series(std::span<const TimedEyeEvent> events, double window_s,
                                                         std::size_t windows, double t0,
                                                         const EogFeatureOptions& opt) {
  std::vector<EogFeatureVector> out(windows);
  const auto count = static_cast<std::ptrdiff_t>(windows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t w = 0; w < count; ++w) {
    const double a = t0 + static_cast<double>(w) * window_s;
    out[static_cast<std::size_t>(w)] = extract_eog_features(events, a, a + window_s, opt);
  }
  return out;
}

}  // namespace vigil
