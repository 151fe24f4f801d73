#include "vigil/events.hpp"

#include "vigil/dsp.hpp"
#include "vigil/error.hpp"
#include "vigil/kernels.hpp"
#include "vigil/stats.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace vigil {

namespace {

// Pearson correlation of signal[start..end] against a shape sampled on the
// same number of points; 0 when either side is flat.
template <typename Shape>
double template_correlation(const Signal& signal, Eigen::Index start, Eigen::Index end, Shape shape) {
  const Eigen::Index len = end - start + 1;
  if (len < 3) return 0.0;
  std::vector<double> seg(static_cast<std::size_t>(len));
  std::vector<double> tpl(static_cast<std::size_t>(len));
  for (Eigen::Index i = 0; i < len; ++i) {
    seg[static_cast<std::size_t>(i)] = signal[start + i];
    tpl[static_cast<std::size_t>(i)] = shape(static_cast<double>(i) / static_cast<double>(len - 1));
  }
  try {
    return stats::pearson(seg, tpl);
  } catch (const Error&) {
    return 0.0;
  }
}

double blink_shape(double u) { return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * u)); }
double step_shape(double u) { return 0.5 * (1.0 - std::cos(std::numbers::pi * u)); }

bool slope_ok(const PeakCode& a, const PeakCode& b, const DetectionInput& in, const EventConstraints& c) {
  const double gap = static_cast<double>(b.time_idx - a.time_idx);
  if (gap <= 0.0) return false;
  const double slope = (a.magnitude + b.magnitude) / gap;
  return slope >= c.slope_min * in.theta_l / in.scale;
}

bool is_blink_pattern(std::span<const PeakCode> codes, std::size_t i, double rate, double max_span_s) {
  if (i + 2 >= codes.size()) return false;
  const auto& a = codes[i];
  const auto& b = codes[i + 1];
  const auto& d = codes[i + 2];
  if (a.symbol != PeakSymbol::Neg || b.symbol != PeakSymbol::Pos || d.symbol != PeakSymbol::Neg) return false;
  return static_cast<double>(d.time_idx - a.time_idx) / rate <= max_span_s;
}

void check_input(const DetectionInput& in) {
  if (in.signal == nullptr) throw Error(ErrorCode::EmptyInput, "detection without a signal");
  if (!(in.sample_rate_hz > 0.0)) throw Error(ErrorCode::InvalidConfig, "detection sample rate must be positive");
  for (std::size_t i = 1; i < in.codes.size(); ++i) {
    if (in.codes[i].time_idx <= in.codes[i - 1].time_idx) {
      throw Error(ErrorCode::InvalidConfig, "peak codes must be strictly time-ordered");
    }
  }
}

}  // namespace

std::string_view to_string(EyeEventKind kind) { return kind == EyeEventKind::Blink ? "blink" : "saccade"; }

EyeEventKind parse_eye_event_kind(std::string_view text) {
  if (text == "blink") return EyeEventKind::Blink;
  if (text == "saccade") return EyeEventKind::Saccade;
  throw Error(ErrorCode::Parse, "unknown eye event kind '" + std::string(text) + "'");
}

double mexican_hat(double t, double sigma) {
  const double norm = 2.0 / (std::sqrt(3.0 * sigma) * std::pow(std::numbers::pi, 0.25));
  const double r = t * t / (sigma * sigma);
  return norm * (1.0 - r) * std::exp(-0.5 * r);
}

Signal mexican_hat_kernel(double scale, double sigma) {
  if (!(scale > 0.0) || !(sigma > 0.0)) throw Error(ErrorCode::InvalidConfig, "wavelet scale and sigma must be positive");
  const auto half = static_cast<Eigen::Index>(std::ceil(8.0 * sigma * scale));
  Signal k(2 * half + 1);
  for (Eigen::Index i = -half; i <= half; ++i) {
    k[i + half] = mexican_hat(static_cast<double>(i) / scale, sigma) / std::sqrt(scale);
  }
  // Remove the truncation residue so constants map to zero, then fix the
  // discrete energy to one.
  k.array() -= k.mean();
  k /= k.norm();
  return k;
}

Signal cwt_mexican_hat(const Signal& signal, const WaveletConfig& cfg) {
  if (static_cast<double>(signal.size()) <= 10.0 * cfg.scale) {
    throw Error(ErrorCode::SignalTooShort, "signal of " + std::to_string(signal.size()) +
                                               " samples is too short for wavelet scale " + std::to_string(cfg.scale));
  }
  return kernels::omp::correlate_same(signal, mexican_hat_kernel(cfg.scale, cfg.sigma));
}

Thresholds auto_thresholds(const Signal& coeffs) {
  if (coeffs.size() == 0) throw Error(ErrorCode::EmptyInput, "thresholds of empty coefficients");
  const double m = stats::mad({coeffs.data(), static_cast<std::size_t>(coeffs.size())});
  if (!(m > 0.0)) throw Error(ErrorCode::DegenerateSignal, "coefficient MAD is zero");
  const double low = 3.0 * m / 0.6745;
  return Thresholds{2.0 * low, low};
}

Thresholds resolve_thresholds(const Signal& coeffs, const WaveletConfig& cfg) {
  if (cfg.auto_thresholds) return auto_thresholds(coeffs);
  if (!(cfg.theta_h > cfg.theta_l) || cfg.theta_l < 0.0) {
    throw Error(ErrorCode::InvalidConfig, "thresholds need theta_h > theta_l >= 0");
  }
  return Thresholds{cfg.theta_h, cfg.theta_l};
}

std::vector<PeakCode> encode_peaks(const Signal& coeffs, const Thresholds& thresholds) {
  std::vector<PeakCode> codes;
  const Eigen::Index n = coeffs.size();
  Eigen::Index i = 0;
  while (i < n) {
    const double v = coeffs[i];
    const bool pos = v >= thresholds.low && v > 0.0;
    const bool neg = v <= -thresholds.low && v < 0.0;
    if (!pos && !neg) {
      ++i;
      continue;
    }
    const Eigen::Index start = i;
    Eigen::Index best = i;
    while (i < n && (pos ? coeffs[i] >= thresholds.low && coeffs[i] > 0.0
                         : coeffs[i] <= -thresholds.low && coeffs[i] < 0.0)) {
      if (std::abs(coeffs[i]) > std::abs(coeffs[best])) best = i;
      ++i;
    }
    const double mag = std::abs(coeffs[best]);
    if (mag >= thresholds.high) {
      codes.push_back(PeakCode{pos ? PeakSymbol::Pos : PeakSymbol::Neg, best, mag, start, i - 1});
    }
  }
  return codes;
}

std::vector<EyeEvent> detect_blinks(const DetectionInput& in, const EventConstraints& c) {
  check_input(in);
  const Signal& x = *in.signal;
  std::vector<EyeEvent> events;
  std::size_t i = 0;
  while (i + 2 < in.codes.size()) {
    if (!is_blink_pattern(in.codes, i, in.sample_rate_hz, c.max_blink_s)) {
      ++i;
      continue;
    }
    const auto& first = in.codes[i];
    const auto& center = in.codes[i + 1];
    const auto& last = in.codes[i + 2];
    const double ratio = first.magnitude / last.magnitude;
    const double segment_s = static_cast<double>(last.extent_end - first.extent_start) / in.sample_rate_hz;
    bool ok = ratio >= c.min_outer_ratio && ratio <= c.max_outer_ratio && segment_s <= c.max_segment_s &&
              slope_ok(first, center, in, c) && slope_ok(center, last, in, c);
    EyeEvent ev;
    if (ok) {
      ev.kind = EyeEventKind::Blink;
      ev.start_idx = first.time_idx;
      ev.peak_idx = center.time_idx;
      ev.end_idx = last.time_idx;
      const double baseline = 0.5 * (x[ev.start_idx] + x[ev.end_idx]);
      ev.amplitude = x.segment(ev.start_idx, ev.end_idx - ev.start_idx + 1).maxCoeff() - baseline;
      ev.duration_s = static_cast<double>(ev.end_idx - ev.start_idx) / in.sample_rate_hz;
      ok = ev.amplitude > 0.0 &&
           template_correlation(x, ev.start_idx, ev.end_idx, blink_shape) >= c.min_template_corr;
    }
    if (ok) {
      events.push_back(ev);
      i += 3;
    } else {
      ++i;
    }
  }
  return events;
}

std::vector<EyeEvent> detect_saccades(const DetectionInput& in, const EventConstraints& c) {
  check_input(in);
  const Signal& x = *in.signal;
  std::vector<EyeEvent> events;
  std::size_t i = 0;
  while (i + 1 < in.codes.size()) {
    // Codes forming a blink-shaped triple belong to the blink rule.
    if (is_blink_pattern(in.codes, i, in.sample_rate_hz, c.max_blink_s)) {
      i += 3;
      continue;
    }
    const auto& a = in.codes[i];
    const auto& b = in.codes[i + 1];
    bool ok = a.symbol != b.symbol &&
              static_cast<double>(b.time_idx - a.time_idx) / in.sample_rate_hz <= c.max_saccade_s &&
              b.time_idx - a.time_idx >= 2 && slope_ok(a, b, in, c);
    EyeEvent ev;
    if (ok) {
      ev.kind = EyeEventKind::Saccade;
      ev.start_idx = a.time_idx;
      ev.end_idx = b.time_idx;
      ev.peak_idx = (a.time_idx + b.time_idx) / 2;
      ev.amplitude = std::abs(x[ev.end_idx] - x[ev.start_idx]);
      ev.duration_s = static_cast<double>(ev.end_idx - ev.start_idx) / in.sample_rate_hz;
      ok = ev.amplitude > 0.0 &&
           std::abs(template_correlation(x, ev.start_idx, ev.end_idx, step_shape)) >= c.min_template_corr;
    }
    if (ok) {
      events.push_back(ev);
      i += 2;
    } else {
      ++i;
    }
  }
  return events;
}

EogPair to_detection_rate(const EogPair& eog, double rate_hz) {
  EogPair out = eog;
  out.veo = dsp::resample(eog.veo, eog.sample_rate_hz, rate_hz);
  out.heo = dsp::resample(eog.heo, eog.sample_rate_hz, rate_hz);
  out.sample_rate_hz = rate_hz;
  return out;
}

std::vector<EyeEvent> detect_eye_events(const EogPair& eog, const WaveletConfig& cfg, const EventConstraints& c) {
  const Signal vc = cwt_mexican_hat(eog.veo, cfg);
  const Signal hc = cwt_mexican_hat(eog.heo, cfg);
  const Thresholds vt = resolve_thresholds(vc, cfg);
  const Thresholds ht = resolve_thresholds(hc, cfg);
  const auto vcodes = encode_peaks(vc, vt);
  const auto hcodes = encode_peaks(hc, ht);

  auto blinks = detect_blinks(DetectionInput{vcodes, &eog.veo, eog.sample_rate_hz, vt.low, cfg.scale}, c);
  auto saccades = detect_saccades(DetectionInput{hcodes, &eog.heo, eog.sample_rate_hz, ht.low, cfg.scale}, c);

  std::vector<EyeEvent> merged = blinks;
  std::size_t bi = 0;
  for (const auto& s : saccades) {
    while (bi < blinks.size() && blinks[bi].end_idx < s.start_idx) ++bi;
    const bool overlaps = bi < blinks.size() && blinks[bi].start_idx <= s.end_idx;
    if (!overlaps) merged.push_back(s);
  }
  std::stable_sort(merged.begin(), merged.end(),
                   [](const EyeEvent& a, const EyeEvent& b) { return a.start_idx < b.start_idx; });
  return merged;
}

std::vector<TimedEyeEvent> to_timed(std::span<const EyeEvent> events, double rate, double t0) {
  std::vector<TimedEyeEvent> out;
  out.reserve(events.size());
  for (const auto& e : events) {
    out.push_back(TimedEyeEvent{e.kind, t0 + static_cast<double>(e.start_idx) / rate,
                                t0 + static_cast<double>(e.peak_idx) / rate, t0 + static_cast<double>(e.end_idx) / rate,
                                e.amplitude, e.duration_s});
  }
  return out;
}

void write_events_jsonl(const std::filesystem::path& path, std::span<const TimedEyeEvent> events,
                        const std::map<std::string, std::string>& meta) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  if (!meta.empty()) out << nlohmann::json{{"meta", meta}}.dump() << '\n';
  for (const auto& e : events) {
    nlohmann::json j{{"kind", to_string(e.kind)}, {"start_s", e.start_s},         {"peak_s", e.peak_s},
                     {"end_s", e.end_s},          {"amplitude_uv", e.amplitude_uv}, {"duration_s", e.duration_s}};
    out << j.dump() << '\n';
  }
}

std::vector<TimedEyeEvent> read_events_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  std::vector<TimedEyeEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.contains("meta")) continue;
      events.push_back(TimedEyeEvent{parse_eye_event_kind(j.at("kind").get<std::string>()), j.at("start_s").get<double>(),
                                     j.at("peak_s").get<double>(), j.at("end_s").get<double>(),
                                     j.at("amplitude_uv").get<double>(), j.at("duration_s").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
    }
  }
  return events;
}

}  // namespace vigil
