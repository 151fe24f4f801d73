#include "vigil/eeg.hpp"

#include "vigil/dsp.hpp"
#include "vigil/error.hpp"
#include "vigil/kernels.hpp"
#include "vigil/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vigil {

std::string_view to_string(Banding banding) { return banding == Banding::FiveBand ? "5band" : "2hz"; }

Banding parse_banding(std::string_view text) {
  if (text == "5band" || text == "five" || text == "five_band") return Banding::FiveBand;
  if (text == "2hz" || text == "two_hz") return Banding::TwoHz;
  throw Error(ErrorCode::InvalidConfig, "unknown banding '" + std::string(text) + "'");
}

const std::vector<Band>& five_bands() {
  static const std::vector<Band> bands = {{1, 4}, {4, 8}, {8, 14}, {14, 31}, {31, 50}};
  return bands;
}

const std::vector<Band>& two_hz_bins() {
  static const std::vector<Band> bins = [] {
    std::vector<Band> b{{1, 2}};
    for (int k = 1; k < 25; ++k) b.push_back({2.0 * k, 2.0 * k + 2.0});
    return b;
  }();
  return bins;
}

const std::vector<Band>& bands_for(Banding banding) {
  return banding == Banding::FiveBand ? five_bands() : two_hz_bins();
}

std::vector<std::string> band_labels(Banding banding) {
  if (banding == Banding::FiveBand) return {"delta", "theta", "alpha", "beta", "gamma"};
  std::vector<std::string> labels;
  for (const Band& b : two_hz_bins()) {
    labels.push_back(std::to_string(static_cast<int>(b.low_hz)) + "-" + std::to_string(static_cast<int>(b.high_hz)) +
                     "hz");
  }
  return labels;
}

std::set<int> flag_eog_components(const Matrix& components, const EogPair& templates, const FlagOptions& options) {
  if (templates.veo.size() != components.cols() || templates.heo.size() != components.cols()) {
    throw Error(ErrorCode::LengthMismatch, "EOG templates are not aligned with the components");
  }
  const std::span<const double> veo(templates.veo.data(), static_cast<std::size_t>(templates.veo.size()));
  const std::span<const double> heo(templates.heo.data(), static_cast<std::size_t>(templates.heo.size()));
  std::vector<std::pair<double, int>> scored;
  for (Eigen::Index r = 0; r < components.rows(); ++r) {
    const Signal row = components.row(r).transpose();
    const std::span<const double> u(row.data(), static_cast<std::size_t>(row.size()));
    double best = 0.0;
    for (auto tpl : {veo, heo}) {
      try {
        best = std::max(best, std::abs(stats::pearson(u, tpl)));
      } catch (const Error&) {
      }
    }
    if (best >= options.min_abs_corr) scored.emplace_back(best, static_cast<int>(r));
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::set<int> flagged;
  for (std::size_t i = 0; i < scored.size() && i < options.max_components; ++i) flagged.insert(scored[i].second);
  return flagged;
}

Matrix reconstruct_without(const UnmixingResult& ica, const std::set<int>& removed) {
  Matrix kept = ica.components;
  for (int r : removed) {
    if (r < 0 || r >= kept.rows()) throw Error(ErrorCode::OutOfRange, "component index out of range");
    kept.row(r).setZero();
  }
  return ica.mixing_inverse * kept;
}

ForeheadEeg reconstruct_forehead_eeg(const ForeheadQuad& quad, std::uint64_t seed, const FlagOptions& flag,
                                     const FastIcaOptions& ica_options) {
  validate(quad);
  Matrix x(4, quad.ch4.size());
  x.row(0) = quad.ch4.transpose();
  x.row(1) = quad.ch5.transpose();
  x.row(2) = -quad.ch6.transpose();
  x.row(3) = quad.ch7.transpose();

  // Four sensors see two EOG sources plus several EEG processes, so the
  // non-EOG components are Gaussian-like and their rotation is arbitrary. The
  // reconstruction only depends on the removed rows, which must converge.
  FastIcaOptions options = ica_options;
  if (options.min_converged_rows == 0) options.min_converged_rows = static_cast<int>(std::min<std::size_t>(flag.max_components, 4));
  const UnmixingResult ica = fastica(x, 4, seed, options);
  const EogPair templates = separate_minus(quad);

  ForeheadEeg out;
  out.report.unmixing = ica.unmixing;
  out.report.mixing_inverse = ica.mixing_inverse;
  out.report.eog_component_indices = flag_eog_components(ica.components, templates, flag);
  for (int i : out.report.eog_component_indices) {
    if (!(ica.row_delta[i] < options.tolerance)) {
      throw Error(ErrorCode::ConvergenceFailure, "fastica: EOG component " + std::to_string(i) +
                                                     " did not converge (delta " + std::to_string(ica.row_delta[i]) +
                                                     ")");
    }
  }
  for (int i = 0; i < 4; ++i) {
    if (!out.report.eog_component_indices.contains(i)) out.report.retained_indices.insert(i);
  }
  out.report.iterations = ica.iterations;
  out.report.final_delta = ica.final_delta;
  out.eeg = make_recording(reconstruct_without(ica, out.report.eog_component_indices), {"ch4", "ch5", "ch6n", "ch7"},
                           quad.sample_rate_hz);
  return out;
}

double differential_entropy(double variance) {
  if (!(variance > 0.0)) throw Error(ErrorCode::NonpositiveVariance, "differential entropy needs a positive variance");
  return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * variance);
}

MultichannelRecording preprocess_eeg(const MultichannelRecording& rec, const PreprocessOptions& options) {
  return dsp::resample(dsp::bandpass(rec, options.band), options.target_rate_hz);
}

std::vector<DeFeatureVector> extract_de_features(const MultichannelRecording& rec, Banding banding,
                                                 const WindowSpec& windows) {
  validate(rec);
  const auto& bands = bands_for(banding);
  for (const Band& b : bands) validate(b, rec.sample_rate_hz);
  const auto starts = dsp::window_starts(rec.length(), rec.sample_rate_hz, windows);
  const auto win = static_cast<Eigen::Index>(std::llround(windows.length_s * rec.sample_rate_hz));

  kernels::BandPowerRequest req{&rec.samples, starts, win, rec.sample_rate_hz, bands};
  const Matrix powers = kernels::omp::band_powers(req);

  const Eigen::Index channels = rec.channels();
  const auto nb = static_cast<Eigen::Index>(bands.size());
  std::vector<DeFeatureVector> out(starts.size());
  for (std::size_t w = 0; w < starts.size(); ++w) {
    auto& v = out[w];
    v.banding = banding;
    v.window_start_s = rec.start_time_s + static_cast<double>(starts[w]) / rec.sample_rate_hz;
    v.values.resize(static_cast<std::size_t>(channels * nb));
    for (Eigen::Index c = 0; c < channels; ++c)
      for (Eigen::Index b = 0; b < nb; ++b)
        v.values[static_cast<std::size_t>(c * nb + b)] =
            differential_entropy(powers(static_cast<Eigen::Index>(w) * channels + c, b));
  }
  return out;
}

std::vector<std::string> de_feature_names(const std::vector<std::string>& channels, Banding banding) {
  const auto labels = band_labels(banding);
  std::vector<std::string> names;
  for (const auto& c : channels)
    for (const auto& l : labels) names.push_back(c + "_" + l);
  return names;
}

const std::vector<std::string>& site_channels(std::string_view site) {
  static const std::vector<std::string> forehead = {"ch4", "ch5", "ch6", "ch7"};
  static const std::vector<std::string> temporal = {"FT7", "FT8", "T7", "T8", "TP7", "TP8"};
  static const std::vector<std::string> posterior = {"CP1", "CPZ", "CP2", "P1", "PZ", "P2",
                                                     "PO3", "POZ", "PO4", "O1", "OZ", "O2"};
  if (site == "forehead4") return forehead;
  if (site == "temporal6") return temporal;
  if (site == "posterior12") return posterior;
  throw Error(ErrorCode::InvalidConfig, "unknown site '" + std::string(site) + "'");
}

}  // namespace vigil
