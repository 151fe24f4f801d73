#include "vigil/pipeline.hpp"

#include "vigil/dsp.hpp"
#include "vigil/eeg.hpp"
#include "vigil/eog_features.hpp"
#include "vigil/error.hpp"
#include "vigil/recording_io.hpp"
#include "vigil/synth.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>

namespace vigil {

namespace {

template <typename Fn>
auto stage(const std::string& name, const std::string& context, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), "stage " + name + (context.empty() ? "" : " (" + context + ")") + ": " + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw Error(ErrorCode::Io, "stage " + name + ": " + e.what());
  }
}

std::string site_of(const std::string& modality) {
  const auto dash = modality.find('-');
  return modality.substr(dash + 1);
}

bool needs_eog(const std::vector<std::string>& modalities) {
  for (const auto& m : modalities) {
    if (m == "eog" || m.starts_with("fusion-")) return true;
  }
  return false;
}

bool needs_site(const std::vector<std::string>& modalities, const std::string& site) {
  for (const auto& m : modalities) {
    if ((m.starts_with("eeg-") || m.starts_with("fusion-")) && site_of(m) == site) return true;
  }
  return false;
}

FeatureTable truncate(FeatureTable t, std::size_t rows) {
  const auto r = static_cast<Eigen::Index>(rows);
  if (t.rows() < r) throw Error(ErrorCode::AlignmentMismatch, "feature table shorter than the label series");
  t.values.conservativeResize(r, Eigen::NoChange);
  t.window_start_s.resize(rows);
  return t;
}

FeatureTable site_table(const MultichannelRecording& rec, const ExperimentConfig& c) {
  const auto pre = preprocess_eeg(rec, PreprocessOptions{{1.0, 75.0}, c.eeg_rate_hz});
  return de_table(extract_de_features(pre, c.banding, WindowSpec{c.window_s, 0.0}), pre.channel_names);
}

nlohmann::json cor_json(const CorResult& r) {
  if (r.value) return *r.value;
  return nlohmann::json{{"undefined", r.undefined_reason}};
}

}  // namespace

std::vector<std::string> provenance_comments(const std::string& hash) {
  return {std::string("vigil ") + VIGIL_VERSION, "config_hash " + hash};
}

SessionInputs load_inputs(const ExperimentConfig& c) {
  SessionInputs in;
  if (c.forehead.empty()) {
    return stage("synth", "", [&] {
      synth::SynthConfig sc;
      sc.duration_s = c.synthetic_duration_s;
      sc.seed = c.seed;
      sc.window_s = c.window_s;
      sc.scalp_sites = needs_site(c.modalities, "temporal") || needs_site(c.modalities, "posterior");
      auto s = synth::generate(sc);
      in.quad = std::move(s.quad);
      if (sc.scalp_sites) {
        in.temporal = std::move(s.temporal);
        in.posterior = std::move(s.posterior);
      }
      in.gaze = std::move(s.gaze);
      in.duration_s = sc.duration_s;
      in.synthetic = true;
      return in;
    });
  }
  stage("load", c.forehead.string(), [&] {
    const auto rec = io::read_recording(c.forehead);
    in.quad = quad_from_recording(rec);
    in.duration_s = rec.duration_s();
  });
  if (!c.gaze.empty()) stage("load", c.gaze.string(), [&] { in.gaze = read_gaze_jsonl(c.gaze); });
  if (!c.labels.empty()) stage("load", c.labels.string(), [&] { in.labels = read_labels_csv(c.labels); });
  if (!c.temporal.empty()) stage("load", c.temporal.string(), [&] { in.temporal = io::read_recording(c.temporal); });
  if (!c.posterior.empty()) {
    stage("load", c.posterior.string(), [&] { in.posterior = io::read_recording(c.posterior); });
  }
  return in;
}

PreparedData prepare(const ExperimentConfig& c, const SessionInputs& in) {
  PreparedData d;
  d.windows = static_cast<std::size_t>(std::floor(in.duration_s / c.window_s + 1e-9));
  if (d.windows < static_cast<std::size_t>(kFolds)) {
    throw Error(ErrorCode::RecordingTooShort, "stage windows: fewer windows than folds");
  }
  if (!in.labels.empty()) {
    // Recordings often run a little past the last labelled window.
    d.windows = std::min(d.windows, in.labels.size());
    if (d.windows < static_cast<std::size_t>(kFolds)) {
      throw Error(ErrorCode::RecordingTooShort, "stage label: fewer labelled windows than folds");
    }
    d.labels.assign(in.labels.begin(), in.labels.begin() + static_cast<std::ptrdiff_t>(d.windows));
    for (std::size_t i = 0; i < d.windows; ++i) {
      if (std::abs(d.labels[i].window_start_s - static_cast<double>(i) * c.window_s) > 1e-6 * c.window_s) {
        throw Error(ErrorCode::AlignmentMismatch, "stage label: label rows do not follow the window grid");
      }
    }
  } else {
    d.labels = stage("label", c.gaze.string(), [&] { return label_windows(in.gaze, c.window_s, d.windows); });
  }

  if (needs_eog(c.modalities)) {
    const EogPair eog = stage("separate", std::string(to_string(c.separation)),
                              [&] { return separate(in.quad, c.separation, c.seed, {}, &d.separation); });
    d.events = stage("detect", "", [&] {
      const EogPair det = to_detection_rate(eog, c.detection_rate_hz);
      return to_timed(detect_eye_events(det), det.sample_rate_hz);
    });
    d.tables["eog"] = stage("eog-features", "", [&] {
      return eog_table(extract_eog_feature_series(d.events, c.window_s, d.windows));
    });
  }
  if (needs_site(c.modalities, "forehead")) {
    d.tables["eeg-forehead"] = stage("eeg-features", "forehead", [&] {
      const auto fh = reconstruct_forehead_eeg(in.quad, c.seed);
      return site_table(fh.eeg, c);
    });
  }
  for (const std::string site : {"temporal", "posterior"}) {
    if (!needs_site(c.modalities, site)) continue;
    const auto& rec = site == "temporal" ? in.temporal : in.posterior;
    if (!rec) throw Error(ErrorCode::InvalidConfig, "modality needs input." + site);
    d.tables["eeg-" + site] = stage("eeg-features", site, [&] { return site_table(*rec, c); });
  }
  for (auto& [name, table] : d.tables) table = truncate(std::move(table), d.windows);
  for (const auto& m : c.modalities) {
    if (m.starts_with("fusion-")) {
      d.tables[m] = stage("fuse", m, [&] { return fuse(d.tables.at("eog"), d.tables.at("eeg-" + site_of(m))); });
    }
  }
  return d;
}

ExperimentResult run_experiment(const ExperimentConfig& c, bool write_outputs) {
  const std::string hash = config_hash(c);
  const auto comments = provenance_comments(hash);
  ExperimentResult r;
  const SessionInputs in = load_inputs(c);
  r.data = prepare(c, in);
  const auto& d = r.data;
  r.session_lengths = split_sessions(static_cast<Eigen::Index>(d.windows), kFolds);

  Eigen::VectorXd y(static_cast<Eigen::Index>(d.windows));
  for (std::size_t i = 0; i < d.windows; ++i) y[static_cast<Eigen::Index>(i)] = d.labels[i].perclos;

  nlohmann::json report;
  report["version"] = VIGIL_VERSION;
  report["config_hash"] = hash;
  report["config"] = c.entries;
  report["config"].erase("run.out");
  report["config"].erase("run.jobs");
  report["windows"] = d.windows;
  report["session_lengths"] = r.session_lengths;
  report["synthetic"] = in.synthetic;
  report["events"] = {{"blinks", std::count_if(d.events.begin(), d.events.end(),
                                               [](const auto& e) { return e.kind == EyeEventKind::Blink; })},
                      {"saccades", std::count_if(d.events.begin(), d.events.end(),
                                                 [](const auto& e) { return e.kind == EyeEventKind::Saccade; })}};
  report["results"] = nlohmann::json::array();

  for (const auto& modality : c.modalities) {
    const FeatureTable& t = d.tables.at(modality);
    for (ModelKind kind : c.models) {
      const std::string model(to_string(kind));
      FoldReport fr = stage("eval", modality + "/" + model, [&] {
        return five_fold_model(kind, t.values, y, r.session_lengths, t.names, c.model);
      });
      fr.modality = modality;
      const Eigen::VectorXd clipped = clip_unit(fr.predictions);
      const auto graph = confusion({clipped.data(), static_cast<std::size_t>(clipped.size())},
                                   {y.data(), static_cast<std::size_t>(y.size())});
      nlohmann::json rates = nlohmann::json::array();
      for (int i = 0; i < 3; ++i) rates.push_back({graph.rates(i, 0), graph.rates(i, 1), graph.rates(i, 2)});
      report["results"].push_back({{"modality", modality},
                                   {"model", model},
                                   {"dims", t.dims()},
                                   {"feature_manifest_hash", manifest_hash(t.names)},
                                   {"fold_rmse", fr.fold_rmse},
                                   {"rmse_mean", fr.rmse_mean},
                                   {"rmse_std", fr.rmse_std},
                                   {"rmse_concatenated", fr.rmse_concatenated},
                                   {"cor", cor_json(fr.cor)},
                                   {"metrics_on_clipped_predictions", fr.metrics_clipped},
                                   {"fold_of_session", fr.fold_of_session},
                                   {"confusion", rates},
                                   {"warnings", fr.warnings}});
      if (write_outputs) {
        stage("write", "predictions", [&] {
          Matrix block(y.size(), 4);
          for (Eigen::Index i = 0; i < y.size(); ++i) {
            block.row(i) << d.labels[static_cast<std::size_t>(i)].window_start_s, y[i], fr.predictions[i], clipped[i];
          }
          io::write_table(c.out_dir / ("predictions_" + modality + "_" + model + ".csv"),
                          {"window_start_s", "truth", "prediction", "prediction_clipped"}, block, comments);
        });
      }
      r.reports.push_back(std::move(fr));
    }
  }
  r.report_json = report.dump(2) + "\n";

  if (write_outputs) {
    stage("write", c.out_dir.string(), [&] {
      std::filesystem::create_directories(c.out_dir);
      std::ofstream(c.out_dir / "report.json") << r.report_json;
      write_labels_csv(c.out_dir / "labels.csv", d.labels, comments);
      for (const auto& [name, table] : d.tables) {
        if (!name.starts_with("fusion-")) write_feature_csv(c.out_dir / ("features_" + name + ".csv"), table, comments);
      }
      if (!d.events.empty()) {
        write_events_jsonl(c.out_dir / "events.jsonl", d.events, {{"vigil", VIGIL_VERSION}, {"config_hash", hash}});
      }
    });
  }
  return r;
}

}  // namespace vigil
