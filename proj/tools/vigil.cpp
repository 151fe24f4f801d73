// vigil command-line driver.
#include "vigil/bundle.hpp"
#include "vigil/config.hpp"
#include "vigil/eeg.hpp"
#include "vigil/eog_features.hpp"
#include "vigil/error.hpp"
#include "vigil/eval.hpp"
#include "vigil/events.hpp"
#include "vigil/features.hpp"
#include "vigil/labels.hpp"
#include "vigil/models.hpp"
#include "vigil/pipeline.hpp"
#include "vigil/recording_io.hpp"
#include "vigil/separation.hpp"
#include "vigil/synth.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <omp.h>

#include <cmath>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace vigil;

namespace {

int exit_code(ErrorCode code) {
  switch (category(code)) {
    case ErrorCategory::Config:
      return 2;
    case ErrorCategory::Data:
      return 3;
    case ErrorCategory::Numerical:
      return 4;
  }
  return 1;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  out << text;
}

std::size_t window_count(double duration_s, double window_s) {
  if (!(duration_s > 0.0) || !(window_s > 0.0)) throw Error(ErrorCode::InvalidConfig, "duration and window must be positive");
  return static_cast<std::size_t>(std::floor(duration_s / window_s + 1e-9));
}

std::vector<Eigen::Index> sessions_for(Eigen::Index rows, int sessions) {
  if (sessions < 1) throw Error(ErrorCode::InvalidConfig, "--sessions must be at least 1");
  return split_sessions(rows, sessions);
}

// Feature rows and labels must share window starts.
Eigen::VectorXd aligned_labels(const FeatureTable& features, const std::vector<VigilanceLabel>& labels) {
  if (labels.size() != static_cast<std::size_t>(features.rows())) {
    throw Error(ErrorCode::AlignmentMismatch, "features have " + std::to_string(features.rows()) + " rows, labels " +
                                                  std::to_string(labels.size()));
  }
  Eigen::VectorXd y(features.rows());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (std::abs(labels[i].window_start_s - features.window_start_s[i]) > 1e-6) {
      throw Error(ErrorCode::AlignmentMismatch, "window starts differ at row " + std::to_string(i));
    }
    y[static_cast<Eigen::Index>(i)] = labels[i].perclos;
  }
  return y;
}

struct ConfigArgs {
  std::string path;
  std::vector<std::string> sets;

  void add(CLI::App* app) {
    app->add_option("--config", path, "key-value config file");
    app->add_option("--set", sets, "override as section.key=value")->take_all();
  }
  ExperimentConfig load() const { return load_config(path, sets); }
};

void cmd_synth(std::uint64_t seed, double duration, double rate, const fs::path& out) {
  synth::SynthConfig sc;
  sc.seed = seed;
  sc.duration_s = duration;
  if (rate > 0.0) sc.sample_rate_hz = rate;
  const auto s = synth::generate(sc);
  fs::create_directories(out);
  io::write_recording(out / "forehead.csv", quad_to_recording(s.quad));
  io::write_recording(out / "posterior.csv", s.posterior);
  io::write_recording(out / "temporal.csv", s.temporal);
  write_gaze_jsonl(out / "gaze.jsonl", s.gaze);
  write_events_jsonl(out / "truth_events.jsonl", s.truth_events,
                     {{"vigil", VIGIL_VERSION}, {"seed", std::to_string(seed)}});
  std::vector<VigilanceLabel> truth;
  for (std::size_t i = 0; i < s.windows(); ++i) {
    const double p = s.truth_perclos[i];
    truth.push_back({p, split_states(p), static_cast<double>(i) * sc.window_s});
  }
  write_labels_csv(out / "truth_perclos.csv", truth,
                   {std::string("vigil ") + VIGIL_VERSION, "synth seed " + std::to_string(seed)});
  // Ready-made experiment config pointing at the files above.
  std::ostringstream ini;
  ini << "[input]\nforehead = forehead.csv\ngaze = gaze.jsonl\ntemporal = temporal.csv\nposterior = posterior.csv\n"
      << "\n[run]\nseed = " << seed << "\n";
  write_text(out / "session.ini", ini.str());
}

void cmd_separate(const fs::path& in, const std::string& method, std::uint64_t seed, const fs::path& out) {
  const ForeheadQuad quad = quad_from_recording(io::read_recording(in));
  const SeparationMethod m = parse_separation_method(method);
  SeparationReport report;
  const EogPair eog = separate(quad, m, seed, {}, &report);
  Matrix samples(2, eog.veo.size());
  samples.row(0) = eog.veo.transpose();
  samples.row(1) = eog.heo.transpose();
  io::write_recording(out, make_recording(std::move(samples), {"veo", "heo"}, eog.sample_rate_hz));
  const nlohmann::json side{{"vigil", VIGIL_VERSION},
                            {"method", to_string(m)},
                            {"seed", seed},
                            {"veo_component", report.veo_component},
                            {"heo_component", report.heo_component},
                            {"veo_iterations", report.veo_iterations},
                            {"heo_iterations", report.heo_iterations},
                            {"veo_delta", report.veo_delta},
                            {"heo_delta", report.heo_delta}};
  write_text(fs::path(out.string() + ".json"), side.dump(2) + "\n");
}

EogPair read_eog(const fs::path& in) {
  const auto rec = io::read_recording(in);
  EogPair eog;
  eog.sample_rate_hz = rec.sample_rate_hz;
  bool veo = false, heo = false;
  for (std::size_t i = 0; i < rec.channel_names.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    if (rec.channel_names[i] == "veo") eog.veo = rec.samples.row(row).transpose(), veo = true;
    if (rec.channel_names[i] == "heo") eog.heo = rec.samples.row(row).transpose(), heo = true;
  }
  if (!veo || !heo) throw Error(ErrorCode::InvalidRecording, in.string() + ": needs channels veo and heo");
  return eog;
}

void cmd_detect(const fs::path& in, double rate, const fs::path& out) {
  const EogPair det = to_detection_rate(read_eog(in), rate);
  write_events_jsonl(out, to_timed(detect_eye_events(det), det.sample_rate_hz), {{"vigil", VIGIL_VERSION}});
}

void cmd_eog_features(const fs::path& in, double duration, double window, const fs::path& out) {
  const auto events = read_events_jsonl(in);
  write_feature_csv(out, eog_table(extract_eog_feature_series(events, window, window_count(duration, window))),
                    {std::string("vigil ") + VIGIL_VERSION});
}

MultichannelRecording select_channels(const MultichannelRecording& rec, const std::vector<std::string>& names) {
  Matrix samples(static_cast<Eigen::Index>(names.size()), rec.samples.cols());
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto it = std::find(rec.channel_names.begin(), rec.channel_names.end(), names[k]);
    if (it == rec.channel_names.end()) throw Error(ErrorCode::InvalidRecording, "missing channel " + names[k]);
    samples.row(static_cast<Eigen::Index>(k)) = rec.samples.row(it - rec.channel_names.begin());
  }
  return make_recording(std::move(samples), names, rec.sample_rate_hz, rec.start_time_s);
}

void cmd_eeg_features(const fs::path& in, const std::string& site, const std::string& banding, double window,
                      std::uint64_t seed, const fs::path& out) {
  const auto rec = io::read_recording(in);
  MultichannelRecording eeg;
  if (site == "forehead4") {
    eeg = reconstruct_forehead_eeg(quad_from_recording(rec), seed).eeg;
  } else if (site == "all") {
    eeg = rec;
  } else {
    eeg = select_channels(rec, site_channels(site));
  }
  const auto pre = preprocess_eeg(eeg);
  write_feature_csv(out, de_table(extract_de_features(pre, parse_banding(banding), WindowSpec{window, 0.0}),
                                  pre.channel_names),
                    {std::string("vigil ") + VIGIL_VERSION});
}

void cmd_label(const fs::path& gaze, double duration, double window, const fs::path& out) {
  const auto stream = read_gaze_jsonl(gaze);
  write_labels_csv(out, label_windows(stream, window, window_count(duration, window)),
                   {std::string("vigil ") + VIGIL_VERSION});
}

void cmd_fuse(const std::vector<std::string>& inputs, const fs::path& out) {
  if (inputs.size() < 2) throw Error(ErrorCode::InvalidConfig, "fuse needs at least two feature tables");
  FeatureTable t = read_feature_csv(inputs[0]);
  for (std::size_t i = 1; i < inputs.size(); ++i) t = fuse(t, read_feature_csv(inputs[i]));
  write_feature_csv(out, t, {std::string("vigil ") + VIGIL_VERSION});
}

void cmd_train(const fs::path& features, const fs::path& labels, const std::string& model, int k1, std::uint64_t seed,
               int sessions, const ConfigArgs& cfg, const fs::path& out) {
  ExperimentConfig c = cfg.load();
  if (k1 > 0) c.model.crf.k1 = {k1};
  c.model.crf.seed = seed;
  const FeatureTable t = read_feature_csv(features);
  const Eigen::VectorXd y = aligned_labels(t, read_labels_csv(labels));
  const auto lengths = sessions_for(t.rows(), sessions);
  const TrainedModel m = train_model(parse_model_kind(model), t.values, y, lengths, t.names, c.model);
  save_bundle(out, m, config_hash(c));
}

void cmd_predict(const fs::path& model_path, const fs::path& features, int sessions, const fs::path& out) {
  const TrainedModel m = load_bundle(model_path);
  const FeatureTable t = read_feature_csv(features);
  if (manifest_hash(t.names) != m.manifest_hash) {
    throw Error(ErrorCode::DimensionMismatch, "feature columns do not match the model's manifest");
  }
  const Eigen::VectorXd p = predict_model(m, t.values, sessions_for(t.rows(), sessions));
  const Eigen::VectorXd clipped = clip_unit(p);
  Matrix block(t.rows(), 3);
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    block.row(i) << t.window_start_s[static_cast<std::size_t>(i)], p[i], clipped[i];
  }
  io::write_table(out, {"window_start_s", "prediction", "prediction_clipped"}, block,
                  {std::string("vigil ") + VIGIL_VERSION, "model " + m.manifest_hash});
}

void apply_jobs(int cli_jobs, int config_jobs) {
  const int jobs = cli_jobs > 0 ? cli_jobs : config_jobs;
  if (jobs > 0) omp_set_num_threads(jobs);
}

void print_summary(const ExperimentResult& r) {
  for (const auto& fr : r.reports) {
    std::cout << fr.modality << " " << fr.model << "  COR ";
    if (fr.cor.value) {
      std::cout << *fr.cor.value;
    } else {
      std::cout << "undefined (" << fr.cor.undefined_reason << ")";
    }
    std::cout << "  RMSE " << fr.rmse_concatenated << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vigil: vigilance estimation from forehead EOG and EEG"};
  app.require_subcommand(1);
  app.set_version_flag("--version", VIGIL_VERSION);
  int jobs = 0;
  app.add_option("--jobs", jobs, "worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);

  auto* synth = app.add_subcommand("synth", "generate a synthetic session");
  std::uint64_t synth_seed = 7;
  double synth_duration = 1800.0, synth_rate = 0.0;
  std::string synth_out;
  synth->add_option("--seed", synth_seed);
  synth->add_option("--duration", synth_duration, "seconds");
  synth->add_option("--rate", synth_rate, "sample rate in Hz (default 200)");
  synth->add_option("--out", synth_out)->required();

  auto* sep = app.add_subcommand("separate", "extract VEO/HEO from a forehead recording");
  std::string sep_in, sep_method = "ica-minus", sep_out;
  std::uint64_t sep_seed = 7;
  sep->add_option("--in", sep_in)->required();
  sep->add_option("--method", sep_method, "minus, ica or ica-minus");
  sep->add_option("--seed", sep_seed);
  sep->add_option("--out", sep_out)->required();

  auto* det = app.add_subcommand("detect", "detect blinks and saccades");
  std::string det_in, det_out;
  double det_rate = kDefaultDetectionRateHz;
  det->add_option("--in", det_in)->required();
  det->add_option("--rate", det_rate, "detection sample rate in Hz");
  det->add_option("--out", det_out)->required();

  auto* eogf = app.add_subcommand("eog-features", "36 EOG features per window");
  std::string eogf_in, eogf_out;
  double eogf_duration = 0.0, eogf_window = 8.0;
  eogf->add_option("--events", eogf_in)->required();
  eogf->add_option("--duration", eogf_duration, "recording length in seconds")->required();
  eogf->add_option("--window", eogf_window);
  eogf->add_option("--out", eogf_out)->required();

  auto* eegf = app.add_subcommand("eeg-features", "differential entropy features");
  std::string eegf_in, eegf_site = "forehead4", eegf_banding = "2hz", eegf_out;
  double eegf_window = 8.0;
  std::uint64_t eegf_seed = 7;
  eegf->add_option("--in", eegf_in)->required();
  eegf->add_option("--site", eegf_site, "forehead4, temporal6, posterior12 or all");
  eegf->add_option("--banding", eegf_banding, "5band or 2hz");
  eegf->add_option("--window", eegf_window);
  eegf->add_option("--seed", eegf_seed, "ICA seed for forehead4");
  eegf->add_option("--out", eegf_out)->required();

  auto* lab = app.add_subcommand("label", "PERCLOS labels from a gaze stream");
  std::string lab_in, lab_out;
  double lab_duration = 0.0, lab_window = 8.0;
  lab->add_option("--gaze", lab_in)->required();
  lab->add_option("--duration", lab_duration, "recording length in seconds")->required();
  lab->add_option("--window", lab_window);
  lab->add_option("--out", lab_out)->required();

  auto* fus = app.add_subcommand("fuse", "concatenate feature tables column-wise");
  std::vector<std::string> fus_in;
  std::string fus_out;
  fus->add_option("inputs", fus_in)->required()->expected(2, -1);
  fus->add_option("--out", fus_out)->required();

  auto* tr = app.add_subcommand("train", "train a model bundle");
  std::string tr_features, tr_labels, tr_model = "svr", tr_out;
  int tr_k1 = 0, tr_sessions = kFolds;
  std::uint64_t tr_seed = 7;
  ConfigArgs tr_cfg;
  tr->add_option("--features", tr_features)->required();
  tr->add_option("--labels", tr_labels)->required();
  tr->add_option("--model", tr_model, "svr, ccrf or ccnf");
  tr->add_option("--k1", tr_k1, "CCNF neurons (overrides the grid)");
  tr->add_option("--seed", tr_seed);
  tr->add_option("--sessions", tr_sessions, "equal contiguous sessions in the data");
  tr_cfg.add(tr);
  tr->add_option("--out", tr_out)->required();

  auto* pr = app.add_subcommand("predict", "predict with a model bundle");
  std::string pr_model, pr_features, pr_out;
  int pr_sessions = 1;
  pr->add_option("--model", pr_model)->required();
  pr->add_option("--features", pr_features)->required();
  pr->add_option("--sessions", pr_sessions, "sequence chunking never crosses sessions");
  pr->add_option("--out", pr_out)->required();

  auto* ev = app.add_subcommand("eval", "five-fold evaluation, report only");
  ConfigArgs ev_cfg;
  std::string ev_out, ev_series;
  ev_cfg.add(ev);
  ev->add_option("--out", ev_out, "report JSON path")->required();
  ev->add_option("--series", ev_series, "also write prediction CSVs and tables into this directory");

  auto* run = app.add_subcommand("run", "full experiment with all outputs");
  ConfigArgs run_cfg;
  std::string run_out;
  run_cfg.add(run);
  run->add_option("--out", run_out, "output directory (overrides run.out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    apply_jobs(jobs, 0);
    if (*synth) cmd_synth(synth_seed, synth_duration, synth_rate, synth_out);
    if (*sep) cmd_separate(sep_in, sep_method, sep_seed, sep_out);
    if (*det) cmd_detect(det_in, det_rate, det_out);
    if (*eogf) cmd_eog_features(eogf_in, eogf_duration, eogf_window, eogf_out);
    if (*eegf) cmd_eeg_features(eegf_in, eegf_site, eegf_banding, eegf_window, eegf_seed, eegf_out);
    if (*lab) cmd_label(lab_in, lab_duration, lab_window, lab_out);
    if (*fus) cmd_fuse(fus_in, fus_out);
    if (*tr) cmd_train(tr_features, tr_labels, tr_model, tr_k1, tr_seed, tr_sessions, tr_cfg, tr_out);
    if (*pr) cmd_predict(pr_model, pr_features, pr_sessions, pr_out);
    if (*ev) {
      ExperimentConfig c = ev_cfg.load();
      apply_jobs(jobs, c.jobs);
      if (!ev_series.empty()) c.out_dir = ev_series;
      const auto r = run_experiment(c, !ev_series.empty());
      write_text(ev_out, r.report_json);
      print_summary(r);
    }
    if (*run) {
      ExperimentConfig c = run_cfg.load();
      apply_jobs(jobs, c.jobs);
      if (!run_out.empty()) c.out_dir = run_out;
      const auto r = run_experiment(c, true);
      print_summary(r);
      std::cout << "wrote " << c.out_dir.string() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "vigil: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "vigil: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
