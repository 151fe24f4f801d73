#include "vigil/labels.hpp"

#include "vigil/error.hpp"
#include "vigil/recording_io.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>

namespace vigil {

std::string_view to_string(GazeKind kind) {
  switch (kind) {
    case GazeKind::Blink: return "blink";
    case GazeKind::Fixation: return "fixation";
    case GazeKind::Saccade: return "saccade";
    case GazeKind::Clos: return "clos";
  }
  return "unknown";
}

GazeKind parse_gaze_kind(std::string_view text) {
  if (text == "blink") return GazeKind::Blink;
  if (text == "fixation") return GazeKind::Fixation;
  if (text == "saccade") return GazeKind::Saccade;
  if (text == "clos" || text == "CLOS") return GazeKind::Clos;
  throw Error(ErrorCode::Parse, "unknown gaze event kind '" + std::string(text) + "'");
}

std::string_view to_string(VigilanceState state) {
  switch (state) {
    case VigilanceState::Awake: return "awake";
    case VigilanceState::Tired: return "tired";
    case VigilanceState::Drowsy: return "drowsy";
  }
  return "unknown";
}

double perclos(std::span<const GazeEvent> stream, double t0, double t1, GapPolicy gaps) {
  if (!(t1 > t0)) throw Error(ErrorCode::EmptyInterval, "PERCLOS window must have positive length");
  double closed = 0.0;
  double covered = 0.0;
  for (const auto& e : stream) {
    const double a = std::max(e.start_s, t0);
    const double b = std::min(e.end_s, t1);
    if (!(b > a)) continue;
    const double d = b - a;
    covered += d;
    if (e.kind == GazeKind::Blink || e.kind == GazeKind::Clos) closed += d;
  }
  const double interval = gaps == GapPolicy::AsFixation ? std::max(covered, t1 - t0) : covered;
  if (!(interval > 0.0)) throw Error(ErrorCode::EmptyInterval, "no gaze events inside the window");
  return std::clamp(closed / interval, 0.0, 1.0);
}

VigilanceState split_states(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::OutOfRange, "PERCLOS must lie in [0, 1]");
  if (p < kTiredThreshold) return VigilanceState::Awake;
  if (p < kDrowsyThreshold) return VigilanceState::Tired;
  return VigilanceState::Drowsy;
}

std::vector<VigilanceLabel> label_windows(std::span<const GazeEvent> stream, double window_s, std::size_t windows,
                                          double t0, GapPolicy gaps) {
  std::vector<VigilanceLabel> labels;
  labels.reserve(windows);
  for (std::size_t w = 0; w < windows; ++w) {
    const double a = t0 + static_cast<double>(w) * window_s;
    const double p = perclos(stream, a, a + window_s, gaps);
    labels.push_back(VigilanceLabel{p, split_states(p), a});
  }
  return labels;
}

std::vector<double> smooth_perclos(std::span<const double> series, std::size_t width) {
  if (width % 2 == 0) throw Error(ErrorCode::InvalidConfig, "smoothing width must be odd");
  const std::size_t half = width / 2;
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t a = i >= half ? i - half : 0;
    const std::size_t b = std::min(series.size() - 1, i + half);
    double acc = 0.0;
    for (std::size_t k = a; k <= b; ++k) acc += series[k];
    out[i] = acc / static_cast<double>(b - a + 1);
  }
  return out;
}

void write_gaze_jsonl(const std::filesystem::path& path, std::span<const GazeEvent> stream) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  for (const auto& e : stream) {
    out << nlohmann::json{{"kind", to_string(e.kind)}, {"start_s", e.start_s}, {"end_s", e.end_s}}.dump() << '\n';
  }
}

std::vector<GazeEvent> read_gaze_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  std::vector<GazeEvent> stream;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      GazeEvent e{parse_gaze_kind(j.at("kind").get<std::string>()), j.at("start_s").get<double>(),
                  j.at("end_s").get<double>()};
      if (!(e.end_s > e.start_s)) throw Error(ErrorCode::Parse, "gaze event with end_s <= start_s");
      stream.push_back(e);
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::Parse, path.string() + ": " + ex.what());
    }
  }
  return stream;
}

void write_labels_csv(const std::filesystem::path& path, std::span<const VigilanceLabel> labels,
                      const std::vector<std::string>& comments) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "window_start_s,perclos,state\n";
  for (const auto& l : labels) {
    out << io::format_double(l.window_start_s) << ',' << io::format_double(l.perclos) << ',' << to_string(l.state)
        << '\n';
  }
}

std::vector<VigilanceLabel> read_labels_csv(const std::filesystem::path& path) {
  const auto table = io::read_table(path);
  const auto starts = table.numeric_column("window_start_s");
  const auto values = table.numeric_column("perclos");
  std::vector<VigilanceLabel> labels;
  for (std::size_t i = 0; i < values.size(); ++i) labels.push_back({values[i], split_states(values[i]), starts[i]});
  return labels;
}

}  // namespace vigil
