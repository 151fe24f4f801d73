#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vigil {

enum class GazeKind { Blink, Fixation, Saccade, Clos };

std::string_view to_string(GazeKind kind);
GazeKind parse_gaze_kind(std::string_view text);

struct GazeEvent {
  GazeKind kind = GazeKind::Fixation;
  double start_s = 0.0;
  double end_s = 0.0;
};

enum class VigilanceState { Awake, Tired, Drowsy };

std::string_view to_string(VigilanceState state);

struct VigilanceLabel {
  double perclos = 0.0;
  VigilanceState state = VigilanceState::Awake;
  double window_start_s = 0.0;
};

enum class GapPolicy { AsFixation, Drop };

// (blink + CLOS) / (blink + fixation + saccade + CLOS) inside [t0, t1),
// events clipped to the window. Throws EmptyInterval on a zero denominator.
double perclos(std::span<const GazeEvent> stream, double t0_s, double t1_s, GapPolicy gaps = GapPolicy::AsFixation);

inline constexpr double kTiredThreshold = 0.35;
inline constexpr double kDrowsyThreshold = 0.7;

// AWAKE < 0.35 <= TIRED < 0.7 <= DROWSY; throws OutOfRange outside [0, 1].
VigilanceState split_states(double perclos);

std::vector<VigilanceLabel> label_windows(std::span<const GazeEvent> stream, double window_s, std::size_t windows,
                                          double t0_s = 0.0, GapPolicy gaps = GapPolicy::AsFixation);

// Centered moving average of odd width; width 1 is the identity.
std::vector<double> smooth_perclos(std::span<const double> series, std::size_t width);

void write_gaze_jsonl(const std::filesystem::path& path, std::span<const GazeEvent> stream);
std::vector<GazeEvent> read_gaze_jsonl(const std::filesystem::path& path);

// CSV `window_start_s,perclos,state`.
void write_labels_csv(const std::filesystem::path& path, std::span<const VigilanceLabel> labels,
                      const std::vector<std::string>& comments = {});
std::vector<VigilanceLabel> read_labels_csv(const std::filesystem::path& path);

}  // namespace vigil
