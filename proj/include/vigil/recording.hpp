#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace vigil {

using Signal = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Samples are stored [channels x time] in microvolts.
struct MultichannelRecording {
  Matrix samples;
  std::vector<std::string> channel_names;
  double sample_rate_hz = 0.0;
  double start_time_s = 0.0;

  Eigen::Index channels() const { return samples.rows(); }
  Eigen::Index length() const { return samples.cols(); }
  double duration_s() const { return static_cast<double>(length()) / sample_rate_hz; }

  // Row index of a named channel; throws InvalidRecording when absent.
  Eigen::Index channel_index(const std::string& name) const;
  Signal channel(const std::string& name) const;
};

// Throws InvalidRecording on shape mismatch, nonpositive rate or NaN/Inf.
void validate(const MultichannelRecording& rec);

MultichannelRecording make_recording(Matrix samples, std::vector<std::string> names, double rate_hz,
                                     double start_time_s = 0.0);

struct Band {
  double low_hz = 0.0;
  double high_hz = 0.0;
};

struct WindowSpec {
  double length_s = 8.0;
  double overlap_s = 0.0;
};

// Band edges must satisfy 0 <= low < high <= nyquist.
void validate(const Band& band, double sample_rate_hz);

}  // namespace vigil
