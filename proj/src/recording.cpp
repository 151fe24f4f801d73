#include "vigil/recording.hpp"

#include "vigil/error.hpp"

#include <algorithm>

namespace vigil {

Eigen::Index MultichannelRecording::channel_index(const std::string& name) const {
  auto it = std::find(channel_names.begin(), channel_names.end(), name);
  if (it == channel_names.end()) {
    throw Error(ErrorCode::InvalidRecording, "no channel named '" + name + "'");
  }
  return static_cast<Eigen::Index>(it - channel_names.begin());
}

Signal MultichannelRecording::channel(const std::string& name) const {
  return samples.row(channel_index(name)).transpose();
}

void validate(const MultichannelRecording& rec) {
  if (!(rec.sample_rate_hz > 0.0)) {
    throw Error(ErrorCode::InvalidRecording, "sample rate must be positive");
  }
  if (static_cast<Eigen::Index>(rec.channel_names.size()) != rec.samples.rows()) {
    throw Error(ErrorCode::InvalidRecording, "channel name count does not match channel count");
  }
  if (!rec.samples.allFinite()) {
    throw Error(ErrorCode::InvalidRecording, "samples contain NaN or Inf");
  }
}

MultichannelRecording make_recording(Matrix samples, std::vector<std::string> names, double rate_hz,
                                     double start_time_s) {
  MultichannelRecording rec{std::move(samples), std::move(names), rate_hz, start_time_s};
  validate(rec);
  return rec;
}

void validate(const Band& band, double sample_rate_hz) {
  const double nyquist = sample_rate_hz / 2.0;
  if (!(band.low_hz >= 0.0) || !(band.low_hz < band.high_hz) || band.high_hz > nyquist) {
    throw Error(ErrorCode::InvalidBand, "band [" + std::to_string(band.low_hz) + ", " +
                                            std::to_string(band.high_hz) +
                                            "] Hz is not inside [0, " + std::to_string(nyquist) + "]");
  }
}

}  // namespace vigil
