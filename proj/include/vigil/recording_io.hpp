#pragma once

#include "vigil/recording.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace vigil::io {

// CSV recordings: header `time_s,<chan>...`, one row per sample, plus a
// sidecar `<path>.meta` holding `sample_rate_hz=<value>`. Without a sidecar
// the rate is inferred from the time column.
void write_recording_csv(const std::filesystem::path& path, const MultichannelRecording& rec);
MultichannelRecording read_recording_csv(const std::filesystem::path& path);

// Binary recordings (little-endian):
//   char[4] "VGRB" | u32 channels | f64 sample_rate_hz | u64 samples
//   then per channel: u16 name length + name bytes
//   then f32 samples, channel-major.
void write_recording_binary(const std::filesystem::path& path, const MultichannelRecording& rec);
MultichannelRecording read_recording_binary(const std::filesystem::path& path);

// Dispatches on extension: `.vgrb` is binary, anything else CSV.
MultichannelRecording read_recording(const std::filesystem::path& path);
void write_recording(const std::filesystem::path& path, const MultichannelRecording& rec);

// Plain CSV tables with a header row. Cells are kept as text.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  Eigen::Index column_index(const std::string& name) const;
  std::vector<double> numeric_column(const std::string& name) const;
  // All columns except those named in `skip`, as a [rows x cols] matrix.
  Matrix numeric_block(const std::vector<std::string>& skip, std::vector<std::string>* names = nullptr) const;
};

Table read_table(const std::filesystem::path& path);
void write_table(const std::filesystem::path& path, const std::vector<std::string>& columns, const Matrix& values,
                 const std::vector<std::string>& comments = {});

double parse_double(const std::string& text);
std::string format_double(double v);

}  // namespace vigil::io
