#include "vigil/recording_io.hpp"

#include "vigil/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace vigil::io {

namespace {

static_assert(std::endian::native == std::endian::little, "binary recordings assume a little-endian host");

constexpr char kMagic[4] = {'V', 'G', 'R', 'B'};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".meta";
  return p;
}

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw Error(ErrorCode::Parse, "truncated binary recording '" + path.string() + "'");
  }
  return value;
}

}  // namespace

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw Error(ErrorCode::Parse, "not a number: '" + text + "'");
  return v;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void write_recording_csv(const std::filesystem::path& path, const MultichannelRecording& rec) {
  validate(rec);
  auto out = open_out(path);
  out << "time_s";
  for (const auto& name : rec.channel_names) out << ',' << name;
  out << '\n';
  for (Eigen::Index t = 0; t < rec.length(); ++t) {
    out << format_double(rec.start_time_s + static_cast<double>(t) / rec.sample_rate_hz);
    for (Eigen::Index c = 0; c < rec.channels(); ++c) out << ',' << format_double(rec.samples(c, t));
    out << '\n';
  }
  auto meta = open_out(sidecar_path(path));
  meta << "sample_rate_hz=" << format_double(rec.sample_rate_hz) << '\n';
}

MultichannelRecording read_recording_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, "empty recording file '" + path.string() + "'");
  auto header = split_csv_line(line);
  if (header.empty() || header.front() != "time_s") {
    throw Error(ErrorCode::Parse, "recording '" + path.string() + "' must start with a time_s column");
  }
  const std::size_t channels = header.size() - 1;
  std::vector<double> times;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::Parse, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size()) + " cells");
    }
    times.push_back(parse_double(cells[0]));
    for (std::size_t c = 1; c < cells.size(); ++c) values.push_back(parse_double(cells[c]));
  }

  double rate = 0.0;
  if (std::filesystem::exists(sidecar_path(path))) {
    auto meta = open_in(sidecar_path(path));
    while (std::getline(meta, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto key = line.substr(0, eq);
      key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
      if (key == "sample_rate_hz") {
        auto val = line.substr(eq + 1);
        val.erase(std::remove_if(val.begin(), val.end(), ::isspace), val.end());
        rate = parse_double(val);
      }
    }
  } else if (times.size() >= 2) {
    rate = static_cast<double>(times.size() - 1) / (times.back() - times.front());
  }

  const auto n = static_cast<Eigen::Index>(times.size());
  Matrix samples(static_cast<Eigen::Index>(channels), n);
  for (Eigen::Index t = 0; t < n; ++t)
    for (std::size_t c = 0; c < channels; ++c)
      samples(static_cast<Eigen::Index>(c), t) = values[static_cast<std::size_t>(t) * channels + c];
  header.erase(header.begin());
  return make_recording(std::move(samples), std::move(header), rate, times.empty() ? 0.0 : times.front());
}

void write_recording_binary(const std::filesystem::path& path, const MultichannelRecording& rec) {
  validate(rec);
  auto out = open_out(path, std::ios::binary);
  out.write(kMagic, 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(rec.channels()));
  put<double>(out, rec.sample_rate_hz);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(rec.length()));
  for (const auto& name : rec.channel_names) {
    put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  std::vector<float> row(static_cast<std::size_t>(rec.length()));
  for (Eigen::Index c = 0; c < rec.channels(); ++c) {
    for (Eigen::Index t = 0; t < rec.length(); ++t) row[static_cast<std::size_t>(t)] = static_cast<float>(rec.samples(c, t));
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
}

MultichannelRecording read_recording_binary(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorCode::Parse, "'" + path.string() + "' is not a binary recording");
  }
  const auto channels = get<std::uint32_t>(in, path);
  const auto rate = get<double>(in, path);
  const auto samples = get<std::uint64_t>(in, path);
  std::vector<std::string> names;
  for (std::uint32_t c = 0; c < channels; ++c) {
    const auto len = get<std::uint16_t>(in, path);
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw Error(ErrorCode::Parse, "truncated channel names in '" + path.string() + "'");
    names.push_back(std::move(name));
  }
  Matrix data(channels, static_cast<Eigen::Index>(samples));
  std::vector<float> row(samples);
  for (std::uint32_t c = 0; c < channels; ++c) {
    if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(samples * sizeof(float)))) {
      throw Error(ErrorCode::Parse, "truncated sample block in '" + path.string() + "'");
    }
    for (std::uint64_t t = 0; t < samples; ++t) data(c, static_cast<Eigen::Index>(t)) = row[t];
  }
  return make_recording(std::move(data), std::move(names), rate);
}

MultichannelRecording read_recording(const std::filesystem::path& path) {
  return path.extension() == ".vgrb" ? read_recording_binary(path) : read_recording_csv(path);
}

void write_recording(const std::filesystem::path& path, const MultichannelRecording& rec) {
  if (path.extension() == ".vgrb") {
    write_recording_binary(path, rec);
  } else {
    write_recording_csv(path, rec);
  }
}

Eigen::Index Table::column_index(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error(ErrorCode::Parse, "missing column '" + name + "'");
  return static_cast<Eigen::Index>(it - columns.begin());
}

std::vector<double> Table::numeric_column(const std::string& name) const {
  const auto idx = static_cast<std::size_t>(column_index(name));
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(parse_double(r.at(idx)));
  return out;
}

Matrix Table::numeric_block(const std::vector<std::string>& skip, std::vector<std::string>* names) const {
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (std::find(skip.begin(), skip.end(), columns[c]) == skip.end()) keep.push_back(c);
  }
  if (names != nullptr) {
    names->clear();
    for (auto c : keep) names->push_back(columns[c]);
  }
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t k = 0; k < keep.size(); ++k)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = parse_double(rows[r].at(keep[k]));
  return out;
}

Table read_table(const std::filesystem::path& path) {
  auto in = open_in(path);
  Table table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    table.columns = split_csv_line(line);
    break;
  }
  if (table.columns.empty()) throw Error(ErrorCode::Parse, "table '" + path.string() + "' has no header");
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != table.columns.size()) {
      throw Error(ErrorCode::Parse, "row width mismatch in '" + path.string() + "'");
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

void write_table(const std::filesystem::path& path, const std::vector<std::string>& columns, const Matrix& values,
                 const std::vector<std::string>& comments) {
  if (static_cast<Eigen::Index>(columns.size()) != values.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "column names do not match table width");
  }
  auto out = open_out(path);
  for (const auto& c : comments) out << "# " << c << '\n';
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << format_double(values(r, c));
    out << '\n';
  }
}

}  // namespace vigil::io
