#include "vigil/features.hpp"

#include "vigil/digest.hpp"
#include "vigil/error.hpp"
#include "vigil/recording_io.hpp"

#include <cmath>

namespace vigil {

FeatureTable eog_table(const std::vector<EogFeatureVector>& vectors) {
  FeatureTable t;
  for (auto name : eog_feature_manifest()) t.names.emplace_back(name);
  t.values.resize(static_cast<Eigen::Index>(vectors.size()), static_cast<Eigen::Index>(kEogFeatureCount));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (std::size_t j = 0; j < kEogFeatureCount; ++j) {
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vectors[i].values[j];
    }
    t.window_start_s.push_back(vectors[i].window_start_s);
  }
  return t;
}

FeatureTable de_table(const std::vector<DeFeatureVector>& vectors, const std::vector<std::string>& channels) {
  if (vectors.empty()) throw Error(ErrorCode::EmptyInput, "no DE feature vectors");
  FeatureTable t;
  t.names = de_feature_names(channels, vectors.front().banding);
  const auto dims = static_cast<Eigen::Index>(t.names.size());
  t.values.resize(static_cast<Eigen::Index>(vectors.size()), dims);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (static_cast<Eigen::Index>(vectors[i].values.size()) != dims) {
      throw Error(ErrorCode::DimensionMismatch, "DE vector length differs from channel x band count");
    }
    for (Eigen::Index j = 0; j < dims; ++j) t.values(static_cast<Eigen::Index>(i), j) = vectors[i].values[j];
    t.window_start_s.push_back(vectors[i].window_start_s);
  }
  return t;
}

FeatureTable fuse(const FeatureTable& first, const FeatureTable& second) {
  if (first.rows() != second.rows()) {
    throw Error(ErrorCode::AlignmentMismatch, "window counts differ: " + std::to_string(first.rows()) + " vs " +
                                                  std::to_string(second.rows()));
  }
  for (std::size_t i = 0; i < first.window_start_s.size() && i < second.window_start_s.size(); ++i) {
    if (std::abs(first.window_start_s[i] - second.window_start_s[i]) > 1e-6) {
      throw Error(ErrorCode::AlignmentMismatch, "window " + std::to_string(i) + " start times differ");
    }
  }
  FeatureTable t;
  t.names = first.names;
  t.names.insert(t.names.end(), second.names.begin(), second.names.end());
  t.values.resize(first.rows(), first.dims() + second.dims());
  t.values << first.values, second.values;
  t.window_start_s = first.window_start_s.empty() ? second.window_start_s : first.window_start_s;
  return t;
}

std::string manifest_hash(const std::vector<std::string>& names) {
  std::string joined;
  for (const auto& n : names) {
    joined += n;
    joined += '\n';
  }
  return digest::sha256_hex(joined);
}

void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table,
                       const std::vector<std::string>& comments) {
  std::vector<std::string> columns{"window_start_s"};
  columns.insert(columns.end(), table.names.begin(), table.names.end());
  Matrix block(table.rows(), table.dims() + 1);
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    block(i, 0) = static_cast<std::size_t>(i) < table.window_start_s.size() ? table.window_start_s[i] : 0.0;
  }
  block.rightCols(table.dims()) = table.values;
  io::write_table(path, columns, block, comments);
}

FeatureTable read_feature_csv(const std::filesystem::path& path) {
  const auto raw = io::read_table(path);
  FeatureTable t;
  t.values = raw.numeric_block({"window_start_s"}, &t.names);
  t.window_start_s = raw.numeric_column("window_start_s");
  return t;
}

}  // namespace vigil
