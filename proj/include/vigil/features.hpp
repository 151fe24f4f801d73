#pragma once

#include "vigil/eeg.hpp"
#include "vigil/eog_features.hpp"
#include "vigil/recording.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace vigil {

// Windows x dimensions, with column names and window start times.
struct FeatureTable {
  std::vector<std::string> names;
  Matrix values;
  std::vector<double> window_start_s;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index dims() const { return values.cols(); }
};

FeatureTable eog_table(const std::vector<EogFeatureVector>& vectors);
FeatureTable de_table(const std::vector<DeFeatureVector>& vectors, const std::vector<std::string>& channels);

// Row-wise concatenation [first | second]. Window counts and start times
// (to 1e-6 s) must agree, else AlignmentMismatch.
FeatureTable fuse(const FeatureTable& first, const FeatureTable& second);

// SHA-256 over the newline-joined column names.
std::string manifest_hash(const std::vector<std::string>& names);

// CSV with a leading `window_start_s` column.
void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table,
                       const std::vector<std::string>& comments = {});
FeatureTable read_feature_csv(const std::filesystem::path& path);

}  // namespace vigil
