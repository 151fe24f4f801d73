#pragma once

#include "vigil/recording.hpp"

#include <cstdint>
#include <string_view>

namespace vigil {

// Forehead channels 4..7 (electrode numbering of the forehead montage).
struct ForeheadQuad {
  Signal ch4, ch5, ch6, ch7;
  double sample_rate_hz = 0.0;

  const Signal& channel(int number) const;
};

// Throws LengthMismatch when the four channels differ in length.
void validate(const ForeheadQuad& quad);
ForeheadQuad quad_from_recording(const MultichannelRecording& rec);
MultichannelRecording quad_to_recording(const ForeheadQuad& quad);

enum class SeparationMethod { Minus, Ica, IcaMinus };

std::string_view to_string(SeparationMethod method);
SeparationMethod parse_separation_method(std::string_view text);

struct EogPair {
  Signal veo;
  Signal heo;
  SeparationMethod method = SeparationMethod::Minus;
  double sample_rate_hz = 0.0;
};

struct FastIcaOptions {
  int max_iterations = 500;
  double tolerance = 1e-6;
  // Stop once this many rows have converged (0 = all). Rows spanning a
  // Gaussian subspace never settle; callers that only use some components
  // check row_delta themselves.
  int min_converged_rows = 0;
};

struct UnmixingResult {
  Matrix unmixing;        // W: [components x channels]
  Matrix mixing_inverse;  // W^-1 (pseudo-inverse when components < channels)
  Matrix components;      // U = W * (X - mean)
  Signal mean;            // per-channel mean removed before unmixing
  int iterations = 0;
  double final_delta = 0.0;
  Eigen::VectorXd row_delta;  // per-component change at the last iteration
};

// Symmetric FastICA with the log-cosh contrast on PCA-whitened data.
UnmixingResult fastica(const Matrix& x, int n_components, std::uint64_t seed, const FastIcaOptions& options = {});

// Electrode pairs used by each rule. The defaults follow the montage as
// documented: ICA on {4,7} / {5,6}, subtraction 5-7 / 5-6.
struct SeparationOptions {
  int ica_vertical_a = 4, ica_vertical_b = 7;
  int ica_horizontal_a = 5, ica_horizontal_b = 6;
  int minus_vertical_a = 5, minus_vertical_b = 7;
  int minus_horizontal_a = 5, minus_horizontal_b = 6;
  FastIcaOptions ica;
};

struct SeparationReport {
  int veo_component = -1;
  int heo_component = -1;
  int veo_iterations = 0;
  int heo_iterations = 0;
  double veo_delta = 0.0;
  double heo_delta = 0.0;
};

// Picks the row of `components` with maximal |corr| against `reference`
// (ties resolve to the lowest index) and returns it scaled by its
// least-squares coefficient onto the reference, so the correlation is
// positive and the units follow the reference.
struct AlignedComponent {
  int index = -1;
  double correlation = 0.0;
  Signal signal;
};
AlignedComponent align_component(const Matrix& components, const Signal& reference);

EogPair separate_minus(const ForeheadQuad& quad, const SeparationOptions& options = {});
EogPair separate_ica(const ForeheadQuad& quad, std::uint64_t seed, const SeparationOptions& options = {},
                     SeparationReport* report = nullptr);
EogPair combine_ica_minus(const ForeheadQuad& quad, std::uint64_t seed, const SeparationOptions& options = {},
                          SeparationReport* report = nullptr);
EogPair separate(const ForeheadQuad& quad, SeparationMethod method, std::uint64_t seed,
                 const SeparationOptions& options = {}, SeparationReport* report = nullptr);

// Pearson correlation between an estimated and a reference signal.
double similarity(const Signal& estimated, const Signal& reference);

}  // namespace vigil
