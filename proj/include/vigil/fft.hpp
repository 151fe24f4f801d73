#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace vigil::fft {

// Smallest n' >= n whose only prime factors are 2, 3 and 5.
std::size_t next_fast_size(std::size_t n);

// Forward real transform of `x` zero-padded to `nfft`; returns nfft/2+1 bins.
std::vector<std::complex<double>> rfft(const std::vector<double>& x, std::size_t nfft);

// Inverse of rfft for an nfft-point real sequence (scaled by 1/nfft).
std::vector<double> irfft(const std::vector<std::complex<double>>& spectrum, std::size_t nfft);

}  // namespace vigil::fft
