#include "vigil/fft.hpp"

#include <unsupported/Eigen/FFT>

namespace vigil::fft {

std::size_t next_fast_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

std::vector<std::complex<double>> rfft(const std::vector<double>& x, std::size_t nfft) {
  std::vector<double> padded(nfft, 0.0);
  std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(std::min(x.size(), nfft)), padded.begin());
  Eigen::FFT<double> engine;
  engine.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::complex<double>> out;
  engine.fwd(out, padded);
  return out;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& spectrum, std::size_t nfft) {
  Eigen::FFT<double> engine;
  engine.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> out;
  engine.inv(out, spectrum, static_cast<Eigen::Index>(nfft));
  return out;
}

}  // namespace vigil::fft
