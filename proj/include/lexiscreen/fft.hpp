#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace lexiscreen {

/// In-place iterative radix-2 FFT with precomputed twiddles and bit-reversal.
class Fft {
 public:
  explicit Fft(std::size_t n) : n_(n), twiddle_(n / 2), reversed_(n) {
    if (n < 2 || (n & (n - 1)) != 0) throw std::invalid_argument("FFT size must be a power of two");
    for (std::size_t k = 0; k < n / 2; ++k) {
      twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi * double(k) / double(n));
    }
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      reversed_[i] = r;
    }
  }

  std::size_t size() const { return n_; }

  void forward(std::vector<std::complex<double>>& x) const { transform(x, false); }

  /// Unnormalized inverse; divide by size() to recover the input.
  void inverse(std::vector<std::complex<double>>& x) const { transform(x, true); }

 private:
  void transform(std::vector<std::complex<double>>& x, bool inverse) const {
    for (std::size_t i = 0; i < n_; ++i) {
      if (i < reversed_[i]) std::swap(x[i], x[reversed_[i]]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          auto w = twiddle_[k * stride];
          if (inverse) w = std::conj(w);
          const auto t = w * x[start + k + half];
          x[start + k + half] = x[start + k] - t;
          x[start + k] += t;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<std::complex<double>> twiddle_;
  std::vector<std::size_t> reversed_;
};

/// Per-thread plan cache.
inline const Fft& fft_plan(std::size_t n) {
  thread_local std::map<std::size_t, Fft> plans;
  auto it = plans.find(n);
  if (it == plans.end()) it = plans.emplace(n, Fft(n)).first;
  return it->second;
}

}  // namespace lexiscreen
