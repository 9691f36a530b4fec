#pragma once

#include <complex>
#include <vector>

namespace otp::detail {

/// Iterative radix-2 FFT with precomputed twiddles and bit-reversal table.
/// Sizes are powers of two (the sketch length is normalized to one); plans are
/// cheap enough to build per backend and reuse across queries.
class Fft {
 public:
  explicit Fft(int n);

  int size() const { return n_; }
  void forward(std::complex<double>* x) const { transform(x, false); }
  void inverse(std::complex<double>* x) const { transform(x, true); }

 private:
  void transform(std::complex<double>* x, bool inv) const;

  int n_;
  std::vector<int> rev_;
  std::vector<std::complex<double>> tw_;  // one half-circle of roots of unity
};

}  // namespace otp::detail
