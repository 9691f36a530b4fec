#include "fft.hpp"

#include <cmath>
#include <stdexcept>

namespace otp::detail {

Fft::Fft(int n) : n_(n) {
  if (n < 1 || (n & (n - 1)) != 0) throw std::invalid_argument("fft size must be a power of two");
  rev_.resize(n);
  int log2n = 0;
  while ((1 << log2n) < n) ++log2n;
  for (int i = 0; i < n; ++i) {
    int r = 0;
    for (int bit = 0; bit < log2n; ++bit) r |= ((i >> bit) & 1) << (log2n - 1 - bit);
    rev_[i] = r;
  }
  tw_.resize(n / 2 > 0 ? n / 2 : 1);
  for (int i = 0; i < n / 2; ++i) {
    double a = -2.0 * M_PI * i / n;
    tw_[i] = {std::cos(a), std::sin(a)};
  }
}

void Fft::transform(std::complex<double>* x, bool inv) const {
  for (int i = 0; i < n_; ++i) {
    if (i < rev_[i]) std::swap(x[i], x[rev_[i]]);
  }
  for (int len = 2; len <= n_; len <<= 1) {
    int half = len >> 1;
    int step = n_ / len;
    for (int base = 0; base < n_; base += len) {
      for (int j = 0; j < half; ++j) {
        std::complex<double> w = tw_[j * step];
        if (inv) w = std::conj(w);
        std::complex<double> odd = x[base + j + half] * w;
        x[base + j + half] = x[base + j] - odd;
        x[base + j] += odd;
      }
    }
  }
  if (inv) {
    double scale = 1.0 / n_;
    for (int i = 0; i < n_; ++i) x[i] *= scale;
  }
}

}  // namespace otp::detail
