#include "otp/sketch_backend.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>
#include <stdexcept>

#include "fft.hpp"
#include "otp/errors.hpp"
#include "otp/parallel.hpp"
#include "otp/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "sketch blobs are little-endian; add byte swapping for this platform");

namespace otp {

namespace {

Eigen::VectorXd unit_or_throw(const Eigen::VectorXd& u, int n, bool* renormalized) {
  if (u.size() != n) throw std::invalid_argument("sketch query: dimension mismatch");
  double norm = u.norm();
  if (std::abs(norm - 1.0) <= 1e-9) {
    *renormalized = false;
    return u;
  }
  if (norm < 1e-300) throw std::invalid_argument("sketch query: zero input vector");
  *renormalized = true;
  return u / norm;
}

double median_of(double* vals, int count) {
  int mid = count / 2;
  std::nth_element(vals, vals + mid, vals + count);
  double hi = vals[mid];
  if (count % 2 == 1) return hi;
  std::nth_element(vals, vals + mid - 1, vals + mid);
  return 0.5 * (vals[mid - 1] + hi);
}

// Count sketches of u under `factors` hash pairs, convolved via FFT into a
// single degree-`factors` sketch. h/s rows are laid out [factor][n].
void sketch_power(const Eigen::VectorXd& u, const std::int32_t* h, const std::int8_t* s,
                  int factors, int n, int b, const detail::Fft& fft,
                  std::vector<std::complex<double>>& spec,
                  std::vector<std::complex<double>>& tmp, std::vector<double>& out) {
  spec.assign(static_cast<std::size_t>(b), {0.0, 0.0});
  for (int j = 0; j < n; ++j) spec[static_cast<std::size_t>(h[j])] += s[j] * u[j];
  fft.forward(spec.data());
  for (int m = 1; m < factors; ++m) {
    tmp.assign(static_cast<std::size_t>(b), {0.0, 0.0});
    const std::int32_t* hm = h + static_cast<std::ptrdiff_t>(m) * n;
    const std::int8_t* sm = s + static_cast<std::ptrdiff_t>(m) * n;
    for (int j = 0; j < n; ++j) tmp[static_cast<std::size_t>(hm[j])] += sm[j] * u[j];
    fft.forward(tmp.data());
    for (int t = 0; t < b; ++t) spec[static_cast<std::size_t>(t)] *= tmp[static_cast<std::size_t>(t)];
  }
  fft.inverse(spec.data());
  out.resize(static_cast<std::size_t>(b));
  for (int t = 0; t < b; ++t) out[static_cast<std::size_t>(t)] = spec[static_cast<std::size_t>(t)].real();
}

template <typename T>
void write_raw(std::ostream& out, const T* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
}

template <typename T>
void read_raw(std::istream& in, T* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  if (!in) throw IoError("sketch blob: truncated");
}

constexpr char kBlobMagic[8] = {'O', 'T', 'P', 'S', 'K', 'S', 'T', '1'};

}  // namespace

SketchBackend::SketchBackend(const DenseTensor& A, const BackendConfig& cfg)
    : cfg_(cfg.normalized(A.dim())) {
  int p = A.order();
  int n = A.dim();
  if (p < 2) throw std::invalid_argument("SketchBackend needs order >= 2");
  int b = cfg_.b;
  int B = cfg_.B;

  state_.p = p;
  state_.n = n;
  state_.b = b;
  state_.B = B;
  state_.slice_sk.assign(static_cast<std::size_t>(B) * n * b, 0.0);
  state_.full_sk.assign(static_cast<std::size_t>(B) * b, 0.0);
  state_.h.resize(static_cast<std::size_t>(B) * (p - 1) * n);
  state_.s.resize(static_cast<std::size_t>(B) * (p - 1) * n);
  state_.h_full.resize(static_cast<std::size_t>(B) * p * n);
  state_.s_full.resize(static_cast<std::size_t>(B) * p * n);

  Rng root(cfg_.seed);
  for (int r = 0; r < B; ++r) {
    Rng hs = root.split(static_cast<std::uint64_t>(r));
    for (int m = 0; m < p - 1; ++m) {
      std::size_t base = (static_cast<std::size_t>(r) * (p - 1) + m) * n;
      for (int j = 0; j < n; ++j) {
        state_.h[base + j] = static_cast<std::int32_t>(hs.next_u64() % static_cast<std::uint64_t>(b));
        state_.s[base + j] = (hs.next_u64() & 1) ? 1 : -1;
      }
    }
    Rng hf = root.split(0x46554C4CULL + static_cast<std::uint64_t>(r));
    for (int m = 0; m < p; ++m) {
      std::size_t base = (static_cast<std::size_t>(r) * p + m) * n;
      for (int j = 0; j < n; ++j) {
        state_.h_full[base + j] =
            static_cast<std::int32_t>(hf.next_u64() % static_cast<std::uint64_t>(b));
        state_.s_full[base + j] = (hf.next_u64() & 1) ? 1 : -1;
      }
    }
  }

  std::int64_t slice_len = A.size() / n;
  state_.D_i.resize(n);
  for (int i = 0; i < n; ++i) {
    state_.D_i[i] =
        Eigen::Map<const Eigen::VectorXd>(A.data() + i * slice_len, slice_len).norm();
  }
  state_.D = state_.D_i.norm();

  // Stream every slice entry through the composed hashes once per repetition.
  // An odometer over the trailing p-1 digits keeps the composite bucket and
  // sign updated in O(1) amortized per entry.
  int q = p - 1;
  std::mutex full_mu;
  parallel_for(0, n, [&](std::int64_t lo, std::int64_t hi) {
    std::vector<double> full_partial(static_cast<std::size_t>(B) * b, 0.0);
    std::vector<int> d(static_cast<std::size_t>(q));
    for (std::int64_t i = lo; i < hi; ++i) {
      const double* slice = A.data() + i * slice_len;
      for (int r = 0; r < B; ++r) {
        const std::int32_t* hr = state_.h.data() + static_cast<std::size_t>(r) * q * n;
        const std::int8_t* sr = state_.s.data() + static_cast<std::size_t>(r) * q * n;
        const std::int32_t* hfr = state_.h_full.data() + static_cast<std::size_t>(r) * p * n;
        const std::int8_t* sfr = state_.s_full.data() + static_cast<std::size_t>(r) * p * n;
        double* slice_out = state_.slice_sk.data() + (static_cast<std::size_t>(r) * n + i) * b;
        double* full_out = full_partial.data() + static_cast<std::size_t>(r) * b;

        std::fill(d.begin(), d.end(), 0);
        long sumh = 0, fsumh = hfr[i];
        int prod = 1, fprod = sfr[i];
        for (int m = 0; m < q; ++m) {
          sumh += hr[static_cast<std::size_t>(m) * n];
          prod *= sr[static_cast<std::size_t>(m) * n];
          fsumh += hfr[static_cast<std::size_t>(m + 1) * n];
          fprod *= sfr[static_cast<std::size_t>(m + 1) * n];
        }
        for (std::int64_t e = 0; e < slice_len; ++e) {
          double val = slice[e];
          if (val != 0.0) {
            slice_out[sumh % b] += prod * val;
            full_out[fsumh % b] += fprod * val;
          }
          for (int m = q - 1; m >= 0; --m) {
            const std::int32_t* hm = hr + static_cast<std::size_t>(m) * n;
            const std::int8_t* sm = sr + static_cast<std::size_t>(m) * n;
            const std::int32_t* hfm = hfr + static_cast<std::size_t>(m + 1) * n;
            const std::int8_t* sfm = sfr + static_cast<std::size_t>(m + 1) * n;
            int old = d[static_cast<std::size_t>(m)];
            int next = old + 1 == n ? 0 : old + 1;
            d[static_cast<std::size_t>(m)] = next;
            sumh += hm[next] - hm[old];
            prod *= sm[next] * sm[old];
            fsumh += hfm[next] - hfm[old];
            fprod *= sfm[next] * sfm[old];
            if (next != 0) break;  // no carry
          }
        }
      }
    }
    std::scoped_lock lock(full_mu);
    for (std::size_t t = 0; t < full_partial.size(); ++t) state_.full_sk[t] += full_partial[t];
  });

  fft_ = std::make_shared<detail::Fft>(b);
}

QueryOutput SketchBackend::query(const Eigen::VectorXd& u) const {
  QueryOutput out;
  Eigen::VectorXd un = unit_or_throw(u, state_.n, &out.renormalized);
  int n = state_.n, b = state_.b, B = state_.B, p = state_.p;

  static thread_local std::vector<std::complex<double>> spec, tmp;
  static thread_local std::vector<double> qsk, est;
  est.resize(static_cast<std::size_t>(B) * n);

  for (int r = 0; r < B; ++r) {
    sketch_power(un, state_.h.data() + static_cast<std::size_t>(r) * (p - 1) * n,
                 state_.s.data() + static_cast<std::size_t>(r) * (p - 1) * n, p - 1, n, b,
                 *fft_, spec, tmp, qsk);
    const double* base = state_.slice_sk.data() + static_cast<std::size_t>(r) * n * b;
    Eigen::Map<const Eigen::VectorXd> qv(qsk.data(), b);
    for (int i = 0; i < n; ++i) {
      est[static_cast<std::size_t>(r) * n + i] =
          Eigen::Map<const Eigen::VectorXd>(base + static_cast<std::size_t>(i) * b, b).dot(qv);
    }
  }

  out.values.resize(n);
  std::vector<double> column(static_cast<std::size_t>(B));
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < B; ++r) column[static_cast<std::size_t>(r)] = est[static_cast<std::size_t>(r) * n + i];
    out.values[i] = median_of(column.data(), B);
  }
  return out;
}

double SketchBackend::query_value(const Eigen::VectorXd& u) const {
  bool renorm = false;
  Eigen::VectorXd un = unit_or_throw(u, state_.n, &renorm);
  int n = state_.n, b = state_.b, B = state_.B, p = state_.p;

  static thread_local std::vector<std::complex<double>> spec, tmp;
  static thread_local std::vector<double> qsk;
  std::vector<double> vals(static_cast<std::size_t>(B));
  for (int r = 0; r < B; ++r) {
    sketch_power(un, state_.h_full.data() + static_cast<std::size_t>(r) * p * n,
                 state_.s_full.data() + static_cast<std::size_t>(r) * p * n, p, n, b, *fft_,
                 spec, tmp, qsk);
    vals[static_cast<std::size_t>(r)] =
        Eigen::Map<const Eigen::VectorXd>(state_.full_sk.data() + static_cast<std::size_t>(r) * b, b)
            .dot(Eigen::Map<const Eigen::VectorXd>(qsk.data(), b));
  }
  return median_of(vals.data(), B);
}

void SketchBackend::save(std::ostream& out) const {
  out.write(kBlobMagic, sizeof(kBlobMagic));
  std::uint32_t header[5] = {1u, static_cast<std::uint32_t>(state_.p),
                             static_cast<std::uint32_t>(state_.n),
                             static_cast<std::uint32_t>(state_.b),
                             static_cast<std::uint32_t>(state_.B)};
  write_raw(out, header, 5);
  double acc[3] = {cfg_.epsilon, cfg_.delta, state_.D};
  write_raw(out, acc, 3);
  write_raw(out, &cfg_.seed, 1);
  write_raw(out, state_.D_i.data(), static_cast<std::size_t>(state_.n));
  write_raw(out, state_.slice_sk.data(), state_.slice_sk.size());
  write_raw(out, state_.full_sk.data(), state_.full_sk.size());
  write_raw(out, state_.h.data(), state_.h.size());
  write_raw(out, state_.s.data(), state_.s.size());
  write_raw(out, state_.h_full.data(), state_.h_full.size());
  write_raw(out, state_.s_full.data(), state_.s_full.size());
  if (!out) throw IoError("sketch blob: write failed");
}

SketchBackend SketchBackend::load(std::istream& in) {
  char magic[8];
  read_raw(in, magic, 8);
  if (std::memcmp(magic, kBlobMagic, 8) != 0) throw IoError("sketch blob: bad magic");
  std::uint32_t header[5];
  read_raw(in, header, 5);
  if (header[0] != 1u) throw IoError("sketch blob: unsupported version");
  SketchBackend bk;
  auto& st = bk.state_;
  st.p = static_cast<int>(header[1]);
  st.n = static_cast<int>(header[2]);
  st.b = static_cast<int>(header[3]);
  st.B = static_cast<int>(header[4]);
  if (st.p < 2 || st.n < 1 || st.b < 8 || st.B < 1) throw IoError("sketch blob: bad header");
  double acc[3];
  read_raw(in, acc, 3);
  bk.cfg_.epsilon = acc[0];
  bk.cfg_.delta = acc[1];
  st.D = acc[2];
  read_raw(in, &bk.cfg_.seed, 1);
  bk.cfg_.b = st.b;
  bk.cfg_.B = st.B;
  st.D_i.resize(st.n);
  read_raw(in, st.D_i.data(), static_cast<std::size_t>(st.n));
  st.slice_sk.resize(static_cast<std::size_t>(st.B) * st.n * st.b);
  read_raw(in, st.slice_sk.data(), st.slice_sk.size());
  st.full_sk.resize(static_cast<std::size_t>(st.B) * st.b);
  read_raw(in, st.full_sk.data(), st.full_sk.size());
  st.h.resize(static_cast<std::size_t>(st.B) * (st.p - 1) * st.n);
  read_raw(in, st.h.data(), st.h.size());
  st.s.resize(st.h.size());
  read_raw(in, st.s.data(), st.s.size());
  st.h_full.resize(static_cast<std::size_t>(st.B) * st.p * st.n);
  read_raw(in, st.h_full.data(), st.h_full.size());
  st.s_full.resize(st.h_full.size());
  read_raw(in, st.s_full.data(), st.s_full.size());
  bk.fft_ = std::make_shared<detail::Fft>(st.b);
  return bk;
}

}  // namespace otp
