#include "otp/io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "otp/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "tensor files are little-endian; add byte swapping for this platform");

namespace otp {

namespace {

constexpr std::array<char, 8> kMagic = {'O', 'T', 'P', 'T', 'N', 'S', 'R', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw IoError(path + ": " + what);
}

}  // namespace

void write_tensor_binary(const std::string& path, const DenseTensor& A) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path, "cannot open for writing");
  out.write(kMagic.data(), kMagic.size());
  write_u32(out, static_cast<std::uint32_t>(A.order()));
  write_u32(out, static_cast<std::uint32_t>(A.dim()));
  char flags[4] = {static_cast<char>(A.symmetric() ? 1 : 0), 0, 0, 0};
  out.write(flags, 4);
  out.write(reinterpret_cast<const char*>(A.data()),
            static_cast<std::streamsize>(A.size() * 8));
  if (!out) fail(path, "write failed");
}

DenseTensor read_tensor_binary(const std::string& path, std::int64_t budget) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) fail(path, "bad magic, not an OTP1 tensor file");
  std::uint32_t p = read_u32(in);
  std::uint32_t n = read_u32(in);
  char flags[4];
  in.read(flags, 4);
  if (!in) fail(path, "truncated header");
  if (p < 1 || n < 1 || p > 32) fail(path, "implausible header (p=" + std::to_string(p) +
                                               ", n=" + std::to_string(n) + ")");
  std::int64_t count;
  try {
    count = element_count_checked(static_cast<int>(n), static_cast<int>(p), budget);
  } catch (const BudgetError&) {
    throw;  // budget violations keep their own type (CLI exit code differs)
  }
  std::vector<double> data(static_cast<std::size_t>(count));
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(count * 8));
  if (in.gcount() != static_cast<std::streamsize>(count * 8)) fail(path, "truncated payload");
  DenseTensor t = DenseTensor::from_data(static_cast<int>(p), static_cast<int>(n),
                                         std::move(data), budget);
  t.set_symmetric(flags[0] != 0);
  return t;
}

void write_tensor_text(const std::string& path, const DenseTensor& A) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(path, "cannot open for writing");
  out << A.order() << ' ' << A.dim() << '\n';
  out.precision(17);
  for (std::int64_t i = 0; i < A.size(); ++i) out << A.data()[i] << '\n';
  if (!out) fail(path, "write failed");
}

DenseTensor read_tensor_text(const std::string& path, std::int64_t budget) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  int p = 0, n = 0;
  if (!(in >> p >> n)) fail(path, "missing 'p n' header line");
  if (p < 1 || n < 1) fail(path, "invalid header values");
  std::int64_t count = element_count_checked(n, p, budget);
  std::vector<double> data(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    if (!(in >> data[static_cast<std::size_t>(i)])) {
      fail(path, "expected " + std::to_string(count) + " values, failed at " + std::to_string(i));
    }
  }
  return DenseTensor::from_data(p, n, std::move(data), budget);
}

void write_spectrum_text(const std::string& path, const Spectrum& spec) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(path, "cannot open for writing");
  out.precision(17);
  out << spec.k() << ' ' << spec.n() << '\n';
  for (int i = 0; i < spec.k(); ++i) out << spec.lambdas[i] << '\n';
  for (int i = 0; i < spec.k(); ++i) {
    for (int r = 0; r < spec.n(); ++r) {
      if (r) out << ' ';
      out << spec.vectors(r, i);
    }
    out << '\n';
  }
  if (!out) fail(path, "write failed");
}

Spectrum read_spectrum_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  int k = 0, n = 0;
  if (!(in >> k >> n) || k < 1 || n < 1) fail(path, "missing or invalid 'k n' header");
  if (k > n) fail(path, "k exceeds n");
  Spectrum spec;
  spec.lambdas.resize(k);
  spec.vectors.resize(n, k);
  for (int i = 0; i < k; ++i) {
    if (!(in >> spec.lambdas[i])) fail(path, "truncated eigenvalue list");
  }
  for (int i = 0; i < k; ++i) {
    for (int r = 0; r < n; ++r) {
      if (!(in >> spec.vectors(r, i))) fail(path, "truncated vector list");
    }
  }
  return spec;
}

}  // namespace otp
