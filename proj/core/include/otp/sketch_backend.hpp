#pragma once

#include <iosfwd>
#include <memory>

#include "otp/backend.hpp"

namespace otp {

namespace detail {
class Fft;
}

/// Preprocessed sketch data. Layouts, all row-major and little-endian on disk:
///   slice_sk  [B][n][b]   per-repetition count sketches of each mode-1 slice
///   full_sk   [B][b]      count sketches of the whole tensor (value queries)
///   h, s      [B][p-1][n] factor hash/sign tables for the slice sketches
///   h_full, s_full [B][p][n] likewise for the full-tensor sketches
struct SketchState {
  int p = 0;
  int n = 0;
  int b = 0;
  int B = 0;
  std::vector<double> slice_sk;
  std::vector<double> full_sk;
  std::vector<std::int32_t> h;
  std::vector<std::int8_t> s;
  std::vector<std::int32_t> h_full;
  std::vector<std::int8_t> s_full;
  Eigen::VectorXd D_i;
  double D = 0.0;
};

/// Sketched contraction backend. Each repetition hashes every slice entry
/// through a composed degree-(p-1) count sketch at init; a query sketches u
/// once per factor, convolves the factor sketches via FFT, and takes inner
/// products against the stored slice sketches; repetitions combine by median.
/// Accuracy contract per coordinate, with probability 1-delta over seeds:
///   (1-eps) <A_i, u^(x)(p-1)> - D_i eps <= v_i <= (1+eps) <A_i, u^(x)(p-1)> + D_i eps
class SketchBackend final : public ContractionBackend {
 public:
  SketchBackend(const DenseTensor& A, const BackendConfig& cfg);

  int order() const override { return state_.p; }
  int dim() const override { return state_.n; }
  const char* name() const override { return "sketch"; }

  QueryOutput query(const Eigen::VectorXd& u) const override;
  double query_value(const Eigen::VectorXd& u) const override;

  const SketchState& state() const { return state_; }
  const BackendConfig& config() const { return cfg_; }

  /// Versioned binary blob; load() restores an identical backend.
  void save(std::ostream& out) const;
  static SketchBackend load(std::istream& in);

 private:
  SketchBackend() = default;

  BackendConfig cfg_;
  SketchState state_;
  std::shared_ptr<const detail::Fft> fft_;
};

}  // namespace otp
