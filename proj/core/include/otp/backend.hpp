#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>

#include "otp/tensor.hpp"

namespace otp {

/// Accuracy knobs for the sketched backend. A zero b or B is derived from
/// (epsilon, delta, n): b = ceil(4/eps^2) rounded up to a power of two
/// (radix-2 convolution), B = ceil(2*ln(n/delta)).
struct BackendConfig {
  double epsilon = 0.1;
  double delta = 0.1;
  int b = 0;
  int B = 0;
  std::uint64_t seed = 0;

  /// Fills derived fields and validates; throws std::invalid_argument.
  BackendConfig normalized(int n) const;
};

struct QueryOutput {
  Eigen::VectorXd values;
  /// Set when the input had to be renormalized to unit length first.
  bool renormalized = false;
};

/// Accumulated rank-one deflation terms: column j holds x_j (unit) and the
/// per-slice weights alpha(:,j), so the subtracted slice term is
/// alpha(i,j) * <x_j, u>^(p-1). For symmetric deflation alpha(:,j) = lambda_j * x_j.
struct DeflationSet {
  Eigen::MatrixXd xs;     // n x k
  Eigen::MatrixXd alpha;  // n x k

  static DeflationSet empty(int n) {
    DeflationSet d;
    d.xs.resize(n, 0);
    d.alpha.resize(n, 0);
    return d;
  }
  int k() const { return static_cast<int>(xs.cols()); }
  void push(const Eigen::VectorXd& x, const Eigen::VectorXd& alpha_col);
};

/// Contraction-query surface shared by the exact and sketched backends:
/// query      ~ A(I, u, ..., u)
/// query_value~ A(u, ..., u)
/// query_res  ~ the same with accumulated rank-one terms subtracted exactly.
class ContractionBackend {
 public:
  virtual ~ContractionBackend() = default;

  virtual int order() const = 0;
  virtual int dim() const = 0;
  virtual const char* name() const = 0;

  virtual QueryOutput query(const Eigen::VectorXd& u) const = 0;
  virtual double query_value(const Eigen::VectorXd& u) const = 0;

  /// query(u) minus sum_j alpha(:,j) * <x_j, u>^(p-1); the correction is exact
  /// (O(nk)) on both backends, so deflation never degrades with the sketch.
  QueryOutput query_res(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& alpha,
                        const Eigen::VectorXd& u) const;
  QueryOutput query_res(const DeflationSet& d, const Eigen::VectorXd& u) const {
    return query_res(d.xs, d.alpha, u);
  }

  /// query_value(u) minus sum_j <alpha(:,j), u> * <x_j, u>^(p-1); the
  /// value-query analogue of query_res, used for Rayleigh values under
  /// deflation (for alpha(:,j) = lambda_j x_j this is lambda_j <x_j,u>^p).
  double query_value_res(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& alpha,
                         const Eigen::VectorXd& u) const;
  double query_value_res(const DeflationSet& d, const Eigen::VectorXd& u) const {
    return query_value_res(d.xs, d.alpha, u);
  }
};

/// Dense oracle backend: keeps a copy of the tensor and answers queries by
/// staged mat-vec over the mode-1 reshape.
class ExactBackend final : public ContractionBackend {
 public:
  explicit ExactBackend(const DenseTensor& A);

  int order() const override { return p_; }
  int dim() const override { return n_; }
  const char* name() const override { return "exact"; }

  QueryOutput query(const Eigen::VectorXd& u) const override;
  double query_value(const Eigen::VectorXd& u) const override;

 private:
  int p_;
  int n_;
  std::vector<double> data_;
};

}  // namespace otp
