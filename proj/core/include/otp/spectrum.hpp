#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "otp/tensor.hpp"

namespace otp {

/// Ordered orthonormal eigenpairs (lambda_i, v_i), lambda_1 >= ... >= lambda_k > 0.
/// vectors is n x k with v_i in column i.
struct Spectrum {
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd vectors;

  int k() const { return static_cast<int>(lambdas.size()); }
  int n() const { return static_cast<int>(vectors.rows()); }

  /// Throws std::invalid_argument when the invariants fail: descending
  /// positive eigenvalues, unit columns (1e-12), pairwise orthogonality (1e-10).
  void validate() const;
};

/// k orthonormal columns in R^n from seeded Gaussian draws (thin QR).
/// Throws std::invalid_argument for k > n.
Eigen::MatrixXd random_orthonormal_basis(int n, int k, std::uint64_t seed);

/// A* = sum_i lambda_i v_i^(x)p as a dense tensor.
DenseTensor synth_orthogonal(const Spectrum& spec, int order,
                             std::int64_t budget = kDefaultElementBudget);

}  // namespace otp
