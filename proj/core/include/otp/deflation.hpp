#pragma once

#include <Eigen/Dense>

#include "otp/spectrum.hpp"

namespace otp {

/// Measured and bounded deflation error at a probe direction u. The error
/// tensor is sum_{i<r} (lambda_i v_i^(x p) - lh_i vh_i^(x p)); its
/// contractions against u are evaluated in closed form through the rank-one
/// structure, never by materializing the tensor.
struct DeflationDiagnostics {
  int r = 0;                     // number of deflated components
  double kappa = 0.0;            // 2 * sum_{i<r} <u, v_i>^2
  double phi = 0.0;              // 2k (eps / lambda_k)^(p-1)
  Eigen::VectorXd error_vector;  // sum_i E_i(I, u, ..., u)
  double part1_lhs = 0.0;        // ||error_vector||_2
  double part1_bound = 0.0;      // 2 p eps sqrt(kappa) + 2 phi eps
  Eigen::VectorXd part2_lhs;     // |sum_i E_i(v_j, u, ..., u)| for j = r..k-1
  double part2_bound = 0.0;      // (2 kappa eps + phi eps) / sqrt(n)
  double part1_cap = 0.0;        // 4 eps / c0
  double part2_cap = 0.0;        // 4 eps / (c0 sqrt(n))
  // The caps additionally assume eps <= lambda_k / (2 c0 k) and that u is
  // already well aligned with the next component v_r: <u, v_r>^2 close to 1.
  bool cap_applicable = false;
  bool part1_ok = false;
  bool part2_ok = false;
  bool caps_ok = false;  // meaningful only when cap_applicable
};

/// est_vectors holds the r deflated estimates as columns; u must be unit.
DeflationDiagnostics deflation_diagnostics(const Spectrum& truth,
                                           const Eigen::VectorXd& est_lambdas,
                                           const Eigen::MatrixXd& est_vectors,
                                           const Eigen::VectorXd& u, int p, double epsilon,
                                           double c0);

}  // namespace otp
