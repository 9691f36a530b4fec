#include "otp/deflation.hpp"

#include <cmath>
#include <stdexcept>

namespace otp {
namespace {

double ipow(double x, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= x;
  return out;
}

}  // namespace

DeflationDiagnostics deflation_diagnostics(const Spectrum& truth,
                                           const Eigen::VectorXd& est_lambdas,
                                           const Eigen::MatrixXd& est_vectors,
                                           const Eigen::VectorXd& u, int p, double epsilon,
                                           double c0) {
  truth.validate();
  const int k = truth.k();
  const int n = truth.n();
  const int r = static_cast<int>(est_vectors.cols());
  if (p < 2) throw std::invalid_argument("deflation_diagnostics: order p must be >= 2");
  if (!(epsilon > 0.0) || !(c0 > 0.0)) {
    throw std::invalid_argument("deflation_diagnostics: epsilon and c0 must be positive");
  }
  if (r < 1 || r > k) throw std::invalid_argument("deflation_diagnostics: need 1 <= r <= k");
  if (static_cast<int>(est_lambdas.size()) != r || est_vectors.rows() != n) {
    throw std::invalid_argument("deflation_diagnostics: estimate shape mismatch");
  }
  if (u.size() != n || std::abs(u.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("deflation_diagnostics: u must be a unit vector of length n");
  }

  DeflationDiagnostics d;
  d.r = r;

  const Eigen::VectorXd tu = truth.vectors.transpose() * u;   // <v_i, u>, all k
  const Eigen::VectorXd eu = est_vectors.transpose() * u;     // <vh_i, u>, first r

  d.kappa = 2.0 * tu.head(r).squaredNorm();
  const double lambda_k = truth.lambdas(k - 1);
  d.phi = 2.0 * k * ipow(epsilon / lambda_k, p - 1);

  // sum_i [ lambda_i <v_i,u>^(p-1) v_i - lh_i <vh_i,u>^(p-1) vh_i ]
  d.error_vector = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < r; ++i) {
    d.error_vector += truth.lambdas(i) * ipow(tu(i), p - 1) * truth.vectors.col(i);
    d.error_vector -= est_lambdas(i) * ipow(eu(i), p - 1) * est_vectors.col(i);
  }
  d.part1_lhs = d.error_vector.norm();
  d.part1_bound = 2.0 * p * epsilon * std::sqrt(d.kappa) + 2.0 * d.phi * epsilon;

  const double sqrt_n = std::sqrt(static_cast<double>(n));
  d.part2_lhs.resize(k - r);
  for (int j = r; j < k; ++j) {
    d.part2_lhs(j - r) = std::abs(truth.vectors.col(j).dot(d.error_vector));
  }
  d.part2_bound = (2.0 * d.kappa * epsilon + d.phi * epsilon) / sqrt_n;

  d.part1_cap = 4.0 * epsilon / c0;
  d.part2_cap = 4.0 * epsilon / (c0 * sqrt_n);
  const double c0ppk = c0 * c0 * p * p * static_cast<double>(k);
  d.cap_applicable = r < k && epsilon <= lambda_k / (2.0 * c0 * k) &&
                     std::abs(tu(r)) >= 1.0 - 1.0 / c0ppk;

  d.part1_ok = d.part1_lhs <= d.part1_bound;
  d.part2_ok = (d.part2_lhs.array() <= d.part2_bound).all();
  d.caps_ok = d.cap_applicable && d.part1_lhs <= d.part1_cap &&
              (d.part2_lhs.array() <= d.part2_cap).all();
  return d;
}

}  // namespace otp
