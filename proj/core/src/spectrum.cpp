#include "otp/spectrum.hpp"

#include <cmath>
#include <string>

#include "otp/rng.hpp"

namespace otp {

void Spectrum::validate() const {
  if (lambdas.size() == 0) throw std::invalid_argument("spectrum: empty");
  if (vectors.cols() != lambdas.size()) {
    throw std::invalid_argument("spectrum: eigenvalue/vector count mismatch");
  }
  if (k() > n()) throw std::invalid_argument("spectrum: k exceeds n");
  for (int i = 0; i < k(); ++i) {
    if (!(lambdas[i] > 0)) throw std::invalid_argument("spectrum: eigenvalues must be positive");
    if (i + 1 < k() && lambdas[i] < lambdas[i + 1]) {
      throw std::invalid_argument("spectrum: eigenvalues must be non-increasing");
    }
    if (std::abs(vectors.col(i).norm() - 1.0) > 1e-12) {
      throw std::invalid_argument("spectrum: component " + std::to_string(i) + " not unit norm");
    }
    for (int j = i + 1; j < k(); ++j) {
      if (std::abs(vectors.col(i).dot(vectors.col(j))) > 1e-10) {
        throw std::invalid_argument("spectrum: components " + std::to_string(i) + "," +
                                    std::to_string(j) + " not orthogonal");
      }
    }
  }
}

Eigen::MatrixXd random_orthonormal_basis(int n, int k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("random_orthonormal_basis: k must be >= 1");
  if (k > n) {
    throw std::invalid_argument("random_orthonormal_basis: k = " + std::to_string(k) +
                                " exceeds n = " + std::to_string(n));
  }
  Rng rng(seed);
  Eigen::MatrixXd g(n, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = rng.next_gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
  // Fix the sign ambiguity of QR so the basis is a canonical function of the draws.
  Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

DenseTensor synth_orthogonal(const Spectrum& spec, int order, std::int64_t budget) {
  spec.validate();
  DenseTensor acc(order, spec.n(), budget);
  for (int i = 0; i < spec.k(); ++i) {
    DenseTensor term = outer_power(spec.vectors.col(i), order, budget);
    tensor_axpy(spec.lambdas[i], term, acc);
  }
  acc.set_symmetric(true);
  return acc;
}

}  // namespace otp
