#include "otp/backend.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace otp {

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (; e > 0; e >>= 1, x *= x)
    if (e & 1) r *= x;
  return r;
}

// Returns u normalized to unit length, flagging whether that was needed.
Eigen::VectorXd unitized(const Eigen::VectorXd& u, int n, bool* renormalized) {
  if (u.size() != n) {
    throw std::invalid_argument("query: vector length " + std::to_string(u.size()) +
                                " does not match backend dim " + std::to_string(n));
  }
  double norm = u.norm();
  if (std::abs(norm - 1.0) <= 1e-9) {
    *renormalized = false;
    return u;
  }
  if (norm < 1e-300) throw std::invalid_argument("query: zero input vector");
  *renormalized = true;
  return u / norm;
}

void check_deflation_shapes(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& alpha, int n) {
  if (xs.cols() != alpha.cols()) {
    throw std::invalid_argument("query_res: xs/alpha column count mismatch");
  }
  if (xs.cols() > 0 && (xs.rows() != n || alpha.rows() != n)) {
    throw std::invalid_argument("query_res: deflation rows do not match backend dim");
  }
}

}  // namespace

BackendConfig BackendConfig::normalized(int n) const {
  if (n < 1) throw std::invalid_argument("backend config: n must be >= 1");
  BackendConfig c = *this;
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) {
    throw std::invalid_argument("backend config: epsilon must be in (0,1)");
  }
  if (!(c.delta > 0.0 && c.delta < 1.0)) {
    throw std::invalid_argument("backend config: delta must be in (0,1)");
  }
  if (c.b < 0 || c.B < 0) throw std::invalid_argument("backend config: negative b or B");
  if (c.b == 0) c.b = static_cast<int>(std::ceil(4.0 / (c.epsilon * c.epsilon)));
  if (c.B == 0) c.B = static_cast<int>(std::ceil(2.0 * std::log(n / c.delta)));
  if (c.B < 1) c.B = 1;
  int pow2 = 8;
  while (pow2 < c.b) pow2 <<= 1;
  c.b = pow2;
  return c;
}

void DeflationSet::push(const Eigen::VectorXd& x, const Eigen::VectorXd& alpha_col) {
  if (xs.rows() != x.size() || alpha.rows() != alpha_col.size() || x.size() != alpha_col.size()) {
    throw std::invalid_argument("deflation push: dimension mismatch");
  }
  xs.conservativeResize(Eigen::NoChange, xs.cols() + 1);
  alpha.conservativeResize(Eigen::NoChange, alpha.cols() + 1);
  xs.col(xs.cols() - 1) = x;
  alpha.col(alpha.cols() - 1) = alpha_col;
}

QueryOutput ContractionBackend::query_res(const Eigen::MatrixXd& xs,
                                          const Eigen::MatrixXd& alpha,
                                          const Eigen::VectorXd& u) const {
  check_deflation_shapes(xs, alpha, dim());
  QueryOutput out = query(u);
  int k = static_cast<int>(xs.cols());
  if (k == 0) return out;  // bit-exact passthrough
  Eigen::VectorXd un = u;
  if (out.renormalized) un /= u.norm();
  Eigen::VectorXd c(k);
  for (int j = 0; j < k; ++j) c[j] = ipow(xs.col(j).dot(un), order() - 1);
  out.values.noalias() -= alpha * c;
  return out;
}

double ContractionBackend::query_value_res(const Eigen::MatrixXd& xs,
                                           const Eigen::MatrixXd& alpha,
                                           const Eigen::VectorXd& u) const {
  check_deflation_shapes(xs, alpha, dim());
  double val = query_value(u);
  int k = static_cast<int>(xs.cols());
  if (k == 0) return val;
  bool renorm = false;
  Eigen::VectorXd un = unitized(u, dim(), &renorm);
  for (int j = 0; j < k; ++j) {
    val -= alpha.col(j).dot(un) * ipow(xs.col(j).dot(un), order() - 1);
  }
  return val;
}

ExactBackend::ExactBackend(const DenseTensor& A)
    : p_(A.order()), n_(A.dim()), data_(A.values()) {
  if (p_ < 2) throw std::invalid_argument("ExactBackend needs order >= 2");
}

QueryOutput ExactBackend::query(const Eigen::VectorXd& u) const {
  QueryOutput out;
  Eigen::VectorXd un = unitized(u, n_, &out.renormalized);

  // Staged trailing-axis mat-vecs over the row-major layout. thread_local
  // scratch keeps repeated queries allocation-free without breaking the
  // "concurrent read-only queries" contract.
  static thread_local std::vector<double> s1, s2;
  using RowMajorMap =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  std::int64_t len = static_cast<std::int64_t>(data_.size()) / n_;
  if (s1.size() < static_cast<std::size_t>(len)) s1.resize(static_cast<std::size_t>(len));
  Eigen::Map<Eigen::VectorXd>(s1.data(), len).noalias() =
      RowMajorMap(data_.data(), len, n_) * un;

  double* cur = s1.data();
  double* alt = nullptr;
  while (len > n_) {
    std::int64_t rows = len / n_;
    if (alt == nullptr) {
      if (s2.size() < static_cast<std::size_t>(rows)) s2.resize(static_cast<std::size_t>(rows));
      alt = s2.data();
    }
    Eigen::Map<Eigen::VectorXd>(alt, rows).noalias() = RowMajorMap(cur, rows, n_) * un;
    std::swap(cur, alt);
    len = rows;
  }
  out.values = Eigen::Map<const Eigen::VectorXd>(cur, n_);
  return out;
}

double ExactBackend::query_value(const Eigen::VectorXd& u) const {
  bool renorm = false;
  Eigen::VectorXd un = unitized(u, n_, &renorm);
  return un.dot(query(un).values);
}

}  // namespace otp
