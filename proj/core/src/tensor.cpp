#include "otp/tensor.hpp"

#include <limits>
#include <string>
#include <utility>

#include "otp/errors.hpp"

namespace otp {

namespace {

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void check_vector_dim(const DenseTensor& A, const Eigen::VectorXd& u, const char* op) {
  if (u.size() != A.dim()) {
    throw std::invalid_argument(std::string(op) + ": vector length " +
                                std::to_string(u.size()) + " does not match tensor dim " +
                                std::to_string(A.dim()));
  }
}

// One contraction stage: interpret `in` (length rows*n) as a rows x n
// row-major matrix and multiply by u. Contracting the trailing axis first
// keeps every stage a contiguous mat-vec.
void reduce_last_axis(const double* in, std::int64_t rows, int n, const Eigen::VectorXd& u,
                      double* out) {
  RowMajorMap m(in, rows, n);
  Eigen::Map<Eigen::VectorXd> o(out, rows);
  o.noalias() = m * u;
}

// Contract trailing axes until `len` elements remain; returns the work buffer
// holding exactly `len` values. `target` must be n^q for some q < p.
std::vector<double> reduce_to_length(const DenseTensor& A, const Eigen::VectorXd& u,
                                     std::int64_t target) {
  int n = A.dim();
  std::int64_t len = A.size();
  std::vector<double> cur(static_cast<std::size_t>(len / n));
  reduce_last_axis(A.data(), len / n, n, u, cur.data());
  len /= n;
  std::vector<double> next;
  while (len > target) {
    next.resize(static_cast<std::size_t>(len / n));
    reduce_last_axis(cur.data(), len / n, n, u, next.data());
    len /= n;
    std::swap(cur, next);
  }
  cur.resize(static_cast<std::size_t>(len));
  return cur;
}

}  // namespace

std::int64_t element_count_checked(int dim, int order, std::int64_t budget) {
  if (dim < 1) throw std::invalid_argument("tensor dim must be >= 1");
  if (order < 1) throw std::invalid_argument("tensor order must be >= 1");
  std::int64_t count = 1;
  for (int m = 0; m < order; ++m) {
    if (count > budget / dim) {
      throw BudgetError("dense tensor of dim " + std::to_string(dim) + ", order " +
                        std::to_string(order) + " exceeds the element budget of " +
                        std::to_string(budget) + " elements");
    }
    count *= dim;
  }
  if (count > budget) {
    throw BudgetError("dense tensor of dim " + std::to_string(dim) + ", order " +
                      std::to_string(order) + " exceeds the element budget of " +
                      std::to_string(budget) + " elements");
  }
  return count;
}

DenseTensor::DenseTensor(int order, int dim, std::int64_t budget)
    : order_(order), dim_(dim) {
  std::int64_t count = element_count_checked(dim, order, budget);
  data_.assign(static_cast<std::size_t>(count), 0.0);
}

DenseTensor DenseTensor::from_data(int order, int dim, std::vector<double> data,
                                   std::int64_t budget) {
  std::int64_t count = element_count_checked(dim, order, budget);
  if (static_cast<std::int64_t>(data.size()) != count) {
    throw std::invalid_argument("from_data: expected " + std::to_string(count) +
                                " values, got " + std::to_string(data.size()));
  }
  DenseTensor t(order, dim, budget);
  t.data_ = std::move(data);
  return t;
}

std::int64_t DenseTensor::flat_index(std::span<const int> multi) const {
  if (static_cast<int>(multi.size()) != order_) {
    throw std::invalid_argument("flat_index: expected " + std::to_string(order_) +
                                " indices, got " + std::to_string(multi.size()));
  }
  std::int64_t idx = 0;
  for (int m = 0; m < order_; ++m) {
    if (multi[m] < 0 || multi[m] >= dim_) {
      throw std::out_of_range("flat_index: index " + std::to_string(multi[m]) +
                              " out of range for dim " + std::to_string(dim_));
    }
    idx = idx * dim_ + multi[m];
  }
  return idx;
}

double contract_full(const DenseTensor& A, const Eigen::VectorXd& u) {
  check_vector_dim(A, u, "contract_full");
  if (A.order() == 1) {
    return Eigen::Map<const Eigen::VectorXd>(A.data(), A.dim()).dot(u);
  }
  std::vector<double> last = reduce_to_length(A, u, A.dim());
  return Eigen::Map<const Eigen::VectorXd>(last.data(), A.dim()).dot(u);
}

Eigen::VectorXd contract_all_but_one(const DenseTensor& A, const Eigen::VectorXd& u) {
  check_vector_dim(A, u, "contract_all_but_one");
  if (A.order() < 2) throw std::invalid_argument("contract_all_but_one needs order >= 2");
  std::vector<double> last = reduce_to_length(A, u, A.dim());
  return Eigen::Map<const Eigen::VectorXd>(last.data(), A.dim());
}

Eigen::MatrixXd contract_all_but_two(const DenseTensor& A, const Eigen::VectorXd& u) {
  check_vector_dim(A, u, "contract_all_but_two");
  if (A.order() < 2) throw std::invalid_argument("contract_all_but_two needs order >= 2");
  int n = A.dim();
  if (A.order() == 2) {
    return RowMajorMap(A.data(), n, n);
  }
  std::vector<double> last = reduce_to_length(A, u, static_cast<std::int64_t>(n) * n);
  return RowMajorMap(last.data(), n, n);
}

DenseTensor outer_power(const Eigen::VectorXd& v, int order, std::int64_t budget) {
  int n = static_cast<int>(v.size());
  DenseTensor t(order, n, budget);
  double* d = t.data();
  for (int i = 0; i < n; ++i) d[i] = v[i];
  // Kronecker expansion in place, back to front: position i*n+j is always at
  // or beyond read position i, so descending writes never clobber pending reads.
  std::int64_t len = n;
  for (int m = 1; m < order; ++m) {
    for (std::int64_t i = len - 1; i >= 0; --i) {
      double vi = d[i];
      for (int j = n - 1; j >= 0; --j) d[i * n + j] = vi * v[j];
    }
    len *= n;
  }
  t.set_symmetric(true);
  return t;
}

double frobenius_norm(const DenseTensor& A) {
  return Eigen::Map<const Eigen::VectorXd>(A.data(), A.size()).norm();
}

void tensor_axpy(double alpha, const DenseTensor& A, DenseTensor& B) {
  if (A.order() != B.order() || A.dim() != B.dim()) {
    throw std::invalid_argument("tensor_axpy: shape mismatch");
  }
  Eigen::Map<Eigen::VectorXd>(B.data(), B.size()) +=
      alpha * Eigen::Map<const Eigen::VectorXd>(A.data(), A.size());
  if (!(A.symmetric() && B.symmetric())) B.set_symmetric(false);
}

}  // namespace otp
