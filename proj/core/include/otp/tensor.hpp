#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace otp {

/// Allocation guardrail for dense order-p storage (counts elements, not bytes).
inline constexpr std::int64_t kDefaultElementBudget = std::int64_t{1} << 31;

/// n^p with overflow detection; throws BudgetError when the count exceeds
/// the budget and std::invalid_argument for non-positive n or p.
std::int64_t element_count_checked(int dim, int order,
                                   std::int64_t budget = kDefaultElementBudget);

/// Dense cubic tensor of order p and dimension n. Storage is a flat row-major
/// array: multi-index (i_1, ..., i_p) lives at sum_m i_m * n^(p-m), so i_1
/// varies slowest and the mode-1 slice A_i is the contiguous block
/// [i*n^(p-1), (i+1)*n^(p-1)).
class DenseTensor {
 public:
  DenseTensor(int order, int dim, std::int64_t budget = kDefaultElementBudget);

  static DenseTensor from_data(int order, int dim, std::vector<double> data,
                               std::int64_t budget = kDefaultElementBudget);

  int order() const { return order_; }
  int dim() const { return dim_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  /// Hint that entries are invariant under axis permutation. Generators set
  /// it; it is serialized but never trusted for correctness.
  bool symmetric() const { return symmetric_; }
  void set_symmetric(bool s) { symmetric_ = s; }

  std::int64_t flat_index(std::span<const int> multi) const;
  double at(std::span<const int> multi) const { return data_[flat_index(multi)]; }
  double& at(std::span<const int> multi) { return data_[flat_index(multi)]; }
  double at(std::initializer_list<int> multi) const {
    return at(std::span<const int>(multi.begin(), multi.size()));
  }
  double& at(std::initializer_list<int> multi) {
    return at(std::span<const int>(multi.begin(), multi.size()));
  }

 private:
  int order_;
  int dim_;
  bool symmetric_ = false;
  std::vector<double> data_;
};

/// A(u, u, ..., u): every slot contracted with u. Defined for p >= 1.
double contract_full(const DenseTensor& A, const Eigen::VectorXd& u);

/// A(I, u, ..., u): first slot free, the other p-1 contracted. p >= 2.
Eigen::VectorXd contract_all_but_one(const DenseTensor& A, const Eigen::VectorXd& u);

/// A(I, I, u, ..., u): first two slots free, the trailing p-2 contracted
/// (for p = 2 this returns the tensor itself as a matrix). p >= 2.
Eigen::MatrixXd contract_all_but_two(const DenseTensor& A, const Eigen::VectorXd& u);

/// v^(x)p, the rank-one symmetric tensor with entries prod_m v_{i_m}.
DenseTensor outer_power(const Eigen::VectorXd& v, int order,
                        std::int64_t budget = kDefaultElementBudget);

double frobenius_norm(const DenseTensor& A);

/// B += alpha * A. Shapes must match exactly.
void tensor_axpy(double alpha, const DenseTensor& A, DenseTensor& B);

}  // namespace otp
