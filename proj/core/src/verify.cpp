#include "otp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace otp {
namespace {

std::vector<PairVerdict> evaluate(const Spectrum& truth, const Eigen::VectorXd& est_lambdas,
                                  const Eigen::MatrixXd& est_vectors,
                                  const Eigen::MatrixXd& gram, const std::vector<int>& perm,
                                  int p, double epsilon) {
  const int k = truth.k();
  const double sqrt_n = std::sqrt(static_cast<double>(truth.n()));
  std::vector<PairVerdict> pairs(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const int j = perm[static_cast<std::size_t>(i)];
    PairVerdict& v = pairs[static_cast<std::size_t>(i)];
    v.truth_index = i;
    v.est_index = j;
    v.sign = gram(i, j) < 0.0 ? -1.0 : 1.0;
    const double lambda = truth.lambdas(i);
    const double aligned_lambda = p % 2 == 1 ? v.sign * est_lambdas(j) : est_lambdas(j);
    v.lambda_err = std::abs(aligned_lambda - lambda);
    // Differenced directly: the closed form sqrt(2 - 2 s <v, v_hat>) loses
    // everything below ~1e-8 to cancellation when the vectors nearly coincide.
    v.vec_err = (truth.vectors.col(i) - v.sign * est_vectors.col(j)).norm();
    v.max_cross = 0.0;
    for (int j2 = i + 1; j2 < k; ++j2) v.max_cross = std::max(v.max_cross, std::abs(gram(j2, j)));
    v.lambda_ok = v.lambda_err <= epsilon;
    v.vec_ok = v.vec_err <= std::min(std::sqrt(2.0), epsilon / lambda);
    v.cross_ok = v.max_cross <= epsilon / (sqrt_n * lambda);
    v.guarantee_ok = v.lambda_err <= epsilon && v.vec_err <= epsilon / lambda;
  }
  return pairs;
}

bool all_ok(const std::vector<PairVerdict>& pairs) {
  return std::all_of(pairs.begin(), pairs.end(), [](const PairVerdict& v) { return v.ok(); });
}

/// Each truth component grabs the estimate with the largest remaining overlap,
/// strongest overlaps first.
std::vector<int> greedy_match(const Eigen::MatrixXd& gram) {
  const int k = static_cast<int>(gram.rows());
  std::vector<int> perm(static_cast<std::size_t>(k), -1);
  std::vector<bool> truth_used(static_cast<std::size_t>(k), false);
  std::vector<bool> est_used(static_cast<std::size_t>(k), false);
  for (int round = 0; round < k; ++round) {
    int bi = -1, bj = -1;
    double best = -1.0;
    for (int i = 0; i < k; ++i) {
      if (truth_used[static_cast<std::size_t>(i)]) continue;
      for (int j = 0; j < k; ++j) {
        if (est_used[static_cast<std::size_t>(j)]) continue;
        if (std::abs(gram(i, j)) > best) {
          best = std::abs(gram(i, j));
          bi = i;
          bj = j;
        }
      }
    }
    perm[static_cast<std::size_t>(bi)] = bj;
    truth_used[static_cast<std::size_t>(bi)] = true;
    est_used[static_cast<std::size_t>(bj)] = true;
  }
  return perm;
}

}  // namespace

RecoveryReport verify_epsilon_close(const Spectrum& truth, const Eigen::VectorXd& est_lambdas,
                                    const Eigen::MatrixXd& est_vectors, int p, double epsilon) {
  truth.validate();
  if (p < 2) throw std::invalid_argument("verify_epsilon_close: order p must be >= 2");
  if (!(epsilon > 0.0)) throw std::invalid_argument("verify_epsilon_close: epsilon must be positive");
  const int k = truth.k();
  if (static_cast<int>(est_lambdas.size()) != k || static_cast<int>(est_vectors.cols()) != k) {
    throw std::invalid_argument("verify_epsilon_close: component count mismatch");
  }
  if (est_vectors.rows() != truth.vectors.rows()) {
    throw std::invalid_argument("verify_epsilon_close: dimension mismatch");
  }

  const Eigen::MatrixXd gram = truth.vectors.transpose() * est_vectors;

  RecoveryReport report;
  report.epsilon = epsilon;
  report.permutation = greedy_match(gram);
  report.pairs = evaluate(truth, est_lambdas, est_vectors, gram, report.permutation, p, epsilon);

  if (!all_ok(report.pairs) && k <= 8) {
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      auto pairs = evaluate(truth, est_lambdas, est_vectors, gram, perm, p, epsilon);
      if (all_ok(pairs)) {
        report.permutation = perm;
        report.pairs = std::move(pairs);
        report.used_exhaustive = true;
        break;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  report.epsilon_close = all_ok(report.pairs);
  report.guarantee_ok = std::all_of(report.pairs.begin(), report.pairs.end(),
                                    [](const PairVerdict& v) { return v.guarantee_ok; });
  return report;
}

}  // namespace otp
