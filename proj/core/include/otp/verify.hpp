#pragma once

#include <vector>

#include "otp/spectrum.hpp"

namespace otp {

/// One matched (truth component, estimate) pair after sign alignment.
struct PairVerdict {
  int truth_index = -1;
  int est_index = -1;
  double sign = 1.0;        // est vector was multiplied by this before comparing
  double lambda_err = 0.0;  // |aligned lambda_hat - lambda|
  double vec_err = 0.0;     // ||v - sign * v_hat||_2
  double max_cross = 0.0;   // max_{j > truth_index} |<v_hat, v_j>|
  bool lambda_ok = false;   // lambda_err <= eps
  bool vec_ok = false;      // vec_err <= min(sqrt(2), eps / lambda)
  bool cross_ok = false;    // max_cross <= eps / (sqrt(n) * lambda)
  bool guarantee_ok = false;  // lambda_err <= eps and vec_err <= eps / lambda

  bool ok() const { return lambda_ok && vec_ok && cross_ok; }
};

struct RecoveryReport {
  std::vector<PairVerdict> pairs;    // ordered by truth index
  std::vector<int> permutation;     // truth index -> matched estimate index
  double epsilon = 0.0;
  bool epsilon_close = false;       // all three per-pair conditions hold
  bool guarantee_ok = false;        // the weaker lambda + vector condition holds
  bool used_exhaustive = false;     // greedy matching failed, permutations searched
};

/// Matches estimates to truth components (greedy on |<v_i, v_hat_j>|, with an
/// exhaustive fallback for k <= 8), resolves the sign ambiguity (for odd p the
/// value flips with the vector), and evaluates the closeness conditions.
/// Throws std::invalid_argument when the component counts or dimensions differ.
RecoveryReport verify_epsilon_close(const Spectrum& truth, const Eigen::VectorXd& est_lambdas,
                                    const Eigen::MatrixXd& est_vectors, int p, double epsilon);

}  // namespace otp
