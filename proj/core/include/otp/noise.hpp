#pragma once

#include <cstdint>

#include "otp/tensor.hpp"

namespace otp {

/// Recipe for a symmetrized Gaussian noise tensor scaled to a target
/// spectral norm (as measured by spectral_norm_estimate).
struct NoiseSpec {
  double target_spectral_norm = 0.0;
  int estimator_restarts = 20;
  int estimator_iters = 50;
  std::uint64_t seed = 0;
};

/// Lower-bound estimate of the tensor spectral norm max_{|x|=1} |A(x,...,x)|
/// via multi-start normalized contraction iteration; the exact norm is
/// NP-hard. Tracks the best |A(x,...,x)| seen across all restarts and
/// iterates, so it is monotone in restarts and deterministic per seed.
double spectral_norm_estimate(const DenseTensor& A, int restarts, int iters,
                              std::uint64_t seed);

/// Averages entries over axis permutations in place: all p! permutations for
/// p <= 4, p random permutations (drawn from seed) for larger orders.
void symmetrize(DenseTensor& A, std::uint64_t seed);

/// Symmetrized i.i.d. N(0,1) tensor rescaled so that the spectral norm
/// estimate equals spec.target_spectral_norm (exactly, by linearity of the
/// estimator). target 0 returns the zero tensor.
DenseTensor gaussian_noise_tensor(int n, int p, const NoiseSpec& spec,
                                  std::int64_t budget = kDefaultElementBudget);

}  // namespace otp
