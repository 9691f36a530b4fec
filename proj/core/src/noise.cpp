#include "otp/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "otp/rng.hpp"

namespace otp {

double spectral_norm_estimate(const DenseTensor& A, int restarts, int iters,
                              std::uint64_t seed) {
  if (restarts < 1) throw std::invalid_argument("spectral_norm_estimate: restarts >= 1");
  if (iters < 1) throw std::invalid_argument("spectral_norm_estimate: iters >= 1");
  int n = A.dim();
  if (A.order() == 1) {
    // max over unit x of |<A, x>| is just the 2-norm.
    return Eigen::Map<const Eigen::VectorXd>(A.data(), n).norm();
  }
  Rng root(seed);
  double best = 0.0;
  for (int r = 0; r < restarts; ++r) {
    Rng stream = root.split(static_cast<std::uint64_t>(r));
    Eigen::VectorXd u = stream.unit_vector(n);
    for (int t = 0; t <= iters; ++t) {
      Eigen::VectorXd w = contract_all_but_one(A, u);
      best = std::max(best, std::abs(u.dot(w)));  // u.w = A(u,...,u)
      if (t == iters) break;
      double norm = w.norm();
      if (norm < 1e-300) break;  // stalled (zero tensor or exact null direction)
      u = w / norm;
    }
  }
  return best;
}

void symmetrize(DenseTensor& A, std::uint64_t seed) {
  int p = A.order();
  if (p <= 1) return;
  int n = A.dim();

  std::vector<std::vector<int>> perms;
  if (p <= 4) {
    std::vector<int> idx(p);
    for (int m = 0; m < p; ++m) idx[m] = m;
    do {
      perms.push_back(idx);
    } while (std::next_permutation(idx.begin(), idx.end()));
  } else {
    // Full p! averaging blows up; p random permutations keep the noise model
    // approximately symmetric at O(p * n^p) cost.
    Rng rng = Rng(seed).split(0x53594d);
    for (int m = 0; m < p; ++m) perms.push_back(rng.permutation(p));
  }

  const std::vector<double> src = A.values();
  std::vector<std::int64_t> stride(p);
  stride[p - 1] = 1;
  for (int m = p - 2; m >= 0; --m) stride[m] = stride[m + 1] * n;

  std::vector<int> d(p, 0);
  double inv = 1.0 / static_cast<double>(perms.size());
  for (std::int64_t idx = 0; idx < A.size(); ++idx) {
    double acc = 0.0;
    for (const auto& sigma : perms) {
      std::int64_t s = 0;
      for (int m = 0; m < p; ++m) s += d[sigma[m]] * stride[m];
      acc += src[static_cast<std::size_t>(s)];
    }
    A.data()[idx] = acc * inv;
    for (int m = p - 1; m >= 0; --m) {  // odometer
      if (++d[m] < n) break;
      d[m] = 0;
    }
  }
  if (p <= 4) A.set_symmetric(true);
}

DenseTensor gaussian_noise_tensor(int n, int p, const NoiseSpec& spec, std::int64_t budget) {
  if (spec.target_spectral_norm < 0) {
    throw std::invalid_argument("gaussian_noise_tensor: negative target norm");
  }
  DenseTensor e(p, n, budget);
  if (spec.target_spectral_norm == 0.0) return e;

  Rng rng = Rng(spec.seed).split(0x4e4f495345);
  for (std::int64_t i = 0; i < e.size(); ++i) e.data()[i] = rng.next_gaussian();
  symmetrize(e, Rng(spec.seed).split(1).next_u64());

  double estimate = spectral_norm_estimate(e, spec.estimator_restarts, spec.estimator_iters,
                                           Rng(spec.seed).split(2).next_u64());
  if (estimate <= 0) throw std::runtime_error("gaussian_noise_tensor: estimator returned 0");
  // The estimator is multilinear in the tensor, so after scaling it returns
  // exactly the target (same seed, same iterate path).
  double scale = spec.target_spectral_norm / estimate;
  Eigen::Map<Eigen::VectorXd>(e.data(), e.size()) *= scale;
  return e;
}

}  // namespace otp
