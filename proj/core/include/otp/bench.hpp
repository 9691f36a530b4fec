#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "otp/backend.hpp"
#include "otp/spectrum.hpp"
#include "otp/tensor.hpp"

namespace otp {

/// Eigenvalue decay families used by the synthetic instances.
struct DecayProfile {
  enum class Kind { inverse, inverse_square, linear } kind = Kind::inverse;
  int k = 1;
};

/// inverse: 1/i, inverse_square: 1/i^2, linear: 1 - (i-1)/k (i is 1-based).
Eigen::VectorXd decay_lambdas(const DecayProfile& profile);
std::string to_string(DecayProfile::Kind kind);
DecayProfile::Kind profile_kind_from_string(const std::string& name);

/// A = sum_i lambda_i v_i^(x p) + E, with a random orthonormal basis and E a
/// symmetrized tensor of iid N(0, sigma^2) entries (std measured before
/// symmetrization). Returns the tensor and the planted spectrum.
std::pair<DenseTensor, Spectrum> gen_synthetic(const DecayProfile& profile, int n, int p,
                                               double sigma, std::uint64_t seed,
                                               std::int64_t budget = kDefaultElementBudget);

/// ||A - sum_i lh_i vh_i^(x p)||_F^2 via the expansion
/// ||A||_F^2 - 2 sum_i lh_i <A, vh_i^(x p)> + sum_{i,j} lh_i lh_j <vh_i, vh_j>^p,
/// so the subtraction is never materialized. Clamped at zero.
double residual_sq_frobenius(const DenseTensor& A, const Eigen::VectorXd& lambdas,
                             const Eigen::MatrixXd& vectors);

struct BenchConfig {
  DecayProfile profile;
  int n = 16;
  int p = 3;
  double sigma = 0.0;
  int T = 30;
  int L = 50;
  bool rank1 = false;  // extract only the top pair instead of all profile.k
  std::vector<std::pair<int, int>> grid;  // sketched cells as (B, b); the exact
                                          // baseline always runs once per seed
  std::vector<std::uint64_t> seeds;
  int repetitions = 5;          // timed query repetitions per cell (median)
  bool measure_timings = true;  // false writes zeros, making output byte-stable
  void validate() const;
};

struct BenchRow {
  std::string profile;
  int n = 0;
  int p = 0;
  int k = 0;
  double sigma = 0.0;
  int B = 0;  // 0 for exact-backend rows
  int b = 0;
  std::uint64_t seed = 0;
  std::string mode;  // exact_rank1 | sketch_rank1 | exact_full | sketch_full
  double residual_sq = 0.0;
  double init_ms = 0.0;
  double iter_us = 0.0;
  std::string status;  // ok | failed
  Eigen::VectorXd lambdas;  // recovered values (not serialized to CSV)
  Eigen::MatrixXd vectors;
};

struct BenchResult {
  std::vector<BenchRow> rows;  // sorted on (B, b, seed, mode)
};

/// Runs every (grid cell x seed) plus one exact baseline per seed. A throwing
/// cell is recorded with status "failed" instead of aborting the sweep.
BenchResult run_benchmark(const BenchConfig& cfg);

/// header: profile,n,p,k,sigma,B,b,seed,mode,residual_sq,init_ms,iter_us,status
void write_csv(const BenchResult& result, std::ostream& os);
void write_csv(const BenchResult& result, const std::string& path);

enum class BackendKind { exact, sketch };

struct TimingScalingReport {
  std::vector<int> ns;
  std::vector<double> iter_us;
  std::vector<double> init_ms;
  double iter_slope = 0.0;  // least-squares slope of log(iter time) vs log(n)
  double init_slope = 0.0;
};

/// Measures per-query and construction cost of a backend over >= 3 dimensions
/// and fits log-log slopes. Timing runs pinned to one worker.
TimingScalingReport timing_scaling_report(int p, const std::vector<int>& ns, BackendKind kind,
                                          const BackendConfig& sketch_cfg = {});

}  // namespace otp
