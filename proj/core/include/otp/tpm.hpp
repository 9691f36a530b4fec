#pragma once

#include <cstdint>
#include <vector>

#include "otp/backend.hpp"
#include "otp/spectrum.hpp"

namespace otp {

/// cos/sin/tan of the angle between two unit vectors; cos is the signed inner
/// product, tan is +infinity when cos = 0.
struct AngleStats {
  double cos = 0.0;
  double sin = 0.0;
  double tan = 0.0;
};
AngleStats angle_stats(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// All knobs of the extraction loop. In guarantee mode T and L are derived
/// (T from a cheap top-value pre-pass) and the hypothesis checks apply.
struct PowerMethodConfig {
  int p = 3;
  int n = 0;
  int k = 1;
  int T = 30;
  int L = 50;
  double epsilon = 1e-3;
  double c0 = 100.0;
  double c = 1.0;  // free constant in the epsilon-range hypothesis
  std::uint64_t seed = 0;
  enum class Mode { benchmark, guarantee } mode = Mode::benchmark;

  void validate() const;
};

struct IterationRecord {
  int t = 0;      // 0 is the initial iterate of the phase
  int phase = 1;  // 1 = restart sweep, 2 = polish on the winner
  double update_residual = 0.0;  // ||u_t - u_{t-1}||, 0 at t = 0
  // Filled only when a truth spectrum is attached to the run:
  double tan_theta = 0.0;  // angle to the reference axis, sign-invariant
  bool xi = false;         // |<v_ref, u_t>| <= 1 - 1/(c0^2 p^2 k^2)
  double rayleigh = 0.0;   // deflated Rayleigh value, recorded on request
  bool has_truth = false;
  bool has_rayleigh = false;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  int candidate = -1;  // restart index the records belong to
};

/// Optional instrumentation for extract_top/decompose. Attaching a truth
/// spectrum enables the angle/event fields; recording Rayleigh values costs
/// one extra value query per step.
struct TraceOptions {
  const Spectrum* truth = nullptr;
  int component = 0;  // reference axis: truth->vectors.col(component)
  double c0 = 100.0;
  int k = 1;
  bool record_rayleigh = false;
};

/// L independent normalized Gaussian candidates (columns), one derived seed
/// stream per candidate so restarts can run in parallel.
Eigen::MatrixXd init_candidates(int n, int L, std::uint64_t seed);

/// Both separation conditions for component t (0-based):
/// max_{j != t} |v_j.u| <= |v_t.u|/4 and |v_t.u| >= 1/sqrt(n).
bool check_init_separation(const Eigen::VectorXd& u, const Spectrum& spec, int t);

/// One normalized residual-contraction step. Throws DegenerateUpdateError when
/// the contraction is numerically zero (caller restarts the candidate).
Eigen::VectorXd power_step(const ContractionBackend& backend, const DeflationSet& deflation,
                           const Eigen::VectorXd& u);

struct ExtractResult {
  double lambda = 0.0;
  Eigen::VectorXd v;
  IterationTrace trace;               // winning candidate, both phases
  Eigen::VectorXd candidate_values;   // Rayleigh value per restart after phase 1
  int winner = -1;
};

/// One component: L restarts of T steps each, keep the best Rayleigh value
/// (ties to the lowest restart index), polish it with T more steps, and
/// canonicalize the sign for odd p so lambda >= 0.
ExtractResult extract_top(const ContractionBackend& backend, const DeflationSet& deflation,
                          int T, int L, std::uint64_t seed, const TraceOptions& opts = {});

struct DecomposeResult {
  Eigen::VectorXd lambdas;   // extraction order, not sorted
  Eigen::MatrixXd vectors;   // n x k
  std::vector<IterationTrace> traces;
  int T = 0;  // values actually used (guarantee mode derives them)
  int L = 0;
};

/// Sequential deflation: k extract_top rounds, each against the residual via
/// query_res with alpha(:,j) = lambda_j v_j. The deflated tensor is never
/// materialized.
DecomposeResult decompose(const ContractionBackend& backend, const PowerMethodConfig& cfg,
                          const TraceOptions& opts = {});

/// Guarantee-mode knob derivations (natural log).
int guarantee_iterations(double lambda1_hat, int n, double epsilon);
int guarantee_restarts(int k);

/// Cheap undeflated top-value estimate used to size guarantee-mode T.
double top_value_prepass(const ContractionBackend& backend, std::uint64_t seed);

}  // namespace otp
