#include "otp/tpm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "otp/errors.hpp"
#include "otp/rng.hpp"

namespace otp {
namespace {

constexpr double kDegenerateNorm = 1e-14;

/// tan of the angle to the closer of +/-v, so traces are invariant under the
/// sign ambiguity of even-order components.
double tan_to_axis(const AngleStats& a) {
  const double c = std::abs(a.cos);
  if (c == 0.0) return std::numeric_limits<double>::infinity();
  return a.sin / c;
}

IterationRecord make_record(int t, int phase, double update_residual, const Eigen::VectorXd& u,
                            const ContractionBackend& backend, const DeflationSet& deflation,
                            const TraceOptions& opts) {
  IterationRecord rec;
  rec.t = t;
  rec.phase = phase;
  rec.update_residual = update_residual;
  if (opts.truth != nullptr) {
    const AngleStats a = angle_stats(u, opts.truth->vectors.col(opts.component));
    rec.tan_theta = tan_to_axis(a);
    const double c0pk = opts.c0 * backend.order() * opts.k;
    rec.xi = std::abs(a.cos) <= 1.0 - 1.0 / (c0pk * c0pk);
    rec.has_truth = true;
  }
  if (opts.record_rayleigh) {
    rec.rayleigh = backend.query_value_res(deflation, u);
    rec.has_rayleigh = true;
  }
  return rec;
}

}  // namespace

AngleStats angle_stats(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) throw std::invalid_argument("angle_stats: size mismatch");
  AngleStats a;
  a.cos = u.dot(v);
  a.sin = std::sqrt(std::max(0.0, 1.0 - a.cos * a.cos));
  a.tan = a.cos == 0.0 ? std::numeric_limits<double>::infinity() : a.sin / a.cos;
  return a;
}

void PowerMethodConfig::validate() const {
  if (p < 3) throw std::invalid_argument("PowerMethodConfig: order p must be >= 3");
  if (n < 1) throw std::invalid_argument("PowerMethodConfig: dimension n must be >= 1");
  if (k < 1 || k > n) throw std::invalid_argument("PowerMethodConfig: need 1 <= k <= n");
  if (epsilon <= 0.0) throw std::invalid_argument("PowerMethodConfig: epsilon must be positive");
  if (c0 <= 0.0 || c <= 0.0) throw std::invalid_argument("PowerMethodConfig: c0, c must be positive");
  if (mode == Mode::benchmark) {
    if (T < 1 || L < 1) throw std::invalid_argument("PowerMethodConfig: need T >= 1 and L >= 1");
  } else {
    // The convergence statement is proved for c0 >= 100; refuse to pretend.
    if (c0 < 100.0) throw std::invalid_argument("PowerMethodConfig: guarantee mode needs c0 >= 100");
  }
}

Eigen::MatrixXd init_candidates(int n, int L, std::uint64_t seed) {
  if (n < 1 || L < 1) throw std::invalid_argument("init_candidates: need n >= 1 and L >= 1");
  Eigen::MatrixXd out(n, L);
  Rng root(seed);
  for (int l = 0; l < L; ++l) out.col(l) = root.split(static_cast<std::uint64_t>(l)).unit_vector(n);
  return out;
}

bool check_init_separation(const Eigen::VectorXd& u, const Spectrum& spec, int t) {
  if (t < 0 || t >= spec.k()) throw std::invalid_argument("check_init_separation: bad component");
  if (u.size() != spec.n()) throw std::invalid_argument("check_init_separation: size mismatch");
  const Eigen::VectorXd dots = spec.vectors.transpose() * u;
  const double lead = std::abs(dots(t));
  if (lead < 1.0 / std::sqrt(static_cast<double>(spec.n()))) return false;
  for (int j = 0; j < spec.k(); ++j) {
    if (j == t) continue;
    if (std::abs(dots(j)) > 0.25 * lead) return false;
  }
  return true;
}

Eigen::VectorXd power_step(const ContractionBackend& backend, const DeflationSet& deflation,
                           const Eigen::VectorXd& u) {
  Eigen::VectorXd w = backend.query_res(deflation, u).values;
  const double nrm = w.norm();
  if (!(nrm > kDegenerateNorm)) {
    throw DegenerateUpdateError("power_step: contraction norm " + std::to_string(nrm) +
                                " below " + std::to_string(kDegenerateNorm));
  }
  w /= nrm;
  return w;
}

ExtractResult extract_top(const ContractionBackend& backend, const DeflationSet& deflation,
                          int T, int L, std::uint64_t seed, const TraceOptions& opts) {
  if (T < 1 || L < 1) throw std::invalid_argument("extract_top: need T >= 1 and L >= 1");
  const int n = backend.dim();
  Rng root(seed);

  constexpr int kMaxAttempts = 4;  // initial draw plus three fresh restarts
  const double ninf = -std::numeric_limits<double>::infinity();

  Eigen::VectorXd values = Eigen::VectorXd::Constant(L, ninf);
  Eigen::MatrixXd finals(n, L);
  std::vector<std::vector<IterationRecord>> records(static_cast<std::size_t>(L));

  for (int l = 0; l < L; ++l) {
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      // Attempt 0 matches init_candidates(n, L, seed) column l exactly.
      Rng stream = attempt == 0
                       ? root.split(static_cast<std::uint64_t>(l))
                       : root.split(0x52455354u + static_cast<std::uint64_t>(l) * kMaxAttempts +
                                    static_cast<std::uint64_t>(attempt));
      Eigen::VectorXd u = stream.unit_vector(n);
      std::vector<IterationRecord> rec;
      rec.reserve(static_cast<std::size_t>(T) + 1);
      rec.push_back(make_record(0, 1, 0.0, u, backend, deflation, opts));
      bool degenerate = false;
      for (int t = 1; t <= T; ++t) {
        Eigen::VectorXd next;
        try {
          next = power_step(backend, deflation, u);
        } catch (const DegenerateUpdateError&) {
          degenerate = true;
          break;
        }
        rec.push_back(make_record(t, 1, (next - u).norm(), next, backend, deflation, opts));
        u = std::move(next);
      }
      if (degenerate) continue;
      values(l) = backend.query_value_res(deflation, u);
      finals.col(l) = u;
      records[static_cast<std::size_t>(l)] = std::move(rec);
      break;
    }
  }

  int winner = -1;
  for (int l = 0; l < L; ++l) {
    if (values(l) == ninf) continue;
    if (winner < 0 || values(l) > values(winner)) winner = l;  // ties keep the lowest index
  }
  if (winner < 0) throw ExtractionError("extract_top: every restart hit a degenerate update");

  ExtractResult out;
  out.candidate_values = values;
  out.winner = winner;
  out.trace.candidate = winner;
  out.trace.records = std::move(records[static_cast<std::size_t>(winner)]);

  Eigen::VectorXd u = finals.col(winner);
  for (int t = 1; t <= T; ++t) {
    Eigen::VectorXd next = power_step(backend, deflation, u);
    out.trace.records.push_back(make_record(t, 2, (next - u).norm(), next, backend, deflation, opts));
    u = std::move(next);
  }

  double lambda = backend.query_value_res(deflation, u);
  if (backend.order() % 2 == 1 && lambda < 0.0) {
    u = -u;  // odd order: flipping the vector flips the value, canonicalize to lambda >= 0
    lambda = -lambda;
  }
  out.lambda = lambda;
  out.v = std::move(u);
  return out;
}

int guarantee_iterations(double lambda1_hat, int n, double epsilon) {
  if (!(lambda1_hat > 0.0) || n < 1 || !(epsilon > 0.0)) {
    throw std::invalid_argument("guarantee_iterations: need lambda1 > 0, n >= 1, epsilon > 0");
  }
  const double t = 10.0 * std::log(lambda1_hat * static_cast<double>(n) / epsilon);
  return std::max(1, static_cast<int>(std::ceil(t)));
}

int guarantee_restarts(int k) {
  if (k < 1) throw std::invalid_argument("guarantee_restarts: need k >= 1");
  const double l = 10.0 * k * std::log(static_cast<double>(std::max(k, 2)));
  return std::max(1, static_cast<int>(std::ceil(l)));
}

double top_value_prepass(const ContractionBackend& backend, std::uint64_t seed) {
  const DeflationSet none = DeflationSet::empty(backend.dim());
  const ExtractResult res = extract_top(backend, none, /*T=*/20, /*L=*/3, seed);
  return std::abs(res.lambda);
}

DecomposeResult decompose(const ContractionBackend& backend, const PowerMethodConfig& cfg,
                          const TraceOptions& opts) {
  cfg.validate();
  if (backend.order() != cfg.p || backend.dim() != cfg.n) {
    throw std::invalid_argument("decompose: backend shape does not match config");
  }

  Rng root(cfg.seed);
  int T = cfg.T;
  int L = cfg.L;
  if (cfg.mode == PowerMethodConfig::Mode::guarantee) {
    const double lambda1 = top_value_prepass(backend, root.split(0x50524550u).next_u64());
    T = guarantee_iterations(lambda1, cfg.n, cfg.epsilon);
    L = guarantee_restarts(cfg.k);
  }

  DecomposeResult out;
  out.T = T;
  out.L = L;
  out.lambdas.resize(cfg.k);
  out.vectors.resize(cfg.n, cfg.k);
  out.traces.reserve(static_cast<std::size_t>(cfg.k));

  DeflationSet ds = DeflationSet::empty(cfg.n);
  for (int i = 0; i < cfg.k; ++i) {
    TraceOptions round = opts;
    if (opts.truth != nullptr) round.component = std::min(i, opts.truth->k() - 1);
    const std::uint64_t seed_i = root.split(0x434f4d50u + static_cast<std::uint64_t>(i)).next_u64();
    ExtractResult res = extract_top(backend, ds, T, L, seed_i, round);
    out.lambdas(i) = res.lambda;
    out.vectors.col(i) = res.v;
    out.traces.push_back(std::move(res.trace));
    ds.push(res.v, res.lambda * res.v);
  }
  return out;
}

}  // namespace otp
