#include "otp/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "otp/errors.hpp"
#include "otp/noise.hpp"
#include "otp/parallel.hpp"
#include "otp/rng.hpp"
#include "otp/sketch_backend.hpp"
#include "otp/tpm.hpp"

namespace otp {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

volatile double g_timing_sink = 0.0;

/// Timing runs under a single worker so pool scheduling does not skew slopes.
struct ThreadPin {
  int prev;
  ThreadPin() : prev(thread_count()) { set_thread_count(1); }
  ~ThreadPin() { set_thread_count(prev); }
};

/// Per-call cost in microseconds, repeating the call until at least ~2 ms of
/// work is measured so sub-microsecond queries still time reliably.
double time_query_us(const ContractionBackend& backend, const Eigen::VectorXd& u) {
  g_timing_sink = backend.query(u).values(0);  // warm caches and scratch
  long reps = 1;
  for (;;) {
    const auto t0 = Clock::now();
    double sink = 0.0;
    for (long r = 0; r < reps; ++r) sink += backend.query(u).values(0);
    const double ms = elapsed_ms(t0);
    g_timing_sink = sink;
    if (ms >= 2.0 || reps >= (1L << 24)) return ms * 1e3 / static_cast<double>(reps);
    reps = std::max(reps * 4, static_cast<long>(reps * 2.5 / std::max(ms, 1e-6)));
  }
}

template <typename F>
double time_callable_ms(F&& f, double min_ms) {
  f();  // warm
  long reps = 1;
  for (;;) {
    const auto t0 = Clock::now();
    for (long r = 0; r < reps; ++r) f();
    const double ms = elapsed_ms(t0);
    if (ms >= min_ms || reps >= (1L << 20)) return ms / static_cast<double>(reps);
    reps = std::max(reps * 4, static_cast<long>(reps * (min_ms * 1.25) / std::max(ms, 1e-6)));
  }
}

double median_inplace(std::vector<double>& xs) {
  const std::size_t m = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(m), xs.end());
  double hi = xs[m];
  if (xs.size() % 2 == 0) {
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(m - 1),
                     xs.begin() + static_cast<std::ptrdiff_t>(m));
    return 0.5 * (xs[m - 1] + hi);
  }
  return hi;
}

double ipow(double x, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= x;
  return out;
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

BenchRow run_cell(const DenseTensor& A, const BenchConfig& cfg, std::uint64_t seed,
                  std::uint64_t extraction_seed, const std::optional<std::pair<int, int>>& cell) {
  BenchRow row;
  row.profile = to_string(cfg.profile.kind);
  row.n = cfg.n;
  row.p = cfg.p;
  row.k = cfg.profile.k;
  row.sigma = cfg.sigma;
  row.seed = seed;
  row.mode = std::string(cell ? "sketch" : "exact") + (cfg.rank1 ? "_rank1" : "_full");
  row.status = "ok";
  try {
    std::unique_ptr<ContractionBackend> backend;
    const auto t0 = Clock::now();
    if (cell) {
      BackendConfig bc;
      bc.B = cell->first;
      bc.b = cell->second;
      bc.seed = Rng(seed)
                    .split(0x534bu)
                    .split(static_cast<std::uint64_t>(bc.B))
                    .split(static_cast<std::uint64_t>(bc.b))
                    .next_u64();
      backend = std::make_unique<SketchBackend>(A, bc);
      row.B = cell->first;
      row.b = cell->second;
    } else {
      backend = std::make_unique<ExactBackend>(A);
    }
    if (cfg.measure_timings) row.init_ms = elapsed_ms(t0);

    if (cfg.rank1) {
      const ExtractResult res =
          extract_top(*backend, DeflationSet::empty(cfg.n), cfg.T, cfg.L, extraction_seed);
      row.lambdas = Eigen::VectorXd::Constant(1, res.lambda);
      row.vectors = res.v;
    } else {
      PowerMethodConfig pc;
      pc.p = cfg.p;
      pc.n = cfg.n;
      pc.k = cfg.profile.k;
      pc.T = cfg.T;
      pc.L = cfg.L;
      pc.seed = extraction_seed;
      const DecomposeResult res = decompose(*backend, pc);
      row.lambdas = res.lambdas;
      row.vectors = res.vectors;
    }
    row.residual_sq = residual_sq_frobenius(A, row.lambdas, row.vectors);

    if (cfg.measure_timings) {
      ThreadPin pin;
      const Eigen::VectorXd u = init_candidates(cfg.n, 1, extraction_seed).col(0);
      std::vector<double> samples(static_cast<std::size_t>(cfg.repetitions));
      for (double& s : samples) s = time_query_us(*backend, u);
      row.iter_us = median_inplace(samples);
    }
  } catch (const std::exception&) {
    row.status = "failed";
    row.residual_sq = std::numeric_limits<double>::quiet_NaN();
    row.init_ms = 0.0;
    row.iter_us = 0.0;
  }
  return row;
}

}  // namespace

Eigen::VectorXd decay_lambdas(const DecayProfile& profile) {
  if (profile.k < 1) throw std::invalid_argument("decay_lambdas: rank must be >= 1");
  Eigen::VectorXd out(profile.k);
  for (int i = 1; i <= profile.k; ++i) {
    switch (profile.kind) {
      case DecayProfile::Kind::inverse:
        out(i - 1) = 1.0 / i;
        break;
      case DecayProfile::Kind::inverse_square:
        out(i - 1) = 1.0 / (static_cast<double>(i) * i);
        break;
      case DecayProfile::Kind::linear:
        out(i - 1) = 1.0 - static_cast<double>(i - 1) / profile.k;
        break;
    }
  }
  return out;
}

std::string to_string(DecayProfile::Kind kind) {
  switch (kind) {
    case DecayProfile::Kind::inverse:
      return "inverse";
    case DecayProfile::Kind::inverse_square:
      return "inverse_square";
    case DecayProfile::Kind::linear:
      return "linear";
  }
  throw std::invalid_argument("to_string: bad profile kind");
}

DecayProfile::Kind profile_kind_from_string(const std::string& name) {
  if (name == "inverse") return DecayProfile::Kind::inverse;
  if (name == "inverse_square" || name == "inverse-square") return DecayProfile::Kind::inverse_square;
  if (name == "linear") return DecayProfile::Kind::linear;
  throw std::invalid_argument("unknown decay profile: " + name);
}

std::pair<DenseTensor, Spectrum> gen_synthetic(const DecayProfile& profile, int n, int p,
                                               double sigma, std::uint64_t seed,
                                               std::int64_t budget) {
  if (n < 1 || p < 2) throw std::invalid_argument("gen_synthetic: need n >= 1 and p >= 2");
  if (profile.k > n) throw std::invalid_argument("gen_synthetic: rank exceeds dimension");
  if (sigma < 0.0) throw std::invalid_argument("gen_synthetic: sigma must be >= 0");

  Rng root(seed);
  Spectrum truth;
  truth.lambdas = decay_lambdas(profile);
  truth.vectors = random_orthonormal_basis(n, profile.k, root.split(0x42415349u).next_u64());
  DenseTensor A = synth_orthogonal(truth, p, budget);

  if (sigma > 0.0) {
    DenseTensor E(p, n, budget);
    Rng g = root.split(0x4e4f4953u);
    double* x = E.data();
    const std::int64_t count = static_cast<std::int64_t>(E.values().size());
    for (std::int64_t i = 0; i < count; ++i) x[i] = sigma * g.next_gaussian();
    symmetrize(E, root.split(0x53594d4du).next_u64());
    tensor_axpy(1.0, E, A);
  }
  return {std::move(A), std::move(truth)};
}

double residual_sq_frobenius(const DenseTensor& A, const Eigen::VectorXd& lambdas,
                             const Eigen::MatrixXd& vectors) {
  const int r = static_cast<int>(lambdas.size());
  if (static_cast<int>(vectors.cols()) != r) {
    throw std::invalid_argument("residual_sq_frobenius: estimate shape mismatch");
  }
  if (r > 0 && static_cast<int>(vectors.rows()) != A.dim()) {
    throw std::invalid_argument("residual_sq_frobenius: dimension mismatch");
  }
  const double fro = frobenius_norm(A);
  double out = fro * fro;
  for (int i = 0; i < r; ++i) out -= 2.0 * lambdas(i) * contract_full(A, vectors.col(i));
  if (r > 0) {
    const Eigen::MatrixXd gram = vectors.transpose() * vectors;
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) out += lambdas(i) * lambdas(j) * ipow(gram(i, j), A.order());
    }
  }
  return std::max(0.0, out);
}

void BenchConfig::validate() const {
  if (n < 1 || p < 3) throw std::invalid_argument("BenchConfig: need n >= 1 and p >= 3");
  if (profile.k < 1 || profile.k > n) throw std::invalid_argument("BenchConfig: need 1 <= k <= n");
  if (sigma < 0.0) throw std::invalid_argument("BenchConfig: sigma must be >= 0");
  if (T < 1 || L < 1) throw std::invalid_argument("BenchConfig: need T >= 1 and L >= 1");
  if (repetitions < 1) throw std::invalid_argument("BenchConfig: repetitions must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("BenchConfig: need at least one seed");
  for (const auto& [B, b] : grid) {
    if (B < 1 || b < 1) throw std::invalid_argument("BenchConfig: grid entries need B >= 1, b >= 1");
  }
}

BenchResult run_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  BenchResult out;
  out.rows.reserve(cfg.seeds.size() * (cfg.grid.size() + 1));
  for (const std::uint64_t seed : cfg.seeds) {
    const auto [A, truth] = gen_synthetic(cfg.profile, cfg.n, cfg.p, cfg.sigma, seed);
    // One extraction seed per instance: exact and sketched cells start from
    // identical candidates, so residual comparisons across b are paired.
    const std::uint64_t extraction_seed = Rng(seed).split(0x455854u).next_u64();
    out.rows.push_back(run_cell(A, cfg, seed, extraction_seed, std::nullopt));
    for (const auto& cell : cfg.grid) {
      out.rows.push_back(run_cell(A, cfg, seed, extraction_seed, cell));
    }
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::tie(a.B, a.b, a.seed, a.mode) < std::tie(b.B, b.b, b.seed, b.mode);
  });
  return out;
}

void write_csv(const BenchResult& result, std::ostream& os) {
  os << "profile,n,p,k,sigma,B,b,seed,mode,residual_sq,init_ms,iter_us,status\n";
  for (const BenchRow& r : result.rows) {
    os << r.profile << ',' << r.n << ',' << r.p << ',' << r.k << ',' << fmt(r.sigma) << ',' << r.B
       << ',' << r.b << ',' << r.seed << ',' << r.mode << ',' << fmt(r.residual_sq) << ','
       << fmt(r.init_ms) << ',' << fmt(r.iter_us) << ',' << r.status << '\n';
  }
}

void write_csv(const BenchResult& result, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path + ": cannot open for writing");
  write_csv(result, os);
  if (!os) throw IoError(path + ": write failed");
}

TimingScalingReport timing_scaling_report(int p, const std::vector<int>& ns, BackendKind kind,
                                          const BackendConfig& sketch_cfg) {
  std::vector<int> distinct = ns;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) {
    throw std::invalid_argument("timing_scaling_report: need at least 3 distinct n values");
  }
  if (distinct.front() < 2) throw std::invalid_argument("timing_scaling_report: need n >= 2");

  ThreadPin pin;
  TimingScalingReport rep;
  rep.ns = distinct;
  std::vector<double> lx, ly_iter, ly_init;
  for (const int n : distinct) {
    const DecayProfile prof{DecayProfile::Kind::inverse, 1};
    const auto [A, truth] = gen_synthetic(prof, n, p, 0.0, 0x54494d45u + static_cast<unsigned>(n));

    std::unique_ptr<ContractionBackend> backend;
    double init_ms = 0.0;
    if (kind == BackendKind::exact) {
      init_ms = time_callable_ms([&] { ExactBackend tmp(A); g_timing_sink = tmp.dim(); }, 2.0);
      backend = std::make_unique<ExactBackend>(A);
    } else {
      init_ms =
          time_callable_ms([&] { SketchBackend tmp(A, sketch_cfg); g_timing_sink = tmp.dim(); }, 2.0);
      backend = std::make_unique<SketchBackend>(A, sketch_cfg);
    }

    const Eigen::VectorXd u = init_candidates(n, 1, 0x5455u + static_cast<unsigned>(n)).col(0);
    std::vector<double> samples(5);
    for (double& s : samples) s = time_query_us(*backend, u);
    const double iter_us = median_inplace(samples);

    rep.iter_us.push_back(iter_us);
    rep.init_ms.push_back(init_ms);
    lx.push_back(std::log(static_cast<double>(n)));
    ly_iter.push_back(std::log(iter_us));
    ly_init.push_back(std::log(init_ms));
  }
  rep.iter_slope = lsq_slope(lx, ly_iter);
  rep.init_slope = lsq_slope(lx, ly_init);
  return rep;
}

}  // namespace otp
