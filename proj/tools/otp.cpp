// otp: generate, decompose, verify and benchmark orthogonal tensor instances.
//
// Exit codes: 0 success, 1 usage or hypothesis violation, 2 I/O failure,
// 3 element budget exceeded, 4 extraction/verification/sketch-test failure,
// 5 component count mismatch.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "otp/backend.hpp"
#include "otp/bench.hpp"
#include "otp/errors.hpp"
#include "otp/io.hpp"
#include "otp/parallel.hpp"
#include "otp/report.hpp"
#include "otp/rng.hpp"
#include "otp/sketch_backend.hpp"
#include "otp/spectrum.hpp"
#include "otp/tensor.hpp"
#include "otp/tpm.hpp"
#include "otp/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitBudget = 3;
constexpr int kExitFailure = 4;
constexpr int kExitKMismatch = 5;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <typename F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const otp::BudgetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBudget;
  } catch (const otp::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const otp::ExtractionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const otp::DegenerateUpdateError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

struct GenArgs {
  std::string profile = "inverse";
  int n = 16;
  int p = 3;
  int k = 4;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string truth_out;
};

int run_gen(const GenArgs& a) {
  const otp::DecayProfile profile{otp::profile_kind_from_string(a.profile), a.k};
  const auto [tensor, truth] = otp::gen_synthetic(profile, a.n, a.p, a.sigma, a.seed);
  const std::string truth_path = a.truth_out.empty() ? a.out + ".spectrum" : a.truth_out;
  otp::write_tensor_binary(a.out, tensor);
  otp::write_spectrum_text(truth_path, truth);
  std::cout << "tensor " << a.out << '\n' << "spectrum " << truth_path << '\n';
  return kExitOk;
}

struct DecomposeArgs {
  std::string in;
  int k = 1;
  int T = 30;
  int L = 50;
  double epsilon = 1e-3;
  double c0 = 100.0;
  double c = 1.0;
  std::string backend = "exact";
  int b = 0;
  int B = 0;
  double sketch_epsilon = 0.1;
  double sketch_delta = 0.1;
  std::uint64_t seed = 0;
  std::string out_report;
  std::string truth;
  bool guarantee = false;
  bool rayleigh = false;
};

int run_decompose(const DecomposeArgs& a) {
  const otp::DenseTensor tensor = otp::read_tensor_binary(a.in);
  const int p = tensor.order();
  const int n = tensor.dim();

  if (a.guarantee && p < 3) {
    std::cerr << "error: guarantee mode requires tensor order p >= 3 (got p = " << p << ")\n";
    return kExitUsage;
  }

  otp::PowerMethodConfig cfg;
  cfg.p = p;
  cfg.n = n;
  cfg.k = a.k;
  cfg.T = a.T;
  cfg.L = a.L;
  cfg.epsilon = a.epsilon;
  cfg.c0 = a.c0;
  cfg.c = a.c;
  cfg.seed = a.seed;
  cfg.mode = a.guarantee ? otp::PowerMethodConfig::Mode::guarantee
                         : otp::PowerMethodConfig::Mode::benchmark;
  cfg.validate();

  std::optional<otp::Spectrum> truth;
  if (!a.truth.empty()) {
    truth = otp::read_spectrum_text(a.truth);
    if (truth->n() != n) {
      std::cerr << "error: truth spectrum dimension " << truth->n() << " does not match tensor "
                << n << '\n';
      return kExitKMismatch;
    }
  }

  if (a.guarantee) {
    if (truth) {
      // epsilon must sit inside (0, c * lambda_k / (c0 p^2 k n^{(p-2)/2})).
      const int kk = std::min(a.k, truth->k());
      const double lambda_k = truth->lambdas(kk - 1);
      const double cap = a.c * lambda_k /
                         (a.c0 * p * p * a.k * std::pow(static_cast<double>(n), (p - 2) / 2.0));
      if (!(a.epsilon > 0.0 && a.epsilon < cap)) {
        std::cerr << "error: epsilon " << a.epsilon << " outside the admissible range (0, " << cap
                  << ")\n";
        return kExitUsage;
      }
    } else {
      std::cerr << "note: epsilon range not checked (pass --truth to enable)\n";
    }
  }

  std::unique_ptr<otp::ContractionBackend> backend;
  otp::BackendConfig bc;
  const auto t0 = Clock::now();
  if (a.backend == "sketch") {
    bc.epsilon = a.sketch_epsilon;
    bc.delta = a.sketch_delta;
    bc.b = a.b;
    bc.B = a.B;
    bc.seed = otp::Rng(a.seed).split(0x534bu).next_u64();
    backend = std::make_unique<otp::SketchBackend>(tensor, bc);
  } else if (a.backend == "exact") {
    backend = std::make_unique<otp::ExactBackend>(tensor);
  } else {
    std::cerr << "error: unknown backend '" << a.backend << "' (use exact or sketch)\n";
    return kExitUsage;
  }
  const double init_ms = elapsed_ms(t0);

  otp::TraceOptions opts;
  if (truth) {
    opts.truth = &*truth;
    opts.c0 = a.c0;
    opts.k = a.k;
  }
  opts.record_rayleigh = a.rayleigh;

  const auto t1 = Clock::now();
  const otp::DecomposeResult result = otp::decompose(*backend, cfg, opts);
  const double solve_ms = elapsed_ms(t1);
  std::cerr << "init_ms " << init_ms << '\n' << "solve_ms " << solve_ms << '\n';

  otp::RunReport report;
  report.input_path = a.in;
  report.backend = a.backend;
  report.p = p;
  report.n = n;
  report.k = a.k;
  report.T = result.T;
  report.L = result.L;
  report.epsilon = a.epsilon;
  report.c0 = a.c0;
  report.mode = a.guarantee ? "guarantee" : "benchmark";
  report.seed = a.seed;
  if (a.backend == "sketch") {
    const otp::BackendConfig used = bc.normalized(n);
    report.b = used.b;
    report.B = used.B;
  }
  report.lambdas = result.lambdas;
  report.vectors = result.vectors;
  report.traces = result.traces;

  if (a.out_report.empty()) {
    std::cout << otp::to_json(report);
  } else {
    otp::write_report(report, a.out_report);
    for (int i = 0; i < static_cast<int>(result.lambdas.size()); ++i) {
      std::cout << "lambda " << i << ' ' << result.lambdas(i) << '\n';
    }
    std::cout << "report " << a.out_report << '\n';
  }
  return kExitOk;
}

struct VerifyArgs {
  std::string truth;
  std::string report;
  double epsilon = 1e-2;
};

int run_verify(const VerifyArgs& a) {
  const otp::Spectrum truth = otp::read_spectrum_text(a.truth);
  const otp::RunReport report = otp::read_report(a.report);
  if (static_cast<int>(report.lambdas.size()) != truth.k()) {
    std::cerr << "error: report has " << report.lambdas.size() << " components, truth has "
              << truth.k() << '\n';
    return kExitKMismatch;
  }
  const otp::RecoveryReport rr =
      otp::verify_epsilon_close(truth, report.lambdas, report.vectors, report.p, a.epsilon);
  for (const otp::PairVerdict& v : rr.pairs) {
    std::cout << "pair truth " << v.truth_index << " est " << v.est_index << " lambda_err "
              << v.lambda_err << " vec_err " << v.vec_err << " max_cross " << v.max_cross
              << " guarantee " << (v.guarantee_ok ? 1 : 0) << " close " << (v.ok() ? 1 : 0)
              << '\n';
  }
  std::cout << "guarantee " << (rr.guarantee_ok ? 1 : 0) << '\n';
  std::cout << "epsilon_close " << (rr.epsilon_close ? 1 : 0) << '\n';
  return rr.guarantee_ok ? kExitOk : kExitFailure;
}

struct BenchArgs {
  std::string config;
  std::string out;
};

int run_bench(const BenchArgs& a) {
  std::ifstream is(a.config);
  if (!is) throw otp::IoError(a.config + ": cannot open for reading");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw otp::IoError(a.config + ": " + e.what());
  }

  otp::BenchConfig cfg;
  cfg.profile.kind = otp::profile_kind_from_string(j.value("profile", std::string("inverse")));
  cfg.profile.k = j.value("k", cfg.profile.k);
  cfg.n = j.value("n", cfg.n);
  cfg.p = j.value("p", cfg.p);
  cfg.sigma = j.value("sigma", cfg.sigma);
  cfg.T = j.value("T", cfg.T);
  cfg.L = j.value("L", cfg.L);
  cfg.rank1 = j.value("rank1", cfg.rank1);
  cfg.repetitions = j.value("repetitions", cfg.repetitions);
  cfg.measure_timings = j.value("measure_timings", cfg.measure_timings);
  if (j.contains("grid")) {
    for (const auto& cell : j.at("grid")) {
      cfg.grid.emplace_back(cell.at(0).get<int>(), cell.at(1).get<int>());
    }
  }
  if (j.contains("seeds")) {
    for (const auto& s : j.at("seeds")) cfg.seeds.push_back(s.get<std::uint64_t>());
  }

  const otp::BenchResult result = otp::run_benchmark(cfg);
  const std::string out = !a.out.empty() ? a.out : j.value("out", std::string());
  if (out.empty()) {
    otp::write_csv(result, std::cout);
  } else {
    otp::write_csv(result, out);
    std::cout << "csv " << out << '\n';
  }
  return kExitOk;
}

struct SketchTestArgs {
  std::string in;
  int trials = 200;
  double epsilon = 0.2;
  double delta = 0.1;
  int b = 0;
  int B = 0;
  std::uint64_t seed = 0;
};

int run_sketch_test(const SketchTestArgs& a) {
  if (a.trials < 1) {
    std::cerr << "error: --trials must be >= 1\n";
    return kExitUsage;
  }
  const otp::DenseTensor tensor = otp::read_tensor_binary(a.in);
  const otp::ExactBackend exact(tensor);
  const int n = tensor.dim();
  otp::Rng root(a.seed);

  long checks = 0;
  long violations = 0;
  for (int trial = 0; trial < a.trials; ++trial) {
    otp::BackendConfig bc;
    bc.epsilon = a.epsilon;
    bc.delta = a.delta;
    bc.b = a.b;
    bc.B = a.B;
    bc.seed = root.split(0x534bu).split(static_cast<std::uint64_t>(trial)).next_u64();
    const otp::SketchBackend sketch(tensor, bc);

    otp::Rng direction = root.split(0x5555u).split(static_cast<std::uint64_t>(trial));
    const Eigen::VectorXd u = direction.unit_vector(n);
    const Eigen::VectorXd want = exact.query(u).values;
    const Eigen::VectorXd got = sketch.query(u).values;
    for (int i = 0; i < n; ++i) {
      ++checks;
      const double band = a.epsilon * std::abs(want(i)) + a.epsilon * sketch.state().D_i(i);
      if (std::abs(got(i) - want(i)) > band) ++violations;
    }
  }

  const double freq = static_cast<double>(violations) / static_cast<double>(checks);
  const double se = std::sqrt(a.delta * (1.0 - a.delta) / static_cast<double>(checks));
  const double threshold = a.delta + 2.0 * se;
  std::cout << "checks " << checks << '\n'
            << "violations " << violations << '\n'
            << "frequency " << freq << '\n'
            << "threshold " << threshold << '\n';
  return freq <= threshold ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orthogonal tensor decomposition toolkit"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: OTP_THREADS env or 1)");

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a synthetic tensor and truth sidecar");
  gen_cmd->add_option("--profile", gen.profile, "inverse | inverse_square | linear");
  gen_cmd->add_option("--n", gen.n, "dimension")->required();
  gen_cmd->add_option("--p", gen.p, "order");
  gen_cmd->add_option("--k", gen.k, "rank");
  gen_cmd->add_option("--sigma", gen.sigma, "per-entry noise std before symmetrization");
  gen_cmd->add_option("--seed", gen.seed, "rng seed");
  gen_cmd->add_option("--out", gen.out, "output tensor path (OTP1 binary)")->required();
  gen_cmd->add_option("--truth-out", gen.truth_out, "sidecar path (default: <out>.spectrum)");

  DecomposeArgs dec;
  CLI::App* dec_cmd = app.add_subcommand("decompose", "recover the top-k orthogonal components");
  dec_cmd->add_option("--in", dec.in, "input tensor (OTP1 binary)")->required();
  dec_cmd->add_option("--k", dec.k, "components to extract")->required();
  dec_cmd->add_option("--T", dec.T, "power iterations per restart");
  dec_cmd->add_option("--L", dec.L, "restarts per component");
  dec_cmd->add_option("--epsilon", dec.epsilon, "target accuracy");
  dec_cmd->add_option("--c0", dec.c0, "hypothesis constant");
  dec_cmd->add_option("--c", dec.c, "free constant in the epsilon range");
  dec_cmd->add_option("--backend", dec.backend, "exact | sketch");
  dec_cmd->add_option("--b", dec.b, "sketch width (0: derive from --sketch-epsilon)");
  dec_cmd->add_option("--B", dec.B, "sketch repetitions (0: derive from --sketch-delta)");
  dec_cmd->add_option("--sketch-epsilon", dec.sketch_epsilon, "sketch accuracy knob");
  dec_cmd->add_option("--sketch-delta", dec.sketch_delta, "sketch failure probability knob");
  dec_cmd->add_option("--seed", dec.seed, "rng seed");
  dec_cmd->add_option("--out-report", dec.out_report, "report path (default: stdout)");
  dec_cmd->add_option("--truth", dec.truth, "truth sidecar enabling traces and range checks");
  dec_cmd->add_flag("--guarantee", dec.guarantee, "derive T and L, enforce hypothesis checks");
  dec_cmd->add_flag("--rayleigh", dec.rayleigh, "record Rayleigh values in traces");

  VerifyArgs ver;
  CLI::App* ver_cmd = app.add_subcommand("verify", "check a report against the truth sidecar");
  ver_cmd->add_option("--truth", ver.truth, "truth sidecar")->required();
  ver_cmd->add_option("--report", ver.report, "report produced by decompose")->required();
  ver_cmd->add_option("--epsilon", ver.epsilon, "tolerance");

  BenchArgs ben;
  CLI::App* ben_cmd = app.add_subcommand("bench", "run a benchmark sweep from a JSON config");
  ben_cmd->add_option("--config", ben.config, "JSON config path")->required();
  ben_cmd->add_option("--out", ben.out, "CSV path (default: config 'out' or stdout)");

  SketchTestArgs skt;
  CLI::App* skt_cmd =
      app.add_subcommand("sketch-test", "measure sketch error-band violation frequency");
  skt_cmd->add_option("--in", skt.in, "input tensor (OTP1 binary)")->required();
  skt_cmd->add_option("--trials", skt.trials, "independent sketch/direction trials");
  skt_cmd->add_option("--epsilon", skt.epsilon, "band accuracy");
  skt_cmd->add_option("--delta", skt.delta, "per-coordinate failure probability");
  skt_cmd->add_option("--b", skt.b, "sketch width override");
  skt_cmd->add_option("--B", skt.B, "sketch repetitions override");
  skt_cmd->add_option("--seed", skt.seed, "rng seed");

  int rc = kExitOk;
  const auto dispatch = [&](auto runner) {
    if (threads > 0) otp::set_thread_count(threads);
    rc = guarded(runner);
  };
  gen_cmd->callback([&] { dispatch([&] { return run_gen(gen); }); });
  dec_cmd->callback([&] { dispatch([&] { return run_decompose(dec); }); });
  ver_cmd->callback([&] { dispatch([&] { return run_verify(ver); }); });
  ben_cmd->callback([&] { dispatch([&] { return run_bench(ben); }); });
  skt_cmd->callback([&] { dispatch([&] { return run_sketch_test(skt); }); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  return rc;
}
