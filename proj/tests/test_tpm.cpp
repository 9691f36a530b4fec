#include "otp/tpm.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "otp/backend.hpp"
#include "otp/errors.hpp"
#include "otp/rng.hpp"
#include "otp/spectrum.hpp"
#include "otp/tensor.hpp"
#include "otp/verify.hpp"

namespace {

otp::Spectrum make_spectrum(int n, int k, std::uint64_t seed) {
  otp::Spectrum s;
  s.vectors = otp::random_orthonormal_basis(n, k, seed);
  s.lambdas.resize(k);
  for (int i = 0; i < k; ++i) s.lambdas(i) = 1.0 - 0.35 * i;
  return s;
}

TEST(AngleStats, MatchesAcosOracle) {
  otp::Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd u = rng.unit_vector(7);
    const Eigen::VectorXd v = rng.unit_vector(7);
    const otp::AngleStats a = otp::angle_stats(u, v);
    const double theta = std::acos(std::clamp(u.dot(v), -1.0, 1.0));
    EXPECT_NEAR(a.cos, std::cos(theta), 1e-12);
    EXPECT_NEAR(a.sin, std::sin(theta), 1e-8);
    if (std::abs(a.cos) > 1e-6) EXPECT_NEAR(a.tan, std::tan(theta), 1e-6 * std::abs(a.tan));
  }
}

TEST(AngleStats, HandlesAlignedAndOrthogonal) {
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(4);
  e0(0) = 1.0;
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(4);
  e1(1) = 1.0;
  const otp::AngleStats same = otp::angle_stats(e0, e0);
  EXPECT_EQ(same.cos, 1.0);
  EXPECT_EQ(same.sin, 0.0);
  EXPECT_EQ(same.tan, 0.0);
  const otp::AngleStats flip = otp::angle_stats(e0, (-e0).eval());
  EXPECT_EQ(flip.cos, -1.0);
  EXPECT_EQ(flip.sin, 0.0);
  const otp::AngleStats orth = otp::angle_stats(e0, e1);
  EXPECT_EQ(orth.cos, 0.0);
  EXPECT_EQ(orth.sin, 1.0);
  EXPECT_TRUE(std::isinf(orth.tan));
}

TEST(InitCandidates, DeterministicUnitColumns) {
  const Eigen::MatrixXd c = otp::init_candidates(9, 5, 3);
  EXPECT_EQ(c.rows(), 9);
  EXPECT_EQ(c.cols(), 5);
  for (int l = 0; l < 5; ++l) {
    EXPECT_NEAR(c.col(l).norm(), 1.0, 1e-12);
    // Column l is the candidate stream l derived from the root seed.
    const Eigen::VectorXd want = otp::Rng(3).split(static_cast<std::uint64_t>(l)).unit_vector(9);
    EXPECT_EQ((c.col(l) - want).norm(), 0.0);
  }
  const Eigen::MatrixXd again = otp::init_candidates(9, 5, 3);
  EXPECT_EQ((c - again).norm(), 0.0);
}

TEST(InitSeparation, HandBuiltCases) {
  otp::Spectrum s;
  s.vectors = Eigen::MatrixXd::Identity(4, 2);
  s.lambdas = (Eigen::VectorXd(2) << 1.0, 0.5).finished();

  // Strongly aligned with component 0: passes for t=0.
  Eigen::VectorXd good = (Eigen::VectorXd(4) << 0.9, 0.1, 0.3, 0.28).finished().normalized();
  EXPECT_TRUE(otp::check_init_separation(good, s, 0));
  // Its overlap with component 1 is 9x smaller than with 0: fails for t=1.
  EXPECT_FALSE(otp::check_init_separation(good, s, 1));

  // Overlap below the 1/sqrt(n) floor fails even with no competition.
  Eigen::VectorXd weak = (Eigen::VectorXd(4) << 0.2, 0.0, 0.6929, 0.6929).finished().normalized();
  EXPECT_FALSE(otp::check_init_separation(weak, s, 0));

  // Competition: |v_1.u| > |v_0.u|/4 fails the margin condition for t=0.
  Eigen::VectorXd close = (Eigen::VectorXd(4) << 0.7, 0.3, 0.45, 0.46).finished().normalized();
  EXPECT_FALSE(otp::check_init_separation(close, s, 0));
}

TEST(PowerStep, NormalizedResidualContraction) {
  const int n = 6;
  const otp::Spectrum s = make_spectrum(n, 2, 4);
  const otp::DenseTensor a = otp::synth_orthogonal(s, 3);
  otp::ExactBackend backend(a);
  const otp::DeflationSet d = otp::DeflationSet::empty(n);
  const Eigen::VectorXd u = otp::Rng(7).unit_vector(n);
  const Eigen::VectorXd got = otp::power_step(backend, d, u);
  const Eigen::VectorXd want = otp::contract_all_but_one(a, u).normalized();
  EXPECT_NEAR((got - want).norm(), 0.0, 1e-12);
  EXPECT_NEAR(got.norm(), 1.0, 1e-12);
}

TEST(PowerStep, DegenerateContractionThrows) {
  otp::DenseTensor zero(3, 4);
  otp::ExactBackend backend(zero);
  const otp::DeflationSet d = otp::DeflationSet::empty(4);
  EXPECT_THROW(otp::power_step(backend, d, otp::Rng(1).unit_vector(4)),
               otp::DegenerateUpdateError);
}

TEST(ExtractTop, RecoversRankOneExactly) {
  const int n = 8;
  const Eigen::VectorXd v = otp::Rng(11).unit_vector(n);
  otp::DenseTensor a(3, n);
  otp::tensor_axpy(2.0, otp::outer_power(v, 3), a);
  otp::ExactBackend backend(a);
  const otp::ExtractResult r =
      otp::extract_top(backend, otp::DeflationSet::empty(n), 40, 6, 5);
  EXPECT_NEAR(r.lambda, 2.0, 1e-12);
  EXPECT_NEAR(std::abs(r.v.dot(v)), 1.0, 1e-12);
  EXPECT_GT(r.v.dot(v), 0.0);  // odd order: sign canonicalized with lambda > 0
  EXPECT_GE(r.winner, 0);
  EXPECT_EQ(r.candidate_values.size(), 6);
}

TEST(ExtractTop, SecondComponentUnderDeflation) {
  const int n = 9;
  const otp::Spectrum s = make_spectrum(n, 3, 6);
  const otp::DenseTensor a = otp::synth_orthogonal(s, 3);
  otp::ExactBackend backend(a);
  otp::DeflationSet d = otp::DeflationSet::empty(n);
  d.push(s.vectors.col(0), s.lambdas(0) * s.vectors.col(0));
  const otp::ExtractResult r = otp::extract_top(backend, d, 60, 10, 2);
  EXPECT_NEAR(r.lambda, s.lambdas(1), 1e-10);
  EXPECT_NEAR(std::abs(r.v.dot(s.vectors.col(1))), 1.0, 1e-10);
}

TEST(ExtractTop, ZeroTensorFailsAllRestarts) {
  otp::DenseTensor zero(3, 5);
  otp::ExactBackend backend(zero);
  EXPECT_THROW(otp::extract_top(backend, otp::DeflationSet::empty(5), 10, 3, 1),
               otp::ExtractionError);
}

TEST(ExtractTop, OddOrderSignCanonicalization) {
  const int n = 6;
  const Eigen::VectorXd v = otp::Rng(13).unit_vector(n);
  otp::DenseTensor a(3, n);
  otp::tensor_axpy(-1.5, otp::outer_power(v, 3), a);  // negative weight
  otp::ExactBackend backend(a);
  const otp::ExtractResult r =
      otp::extract_top(backend, otp::DeflationSet::empty(n), 40, 6, 3);
  // -1.5 v^(x)3 = +1.5 (-v)^(x)3 for odd order; report the positive form.
  EXPECT_NEAR(r.lambda, 1.5, 1e-12);
  EXPECT_NEAR(r.v.dot(v), -1.0, 1e-12);
}

TEST(ExtractTop, EvenOrderKeepsPositiveValue) {
  const int n = 6;
  const Eigen::VectorXd v = otp::Rng(14).unit_vector(n);
  otp::DenseTensor a(4, n);
  otp::tensor_axpy(1.5, otp::outer_power(v, 4), a);
  otp::ExactBackend backend(a);
  const otp::ExtractResult r =
      otp::extract_top(backend, otp::DeflationSet::empty(n), 40, 6, 3);
  EXPECT_NEAR(r.lambda, 1.5, 1e-12);
  EXPECT_NEAR(std::abs(r.v.dot(v)), 1.0, 1e-12);  // either sign is valid
}

TEST(ExtractTop, TraceCoversBothPhases) {
  const int n = 7;
  const otp::Spectrum s = make_spectrum(n, 1, 9);
  const otp::DenseTensor a = otp::synth_orthogonal(s, 3);
  otp::ExactBackend backend(a);
  otp::TraceOptions opts;
  opts.truth = &s;
  opts.component = 0;
  opts.k = 1;
  opts.record_rayleigh = true;
  const int T = 25;
  const otp::ExtractResult r =
      otp::extract_top(backend, otp::DeflationSet::empty(n), T, 4, 8, opts);
  ASSERT_EQ(r.trace.records.size(), static_cast<std::size_t>(2 * T + 1));
  EXPECT_EQ(r.trace.candidate, r.winner);

  const auto& recs = r.trace.records;
  EXPECT_EQ(recs.front().t, 0);
  EXPECT_EQ(recs.front().phase, 1);
  EXPECT_EQ(recs.front().update_residual, 0.0);
  EXPECT_EQ(recs.back().phase, 2);
  EXPECT_EQ(recs.back().t, T);
  for (const auto& rec : recs) {
    EXPECT_TRUE(rec.has_truth);
    EXPECT_TRUE(rec.has_rayleigh);
  }
  // Noiseless convergence: the angle decays monotonically (tiny slack for
  // round-off) and ends at numerical zero; the aligned end is outside xi.
  for (std::size_t i = 1; i < recs.size(); ++i) {
    EXPECT_LE(recs[i].tan_theta, recs[i - 1].tan_theta * 1.0000001 + 1e-12);
  }
  EXPECT_LE(recs.back().tan_theta, 1e-6);
  EXPECT_FALSE(recs.back().xi);
  EXPECT_NEAR(recs.back().rayleigh, s.lambdas(0), 1e-9);
  // Phase-1 records t = 0..T then phase-2 t = 1..T.
  EXPECT_EQ(recs[static_cast<std::size_t>(T)].t, T);
  EXPECT_EQ(recs[static_cast<std::size_t>(T)].phase, 1);
  EXPECT_EQ(recs[static_cast<std::size_t>(T) + 1].t, 1);
  EXPECT_EQ(recs[static_cast<std::size_t>(T) + 1].phase, 2);
}

TEST(Decompose, NoiselessRecoveryToMachinePrecision) {
  const int n = 10;
  const int k = 3;
  otp::Spectrum s;
  s.vectors = otp::random_orthonormal_basis(n, k, 15);
  s.lambdas = (Eigen::VectorXd(3) << 1.0, 0.6, 0.3).finished();
  const otp::DenseTensor a = otp::synth_orthogonal(s, 3);
  otp::ExactBackend backend(a);

  otp::PowerMethodConfig cfg;
  cfg.p = 3;
  cfg.n = n;
  cfg.k = k;
  cfg.T = 60;
  cfg.L = 12;
  cfg.seed = 21;
  const otp::DecomposeResult r = otp::decompose(backend, cfg);
  ASSERT_EQ(r.lambdas.size(), k);
  ASSERT_EQ(r.vectors.cols(), k);
  EXPECT_EQ(r.T, cfg.T);
  EXPECT_EQ(r.L, cfg.L);

  const otp::RecoveryReport rep =
      otp::verify_epsilon_close(s, r.lambdas, r.vectors, 3, 1e-8);
  EXPECT_TRUE(rep.epsilon_close) << "noiseless decomposition off by more than 1e-8";
  // Well-separated values: greedy extraction returns them largest first.
  EXPECT_NEAR(r.lambdas(0), 1.0, 1e-10);
  EXPECT_NEAR(r.lambdas(1), 0.6, 1e-10);
  EXPECT_NEAR(r.lambdas(2), 0.3, 1e-10);
}

TEST(GuaranteeKnobs, FormulaOracles) {
  // T = ceil(10 ln(lambda1 n / eps)), floored at 1.
  EXPECT_EQ(otp::guarantee_iterations(1.0, 100, 1e-3), 116);  // 10 ln(1e5) = 115.13
  EXPECT_EQ(otp::guarantee_iterations(2.0, 50, 1e-2), 93);    // 10 ln(1e4) = 92.1
  EXPECT_EQ(otp::guarantee_iterations(1.0, 1, 10.0), 1);      // clamped at 1
  // L = ceil(10 k ln(max(k, 2))).
  EXPECT_EQ(otp::guarantee_restarts(1), 7);    // 10 ln 2 = 6.93
  EXPECT_EQ(otp::guarantee_restarts(5), 81);   // 50 ln 5 = 80.47
  EXPECT_EQ(otp::guarantee_restarts(2), 14);   // 20 ln 2 = 13.86
}

TEST(Decompose, GuaranteeModeDerivesKnobs) {
  const int n = 8;
  otp::Spectrum s;
  s.vectors = otp::random_orthonormal_basis(n, 1, 33);
  s.lambdas = (Eigen::VectorXd(1) << 1.0).finished();
  const otp::DenseTensor a = otp::synth_orthogonal(s, 3);
  otp::ExactBackend backend(a);

  otp::PowerMethodConfig cfg;
  cfg.p = 3;
  cfg.n = n;
  cfg.k = 1;
  cfg.epsilon = 1e-3;
  cfg.seed = 2;
  cfg.mode = otp::PowerMethodConfig::Mode::guarantee;
  const otp::DecomposeResult r = otp::decompose(backend, cfg);
  EXPECT_EQ(r.L, otp::guarantee_restarts(1));
  // The pre-pass lambda estimate is exact here, so T matches the formula.
  EXPECT_EQ(r.T, otp::guarantee_iterations(1.0, n, 1e-3));
  EXPECT_NEAR(r.lambdas(0), 1.0, 1e-9);
}

TEST(PowerMethodConfig, ValidateRejectsBadKnobs) {
  otp::PowerMethodConfig cfg;
  cfg.p = 3;
  cfg.n = 10;
  cfg.k = 2;
  cfg.T = 5;
  cfg.L = 5;
  EXPECT_NO_THROW(cfg.validate());

  otp::PowerMethodConfig bad = cfg;
  bad.p = 2;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.k = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.k = 11;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.T = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.epsilon = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.mode = otp::PowerMethodConfig::Mode::guarantee;
  bad.c0 = 50.0;  // guarantee mode requires c0 >= 100
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

}  // namespace
