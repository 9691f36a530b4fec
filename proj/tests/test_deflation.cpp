#include "otp/deflation.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "otp/rng.hpp"
#include "otp/spectrum.hpp"
#include "otp/tensor.hpp"

namespace {

struct CloseSetup {
  otp::Spectrum truth;
  Eigen::VectorXd est_lambdas;  // first r components
  Eigen::MatrixXd est_vectors;
};

/// Truth spectrum plus estimates for the first r components, perturbed by at
/// most eps/2 in value and 0.5*eps/lambda_i in direction (inside the
/// closeness budget with factor-two slack).
CloseSetup close_setup(int n, int k, int r, double eps, std::uint64_t seed) {
  CloseSetup s;
  s.truth.vectors = otp::random_orthonormal_basis(n, k, seed);
  s.truth.lambdas.resize(k);
  for (int i = 0; i < k; ++i) s.truth.lambdas(i) = 1.0 - 0.25 * i;
  s.est_lambdas.resize(r);
  s.est_vectors.resize(n, r);
  otp::Rng rng(seed + 1000);
  for (int i = 0; i < r; ++i) {
    s.est_lambdas(i) = s.truth.lambdas(i) + 0.5 * eps * (2.0 * rng.next_double() - 1.0);
    Eigen::VectorXd g(n);
    for (int row = 0; row < n; ++row) g(row) = rng.next_gaussian();
    g.normalize();
    const double delta = 0.5 * eps / s.truth.lambdas(i);
    s.est_vectors.col(i) = (s.truth.vectors.col(i) + delta * g).normalized();
  }
  return s;
}

TEST(DeflationDiagnostics, ErrorVectorMatchesMaterializedTensor) {
  const int n = 8;
  const int k = 3;
  const int r = 2;
  const int p = 3;
  const double eps = 1e-3;
  const CloseSetup s = close_setup(n, k, r, eps, 7);

  // Materialize sum_{i<r} (lambda_i v_i^(x)p - lh_i vh_i^(x)p) and contract.
  otp::DenseTensor err(p, n);
  for (int i = 0; i < r; ++i) {
    otp::tensor_axpy(s.truth.lambdas(i), otp::outer_power(s.truth.vectors.col(i), p), err);
    otp::tensor_axpy(-s.est_lambdas(i), otp::outer_power(s.est_vectors.col(i), p), err);
  }
  otp::Rng rng(9);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::VectorXd u = rng.unit_vector(n);
    const otp::DeflationDiagnostics d = otp::deflation_diagnostics(
        s.truth, s.est_lambdas, s.est_vectors, u, p, eps, 100.0);
    const Eigen::VectorXd want = otp::contract_all_but_one(err, u);
    EXPECT_NEAR((d.error_vector - want).norm(), 0.0, 1e-12);
    EXPECT_NEAR(d.part1_lhs, want.norm(), 1e-12);
    ASSERT_EQ(d.part2_lhs.size(), k - r);
    for (int j = r; j < k; ++j) {
      EXPECT_NEAR(d.part2_lhs(j - r), std::abs(s.truth.vectors.col(j).dot(want)), 1e-12);
    }
  }
}

TEST(DeflationDiagnostics, KappaAndPhiFormulas) {
  const int n = 10;
  const int k = 4;
  const int r = 3;
  const int p = 4;
  const double eps = 2e-3;
  const CloseSetup s = close_setup(n, k, r, eps, 11);
  const Eigen::VectorXd u = otp::Rng(3).unit_vector(n);
  const otp::DeflationDiagnostics d =
      otp::deflation_diagnostics(s.truth, s.est_lambdas, s.est_vectors, u, p, eps, 100.0);
  double kappa = 0.0;
  for (int i = 0; i < r; ++i) kappa += std::pow(s.truth.vectors.col(i).dot(u), 2);
  kappa *= 2.0;
  EXPECT_NEAR(d.kappa, kappa, 1e-14);
  const double lambda_k = s.truth.lambdas(k - 1);
  EXPECT_NEAR(d.phi, 2.0 * k * std::pow(eps / lambda_k, p - 1), 1e-18);
  EXPECT_NEAR(d.part1_bound, 2.0 * p * eps * std::sqrt(kappa) + 2.0 * d.phi * eps, 1e-15);
  EXPECT_NEAR(d.part2_bound, (2.0 * kappa * eps + d.phi * eps) / std::sqrt(double(n)), 1e-15);
  EXPECT_EQ(d.r, r);
}

/// The advertised bounds hold for close estimates probed at generic unit
/// directions (directions nearly orthogonal to every deflated component are
/// excluded; there the kappa term vanishes while the measured error keeps an
/// estimate-noise floor).
TEST(DeflationDiagnostics, BoundsHoldForCloseEstimatesAtRandomProbes) {
  const int n = 12;
  const int k = 4;
  const int r = 2;
  const int p = 3;
  const double eps = 1e-4 * 0.25;  // 1e-4 * lambda_k
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const CloseSetup s = close_setup(n, k, r, eps, 100 + trial);
    const Eigen::VectorXd u = otp::Rng(500 + trial).unit_vector(n);
    const otp::DeflationDiagnostics d =
        otp::deflation_diagnostics(s.truth, s.est_lambdas, s.est_vectors, u, p, eps, 100.0);
    EXPECT_TRUE(d.part1_ok) << "trial " << trial << ": " << d.part1_lhs << " > " << d.part1_bound;
    EXPECT_TRUE(d.part2_ok) << "trial " << trial;
  }
}

TEST(DeflationDiagnostics, CapsNeedTightEpsilonAndAlignment) {
  const int n = 15;
  const int k = 3;
  const int r = 2;
  const int p = 3;
  const double c0 = 100.0;
  const double lambda_k = 0.5;  // close_setup: 1 - 0.25 i, k = 3
  const double eps_limit = lambda_k / (2.0 * c0 * k);

  const double eps = 1e-5;  // well under the limit
  const CloseSetup s = close_setup(n, k, r, eps, 21);

  // Probe aligned with the next component: caps apply and hold.
  const otp::DeflationDiagnostics aligned = otp::deflation_diagnostics(
      s.truth, s.est_lambdas, s.est_vectors, s.truth.vectors.col(r), p, eps, c0);
  EXPECT_TRUE(aligned.cap_applicable);
  EXPECT_TRUE(aligned.caps_ok);
  EXPECT_LE(aligned.part1_lhs, aligned.part1_cap);
  EXPECT_NEAR(aligned.part1_cap, 4.0 * eps / c0, 1e-18);
  EXPECT_NEAR(aligned.part2_cap, 4.0 * eps / (c0 * std::sqrt(double(n))), 1e-18);

  // Same probe, epsilon beyond lambda_k/(2 c0 k): caps no longer apply.
  const CloseSetup wide = close_setup(n, k, r, 2.0 * eps_limit, 22);
  const otp::DeflationDiagnostics too_wide = otp::deflation_diagnostics(
      wide.truth, wide.est_lambdas, wide.est_vectors, wide.truth.vectors.col(r), p,
      2.0 * eps_limit, c0);
  EXPECT_FALSE(too_wide.cap_applicable);

  // Generic probe is far from the alignment threshold: caps do not apply.
  const otp::DeflationDiagnostics off_axis = otp::deflation_diagnostics(
      s.truth, s.est_lambdas, s.est_vectors, otp::Rng(4).unit_vector(n), p, eps, c0);
  EXPECT_FALSE(off_axis.cap_applicable);

  // r = k leaves no next component to align with.
  const CloseSetup full = close_setup(n, k, k, eps, 23);
  const otp::DeflationDiagnostics all = otp::deflation_diagnostics(
      full.truth, full.est_lambdas, full.est_vectors, full.truth.vectors.col(0), p, eps, c0);
  EXPECT_FALSE(all.cap_applicable);
}

TEST(DeflationDiagnostics, RejectsMalformedInput) {
  const int n = 6;
  const int k = 2;
  const CloseSetup s = close_setup(n, k, 1, 1e-3, 31);
  const Eigen::VectorXd u = otp::Rng(1).unit_vector(n);

  EXPECT_THROW(otp::deflation_diagnostics(s.truth, Eigen::VectorXd(), Eigen::MatrixXd(n, 0), u,
                                          3, 1e-3, 100.0),
               std::invalid_argument);
  EXPECT_THROW(otp::deflation_diagnostics(s.truth, s.est_lambdas, s.est_vectors, 1.1 * u, 3,
                                          1e-3, 100.0),
               std::invalid_argument);
  EXPECT_THROW(otp::deflation_diagnostics(s.truth, s.est_lambdas, s.est_vectors, u, 1, 1e-3,
                                          100.0),
               std::invalid_argument);
  EXPECT_THROW(otp::deflation_diagnostics(s.truth, s.est_lambdas, s.est_vectors, u, 3, 0.0,
                                          100.0),
               std::invalid_argument);
  Eigen::VectorXd two_lambdas(2);
  two_lambdas << 1.0, 0.5;
  EXPECT_THROW(otp::deflation_diagnostics(s.truth, two_lambdas, s.est_vectors, u, 3, 1e-3,
                                          100.0),
               std::invalid_argument);
}

}  // namespace
