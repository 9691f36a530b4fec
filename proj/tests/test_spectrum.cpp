#include "otp/spectrum.hpp"

#include <cstdint>

#include <gtest/gtest.h>

#include "otp/tensor.hpp"

namespace {

TEST(Spectrum, RandomBasisIsOrthonormal) {
  const Eigen::MatrixXd Q = otp::random_orthonormal_basis(12, 5, 3);
  EXPECT_EQ(Q.rows(), 12);
  EXPECT_EQ(Q.cols(), 5);
  const Eigen::MatrixXd G = Q.transpose() * Q;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(G(i, j), i == j ? 1.0 : 0.0, 1e-12);
  }
}

TEST(Spectrum, RandomBasisDeterministicPerSeed) {
  const Eigen::MatrixXd a = otp::random_orthonormal_basis(8, 3, 11);
  const Eigen::MatrixXd b = otp::random_orthonormal_basis(8, 3, 11);
  const Eigen::MatrixXd c = otp::random_orthonormal_basis(8, 3, 12);
  EXPECT_EQ((a - b).norm(), 0.0);
  EXPECT_GT((a - c).norm(), 1e-3);
}

TEST(Spectrum, ValidateAcceptsWellFormed) {
  otp::Spectrum s;
  s.lambdas = (Eigen::VectorXd(2) << 2.0, 1.0).finished();
  s.vectors = otp::random_orthonormal_basis(6, 2, 1);
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.k(), 2);
  EXPECT_EQ(s.n(), 6);
}

TEST(Spectrum, ValidateRejectsMalformed) {
  otp::Spectrum s;
  s.lambdas = (Eigen::VectorXd(2) << 2.0, 1.0).finished();
  s.vectors = otp::random_orthonormal_basis(6, 2, 1);

  otp::Spectrum increasing = s;
  increasing.lambdas << 1.0, 2.0;  // must be non-increasing
  EXPECT_THROW(increasing.validate(), std::invalid_argument);

  otp::Spectrum negative = s;
  negative.lambdas << 2.0, -1.0;
  EXPECT_THROW(negative.validate(), std::invalid_argument);

  otp::Spectrum nonunit = s;
  nonunit.vectors.col(0) *= 1.5;
  EXPECT_THROW(nonunit.validate(), std::invalid_argument);

  otp::Spectrum oblique = s;
  oblique.vectors.col(1) = (oblique.vectors.col(0) + oblique.vectors.col(1)).normalized();
  EXPECT_THROW(oblique.validate(), std::invalid_argument);

  otp::Spectrum wide = s;
  wide.vectors = otp::random_orthonormal_basis(2, 2, 1);
  wide.lambdas = (Eigen::VectorXd(3) << 3.0, 2.0, 1.0).finished();
  EXPECT_THROW(wide.validate(), std::invalid_argument);
}

TEST(Spectrum, SynthMatchesEntrywiseSum) {
  otp::Spectrum s;
  s.lambdas = (Eigen::VectorXd(3) << 1.5, 0.7, 0.2).finished();
  s.vectors = otp::random_orthonormal_basis(5, 3, 7);
  const int p = 3;
  const otp::DenseTensor A = otp::synth_orthogonal(s, p);
  EXPECT_TRUE(A.symmetric());
  EXPECT_EQ(A.order(), p);
  EXPECT_EQ(A.dim(), 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      for (int l = 0; l < 5; ++l) {
        double want = 0.0;
        for (int c = 0; c < 3; ++c) {
          want += s.lambdas(c) * s.vectors(i, c) * s.vectors(j, c) * s.vectors(l, c);
        }
        EXPECT_NEAR(A.at({i, j, l}), want, 1e-12);
      }
    }
  }
}

TEST(Spectrum, SynthFrobeniusIdentity) {
  // Orthonormal components: ||A||_F^2 = sum lambda_i^2.
  otp::Spectrum s;
  s.lambdas = (Eigen::VectorXd(4) << 1.0, 0.8, 0.5, 0.1).finished();
  s.vectors = otp::random_orthonormal_basis(9, 4, 13);
  const otp::DenseTensor A = otp::synth_orthogonal(s, 4);
  const double fro = otp::frobenius_norm(A);
  EXPECT_NEAR(fro * fro, s.lambdas.squaredNorm(), 1e-9);
}

}  // namespace
