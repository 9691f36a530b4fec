#include "otp/sketch_backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "otp/rng.hpp"
#include "otp/spectrum.hpp"
#include "otp/tensor.hpp"

namespace {

otp::DenseTensor random_tensor(int p, int n, std::uint64_t seed) {
  otp::DenseTensor a(p, n);
  otp::Rng rng(seed);
  for (std::int64_t i = 0; i < a.size(); ++i) a.data()[i] = rng.next_gaussian();
  return a;
}

otp::BackendConfig cfg_with(int b, int B, std::uint64_t seed) {
  otp::BackendConfig c;
  c.b = b;
  c.B = B;
  c.seed = seed;
  return c;
}

TEST(SketchBackend, DeterministicPerSeed) {
  const otp::DenseTensor a = random_tensor(3, 8, 1);
  otp::SketchBackend s1(a, cfg_with(64, 5, 9));
  otp::SketchBackend s2(a, cfg_with(64, 5, 9));
  otp::SketchBackend s3(a, cfg_with(64, 5, 10));
  const Eigen::VectorXd u = otp::Rng(2).unit_vector(8);
  const Eigen::VectorXd v1 = s1.query(u).values;
  const Eigen::VectorXd v2 = s2.query(u).values;
  const Eigen::VectorXd v3 = s3.query(u).values;
  EXPECT_EQ((v1 - v2).norm(), 0.0);
  EXPECT_GT((v1 - v3).norm(), 0.0);
  EXPECT_EQ(s1.query_value(u), s2.query_value(u));
}

TEST(SketchBackend, SliceNormTableIsExact) {
  const otp::DenseTensor a = random_tensor(3, 6, 4);
  const otp::SketchBackend s(a, cfg_with(32, 3, 1));
  const otp::SketchState& st = s.state();
  ASSERT_EQ(st.D_i.size(), 6);
  const std::int64_t slice = a.size() / a.dim();
  double total_sq = 0.0;
  for (int i = 0; i < 6; ++i) {
    const double want =
        Eigen::Map<const Eigen::VectorXd>(a.data() + i * slice, slice).norm();
    EXPECT_NEAR(st.D_i(i), want, 1e-12 * std::max(1.0, want));
    total_sq += want * want;
  }
  EXPECT_NEAR(st.D, std::sqrt(total_sq), 1e-12 * std::sqrt(total_sq));
}

TEST(SketchBackend, SaveLoadRoundTrip) {
  const otp::DenseTensor a = random_tensor(3, 7, 6);
  const otp::SketchBackend s(a, cfg_with(64, 4, 3));
  std::stringstream buf;
  s.save(buf);
  const std::string first = buf.str();
  otp::SketchBackend loaded = otp::SketchBackend::load(buf);
  EXPECT_EQ(loaded.order(), s.order());
  EXPECT_EQ(loaded.dim(), s.dim());
  const Eigen::VectorXd u = otp::Rng(8).unit_vector(7);
  EXPECT_EQ((loaded.query(u).values - s.query(u).values).norm(), 0.0);
  EXPECT_EQ(loaded.query_value(u), s.query_value(u));
  // Saving the loaded backend reproduces the blob byte for byte.
  std::stringstream buf2;
  loaded.save(buf2);
  EXPECT_EQ(buf2.str(), first);
}

TEST(SketchBackend, LoadRejectsCorruptBlob) {
  const otp::DenseTensor a = random_tensor(3, 4, 6);
  const otp::SketchBackend s(a, cfg_with(16, 2, 3));
  std::stringstream buf;
  s.save(buf);
  std::string bytes = buf.str();
  bytes[0] ^= 0x5a;
  std::stringstream bad(bytes);
  EXPECT_ANY_THROW(otp::SketchBackend::load(bad));
  std::stringstream cut(bytes.substr(0, bytes.size() / 2));
  EXPECT_ANY_THROW(otp::SketchBackend::load(cut));
}

TEST(SketchBackend, DimensionMismatchThrows) {
  const otp::DenseTensor a = random_tensor(3, 5, 2);
  const otp::SketchBackend s(a, cfg_with(16, 2, 1));
  EXPECT_THROW(s.query(otp::Rng(1).unit_vector(6)), std::invalid_argument);
}

/// Statistical check of the per-coordinate accuracy contract: with b and B
/// derived from (eps, delta), the fraction of coordinates outside
/// (1 +- eps) exact +- D_i eps stays near delta across seeds.
TEST(SketchBackend, CoordinateErrorBandHoldsStatistically) {
  const int n = 10;
  const double eps = 0.3;
  const double delta = 0.1;
  const otp::DenseTensor a = random_tensor(3, n, 77);
  otp::ExactBackend exact(a);
  const Eigen::VectorXd u = otp::Rng(5).unit_vector(n);
  const Eigen::VectorXd truth = exact.query(u).values;

  int trials = 60;
  int violations = 0;
  otp::BackendConfig base;
  base.epsilon = eps;
  base.delta = delta;
  const otp::BackendConfig derived = base.normalized(n);
  for (int t = 0; t < trials; ++t) {
    otp::BackendConfig c = derived;
    c.seed = 1000 + static_cast<std::uint64_t>(t);
    const otp::SketchBackend sk(a, c);
    const Eigen::VectorXd got = sk.query(u).values;
    for (int i = 0; i < n; ++i) {
      const double slack = eps * std::abs(truth(i)) + sk.state().D_i(i) * eps;
      if (std::abs(got(i) - truth(i)) > slack) ++violations;
    }
  }
  const double rate = static_cast<double>(violations) / (trials * n);
  // Mean rate <= delta; allow three binomial standard errors of headroom.
  const double limit = delta + 3.0 * std::sqrt(delta * (1 - delta) / (trials * n));
  EXPECT_LE(rate, limit) << "violation rate " << rate;
}

TEST(SketchBackend, ValueQueryTracksExactContraction) {
  const int n = 8;
  const otp::DenseTensor a = random_tensor(3, n, 13);
  otp::ExactBackend exact(a);
  const Eigen::VectorXd u = otp::Rng(3).unit_vector(n);
  const double truth = exact.query_value(u);
  const otp::SketchBackend sk(a, cfg_with(4096, 9, 21));
  // Large b: relative error well inside eps ~ 2/sqrt(b) ~ 0.03 of the scale D.
  EXPECT_NEAR(sk.query_value(u), truth, 0.05 * sk.state().D);
}

/// Median error must shrink as the sketch widens (same tensor, same seeds).
TEST(SketchBackend, ErrorShrinksWithSketchWidth) {
  const int n = 8;
  const otp::DenseTensor a = random_tensor(3, n, 17);
  otp::ExactBackend exact(a);
  const Eigen::VectorXd u = otp::Rng(4).unit_vector(n);
  const Eigen::VectorXd truth = exact.query(u).values;

  std::vector<double> med_err;
  for (int b : {16, 64, 256, 1024}) {
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 24; ++seed) {
      const otp::SketchBackend sk(a, cfg_with(b, 5, 100 + seed));
      errs.push_back((sk.query(u).values - truth).norm());
    }
    std::nth_element(errs.begin(), errs.begin() + errs.size() / 2, errs.end());
    med_err.push_back(errs[errs.size() / 2]);
  }
  for (std::size_t i = 1; i < med_err.size(); ++i) {
    EXPECT_LT(med_err[i], 0.9 * med_err[i - 1])
        << "median error did not shrink from b step " << i;
  }
}

/// A concentrated rank-one spike must survive sketching well enough for the
/// aligned query to read out the dominant value.
TEST(SketchBackend, RankOneSpikeReadsThroughSketch) {
  const int n = 12;
  const Eigen::VectorXd v = otp::Rng(6).unit_vector(n);
  otp::DenseTensor a(3, n);
  otp::tensor_axpy(3.0, otp::outer_power(v, 3), a);
  const otp::SketchBackend sk(a, cfg_with(1024, 9, 5));
  const Eigen::VectorXd got = sk.query(v).values;
  // Exact answer is 3 v; sketch noise scale is D/sqrt(b) ~ 0.1.
  EXPECT_NEAR((got - 3.0 * v).norm(), 0.0, 0.5);
  EXPECT_NEAR(got.dot(v), 3.0, 0.3);
}

}  // namespace
