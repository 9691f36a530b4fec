#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "otp/tpm.hpp"

namespace otp {

/// Persisted record of one decompose run: configuration echo, the recovered
/// pairs, and the iteration traces. Wall-clock timings are deliberately not
/// part of the file so identical flags and seeds produce identical bytes.
struct RunReport {
  std::string input_path;
  std::string backend;  // "exact" | "sketch"
  int p = 0;
  int n = 0;
  int k = 0;
  int T = 0;
  int L = 0;
  double epsilon = 0.0;
  double c0 = 0.0;
  std::string mode;  // "benchmark" | "guarantee"
  std::uint64_t seed = 0;
  int b = 0;  // sketch width/repetitions, 0 on the exact backend
  int B = 0;

  Eigen::VectorXd lambdas;
  Eigen::MatrixXd vectors;  // n x k
  std::vector<IterationTrace> traces;
};

/// Deterministic JSON text (fixed key order, round-trip doubles).
std::string to_json(const RunReport& report);

void write_report(const RunReport& report, const std::string& path);

/// Parses what to_json wrote. Malformed content throws IoError.
RunReport read_report(const std::string& path);

}  // namespace otp
