#include "otp/report.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "otp/errors.hpp"

namespace otp {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json record_to_json(const IterationRecord& rec) {
  ordered_json j;
  j["t"] = rec.t;
  j["phase"] = rec.phase;
  j["update_residual"] = rec.update_residual;
  if (rec.has_truth) {
    j["tan_theta"] = std::isfinite(rec.tan_theta) ? rec.tan_theta : -1.0;
    j["xi"] = rec.xi;
  }
  if (rec.has_rayleigh) j["rayleigh"] = rec.rayleigh;
  return j;
}

IterationRecord record_from_json(const ordered_json& j) {
  IterationRecord rec;
  rec.t = j.at("t").get<int>();
  rec.phase = j.at("phase").get<int>();
  rec.update_residual = j.at("update_residual").get<double>();
  if (j.contains("tan_theta")) {
    rec.tan_theta = j.at("tan_theta").get<double>();
    // The axis angle tangent is never negative, so -1 only ever marks the
    // infinity sentinel written above.
    if (rec.tan_theta == -1.0) rec.tan_theta = std::numeric_limits<double>::infinity();
    rec.xi = j.at("xi").get<bool>();
    rec.has_truth = true;
  }
  if (j.contains("rayleigh")) {
    rec.rayleigh = j.at("rayleigh").get<double>();
    rec.has_rayleigh = true;
  }
  return rec;
}

}  // namespace

std::string to_json(const RunReport& report) {
  ordered_json j;
  ordered_json& cfg = j["config"];
  cfg["input"] = report.input_path;
  cfg["backend"] = report.backend;
  cfg["p"] = report.p;
  cfg["n"] = report.n;
  cfg["k"] = report.k;
  cfg["T"] = report.T;
  cfg["L"] = report.L;
  cfg["epsilon"] = report.epsilon;
  cfg["c0"] = report.c0;
  cfg["mode"] = report.mode;
  cfg["seed"] = report.seed;
  cfg["b"] = report.b;
  cfg["B"] = report.B;

  ordered_json estimates = ordered_json::array();
  for (int i = 0; i < static_cast<int>(report.lambdas.size()); ++i) {
    ordered_json e;
    e["lambda"] = report.lambdas(i);
    std::vector<double> v(report.vectors.col(i).data(),
                          report.vectors.col(i).data() + report.vectors.rows());
    e["vector"] = v;
    estimates.push_back(std::move(e));
  }
  j["estimates"] = std::move(estimates);

  ordered_json traces = ordered_json::array();
  for (const IterationTrace& trace : report.traces) {
    ordered_json t;
    t["candidate"] = trace.candidate;
    ordered_json records = ordered_json::array();
    for (const IterationRecord& rec : trace.records) records.push_back(record_to_json(rec));
    t["records"] = std::move(records);
    traces.push_back(std::move(t));
  }
  j["traces"] = std::move(traces);

  return j.dump(2) + "\n";
}

void write_report(const RunReport& report, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path + ": cannot open for writing");
  os << to_json(report);
  if (!os) throw IoError(path + ": write failed");
}

RunReport read_report(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path + ": cannot open for reading");
  ordered_json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw IoError(path + ": " + e.what());
  }

  RunReport report;
  try {
    const ordered_json& cfg = j.at("config");
    report.input_path = cfg.at("input").get<std::string>();
    report.backend = cfg.at("backend").get<std::string>();
    report.p = cfg.at("p").get<int>();
    report.n = cfg.at("n").get<int>();
    report.k = cfg.at("k").get<int>();
    report.T = cfg.at("T").get<int>();
    report.L = cfg.at("L").get<int>();
    report.epsilon = cfg.at("epsilon").get<double>();
    report.c0 = cfg.at("c0").get<double>();
    report.mode = cfg.at("mode").get<std::string>();
    report.seed = cfg.at("seed").get<std::uint64_t>();
    report.b = cfg.at("b").get<int>();
    report.B = cfg.at("B").get<int>();

    const ordered_json& estimates = j.at("estimates");
    const int k = static_cast<int>(estimates.size());
    report.lambdas.resize(k);
    report.vectors.resize(report.n, k);
    for (int i = 0; i < k; ++i) {
      report.lambdas(i) = estimates.at(i).at("lambda").get<double>();
      const auto v = estimates.at(i).at("vector").get<std::vector<double>>();
      if (static_cast<int>(v.size()) != report.n) {
        throw IoError(path + ": estimate " + std::to_string(i) + " has wrong dimension");
      }
      for (int r = 0; r < report.n; ++r) report.vectors(r, i) = v[static_cast<std::size_t>(r)];
    }

    if (j.contains("traces")) {
      for (const ordered_json& t : j.at("traces")) {
        IterationTrace trace;
        trace.candidate = t.at("candidate").get<int>();
        for (const ordered_json& r : t.at("records")) trace.records.push_back(record_from_json(r));
        report.traces.push_back(std::move(trace));
      }
    }
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return report;
}

}  // namespace otp
