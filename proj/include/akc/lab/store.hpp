#pragma once

// Run directory: config.json plus one stage-<n>.json per stage record.

#include <filesystem>
#include <string>
#include <vector>

#include "akc/errors.hpp"
#include "akc/lab/config.hpp"
#include "akc/lab/report.hpp"
#include "akc/schedule.hpp"

namespace akc::lab {

namespace fs = std::filesystem;

inline json rationals_json(const std::vector<Rational>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(to_string(x));
  return a;
}

inline std::vector<Rational> rationals_from(const json& a) {
  std::vector<Rational> v;
  for (const auto& x : a) v.push_back(parse_rational(x.get<std::string>()));
  return v;
}

inline json kernel_json(int n, const RunConfig& cfg) {
  const auto prof = SmoothingProfile::for_stage(n);
  json k;
  k["n"] = n;
  k["k"] = prof.k;
  k["c_in"] = to_string(prof.c_in());
  k["c_out"] = to_string(prof.c_out());
  k["method"] = to_string(cfg.schedule.method);
  k["step_divisor"] = cfg.step_divisor;
  k["newton_tol"] = "1e-12";
  return k;
}

inline json to_json(const StageRecord& r, const RunConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["n"] = r.n;
  j["d"] = r.d;
  j["mode"] = to_string(r.mode);
  j["q_prime"] = r.q_prime.get_str();
  j["p_prime"] = r.p_prime.get_str();
  j["q_prev"] = r.q_prev.get_str();
  j["q"] = r.q.get_str();
  j["alpha_n"] = to_string(r.alpha_n);
  j["alpha_err_upper"] = to_string(r.alpha_err_upper);
  j["epsilon"] = to_string(r.epsilon);
  j["gap_bound"] = to_string(r.gap_bound);
  j["gap_bound_approx"] = fmt(r.gap_bound);
  j["gap_ok"] = r.gap_ok();
  j["gap_enforced"] = r.gap_enforced;
  j["margin"] = to_string(Rational(r.epsilon - r.gap_bound));
  j["convergent_index"] = r.convergent_index;
  j["k_order"] = r.k_order;
  j["P"] = rationals_json(r.P.coefficients());
  j["kernel_constants"] = rationals_json(r.kernel_constants);
  j["H_seminorms"] = rationals_json(r.H_seminorms);
  j["H_inv_seminorms"] = rationals_json(r.H_inv_seminorms);
  j["kernel"] = kernel_json(r.n, cfg);
  return j;
}

inline StageRecord record_from_json(const json& j) {
  try {
    StageRecord r;
    r.n = j.at("n").get<int>();
    r.d = j.at("d").get<int>();
    r.mode = parse_mode(j.at("mode").get<std::string>());
    r.q_prime = Integer(j.at("q_prime").get<std::string>());
    r.p_prime = Integer(j.at("p_prime").get<std::string>());
    r.q_prev = Integer(j.at("q_prev").get<std::string>());
    r.q = Integer(j.at("q").get<std::string>());
    r.alpha_n = parse_rational(j.at("alpha_n").get<std::string>());
    r.alpha_err_upper = parse_rational(j.at("alpha_err_upper").get<std::string>());
    r.epsilon = parse_rational(j.at("epsilon").get<std::string>());
    r.gap_bound = parse_rational(j.at("gap_bound").get<std::string>());
    r.gap_enforced = j.at("gap_enforced").get<bool>();
    r.convergent_index = j.at("convergent_index").get<std::size_t>();
    r.k_order = j.at("k_order").get<unsigned>();
    r.P = PolynomialBound(rationals_from(j.at("P")));
    r.kernel_constants = rationals_from(j.at("kernel_constants"));
    r.H_seminorms = rationals_from(j.at("H_seminorms"));
    r.H_inv_seminorms = rationals_from(j.at("H_inv_seminorms"));
    return r;
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("malformed stage record: ") + e.what());
  }
}

struct Store {
  fs::path dir;
  RunConfig config;
  std::vector<StageRecord> records;

  StageBuild build() const { return StageBuild(records, config.schedule.method); }
};

inline fs::path stage_path(const fs::path& dir, int n) {
  return dir / ("stage-" + std::to_string(n) + ".json");
}

/// Builds the schedule and writes the store. Stale stage files from an
/// earlier run with more stages are removed.
inline Store run_build(const RunConfig& cfg, const fs::path& dir) {
  auto stream = cfg.stream();
  Store s;
  s.dir = dir;
  s.config = cfg;
  s.records = schedule_build(cfg.schedule, stream);
  fs::create_directories(dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("stage-", 0) == 0 && entry.path().extension() == ".json") fs::remove(entry.path());
  }
  write_json_file(dir / "config.json", to_json(cfg));
  for (const auto& r : s.records) write_json_file(stage_path(dir, r.n), to_json(r, cfg));
  return s;
}

inline Store load_store(const fs::path& dir) {
  if (!fs::exists(dir / "config.json"))
    throw MissingStage("no stage store at '" + dir.string() + "' (run build first)");
  Store s;
  s.dir = dir;
  s.config = config_from_json(read_json_file(dir / "config.json"));
  const int n0 = s.config.schedule.n0();
  for (int i = 0; i < s.config.schedule.stages; ++i) {
    const auto p = stage_path(dir, n0 + i);
    if (!fs::exists(p)) throw MissingStage("missing " + p.string());
    s.records.push_back(record_from_json(read_json_file(p)));
  }
  return s;
}

}  // namespace akc::lab
