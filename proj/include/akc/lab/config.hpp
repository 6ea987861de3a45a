#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "akc/errors.hpp"
#include "akc/kernel.hpp"
#include "akc/point.hpp"
#include "akc/quotient_stream.hpp"
#include "akc/rational.hpp"
#include "akc/schedule.hpp"

namespace akc::lab {

using json = nlohmann::ordered_json;
using akc::to_string;

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
  ScheduleConfig schedule;
  std::string alpha = "adaptive";
  unsigned step_divisor = 256;
  std::size_t samples = 1000;       // cheap per-check sample count
  std::size_t flow_samples = 200;   // samples for checks that integrate the flow

  /// Quotient stream named by `alpha`: adaptive, golden, silver,
  /// list:a1,a2,... or file:<path>.
  PartialQuotientStream stream() const {
    if (alpha == "adaptive") return PartialQuotientStream::adaptive();
    if (alpha == "golden") return PartialQuotientStream::golden();
    if (alpha == "silver") return PartialQuotientStream::silver();
    if (alpha.rfind("list:", 0) == 0) {
      std::vector<Integer> qs;
      std::stringstream ss(alpha.substr(5));
      std::string t;
      while (std::getline(ss, t, ',')) {
        try {
          qs.emplace_back(t);
        } catch (const std::invalid_argument&) {
          throw InvalidConfig("bad partial quotient '" + t + "'");
        }
      }
      return PartialQuotientStream::from_list(std::move(qs), alpha);
    }
    if (alpha.rfind("file:", 0) == 0) return PartialQuotientStream::load(alpha.substr(5));
    throw InvalidConfig("unknown alpha source '" + alpha + "'");
  }
};

inline json to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["d"] = c.schedule.d;
  j["mode"] = to_string(c.schedule.mode);
  j["profile"] = to_string(c.schedule.profile);
  j["stages"] = c.schedule.stages;
  json qs = json::array();
  for (const auto& q : c.schedule.forced_q_prime) qs.push_back(q.get_str());
  j["q_prime"] = qs;
  j["alpha"] = c.alpha;
  j["epsilon_base"] = to_string(c.schedule.epsilon_base);
  j["k_max"] = c.schedule.k_max;
  j["demand_faithful_order"] = c.schedule.demand_faithful_order;
  j["convergent_cap"] = c.schedule.convergent_cap;
  j["kernel_method"] = to_string(c.schedule.method);
  j["kernel_samples"] = c.schedule.kernel_samples;
  j["step_divisor"] = c.step_divisor;
  j["samples"] = c.samples;
  j["flow_samples"] = c.flow_samples;
  j["seed"] = c.schedule.seed;
  j["threads"] = c.schedule.threads;
  return j;
}

namespace detail {

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("config key '") + key + "': " + e.what());
  }
}

inline Integer integer_of(const json& v) {
  try {
    if (v.is_string()) return Integer(v.get<std::string>());
    if (v.is_number_integer()) return Integer(v.get<long>());
  } catch (const std::invalid_argument&) {
  }
  throw InvalidConfig("expected an integer, got " + v.dump());
}

}  // namespace detail

/// Validates keys and values; missing keys take their defaults.
inline RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidConfig("config must be a JSON object");
  static const std::set<std::string> known{
      "schema_version", "d",       "mode",         "profile",       "stages",
      "q_prime",        "alpha",   "epsilon_base", "k_max",         "demand_faithful_order",
      "convergent_cap", "kernel_method", "kernel_samples", "step_divisor", "samples",
      "flow_samples",   "seed",    "threads"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw InvalidConfig("unknown config key '" + k + "'");
  RunConfig c;
  auto& s = c.schedule;
  if (j.contains("schema_version") && detail::get_as<int>(j, "schema_version") != kSchemaVersion)
    throw InvalidConfig("unsupported schema_version");
  if (j.contains("d")) s.d = detail::get_as<int>(j, "d");
  if (j.contains("mode")) {
    try {
      s.mode = parse_mode(detail::get_as<std::string>(j, "mode"));
    } catch (const InvalidArgument& e) {
      throw InvalidConfig(e.what());
    }
  }
  if (j.contains("profile")) s.profile = parse_profile(detail::get_as<std::string>(j, "profile"));
  if (j.contains("stages")) s.stages = detail::get_as<int>(j, "stages");
  if (j.contains("q_prime")) {
    s.forced_q_prime.clear();
    for (const auto& v : j.at("q_prime")) s.forced_q_prime.push_back(detail::integer_of(v));
  }
  if (j.contains("alpha")) c.alpha = detail::get_as<std::string>(j, "alpha");
  if (j.contains("epsilon_base")) {
    try {
      s.epsilon_base = parse_rational(detail::get_as<std::string>(j, "epsilon_base"));
    } catch (const InvalidArgument& e) {
      throw InvalidConfig(e.what());
    }
  }
  if (j.contains("k_max")) s.k_max = detail::get_as<unsigned>(j, "k_max");
  if (j.contains("demand_faithful_order"))
    s.demand_faithful_order = detail::get_as<bool>(j, "demand_faithful_order");
  if (j.contains("convergent_cap")) s.convergent_cap = detail::get_as<std::size_t>(j, "convergent_cap");
  if (j.contains("kernel_method")) {
    const auto m = detail::get_as<std::string>(j, "kernel_method");
    if (m == "flow")
      s.method = KernelMethod::flow;
    else if (m == "action_angle")
      s.method = KernelMethod::action_angle;
    else
      throw InvalidConfig("kernel_method must be flow or action_angle");
  }
  if (j.contains("kernel_samples")) s.kernel_samples = detail::get_as<std::size_t>(j, "kernel_samples");
  if (j.contains("step_divisor")) c.step_divisor = detail::get_as<unsigned>(j, "step_divisor");
  if (j.contains("samples")) c.samples = detail::get_as<std::size_t>(j, "samples");
  if (j.contains("flow_samples")) c.flow_samples = detail::get_as<std::size_t>(j, "flow_samples");
  if (j.contains("seed")) s.seed = detail::get_as<std::uint64_t>(j, "seed");
  if (j.contains("threads")) s.threads = detail::get_as<unsigned>(j, "threads");
  if (c.step_divisor < 1) throw InvalidConfig("step_divisor must be >= 1");
  if (c.samples < 1 || c.flow_samples < 1) throw InvalidConfig("sample counts must be >= 1");
  s.validate();
  return c;
}

inline json read_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw InvalidConfig("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidConfig("malformed JSON in " + p.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + p.string());
  out << text;
}

inline void write_json_file(const std::filesystem::path& p, const json& j) {
  write_text_file(p, j.dump(2) + "\n");
}

}  // namespace akc::lab
