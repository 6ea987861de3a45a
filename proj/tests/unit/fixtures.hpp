#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "akc/lab/config.hpp"
#include "akc/lab/store.hpp"
#include "akc/schedule.hpp"

namespace fixtures {

inline akc::ScheduleConfig forced_config(std::vector<long> q_primes, akc::Mode mode = akc::Mode::torus,
                                         int d = 2) {
  akc::ScheduleConfig c;
  c.d = d;
  c.mode = mode;
  c.profile = akc::Profile::forced;
  c.stages = static_cast<int>(q_primes.size());
  for (long q : q_primes) c.forced_q_prime.emplace_back(q);
  c.kernel_samples = 1024;
  return c;
}

/// Two forced stages, q' = 3 and 2, so q = 3 and 18. Built once per process.
inline const akc::StageBuild& forced_build(akc::Mode mode = akc::Mode::torus) {
  static const akc::StageBuild torus = [] {
    auto s = akc::PartialQuotientStream::adaptive();
    return akc::StageBuild(akc::schedule_build(forced_config({3, 2}), s));
  }();
  static const akc::StageBuild cylinder = [] {
    auto s = akc::PartialQuotientStream::adaptive();
    return akc::StageBuild(akc::schedule_build(forced_config({3, 2}, akc::Mode::cylinder), s));
  }();
  return mode == akc::Mode::torus ? torus : cylinder;
}

/// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("akc-unit-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline akc::Point pt(std::initializer_list<double> xs) { return akc::Point(xs); }

inline akc::RationalPoint rpt(std::initializer_list<const char*> xs) {
  std::vector<akc::Rational> v;
  for (const char* s : xs) v.push_back(akc::parse_rational(s));
  akc::RationalPoint p(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<int>(i)] = v[i];
  return p;
}

}  // namespace fixtures
