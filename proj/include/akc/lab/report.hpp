#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "akc/lab/config.hpp"
#include "akc/rational.hpp"

namespace akc::lab {

enum class Status { pass, fail, skip, info };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::skip: return "skip";
    case Status::info: return "info";
  }
  return "?";
}

/// Fixed-format decimal so that reports are byte-stable.
inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6e", x);
  return buf;
}

/// Exact when short; otherwise decimal, or a power of two when the double
/// underflows or overflows.
inline std::string fmt(const Rational& x) {
  const std::string s = to_string(x);
  if (s.size() <= 40) return s;
  const double v = x.get_d();
  if (v != 0.0 && std::isfinite(v)) return fmt(v);
  const long e = static_cast<long>(bit_length(abs_of(x).get_num())) - static_cast<long>(bit_length(x.get_den()));
  return std::string(x < 0 ? "-" : "") + "~2^" + std::to_string(e);
}

inline std::string short_int(const Integer& q) {
  return bit_length(q) > 64 ? "<" + std::to_string(bit_length(q)) + " bits>" : q.get_str();
}

struct Check {
  std::string name;    // e.g. "kernel.rigid-inner"
  std::string anchor;  // stable identifier of the property checked
  Status status = Status::info;
  std::string lhs, rhs, tolerance, note;
};

class Report {
public:
  explicit Report(std::string suite) : suite_(std::move(suite)) {}

  const std::string& suite() const noexcept { return suite_; }
  const std::vector<Check>& checks() const noexcept { return checks_; }

  Check& add(Check c) {
    checks_.push_back(std::move(c));
    return checks_.back();
  }

  /// lhs <= tol passes.
  Check& bound(std::string name, std::string anchor, double lhs, double tol, std::string note = {}) {
    return add({std::move(name), std::move(anchor), lhs <= tol ? Status::pass : Status::fail, fmt(lhs),
                fmt(tol), fmt(tol), std::move(note)});
  }

  Check& truth(std::string name, std::string anchor, bool ok, std::string lhs, std::string rhs,
               std::string note = {}) {
    return add({std::move(name), std::move(anchor), ok ? Status::pass : Status::fail, std::move(lhs),
                std::move(rhs), "exact", std::move(note)});
  }

  Check& skip(std::string name, std::string anchor, std::string why) {
    return add({std::move(name), std::move(anchor), Status::skip, "", "", "", std::move(why)});
  }

  Check& info(std::string name, std::string anchor, std::string lhs, std::string rhs = {},
              std::string note = {}) {
    return add({std::move(name), std::move(anchor), Status::info, std::move(lhs), std::move(rhs), "",
                std::move(note)});
  }

  void merge(const Report& o) {
    for (const auto& c : o.checks_) checks_.push_back(c);
  }

  std::size_t count(Status s) const {
    std::size_t k = 0;
    for (const auto& c : checks_) k += c.status == s;
    return k;
  }
  bool ok() const { return count(Status::fail) == 0; }

  json to_json() const {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["suite"] = suite_;
    json arr = json::array();
    for (const auto& c : checks_) {
      json r;
      r["name"] = c.name;
      r["anchor"] = c.anchor;
      r["status"] = lab::to_string(c.status);
      r["lhs"] = c.lhs;
      r["rhs"] = c.rhs;
      r["tolerance"] = c.tolerance;
      if (!c.note.empty()) r["note"] = c.note;
      arr.push_back(std::move(r));
    }
    j["checks"] = std::move(arr);
    j["summary"] = {{"pass", count(Status::pass)},
                    {"fail", count(Status::fail)},
                    {"skip", count(Status::skip)},
                    {"info", count(Status::info)}};
    return j;
  }

  /// One line per check, for the terminal.
  std::string to_text() const {
    std::string out;
    for (const auto& c : checks_) {
      out += "[" + lab::to_string(c.status) + "] " + c.name;
      if (!c.lhs.empty()) out += "  " + c.lhs;
      if (!c.rhs.empty()) out += " vs " + c.rhs;
      if (!c.note.empty()) out += "  (" + c.note + ")";
      out += "\n";
    }
    out += suite_ + ": " + std::to_string(count(Status::pass)) + " pass, " +
           std::to_string(count(Status::fail)) + " fail, " + std::to_string(count(Status::skip)) +
           " skip, " + std::to_string(count(Status::info)) + " info\n";
    return out;
  }

private:
  std::string suite_;
  std::vector<Check> checks_;
};

}  // namespace akc::lab
