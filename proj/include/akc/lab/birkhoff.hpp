#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "akc/ergodic.hpp"
#include "akc/lab/config.hpp"
#include "akc/lab/report.hpp"
#include "akc/lab/store.hpp"
#include "akc/lab/verify.hpp"

namespace akc::lab {

struct BirkhoffOptions {
  std::string observable = "cos:1,0";
  std::size_t base_points = 3;
  std::optional<Integer> q_prime;  // orbit length; default: next stage's q', else 10 q^d
};

struct BirkhoffRow {
  DistributionCertificate cert;
  std::string q_source;  // "stage" or "substitute"
  std::size_t x_index = 0;
};

struct BirkhoffResult {
  std::vector<BirkhoffRow> rows;
  std::optional<UEReport> checklist;
  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.cert.pass) return false;
    return true;
  }
};

/// Distribution certificates per stage. Stages whose q is too large to
/// evaluate use the substitute q = d n^2 + 1 (flagged in q_source).
inline BirkhoffResult run_birkhoff(const Store& st, const BirkhoffOptions& o) {
  const auto build = st.build();
  const int d = build.records().front().d;
  const auto phi = Observable::parse(d, o.observable);
  const auto th = st.config.schedule.threads;
  BirkhoffResult res;
  const auto xs = rational_points(d, o.base_points, st.config.schedule.seed + 81, 1000);
  for (std::size_t s = 0; s < build.size(); ++s) {
    const auto& r = build.records()[s];
    if (r.mode != Mode::torus) continue;
    Integer q = r.q;
    std::string source = "stage";
    Integer qp;
    if (o.q_prime)
      qp = *o.q_prime;
    else if (s + 1 < build.size())
      qp = build.records()[s + 1].q_prime;
    if (q > Integer(1L << 20)) {
      q = Integer(d) * r.n * r.n + 1;
      source = "substitute";
      if (!o.q_prime) qp = 0;
    }
    if (qp == 0) qp = pow_of(q, static_cast<unsigned long>(d)) * 10;
    if (qp > Integer(1L << 26)) throw NotEvaluable("orbit length q' = " + qp.get_str());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      BirkhoffRow row;
      row.cert = distribution_certificate(r.n, q, qp, xs[i], phi, th, 1, st.config.schedule.method);
      row.q_source = source;
      row.x_index = i;
      res.rows.push_back(std::move(row));
    }
  }
  if (build.size() >= 2) {
    const auto pts = uniform_points(d, 3, st.config.schedule.seed + 82);
    res.checklist = ue_conditions_report(build, {phi}, pts, th);
  }
  return res;
}

inline std::string birkhoff_csv(const BirkhoffResult& r) {
  std::string out = "n,q,q_source,q_prime,observable,x_index,average,mean,lhs,budget,pass,vacuous\n";
  for (const auto& row : r.rows) {
    const auto& c = row.cert;
    out += std::to_string(c.n) + "," + c.q.get_str() + "," + row.q_source + "," + c.q_prime.get_str() + ",\"" +
           c.observable + "\"," + std::to_string(row.x_index) + "," + fmt(c.average) + "," + fmt(c.mean) + "," +
           fmt(c.lhs) + "," + fmt(c.budget) + "," + (c.pass ? "true" : "false") + "," +
           (c.vacuous ? "true" : "false") + "\n";
  }
  return out;
}

inline json birkhoff_json(const BirkhoffResult& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  json certs = json::array();
  for (const auto& row : r.rows) {
    const auto& c = row.cert;
    json x = json::array();
    for (int i = 0; i < c.x.dim(); ++i) x.push_back(to_string(c.x[i]));
    certs.push_back({{"n", c.n},
                     {"d", c.d},
                     {"q", c.q.get_str()},
                     {"q_source", row.q_source},
                     {"q_prime", c.q_prime.get_str()},
                     {"x", x},
                     {"observable", c.observable},
                     {"average", fmt(c.average)},
                     {"mean", to_string(c.mean)},
                     {"lhs", fmt(c.lhs)},
                     {"term_geometry", to_string(c.term_geometry)},
                     {"term_period", to_string(c.term_period)},
                     {"term_eps", fmt(c.term_eps)},
                     {"budget", fmt(c.budget)},
                     {"pass", c.pass},
                     {"vacuous", c.vacuous},
                     {"warning", c.warning}});
  }
  j["certificates"] = certs;
  if (r.checklist) {
    json rows = json::array();
    for (const auto& row : r.checklist->rows) {
      json cons = json::array();
      for (const auto& k : row.constraints)
        cons.push_back({{"name", k.name}, {"lhs", k.lhs}, {"rhs", k.rhs}, {"holds", k.pass}});
      rows.push_back({{"n", row.n},
                      {"evaluated", row.evaluated},
                      {"max_residual", fmt(row.max_residual)},
                      {"gap_empirical", fmt(row.gap_empirical)},
                      {"gap_bound", fmt(row.gap_bound)},
                      {"gap_within_bound", row.gap_within_bound},
                      {"powers", row.powers},
                      {"constraints", cons}});
    }
    j["checklist"] = {{"label", r.checklist->label},
                      {"residuals_decreasing", r.checklist->residuals_decreasing},
                      {"gaps_decreasing", r.checklist->gaps_decreasing},
                      {"rows", rows}};
  }
  return j;
}

}  // namespace akc::lab
