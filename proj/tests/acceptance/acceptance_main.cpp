// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "akc/ergodic.hpp"
#include "akc/lab/store.hpp"
#include "akc/lab/verify.hpp"
#include "akc/norms.hpp"
#include "akc/partition.hpp"
#include "akc/schedule.hpp"

using namespace akc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

ScheduleConfig forced_schedule(Mode mode) {
  ScheduleConfig c;
  c.mode = mode;
  c.profile = Profile::forced;
  c.stages = 2;
  c.forced_q_prime = {Integer(3), Integer(2)};
  c.kernel_samples = 1024;
  return c;
}

const StageBuild& forced(Mode mode = Mode::torus) {
  static std::map<Mode, StageBuild> cache;
  auto it = cache.find(mode);
  if (it == cache.end()) {
    auto s = PartialQuotientStream::adaptive();
    it = cache.emplace(mode, StageBuild(schedule_build(forced_schedule(mode), s))).first;
  }
  return it->second;
}

Outcome e_measure() {
  std::size_t cases = 0, bad = 0;
  Rational slack = 1;
  for (int d : {2, 3})
    for (int n : {5, 8, 16})
      for (long q : {8, 27, 64})
        for (const auto mode : {Mode::torus, Mode::cylinder}) {
          const Rational m = E_measure(n, Integer(q), d, mode);
          const Rational bound = 1 - make_rational(4L * (d - 1), long(n) * n);
          ++cases;
          bad += !(m >= bound);
          slack = std::min(slack, Rational(m - bound));
        }
  return {bad == 0, std::to_string(cases - bad) + "/" + std::to_string(cases) +
                        " cases, min slack " + num(slack.get_d())};
}

Outcome diameters() {
  const int n = 5;
  std::size_t atoms = 0, empty = 0, bad = 0;
  Rational worst = 0;
  for (int d : {2, 3})
    for (long q : {3, 8, 27})
      for (const auto mode : {Mode::torus, Mode::cylinder}) {
        const AgreementSet E(n, Integer(q), d, mode);
        const Rational tol = Rational(d) / Rational(q * q);
        const Integer total = pow_of(Integer(q), static_cast<unsigned long>(d));
        for (Integer i = 0; i < total; ++i) {
          ++atoms;
          const auto b = image_diameter_bound(E, i);
          if (!b) {
            ++empty;
            continue;
          }
          bad += !(*b <= tol);
          worst = std::max(worst, Rational(*b / tol));
        }
      }
  return {bad == 0, std::to_string(atoms) + " atoms (" + std::to_string(empty) +
                        " empty), worst diam^2 / (d/q^2) = " + num(worst.get_d())};
}

Outcome kernel_fidelity() {
  lab::KernelSuiteOptions o;
  o.inner = 1000;
  o.collar = 1000;
  o.band = 10000;
  const auto rep = lab::kernel_checks(5, o);
  std::string failed;
  for (const auto& c : rep.checks())
    if (c.status == lab::Status::fail) failed += " " + c.name + "=" + c.lhs;
  return {rep.ok(), std::to_string(rep.count(lab::Status::pass)) + " checks pass" +
                        (failed.empty() ? "" : ";" + failed)};
}

Outcome commutation() {
  double worst = 0.0;
  std::size_t exact_bad = 0, atom_bad = 0, checked = 0;
  for (const auto mode : {Mode::torus, Mode::cylinder}) {
    const auto& b = forced(mode);
    const auto& steps = b.full_stack().steps();
    const auto& r = b.records();
    for (std::size_t s = 0; s < b.size(); ++s) {
      const double shift = 1.0 / r[s].q.get_d();
      for (const auto& x : lab::uniform_points(2, 1000, 100 + s))
        worst = std::max(worst, max_dist(steps[s].apply(base_rotation(shift, x)),
                                         base_rotation(shift, steps[s].apply(x)), mode));
      const std::int64_t q = r[s].q.get_si();
      const Rational rs = make_rational(1, q);
      for (const auto& x : lab::rational_points(2, 1000, 110 + s))
        exact_bad += heuristic_h_apply(q, mode, base_rotation(rs, x)) != base_rotation(rs, heuristic_h_apply(q, mode, x));
    }
    const std::int64_t qp = r[0].q.get_si();
    for (const auto& x : lab::uniform_points(2, 1000, 120)) {
      ++checked;
      atom_bad += atom_of(qp, 2, x.last()) != atom_of(qp, 2, steps[1].apply(x).last());
    }
  }
  return {worst <= 1e-9 && exact_bad == 0 && atom_bad == 0,
          "residual " + num(worst) + " (tol 1e-9), rational mismatches " + std::to_string(exact_bad) +
              ", atom changes " + std::to_string(atom_bad) + "/" + std::to_string(checked)};
}

Outcome intertwining() {
  double worst = 0.0;
  for (const auto mode : {Mode::torus, Mode::cylinder}) {
    const auto& b = forced(mode);
    for (std::size_t s = 0; s < b.size(); ++s) {
      const auto K = b.H_next(s);
      const StageMap T = b.T(s);
      const double a = b.records()[s].alpha_n.get_d();
      for (const auto& x : lab::uniform_points(2, 1000, 130 + s))
        worst = std::max(worst, circle_dist(wrap01(K_project(K, T.apply(x)) - K_project(K, x)), a));
    }
  }
  return {worst <= 1e-8, "max |K(Tx) - K(x) - alpha| = " + num(worst) + " (tol 1e-8)"};
}

Outcome growth() {
  const auto kernel = make_kernel(5, KernelMethod::action_angle);
  bool ok = true;
  std::string detail;
  for (int k : {1, 2}) {
    const auto g = growth_check(*kernel, 2, k, {4, 8, 16, 32});
    ok = ok && g.pass;
    detail += "k=" + std::to_string(k) + " ratios";
    for (const auto& r : g.rows) detail += " " + num(r.ratio);
    detail += " (median " + num(g.median_ratio) + ") ";
  }
  return {ok, detail};
}

Outcome drift() {
  const auto& b = forced();
  const auto& r = b.records()[0];
  const auto& h = b.full_stack().steps()[0];
  KernelConstants kc;
  kc.K = r.kernel_constants;
  const auto polys = step_seminorms(kc, 2, Mode::torus);
  const Rational M = std::max(max_seminorm(evaluate(polys.forward, Rational(r.q))),
                              max_seminorm(evaluate(polys.inverse, Rational(r.q))));
  const auto xs = lab::uniform_points(2, 64, 140);
  Rng rng(141);
  double worst_ratio = 0.0;
  std::size_t bad = 0;
  for (int i = 0; i < 10; ++i) {
    const double al = rng.uniform(), be = wrap01(al + rng.uniform(-0.01, 0.01));
    auto conj = [&](double a) -> MapFn { return [&h, a](const Point& x) { return h.apply(base_rotation(a, h.inverse(x))); }; };
    const double gap = circle_dist(al, be);
    for (unsigned k = 0; k <= 1; ++k) {
      const double emp = dk_distance(conj(al), conj(be), conj(-al), conj(-be), static_cast<int>(k), xs,
                                     1e-4 / r.q.get_d(), Mode::torus);
      const double bound = conjugacy_drift_bound(M, k, exact(gap)).get_d();
      bad += !(emp <= bound);
      worst_ratio = std::max(worst_ratio, emp / bound);
    }
  }
  // identity conjugacy: d_0(S_a, S_b) equals |a - b| on the circle
  double tight = 1.0;
  for (int i = 0; i < 10; ++i) {
    const double al = rng.uniform(), be = rng.uniform();
    MapFn f = [al](const Point& x) { return base_rotation(al, x); };
    MapFn g = [be](const Point& x) { return base_rotation(be, x); };
    const double gap = circle_dist(al, be);
    tight = std::min(tight, d0_distance(f, g, xs, Mode::torus) /
                                conjugacy_drift_bound(Rational(1), 0, exact(gap)).get_d());
  }
  return {bad == 0 && tight >= 0.99,
          "max empirical/bound " + num(worst_ratio) + ", identity tightness " + num(tight)};
}

Outcome faithful_gap() {
  ScheduleConfig c;
  auto s = PartialQuotientStream::adaptive();
  const auto recs = schedule_build(c, s);
  const auto& r = recs.front();
  const Rational eps = make_rational(Integer(1), pow_of(Integer(2), static_cast<unsigned long>(r.n)));
  const bool ok = recs.size() == 1 && r.gap_enforced && r.gap_bound < eps && r.convergent_index <= 30;
  bool negative = false;
  auto golden = PartialQuotientStream::golden();
  try {
    select_stage_denominator(r.n, Integer(1), 0, r.P, r.epsilon, golden, r.d);
  } catch (const StreamExhausted&) {
    negative = true;
  }
  return {ok && negative, "gap_bound " + lab::fmt(r.gap_bound) + " < " + to_string(eps) +
                              " at convergent " + std::to_string(r.convergent_index) +
                              ", golden stream exhausted: " + (negative ? "yes" : "no")};
}

Outcome certificates() {
  const std::vector<Observable> phis{Observable::parse(2, "cos:1,0"), Observable::parse(2, "sin:0,1"),
                                     Observable::parse(2, "cos:1,1")};
  std::size_t bad = 0, vacuous = 0, total = 0;
  double worst = 0.0;
  for (const auto& phi : phis)
    for (const auto& x : lab::rational_points(2, 3, 150, 1000)) {
      const auto c = distribution_certificate(12, Integer(300), Integer(9000000), x, phi);
      ++total;
      bad += !c.pass;
      vacuous += c.vacuous;
      worst = std::max(worst, c.lhs / c.budget.get_d());
    }
  return {bad == 0, std::to_string(total - bad) + "/" + std::to_string(total) + " pass, max lhs/budget " +
                        num(worst) + ", vacuous " + std::to_string(vacuous)};
}

Outcome orbit_good_atoms() {
  const Rational target = make_rational(17, 25);
  Rational worst = 1;
  std::size_t v1 = 0, v2 = 0, c1 = 0, c2 = 0;
  for (const auto& x : lab::rational_points(2, 5, 160, 1000)) {
    const auto s = lab::J_checks(5, Integer(64), 2, x, 2000, 161);
    worst = std::min(worst, s.measure);
    v1 += s.element1_violations;
    v2 += s.element2_violations;
    c1 += s.element1_checked;
    c2 += s.element2_checked;
  }
  return {worst > target && v1 == 0 && v2 == 0,
          "min measure " + to_string(worst) + " > 17/25, orbit-hit violations " + std::to_string(v1) + "/" +
              std::to_string(c1) + ", atom-fraction violations " + std::to_string(v2) + "/" + std::to_string(c2)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Runs build + verify all in `dir`; returns stdout of both plus every file, keyed by name.
std::map<std::string, std::string> cli_run(const fs::path& dir, const fs::path& cfg, int& status) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string base = std::string(AKC_LAB_BINARY) + " --run-dir " + (dir / "run").string();
  const std::string build = base + " --config " + cfg.string() + " build > " + (dir / "build.out").string();
  const std::string verify = base + " verify all > " + (dir / "verify.out").string();
  const int a = std::system(build.c_str()), b = std::system(verify.c_str());
  status = (WIFEXITED(a) ? WEXITSTATUS(a) : 1) | (WIFEXITED(b) ? WEXITSTATUS(b) : 1);
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "akc-acceptance-determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  lab::RunConfig cfg;
  cfg.schedule = forced_schedule(Mode::torus);
  lab::write_json_file(root / "config.json", lab::to_json(cfg));
  int s1 = 0, s2 = 0;
  const auto first = cli_run(root / "work", root / "config.json", s1);
  const auto second = cli_run(root / "work", root / "config.json", s2);
  std::size_t differ = 0;
  for (const auto& [name, text] : first) {
    const auto it = second.find(name);
    differ += it == second.end() || it->second != text;
  }
  differ += second.size() != first.size();
  return {s1 == 0 && s2 == 0 && differ == 0 && !first.empty(),
          std::to_string(first.size()) + " files compared, " + std::to_string(differ) +
              " differ, exit codes " + std::to_string(s1) + "/" + std::to_string(s2)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact agreement-set measure", e_measure},
      {"exact heuristic image diameter", diameters},
      {"square kernel fidelity", kernel_fidelity},
      {"commutation and slab preservation", commutation},
      {"factor intertwining", intertwining},
      {"norm growth of the conjugacy step", growth},
      {"conjugation drift bound", drift},
      {"faithful stage gap", faithful_gap},
      {"distribution certificates", certificates},
      {"orbit-good atoms", orbit_good_atoms},
      {"build and verify determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    char t[32];
    std::snprintf(t, sizeof t, "%.1fs", secs);
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
              << " [" << t << "]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
