#pragma once

// Birkhoff averages of trigonometric observables along stage orbits, the
// local equidistribution certificate for h_{n,q} S_{1/q'}-orbits, and the
// finite-stage evidence table for unique ergodicity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "akc/conjugacy.hpp"
#include "akc/errors.hpp"
#include "akc/norms.hpp"
#include "akc/parallel.hpp"
#include "akc/point.hpp"
#include "akc/rational.hpp"
#include "akc/schedule.hpp"

namespace akc {

/// a cos(2 pi m.x) + b sin(2 pi m.x).
struct TrigTerm {
  std::array<long, kMaxDim> m{};
  Rational a, b;
};

class Observable {
public:
  Observable(int d, std::vector<TrigTerm> terms, std::string name)
      : d_(d), terms_(std::move(terms)), name_(std::move(name)) {
    check_dimension(d_);
  }

  static Observable constant(int d, const Rational& c) {
    return Observable(d, {TrigTerm{{}, c, Rational(0)}}, "const:" + to_string(c));
  }

  /// "cos:1,0", "sin:0,1", "const:1/2", optionally scaled as "1/2*cos:1,1",
  /// terms joined by '+'.
  static Observable parse(int d, const std::string& spec) {
    std::vector<TrigTerm> terms;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, '+')) {
      Rational coef(1);
      if (const auto star = part.find('*'); star != std::string::npos) {
        coef = parse_rational(part.substr(0, star));
        part = part.substr(star + 1);
      }
      const auto colon = part.find(':');
      if (colon == std::string::npos) throw InvalidArgument("observable term '" + part + "'");
      const std::string kind = part.substr(0, colon), args = part.substr(colon + 1);
      TrigTerm t;
      if (kind == "const") {
        t.a = coef * parse_rational(args);
      } else if (kind == "cos" || kind == "sin") {
        std::stringstream as(args);
        std::string f;
        int i = 0;
        while (std::getline(as, f, ',')) {
          if (i >= d) throw InvalidArgument("frequency vector longer than d in '" + part + "'");
          try {
            t.m[static_cast<std::size_t>(i++)] = std::stol(f);
          } catch (const std::logic_error&) {
            throw InvalidArgument("bad frequency '" + f + "' in '" + part + "'");
          }
        }
        if (i != d) throw InvalidArgument("frequency vector needs " + std::to_string(d) + " entries");
        (kind == "cos" ? t.a : t.b) = coef;
      } else {
        throw InvalidArgument("unknown observable kind '" + kind + "'");
      }
      terms.push_back(t);
    }
    if (terms.empty()) throw InvalidArgument("empty observable");
    return Observable(d, std::move(terms), spec);
  }

  int dim() const noexcept { return d_; }
  const std::string& name() const noexcept { return name_; }
  const std::vector<TrigTerm>& terms() const noexcept { return terms_; }

  double operator()(const Point& x) const {
    double s = 0.0;
    for (const auto& t : terms_) {
      double ph = 0.0;
      for (int i = 0; i < d_; ++i) ph += double(t.m[static_cast<std::size_t>(i)]) * x[i];
      ph -= std::floor(ph);
      const double ang = 2.0 * std::numbers::pi * ph;
      if (t.a != 0) s += t.a.get_d() * std::cos(ang);
      if (t.b != 0) s += t.b.get_d() * std::sin(ang);
    }
    return s;
  }

  bool is_constant() const {
    for (const auto& t : terms_)
      for (int i = 0; i < d_; ++i)
        if (t.m[static_cast<std::size_t>(i)] != 0) return false;
    return true;
  }

  /// sum |a| + |b|, an upper bound for sup |phi|.
  Rational sup_norm() const {
    Rational s(0);
    for (const auto& t : terms_) s += abs_of(t.a) + abs_of(t.b);
    return s;
  }

  /// Euclidean Lipschitz bound sum 2 pi |m| (|a| + |b|), pi and sqrt rounded up.
  Rational lipschitz() const {
    Rational s(0);
    for (const auto& t : terms_) {
      Rational m2(0);
      for (int i = 0; i < d_; ++i) {
        const long mi = t.m[static_cast<std::size_t>(i)];
        m2 += Rational(mi * mi);
      }
      if (m2 == 0) continue;
      s += 2 * pi_upper() * sqrt_upper(m2) * (abs_of(t.a) + abs_of(t.b));
    }
    return s;
  }

  /// Integral over M: the cosine coefficients of the zero frequency.
  Rational mean() const {
    Rational s(0);
    for (const auto& t : terms_) {
      bool zero = true;
      for (int i = 0; i < d_; ++i) zero = zero && t.m[static_cast<std::size_t>(i)] == 0;
      if (zero) s += t.a;
    }
    return s;
  }

private:
  int d_;
  std::vector<TrigTerm> terms_;
  std::string name_;
};

/// cos and sin of the frequency vectors ordered by height max|m_i| and then
/// lexicographically, one of each sign pair, first `count` of them.
inline std::vector<Observable> observable_family(int d, std::size_t count) {
  std::vector<Observable> out;
  for (long h = 1; out.size() < count; ++h) {
    std::vector<std::array<long, kMaxDim>> ms;
    std::array<long, kMaxDim> m{};
    std::function<void(int)> rec = [&](int i) {
      if (i == d) {
        long mx = 0;
        for (int c = 0; c < d; ++c) mx = std::max(mx, std::labs(m[static_cast<std::size_t>(c)]));
        if (mx != h) return;
        for (int c = 0; c < d; ++c) {  // keep the representative with first nonzero > 0
          const long v = m[static_cast<std::size_t>(c)];
          if (v == 0) continue;
          if (v > 0) ms.push_back(m);
          return;
        }
        return;
      }
      for (long v = -h; v <= h; ++v) {
        m[static_cast<std::size_t>(i)] = v;
        rec(i + 1);
      }
    };
    rec(0);
    for (const auto& f : ms) {
      for (const char* kind : {"cos", "sin"}) {
        if (out.size() >= count) break;
        std::string spec = std::string(kind) + ":";
        for (int c = 0; c < d; ++c)
          spec += (c ? "," : "") + std::to_string(f[static_cast<std::size_t>(c)]);
        out.push_back(Observable::parse(d, spec));
      }
    }
  }
  return out;
}

/// (1/N) sum_{i<N} phi(point(i)) with a deterministic pairwise reduction.
template <class Orbit>
double birkhoff_average(Orbit&& point, const Observable& phi, std::size_t N, unsigned threads = 0) {
  if (N < 1) throw InvalidArgument("orbit length N must be >= 1");
  return parallel_sum(N, threads, [&](std::size_t i) { return phi(point(i)); }) / double(N);
}

/// Average of phi along T^i x, i < N, by the conjugacy shortcut.
inline double birkhoff_average(const StageMap& t, const Observable& phi, std::size_t N,
                               const Point& x, unsigned threads = 0) {
  return birkhoff_average([&](std::size_t i) { return t.apply(x, static_cast<long>(i)); }, phi, N,
                          threads);
}

/// Average of phi along h(S_{1/q'}^i x), i < q'.
inline double birkhoff_average(const ConjugacyStep& h, const Observable& phi,
                               const Integer& q_prime, const Point& x, unsigned threads = 0) {
  if (q_prime < 1 || q_prime > Integer(1L << 40))
    throw NotEvaluable("orbit length q' = " + q_prime.get_str());
  const long qp = q_prime.get_si();
  const double base = x.last();
  return birkhoff_average(
      [&](std::size_t i) {
        Point y = x;
        // i/q' and x_d kept apart until the final wrap
        y.last() = wrap01(base + double(static_cast<long>(i) % qp) / double(qp));
        return h.apply(y);
      },
      phi, static_cast<std::size_t>(qp), threads);
}

struct DistributionCertificate {
  int n = 0, d = 2;
  Integer q, q_prime;
  RationalPoint x;
  std::string observable;
  double average = 0.0;
  Rational mean;
  double lhs = 0.0;
  Rational term_geometry;  // 14 d / n^2 ||phi||_0
  Rational term_period;    // 2 q^d / q' ||phi||_0
  Rational term_eps;       // 2 eps, eps = L sqrt(d) / q^e
  Rational budget;
  bool pass = false;
  bool vacuous = false;  // budget >= ||phi||_0 + |mean|, so any average passes
  std::string warning;
};

/// |avg_{i<q'} phi(h_{n,q} S_{1/q'}^i x) - mean| against the three-term
/// budget. diameter_exponent 1 uses diam <= sqrt(d)/q, d the stricter
/// sqrt(d)/q^d reading.
inline DistributionCertificate distribution_certificate(int n, const Integer& q,
                                                        const Integer& q_prime,
                                                        const RationalPoint& x,
                                                        const Observable& phi,
                                                        unsigned threads = 0,
                                                        unsigned diameter_exponent = 1,
                                                        KernelMethod method = KernelMethod::action_angle) {
  const int d = x.dim();
  if (phi.dim() != d) throw InvalidArgument("observable dimension mismatch");
  DistributionCertificate c;
  c.n = n;
  c.d = d;
  c.q = q;
  c.q_prime = q_prime;
  c.x = x;
  c.observable = phi.name();
  if (!(q > Integer(d) * n * n))
    c.warning = "q <= d n^2: orbit-good atoms are not guaranteed";
  const ConjugacyStep h(n, q, d, Mode::torus, make_kernel(n, method));
  c.mean = phi.mean();
  c.average = phi.is_constant() ? c.mean.get_d() : birkhoff_average(h, phi, q_prime, to_double(x), threads);
  c.lhs = std::abs(c.average - c.mean.get_d());
  const Rational sup = phi.sup_norm();
  c.term_geometry = make_rational(14L * d, long(n) * n) * sup;
  c.term_period = 2 * Rational(pow_of(q, static_cast<unsigned long>(d))) / Rational(q_prime) * sup;
  const Rational eps = phi.lipschitz() * sqrt_upper(Rational(d)) /
                       Rational(pow_of(q, diameter_exponent));
  c.term_eps = 2 * eps;
  c.budget = c.term_geometry + c.term_period + c.term_eps;
  c.pass = exact(c.lhs) < c.budget;
  c.vacuous = c.budget >= sup + abs_of(c.mean);
  return c;
}

/// Sampled Lipschitz estimate of phi o H: max of the Euclidean gradient
/// norm over the samples, times `safety`.
inline double lipschitz_estimate(const Observable& phi, const ConjugacyStack& H,
                                 const std::vector<Point>& samples, Mode mode, double fd_step,
                                 unsigned threads = 0, double safety = 2.0) {
  const double g = parallel_max(samples.size(), threads, [&](std::size_t s) {
    const Point& x = samples[s];
    double norm2 = 0.0;
    for (int i = 0; i < x.dim(); ++i) {
      Point a = x, b = x;
      a[i] += 0.5 * fd_step;
      b[i] -= 0.5 * fd_step;
      const double dv = (phi(H.apply(normalize(a, mode))) - phi(H.apply(normalize(b, mode)))) / fd_step;
      norm2 += dv * dv;
    }
    return std::sqrt(norm2);
  });
  return safety * g;
}

struct EquidistributionRow {
  int n = 0;
  std::string observable;
  std::size_t x_index = 0;
  double residual = 0.0;
  Rational target;  // 17 d / n^2 ||phi||_0
  bool pass = false;
};

struct ScheduleConstraint {
  int n = 0;
  std::string name;
  std::string lhs, rhs;
  bool pass = false;
};

struct StageEquidistribution {
  int n = 0;
  bool evaluated = false;
  std::string skipped_reason;
  std::vector<EquidistributionRow> rows;
  std::vector<ScheduleConstraint> constraints;
  double max_residual = 0.0;
};

/// Orbit averages of T_{n+1} over q_n' points from the sampled base points,
/// against 17 d / n^2 ||phi||_0, plus the schedule constraints
/// L_n sqrt(d) / q_n < 1/n^2 and q_{n+1}' > n^2 q_n.
inline StageEquidistribution stage_equidistribution(const StageBuild& build, std::size_t s,
                                                    const std::vector<Observable>& phis,
                                                    const std::vector<Point>& xs,
                                                    unsigned threads = 0) {
  if (s + 1 >= build.size()) throw InsufficientStages("stage equidistribution needs stage n+1");
  const auto& r = build.records()[s];
  const auto& next = build.records()[s + 1];
  StageEquidistribution out;
  out.n = r.n;
  const int d = r.d;
  const long n2 = long(r.n) * r.n;
  {
    ScheduleConstraint c;
    c.n = r.n;
    c.name = "q_{n+1}' > n^2 q_n";
    c.lhs = next.q_prime.get_str();
    c.rhs = Integer(n2 * r.q).get_str();
    c.pass = next.q_prime > n2 * r.q;
    out.constraints.push_back(c);
  }
  const bool can_eval = build.evaluable(s + 1) && r.q_prime <= Integer(1L << 24);
  if (!can_eval) {
    out.skipped_reason = "stage maps not evaluable at these scales";
    ScheduleConstraint c;
    c.n = r.n;
    c.name = "L_n sqrt(d) / q_n < 1/n^2";
    c.lhs = "not evaluated";
    c.rhs = to_string(make_rational(1, n2));
    c.pass = false;
    out.constraints.push_back(c);
    return out;
  }
  out.evaluated = true;
  const StageMap T_next = build.T(s + 1);
  const auto N = static_cast<std::size_t>(r.q_prime.get_si());
  const ConjugacyStack Hn = build.H(s);
  double L = 0.0;
  const double fd = 1e-7 / std::max(1.0, r.q.get_d());
  for (const auto& phi : phis) {
    L = std::max(L, lipschitz_estimate(phi, Hn, xs, r.mode, fd, threads));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      EquidistributionRow row;
      row.n = r.n;
      row.observable = phi.name();
      row.x_index = i;
      row.residual = std::abs(birkhoff_average(T_next, phi, N, xs[i], threads) - phi.mean().get_d());
      row.target = make_rational(17L * d, n2) * phi.sup_norm();
      row.pass = exact(row.residual) < row.target;
      out.max_residual = std::max(out.max_residual, row.residual);
      out.rows.push_back(std::move(row));
    }
  }
  ScheduleConstraint c;
  c.n = r.n;
  c.name = "L_n sqrt(d) / q_n < 1/n^2";
  const Rational lhs = exact(L) * sqrt_upper(Rational(d)) / Rational(r.q);
  c.lhs = std::to_string(lhs.get_d());
  c.rhs = to_string(make_rational(1, n2));
  c.pass = lhs < make_rational(1, n2);
  out.constraints.push_back(c);
  return out;
}

struct UERow {
  int n = 0;
  bool evaluated = false;
  double max_residual = 0.0;
  double gap_empirical = 0.0;  // d^{(q_n)}(T_n, T_{n+1}) on samples
  Rational gap_bound;          // S_1(H_{n+1}) q_n |alpha_n - alpha_{n+1}|
  bool gap_within_bound = false;
  std::size_t powers = 0;
  std::vector<ScheduleConstraint> constraints;
};

struct UEReport {
  std::vector<UERow> rows;
  bool residuals_decreasing = false;
  bool gaps_decreasing = false;
  std::string label = "finite-stage evidence, not a proof of unique ergodicity";
};

inline UEReport ue_conditions_report(const StageBuild& build, const std::vector<Observable>& phis,
                                     const std::vector<Point>& xs, unsigned threads = 0,
                                     std::size_t power_cap = 4096) {
  if (build.size() < 2) throw InsufficientStages("the evidence report needs at least 2 stages");
  UEReport rep;
  for (std::size_t s = 0; s + 1 < build.size(); ++s) {
    const auto& r = build.records()[s];
    const auto& next = build.records()[s + 1];
    UERow row;
    row.n = r.n;
    const auto eq = stage_equidistribution(build, s, phis, xs, threads);
    row.constraints = eq.constraints;
    row.evaluated = eq.evaluated;
    row.max_residual = eq.max_residual;
    row.gap_bound = r.H_seminorms.size() > 1
                        ? Rational(r.H_seminorms[1] * Rational(r.q) *
                                   abs_of(Rational(r.alpha_n - next.alpha_n)))
                        : Rational(0);
    if (eq.evaluated) {
      const long powers = r.q > Integer(static_cast<long>(power_cap)) ? static_cast<long>(power_cap)
                                                                      : r.q.get_si();
      row.powers = static_cast<std::size_t>(powers);
      row.gap_empirical = dqn_distance(build.T(s), build.T(s + 1), powers, xs, r.mode, threads);
      // evaluation roundoff of the stage maps, matching the commutation tolerance
      row.gap_within_bound = exact(row.gap_empirical) <= row.gap_bound + exact(1e-9);
    }
    rep.rows.push_back(std::move(row));
  }
  rep.residuals_decreasing = rep.gaps_decreasing = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    rep.residuals_decreasing =
        rep.residuals_decreasing && rep.rows[i].max_residual <= rep.rows[i - 1].max_residual;
    rep.gaps_decreasing =
        rep.gaps_decreasing && rep.rows[i].gap_empirical <= rep.rows[i - 1].gap_empirical;
  }
  return rep;
}

}  // namespace akc
