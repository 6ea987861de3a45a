#pragma once

// Invariant suites over a built store. Each suite returns a Report; the
// sample counts are parameters so that the acceptance runner can reuse the
// same checks at full scale.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "akc/conjugacy.hpp"
#include "akc/ergodic.hpp"
#include "akc/jacobian.hpp"
#include "akc/kernel.hpp"
#include "akc/lab/report.hpp"
#include "akc/lab/store.hpp"
#include "akc/norms.hpp"
#include "akc/parallel.hpp"
#include "akc/partition.hpp"
#include "akc/schedule.hpp"

namespace akc::lab {

struct SampleCounts {
  std::size_t cheap = 1000;
  std::size_t flow = 200;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

inline SampleCounts counts_of(const RunConfig& c) {
  return {c.samples, c.flow_samples, c.schedule.seed, c.schedule.threads};
}

// ---------------------------------------------------------------------------
// sampling helpers

inline std::vector<Vec2> region_samples(const SmoothKernel& k, Region r, std::size_t count,
                                        std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec2> out;
  std::size_t tries = 0;
  while (out.size() < count) {
    if (++tries > 10000 * (count + 10)) throw InvalidArgument("region too thin to sample");
    const Vec2 p{rng.uniform(), rng.uniform()};
    if (k.region(p) == r) out.push_back(p);
  }
  return out;
}

/// Point on the ray from the centre at angle theta whose normalized gauge is s.
inline Vec2 point_at_gauge(const SmoothingProfile& prof, double theta, double s) {
  const double c = std::cos(theta), sn = std::sin(theta);
  double lo = 0.0, hi = 0.5 / std::max(std::abs(c), std::abs(sn));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (prof.normalized_gauge(mid * c, mid * sn) < s ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  return {0.5 + t * c, 0.5 + t * sn};
}

inline std::vector<Point> uniform_points(int d, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point> out;
  for (std::size_t i = 0; i < count; ++i) {
    Point p(d);
    for (int c = 0; c < d; ++c) p[c] = rng.uniform();
    out.push_back(p);
  }
  return out;
}

inline std::vector<RationalPoint> rational_points(int d, std::size_t count, std::uint64_t seed,
                                                  long den = 1L << 20) {
  Rng rng(seed);
  std::vector<RationalPoint> out;
  for (std::size_t i = 0; i < count; ++i) {
    RationalPoint p(d);
    for (int c = 0; c < d; ++c)
      p[c] = make_rational(static_cast<long>(rng.below(static_cast<std::uint64_t>(den))), den);
    out.push_back(p);
  }
  return out;
}

inline double vdist(Vec2 a, Vec2 b) { return std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1])); }

inline Vec2 rigid(Vec2 p) { return {p[1], 1.0 - p[0]}; }

inline std::string tag(const std::string& base, int n) { return base + "[n=" + std::to_string(n) + "]"; }

// ---------------------------------------------------------------------------
// kernel

struct KernelSuiteOptions {
  std::size_t inner = 1000, collar = 1000, band = 200;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  unsigned step_divisor = 256;
};

inline Report kernel_checks(int n, const KernelSuiteOptions& o) {
  Report rep("kernel");
  const auto prof = SmoothingProfile::for_stage(n);
  IntegratorParams ip;
  ip.step_divisor = o.step_divisor;
  const SmoothKernel flow(prof, KernelMethod::flow, ip);
  const SmoothKernel closed(prof, KernelMethod::action_angle);

  const auto inner = region_samples(flow, Region::inner, o.inner, o.seed);
  const auto collar = region_samples(flow, Region::collar, o.collar, o.seed + 1);
  const auto band = region_samples(flow, Region::band, o.band, o.seed + 2);
  const auto th = o.threads;

  rep.bound(tag("kernel.rigid-inner", n), "kernel.inner-quarter-turn",
            parallel_max(inner.size(), th, [&](std::size_t i) {
              return vdist(flow.apply(inner[i]), rigid(inner[i]));
            }),
            1e-12, std::to_string(inner.size()) + " samples");
  rep.bound(tag("kernel.identity-collar", n), "kernel.collar-identity",
            parallel_max(collar.size(), th, [&](std::size_t i) {
              return vdist(flow.apply(collar[i]), collar[i]);
            }),
            1e-12, std::to_string(collar.size()) + " samples");

  std::vector<Vec2> fwd(band.size());
  for_chunks(band.size(), th, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) fwd[i] = flow.apply(band[i]);
  });
  rep.bound(tag("kernel.round-trip", n), "kernel.inverse",
            parallel_max(band.size(), th, [&](std::size_t i) { return vdist(flow.inverse(fwd[i]), band[i]); }),
            1e-9);
  rep.bound(tag("kernel.jacobian-det", n), "kernel.area-preserving",
            parallel_max(band.size(), th,
                         [&](std::size_t i) { return std::abs(det2(kernel_jacobian(flow, band[i])) - 1.0); }),
            1e-6, "tangent map through the integrator, step divisor " + std::to_string(o.step_divisor));
  {
    const std::size_t m = std::min<std::size_t>(band.size(), 200);
    const double h = 1e-3 * (prof.r_out - prof.r_in);
    MapFn f = [&](const Point& x) {
      const Vec2 w = flow.apply({x[0], x[1]});
      Point out(2);
      out[0] = w[0];
      out[1] = w[1];
      return out;
    };
    rep.bound(tag("kernel.jacobian-fd", n), "kernel.area-preserving",
              parallel_max(m, th,
                           [&](std::size_t i) {
                             Point x(2);
                             x[0] = band[i][0];
                             x[1] = band[i][1];
                             return std::abs(jacobian_det(f, x, h, Mode::torus, true) - 1.0);
                           }),
              1e-4, "Richardson central differences, h = 1e-3 band widths");
  }
  rep.bound(tag("kernel.gauge-drift", n), "kernel.level-sets-invariant",
            parallel_max(band.size(), th,
                         [&](std::size_t i) {
                           return std::abs(closed.normalized_gauge(closed.apply(band[i])) -
                                           closed.normalized_gauge(band[i]));
                         }),
            1e-8, "normalized gauge m / c_out, closed-form route");
  rep.info(tag("kernel.gauge-drift-flow", n), "kernel.level-sets-invariant",
           fmt(parallel_max(band.size(), th,
                            [&](std::size_t i) {
                              return std::abs(flow.normalized_gauge(fwd[i]) - flow.normalized_gauge(band[i]));
                            })),
           "", "integrator route, O(step^2)");
  rep.bound(tag("kernel.flow-vs-closed-form", n), "kernel.band-routes-agree",
            parallel_max(band.size(), th, [&](std::size_t i) { return vdist(fwd[i], closed.apply(band[i])); }),
            1e-5);
  rep.bound(tag("kernel.period-table", n), "kernel.period-function",
            flow.period_table()->error_bound(), 1e-10);
  {
    double inner_seam = 0.0, outer_seam = 0.0;
    for (int i = 0; i < 64; ++i) {
      const double theta = 2.0 * M_PI * (i + 0.5) / 64.0;
      const Vec2 a = point_at_gauge(prof, theta, prof.s_in + 1e-9 * (1.0 - prof.s_in));
      const Vec2 b = point_at_gauge(prof, theta, 1.0 - 1e-9 * (1.0 - prof.s_in));
      inner_seam = std::max(inner_seam, vdist(flow.apply(a), rigid(a)));
      outer_seam = std::max(outer_seam, vdist(flow.apply(b), b));
    }
    rep.bound(tag("kernel.seam-inner", n), "kernel.smooth-seams", inner_seam, 1e-6);
    rep.bound(tag("kernel.seam-outer", n), "kernel.smooth-seams", outer_seam, 1e-6);
  }
  {
    const long q = 3;
    const auto pts = rational_points(2, o.inner, o.seed + 3);
    std::size_t det_bad = 0, comm_bad = 0, inv_bad = 0;
    const Rational h = make_rational(1, 1L << 30);
    const Rational shift = make_rational(1, q);
    for (const auto& p : pts) {
      auto f = [&](const RationalPoint& x) {
        const auto w = heuristic_phi<Rational>(q, {x[0], x[1]});
        RationalPoint y(2);
        y[0] = w[0];
        y[1] = w[1];
        return y;
      };
      if (jacobian_det_exact(f, p, h) != 1) ++det_bad;
      const auto w = heuristic_phi<Rational>(q, {p[0], p[1]});
      if (heuristic_phi_inverse<Rational>(q, w) != std::array<Rational, 2>{p[0], p[1]}) ++inv_bad;
      const auto a = heuristic_phi<Rational>(q, {p[0], frac(Rational(p[1] + shift))});
      if (a[0] != w[0] || a[1] != frac(Rational(w[1] + shift))) ++comm_bad;
    }
    rep.truth(tag("kernel.heuristic-det", n), "heuristic.area-preserving", det_bad == 0,
              std::to_string(det_bad) + " of " + std::to_string(pts.size()), "0");
    rep.truth(tag("kernel.heuristic-inverse", n), "heuristic.inverse", inv_bad == 0,
              std::to_string(inv_bad) + " of " + std::to_string(pts.size()), "0");
    rep.truth(tag("kernel.heuristic-commutes", n), "heuristic.commutes-with-cell-shift", comm_bad == 0,
              std::to_string(comm_bad) + " of " + std::to_string(pts.size()), "0");
  }
  {
    const long q = 3;
    const double lo = 1.0 / (double(n) * n), hi = 1.0 - lo;
    Rng rng(o.seed + 4);
    double worst = 0.0;
    for (std::size_t i = 0; i < o.inner; ++i) {
      const double x = rng.uniform(lo, hi), cy = rng.uniform(lo, hi);
      const long j = static_cast<long>(rng.below(q));
      const Vec2 p{x, (double(j) + cy) / double(q)};
      const auto w = heuristic_phi<double>(q, p);
      worst = std::max(worst, vdist(closed.scaled_apply(q, p), w));
    }
    rep.bound(tag("kernel.agrees-with-heuristic", n), "kernel.agreement-on-core", worst, 1e-12,
              "cells of q = 3, core square");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// sets

inline Report sets_checks_for(int n, const Integer& q, int d, Mode mode, const SampleCounts& c,
                              const ConjugacyStep* step = nullptr) {
  Report rep("sets");
  const std::string sfx = "[n=" + std::to_string(n) + ",q=" + short_int(q) + "]";
  const Integer strip_count = [&] {
    Integer s = 0;
    for (int j = 1; j < d; ++j) s += pow_of(q, static_cast<unsigned long>(j));
    return s;
  }();
  if (strip_count > 2000000) {
    rep.skip("sets.E-measure" + sfx, "E.measure-lower-bound", "too many strips to enumerate");
  } else {
    const Rational m = E_measure(n, q, d, mode);
    const Rational bound = 1 - make_rational(4L * (d - 1), long(n) * n);
    rep.truth("sets.E-measure" + sfx, "E.measure-lower-bound", m >= bound, fmt(m), fmt(bound));
  }
  const Integer atoms = pow_of(q, static_cast<unsigned long>(d));
  if (atoms > 20000) {
    rep.skip("sets.diameter" + sfx, "E.image-diameter", "more than 20000 atoms");
  } else {
    const AgreementSet E(n, q, d, mode);
    const Rational tol = Rational(d) / Rational(q * q);
    Rational worst = 0;
    long empty = 0;
    for (Integer i = 0; i < atoms; ++i) {
      const auto b = image_diameter_bound(E, i);
      if (!b) {
        ++empty;
        continue;
      }
      worst = std::max(worst, *b);
    }
    rep.truth("sets.diameter" + sfx, "E.image-diameter", worst <= tol,
              "diam^2 q^2 = " + fmt(Rational(worst * q * q)), std::to_string(d),
              std::to_string(empty) + " atoms empty after removing the strips");
  }
  if (step && step->evaluable()) {
    const AgreementSet E(n, q, d, mode);
    const auto pts = uniform_points(d, c.cheap * 4, c.seed + 11);
    std::vector<Point> in;
    for (const auto& p : pts)
      if (E.contains(p)) in.push_back(p);
    const std::int64_t qs = step->q_small();
    const double worst = parallel_max(in.size(), c.threads, [&](std::size_t i) {
      return max_dist(step->apply(in[i]), to_double(heuristic_h_apply(qs, mode, to_rational(in[i]))), mode);
    });
    rep.bound("sets.agreement" + sfx, "E.smooth-equals-heuristic", worst, 1e-9,
              std::to_string(in.size()) + " points of E");
  }
  return rep;
}

struct JSummary {
  Rational measure;
  std::size_t element1_violations = 0, element1_checked = 0;
  std::size_t element2_violations = 0, element2_checked = 0;
};

/// Measure bound plus both atom properties for J at base point x.
inline JSummary J_checks(int n, const Integer& q, int d, const RationalPoint& x, std::size_t thetas,
                         std::uint64_t seed) {
  const auto g = J_construct(n, q, d, x);
  const AgreementSet E(n, q, d, Mode::torus);
  const Rational frac2 = 1 - make_rational(2L * (d - 1), long(n) * n);
  JSummary s;
  s.measure = g.measure;
  Rng rng(seed);
  const Integer total = g.included.total;
  for (const auto& [a, b] : g.included.ranges) {
    for (Integer i = a; i < b; ++i) {
      ++s.element2_checked;
      if (E.atom_fraction(i) < frac2) ++s.element2_violations;
    }
  }
  const Integer count = g.included.count();
  if (count == 0) return s;
  for (std::size_t k = 0; k < thetas; ++k) {
    // atom chosen uniformly among the included ones, t uniform inside it
    Integer pick = Integer(static_cast<unsigned long>(rng.below(std::uint64_t{1} << 62))) % count;
    Integer atom = -1;
    for (const auto& [a, b] : g.included.ranges) {
      const Integer len = b - a;
      if (pick < len) {
        atom = a + pick;
        break;
      }
      pick -= len;
    }
    const Rational off = make_rational(static_cast<long>(rng.below(1u << 30)), 1L << 30);
    const Rational t = (Rational(atom) + off) / Rational(total);
    RationalPoint y = x;
    y.last() = frac(t);
    ++s.element1_checked;
    if (!E.contains(y)) ++s.element1_violations;
  }
  return s;
}

inline Report sets_suite(const Store& st, const SampleCounts& c) {
  Report rep("sets");
  const auto build = st.build();
  for (std::size_t s = 0; s < build.size(); ++s) {
    const auto& r = build.records()[s];
    rep.merge(sets_checks_for(r.n, r.q, r.d, r.mode, c, &build.full_stack().steps()[s]));
  }
  const auto& r0 = build.records().front();
  if (r0.mode == Mode::torus) {
    const int n = r0.n, d = r0.d;
    const Integer q = Integer(d) * n * n + 14;
    if (pow_of(q, static_cast<unsigned long>(d)) > Integer(50000000)) {
      rep.skip("sets.J", "J.measure-lower-bound", "q^d too large");
    } else {
      const auto xs = rational_points(d, 3, c.seed + 21, 1000);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto s = J_checks(n, q, d, xs[i], 200, c.seed + 22 + i);
        const Rational bound = 1 - make_rational(4L * d, long(n) * n);
        const std::string sfx = "[n=" + std::to_string(n) + ",q=" + q.get_str() + ",x" + std::to_string(i) + "]";
        rep.truth("sets.J-measure" + sfx, "J.measure-lower-bound", s.measure > bound, fmt(s.measure), fmt(bound));
        rep.truth("sets.J-orbit-in-E" + sfx, "J.included-atoms-avoid-strips", s.element1_violations == 0,
                  std::to_string(s.element1_violations) + " of " + std::to_string(s.element1_checked), "0");
        rep.truth("sets.J-atom-fraction" + sfx, "J.included-atoms-mostly-in-E", s.element2_violations == 0,
                  std::to_string(s.element2_violations) + " of " + std::to_string(s.element2_checked), "0");
      }
    }
  }
  for (std::size_t s = 0; s < build.size(); ++s) {
    const auto& r = build.records()[s];
    if (r.mode == Mode::torus && !(r.q > Integer(r.d) * r.n * r.n))
      rep.skip("sets.J[n=" + std::to_string(r.n) + ",q=" + short_int(r.q) + "]", "J.measure-lower-bound",
               "stage q <= d n^2, orbit-good atoms not guaranteed");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// conjugacy

inline Point shift_last(Point p, double a) { return base_rotation(a, std::move(p)); }

inline Report conjugacy_suite(const Store& st, const SampleCounts& c) {
  Report rep("conjugacy");
  const auto build = st.build();
  const auto& steps = build.full_stack().steps();
  const auto th = c.threads;
  for (std::size_t s = 0; s < build.size(); ++s) {
    const auto& r = build.records()[s];
    const auto& h = steps[s];
    const int n = r.n, d = r.d;
    const Mode mode = r.mode;
    if (!h.evaluable()) {
      rep.skip(tag("conjugacy.step", n), "conjugacy.commutation", "q not evaluable in double precision");
      continue;
    }
    const std::int64_t q = h.q_small();
    const auto xs = uniform_points(d, c.cheap, c.seed + 31 + s);
    const double sq = 1.0 / double(q);
    rep.bound(tag("conjugacy.commutes-with-cell-shift", n), "conjugacy.commutation",
              parallel_max(xs.size(), th, [&](std::size_t i) {
                return max_dist(h.apply(shift_last(xs[i], sq)), shift_last(h.apply(xs[i]), sq), mode);
              }),
              1e-9);
    {
      const auto rs = rational_points(d, c.cheap, c.seed + 41 + s);
      const Rational rq = make_rational(1, q);
      std::size_t bad = 0;
      for (const auto& x : rs)
        if (h.heuristic_apply(base_rotation(rq, x)) != base_rotation(rq, h.heuristic_apply(x))) ++bad;
      rep.truth(tag("conjugacy.heuristic-commutes", n), "conjugacy.commutation", bad == 0,
                std::to_string(bad) + " of " + std::to_string(rs.size()), "0");
    }
    {
      std::size_t bad = 0;
      for (const auto& x : xs) {
        const Point y = h.apply(x);
        if (std::floor(x.last() * double(q)) != std::floor(y.last() * double(q))) ++bad;
      }
      rep.truth(tag("conjugacy.slab-preserved", n), "conjugacy.slab-preservation", bad == 0,
                std::to_string(bad) + " of " + std::to_string(xs.size()), "0");
    }
    if (s > 0) {
      const auto& qp = build.records()[s - 1].q;
      std::size_t bad = 0, checked = 0;
      if (pow_of(qp, static_cast<unsigned long>(d)) <= Integer(1L << 52)) {
        const std::int64_t qpi = qp.get_si();
        for (const auto& x : xs) {
          ++checked;
          if (atom_of(qpi, d, x.last()) != atom_of(qpi, d, h.apply(x).last())) ++bad;
        }
        rep.truth(tag("conjugacy.coarse-atom-preserved", n), "conjugacy.refines-previous-partition", bad == 0,
                  std::to_string(bad) + " of " + std::to_string(checked), "0");
      }
    }
    const auto Hn1 = build.H_next(s);
    const double a = r.alpha_n.get_d();
    rep.bound(tag("conjugacy.commutes-with-alpha", n), "conjugacy.commutation",
              parallel_max(xs.size(), th, [&](std::size_t i) {
                return max_dist(h.apply(shift_last(xs[i], a)), shift_last(h.apply(xs[i]), a), mode);
              }),
              1e-8, "h_{n,q_n} and S_{alpha_n}");
    rep.bound(tag("conjugacy.round-trip", n), "conjugacy.inverse",
              parallel_max(xs.size(), th,
                           [&](std::size_t i) { return max_dist(Hn1.inverse(Hn1.apply(xs[i])), xs[i], mode); }),
              1e-8);
    const StageMap T = build.T(s);
    const Integer period = T.period();
    if (period <= 64) {
      const long qp = period.get_si();
      rep.bound(tag("conjugacy.periodic", n), "stage-map.periodic",
                parallel_max(xs.size(), th,
                             [&](std::size_t i) { return max_dist(T.apply_iterated(xs[i], qp), xs[i], mode); }),
                1e-8, "T^{q'} x = x by iteration");
    }
    rep.bound(tag("conjugacy.power-shortcut", n), "stage-map.powers",
              parallel_max(std::min<std::size_t>(xs.size(), 200), th,
                           [&](std::size_t i) {
                             double m = 0.0;
                             for (long p = 1; p <= 7; ++p)
                               m = std::max(m, max_dist(T.apply(xs[i], p), T.apply_iterated(xs[i], p), mode));
                             return m;
                           }),
              1e-8);
    rep.bound(tag("conjugacy.factor-intertwining", n), "factor.intertwines-rotation",
              parallel_max(xs.size(), th,
                           [&](std::size_t i) {
                             const double k0 = K_project(Hn1, xs[i]);
                             const double k1 = K_project(Hn1, T.apply(xs[i]));
                             return circle_dist(wrap01(k1 - k0), wrap01(a));
                           }),
              1e-8);
    if (s > 0) {
      const auto& qp = build.records()[s - 1].q;
      if (pow_of(qp, static_cast<unsigned long>(d)) <= Integer(1L << 52)) {
        const std::int64_t qpi = qp.get_si();
        const auto Hn = build.H(s);
        std::size_t bad = 0;
        for (const auto& x : xs)
          if (atom_of(qpi, d, K_project(Hn1, x)) != atom_of(qpi, d, K_project(Hn, x))) ++bad;
        rep.truth(tag("conjugacy.factor-refines", n), "factor.consistent-across-stages", bad == 0,
                  std::to_string(bad) + " of " + std::to_string(xs.size()), "0");
      }
    }
    if (pow_of(r.q, static_cast<unsigned long>(d)) <= Integer(1L << 20)) {
      // pairs of points of F_n coded by the same atom of the pulled-back partition
      std::map<std::int64_t, std::vector<Point>> by_atom;
      const auto ys = uniform_points(d, c.cheap * 4, c.seed + 51 + s);
      const AgreementSet E(n, r.q, d, mode);
      for (const auto& x : ys) {
        const Point y = Hn1.inverse(x);
        if (E.contains(y)) by_atom[atom_of(q, d, y.last())].push_back(x);
      }
      double worst = 0.0;
      std::size_t pairs = 0;
      for (const auto& [atom, pts] : by_atom)
        for (std::size_t i = 0; i < pts.size(); ++i)
          for (std::size_t j = i + 1; j < pts.size(); ++j) {
            ++pairs;
            worst = std::max(worst, max_dist(pts[i], pts[j], mode));
          }
      const double Hn_lip = s == 0 ? 1.0 : build.records()[s - 1].H_seminorms[1].get_d();
      const double bound = Hn_lip * std::sqrt(double(d)) / double(q);
      rep.bound(tag("conjugacy.atom-diameter", n), "partition.atoms-shrink", worst, bound,
                std::to_string(pairs) + " pairs; epsilon_n = " + fmt(r.epsilon));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// norms

inline Report norms_suite(const Store& st, const SampleCounts& c) {
  Report rep("norms");
  const auto build = st.build();
  const auto& r0 = build.records().front();
  const auto th = c.threads;
  {
    const auto kernel = make_kernel(r0.n, KernelMethod::action_angle);
    const auto g = growth_check(*kernel, r0.d, 1, {4, 8, 16}, r0.mode, 256, c.seed + 61, th);
    std::string ratios;
    for (const auto& row : g.rows) ratios += (ratios.empty() ? "" : ",") + fmt(row.ratio);
    rep.truth(tag("norms.growth-k1", r0.n), "norms.step-growth", g.pass, ratios,
              "last <= 1.1 median = " + fmt(1.1 * g.median_ratio));
  }
  {
    const auto xs = uniform_points(r0.d, 64, c.seed + 62);
    Rng rng(c.seed + 63);
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const Rational al = make_rational(static_cast<long>(rng.below(1u << 20)), 1L << 20);
      const Rational be = make_rational(static_cast<long>(rng.below(1u << 20)), 1L << 20);
      const double gap = circle_dist(al.get_d(), be.get_d());
      if (gap == 0.0) continue;
      MapFn f = [&](const Point& x) { return base_rotation(al.get_d(), x); };
      MapFn g = [&](const Point& x) { return base_rotation(be.get_d(), x); };
      const double emp = d0_distance(f, g, xs, r0.mode, th);
      const double bound = conjugacy_drift_bound(Rational(1), 0, exact(gap)).get_d();
      worst = std::max(worst, std::abs(emp / bound - 1.0));
    }
    rep.bound("norms.drift-identity-tight", "norms.conjugacy-drift", worst, 0.01, "relative slack at k = 0");
  }
  for (std::size_t s = 0; s < build.size(); ++s) {
    const auto& r = build.records()[s];
    const auto& step = build.full_stack().steps()[s];
    if (!step.evaluable() || r.q > 4096) {
      rep.skip(tag("norms.step", r.n), "norms.step-certified", "q beyond the sampled range");
      continue;
    }
    const std::int64_t q = step.q_small();
    KernelConstants kc;
    kc.n = r.n;
    kc.K = r.kernel_constants;
    const auto polys = step_seminorms(kc, r.d, r.mode);
    const auto fw = evaluate(polys.forward, Rational(r.q));
    const auto iv = evaluate(polys.inverse, Rational(r.q));
    MapFn f = [&](const Point& x) { return step.apply(x); };
    const auto pts = cell_samples(r.d, q, r.mode, 256, c.seed + 64);
    const double h = 1e-4 / double(q);
    const auto est = norm_estimate(f, 1, pts, h, r.mode, th);
    rep.bound(tag("norms.step-S1-certified", r.n), "norms.step-certified", est.stats.column[1], fw[1].get_d(),
              "empirical vs certified polynomial at q = " + r.q.get_str());
    const Rational M = std::max(max_seminorm(fw), max_seminorm(iv));
    Rng rng(c.seed + 65 + s);
    for (unsigned k = 0; k <= 1; ++k) {
      double worst_ratio = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double al = rng.uniform(), be = wrap01(al + rng.uniform(-1e-3, 1e-3));
        MapFn u = [&](const Point& x) { return step.apply(base_rotation(al, step.inverse(x))); };
        MapFn v = [&](const Point& x) { return step.apply(base_rotation(be, step.inverse(x))); };
        MapFn ui = [&](const Point& x) { return step.apply(base_rotation(-al, step.inverse(x))); };
        MapFn vi = [&](const Point& x) { return step.apply(base_rotation(-be, step.inverse(x))); };
        const auto xs = uniform_points(r.d, 64, c.seed + 66 + i);
        const double emp = dk_distance(u, v, ui, vi, static_cast<int>(k), xs, h, r.mode, th);
        const Rational bound = conjugacy_drift_bound(M, k, exact(circle_dist(al, be)));
        worst_ratio = std::max(worst_ratio, emp / bound.get_d());
      }
      rep.bound(tag("norms.drift-k" + std::to_string(k), r.n), "norms.conjugacy-drift", worst_ratio, 1.0,
                "empirical / certified");
    }
  }
  for (const auto& r : build.records()) {
    const std::string name = tag("norms.stage-gap", r.n);
    if (r.gap_enforced)
      rep.truth(name, "schedule.stage-gap", r.gap_ok(), fmt(r.gap_bound), fmt(r.epsilon));
    else
      rep.info(name, "schedule.stage-gap", fmt(r.gap_bound), fmt(r.epsilon), "forced profile: reported, not enforced");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// distribution

inline Report distribution_suite(const Store& st, const SampleCounts& c) {
  Report rep("distribution");
  const auto build = st.build();
  const int d = build.records().front().d;
  const auto th = c.threads;
  const auto phis = observable_family(d, 3);
  if (build.records().front().mode == Mode::torus) {
    const int n = 12;
    const Integer q(long(d) * n * n + 12);
    const Integer qp = pow_of(q, static_cast<unsigned long>(d)) * 10;
    if (qp <= Integer(20000000)) {
      const auto xs = rational_points(d, 2, c.seed + 71, 1000);
      for (const auto& phi : phis)
        for (std::size_t i = 0; i < xs.size(); ++i) {
          const auto cert = distribution_certificate(n, q, qp, xs[i], phi, th);
          Check& ch = rep.truth("distribution.certificate[" + phi.name() + ",x" + std::to_string(i) + "]",
                                "distribution.orbit-average-budget", cert.pass, fmt(cert.lhs), fmt(cert.budget));
          ch.tolerance = "budget";
          ch.note = "n = 12, q = " + q.get_str() + ", q' = " + qp.get_str() + (cert.vacuous ? ", vacuous" : "");
        }
    } else {
      rep.skip("distribution.certificate", "distribution.orbit-average-budget", "orbit too long for d = " + std::to_string(d));
    }
  }
  {
    const auto phi = Observable::constant(d, make_rational(3, 7));
    const Point x = uniform_points(d, 1, c.seed + 72).front();
    const auto& step = build.full_stack().steps().front();
    if (step.evaluable()) {
      const double avg = birkhoff_average(step, phi, Integer(1000), x, th);
      rep.bound("distribution.constant-observable", "birkhoff.constant", std::abs(avg - 3.0 / 7.0), 1e-15);
      const double a0 = birkhoff_average(step, phis.front(), Integer(997), x, th);
      const double a1 = birkhoff_average(step, phis.front(), Integer(997), base_rotation(7.0 / 997.0, x), th);
      rep.bound("distribution.start-invariance", "birkhoff.cyclic-invariance", std::abs(a0 - a1), 1e-12,
                "full period q' = 997, start shifted 7 steps");
    }
  }
  if (build.size() >= 2) {
    const auto xs = uniform_points(d, 3, c.seed + 73);
    const auto ue = ue_conditions_report(build, phis, xs, th);
    const bool faithful = st.config.schedule.profile == Profile::faithful;
    for (const auto& row : ue.rows) {
      if (row.evaluated) {
        rep.truth(tag("distribution.stage-gap-within-bound", row.n), "completion.stage-distance",
                  row.gap_within_bound, fmt(row.gap_empirical), fmt(row.gap_bound));
        rep.info(tag("distribution.max-residual", row.n), "assembly.residual", fmt(row.max_residual));
      } else {
        rep.skip(tag("distribution.stage-gap-within-bound", row.n), "completion.stage-distance",
                 "stage maps not evaluable");
      }
      for (const auto& k : row.constraints) {
        const std::string name = tag("distribution.constraint " + k.name, row.n);
        if (faithful)
          rep.truth(name, "assembly.schedule-constraint", k.pass, k.lhs, k.rhs);
        else
          rep.info(name, "assembly.schedule-constraint", k.lhs, k.rhs,
                   std::string(k.pass ? "holds" : "violated") + " (forced schedule)");
      }
    }
    rep.info("distribution.label", "assembly.evidence", ue.label);
  } else {
    rep.skip("distribution.ue-report", "assembly.evidence", "needs at least 2 stages");
  }
  return rep;
}

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"kernel", "sets", "conjugacy", "norms", "distribution", "all"};
  return names;
}

inline Report run_verify(const Store& st, const std::string& suite) {
  const auto c = counts_of(st.config);
  auto kernel = [&] {
    KernelSuiteOptions o;
    o.inner = o.collar = c.cheap;
    o.band = c.flow;
    o.seed = c.seed;
    o.threads = c.threads;
    o.step_divisor = st.config.step_divisor;
    return kernel_checks(st.records.front().n, o);
  };
  if (suite == "kernel") return kernel();
  if (suite == "sets") return sets_suite(st, c);
  if (suite == "conjugacy") return conjugacy_suite(st, c);
  if (suite == "norms") return norms_suite(st, c);
  if (suite == "distribution") return distribution_suite(st, c);
  if (suite == "all") {
    Report all("all");
    all.merge(kernel());
    all.merge(sets_suite(st, c));
    all.merge(conjugacy_suite(st, c));
    all.merge(norms_suite(st, c));
    all.merge(distribution_suite(st, c));
    return all;
  }
  throw InvalidArgument("unknown suite '" + suite + "'");
}

}  // namespace akc::lab
