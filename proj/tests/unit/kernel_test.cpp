#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "akc/jacobian.hpp"
#include "akc/kernel.hpp"
#include "akc/lab/verify.hpp"
#include "akc/parallel.hpp"

using namespace akc;
using akc::lab::point_at_gauge;
using akc::lab::region_samples;

namespace {

double vd(Vec2 a, Vec2 b) { return std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1])); }

const SmoothKernel& closed5() {
  static const SmoothKernel k(SmoothingProfile::for_stage(5), KernelMethod::action_angle);
  return k;
}
const SmoothKernel& flow5() {
  static const SmoothKernel k(SmoothingProfile::for_stage(5), KernelMethod::flow);
  return k;
}

std::array<Rational, 2> rq(const char* x, const char* y) { return {parse_rational(x), parse_rational(y)}; }

// Classical RK4 on the unit level of m = u^{2k} + v^{2k}, field (dm/dv, -dm/du).
Vec2 rk4_unit_level(unsigned long k, Vec2 p, double time, long steps) {
  const double tk = 2.0 * double(k);
  auto f = [&](Vec2 z) -> Vec2 {
    return {tk * std::pow(z[1], double(2 * k - 1)), -tk * std::pow(z[0], double(2 * k - 1))};
  };
  const double h = time / double(steps);
  for (long i = 0; i < steps; ++i) {
    const Vec2 a = f(p);
    const Vec2 b = f({p[0] + 0.5 * h * a[0], p[1] + 0.5 * h * a[1]});
    const Vec2 c = f({p[0] + 0.5 * h * b[0], p[1] + 0.5 * h * b[1]});
    const Vec2 d = f({p[0] + h * c[0], p[1] + h * c[1]});
    p[0] += h / 6.0 * (a[0] + 2 * b[0] + 2 * c[0] + d[0]);
    p[1] += h / 6.0 * (a[1] + 2 * b[1] + 2 * c[1] + d[1]);
  }
  return p;
}

}  // namespace

TEST_CASE("gauge vanishes at the centre and is quarter-turn symmetric", "[kernel]") {
  const auto& k = closed5();
  const auto e = 2 * k.profile().k;
  CHECK(k.gauge({0.5, 0.5}) == 0.0);
  for (double t : {0.05, 0.2, 0.4}) {
    CHECK(k.gauge({0.5 + t, 0.5}) == Catch::Approx(std::pow(t, double(e))).epsilon(1e-12));
    CHECK(k.gauge({0.5 + t, 0.5}) == k.gauge({0.5, 0.5 + t}));
  }
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double u = rng.uniform(-0.5, 0.5), v = rng.uniform(-0.5, 0.5);
    CHECK(k.gauge({0.5 + u, 0.5 + v}) == k.gauge({0.5 - v, 0.5 + u}));
  }
}

TEST_CASE("stage profile fits the inner square inside the rigid region", "[kernel]") {
  const auto p = SmoothingProfile::for_stage(5);
  CHECK(p.k == 25);
  // 2 (0.46)^50 / (0.5)^50 = 2 (0.92)^50
  CHECK(2.0 * std::pow(0.92, 50) == Catch::Approx(0.0309).margin(1e-3));
  CHECK(p.c_in() < p.c_out());
  CHECK(p.c_out() < pow_of(make_rational(1, 2), 50));
  CHECK(p.c_in() == 2 * pow_of(make_rational(23, 50), 50));
  for (int n : {5, 6, 8, 12, 16}) {
    const auto q = SmoothingProfile::for_stage(n);
    CHECK(q.c_in() < q.c_out());
  }
  CHECK_THROWS_AS(SmoothingProfile::custom(5, 1), InvalidArgument);
  const SmoothKernel& k = closed5();
  CHECK(k.region({0.04 + 1e-9, 0.04 + 1e-9}) == Region::inner);
  CHECK(k.region({0.001, 0.5}) == Region::collar);
}

TEST_CASE("quarter periods", "[kernel]") {
  // k = 1: linear rotation at angular speed 2
  CHECK(LevelCurve(1).quarter_period() == Catch::Approx(std::numbers::pi / 4).epsilon(1e-13));

  const auto& k = flow5();
  const auto prof = k.profile();
  const double c_out = std::pow(prof.r_out, 50.0);
  const double Q = k.quarter_period(c_out);
  CHECK(std::isfinite(Q));
  CHECK(Q > 0.0);
  // the return-time integration agrees with the closed-form timing
  const LevelCurve curve(25);
  CHECK(PeriodTable::integrate(prof, 1.0) == Catch::Approx(curve.quarter_period()).epsilon(1e-9));
  CHECK(PeriodTable::integrate(prof, prof.s_in) == Catch::Approx(curve.quarter_period()).epsilon(1e-9));
  // four quarter periods close the orbit
  const Vec2 end = rk4_unit_level(25, {1.0, 0.0}, 4.0 * curve.quarter_period(), 400000);
  CHECK(std::abs(end[0] - 1.0) < 1e-6);
  CHECK(std::abs(end[1]) < 1e-6);
  const Vec2 quarter = rk4_unit_level(25, {1.0, 0.0}, curve.quarter_period(), 100000);
  CHECK(std::abs(quarter[0]) < 1e-6);
  CHECK(std::abs(quarter[1] + 1.0) < 1e-6);
  // the interpolated table is continuous to within its refinement bound
  REQUIRE(k.period_table());
  CHECK(k.period_table()->error_bound() < 1e-10);
  CHECK_THROWS_AS(k.quarter_period(c_out * 2.0), OutOfDomain);
}

TEST_CASE("kernel is a rigid quarter turn inside and the identity in the collar", "[kernel]") {
  for (const SmoothKernel* k : {&closed5(), &flow5()}) {
    const Vec2 a = k->apply({0.5, 0.9});
    CHECK(a[0] == 0.9);
    CHECK(a[1] == 0.5);
    const Vec2 b = k->apply({0.001, 0.5});
    CHECK(b[0] == 0.001);
    CHECK(b[1] == 0.5);
    for (const auto& p : region_samples(*k, Region::inner, 500, 5)) {
      const Vec2 w = k->apply(p);
      CHECK(w[0] == p[1]);
      CHECK(w[1] == 1.0 - p[0]);
    }
    for (const auto& p : region_samples(*k, Region::collar, 500, 6)) {
      const Vec2 w = k->apply(p);
      CHECK(w[0] == p[0]);
      CHECK(w[1] == p[1]);
    }
  }
  CHECK_THROWS_AS(closed5().apply({1.2, 0.5}), OutOfDomain);
}

TEST_CASE("inverse undoes the kernel on band points", "[kernel]") {
  const auto band = region_samples(flow5(), Region::band, 1000, 7);
  const double worst_closed = parallel_max(band.size(), 0, [&](std::size_t i) {
    return vd(closed5().inverse(closed5().apply(band[i])), band[i]);
  });
  CHECK(worst_closed < 1e-12);
  const double worst_flow = parallel_max(200, 0, [&](std::size_t i) {
    return vd(flow5().inverse(flow5().apply(band[i])), band[i]);
  });
  CHECK(worst_flow < 2e-10);
}

TEST_CASE("level sets are invariant and the seams are continuous", "[kernel]") {
  const auto band = region_samples(closed5(), Region::band, 1000, 8);
  const auto& k = closed5();
  double drift = 0.0;
  for (const auto& p : band) drift = std::max(drift, std::abs(k.normalized_gauge(k.apply(p)) - k.normalized_gauge(p)));
  CHECK(drift < 1e-8);

  const auto prof = k.profile();
  for (int i = 0; i < 32; ++i) {
    const double th = 2.0 * std::numbers::pi * (i + 0.25) / 32.0;
    const Vec2 a = point_at_gauge(prof, th, prof.s_in + 1e-9 * (1.0 - prof.s_in));
    const Vec2 b = point_at_gauge(prof, th, 1.0 - 1e-9 * (1.0 - prof.s_in));
    CHECK(vd(k.apply(a), Vec2{a[1], 1.0 - a[0]}) < 1e-6);
    CHECK(vd(k.apply(b), b) < 1e-6);
  }
}

TEST_CASE("flow route is area preserving and agrees with the closed form", "[kernel]") {
  const auto band = region_samples(flow5(), Region::band, 300, 9);
  for (const auto& p : band) {
    CHECK(std::abs(det2(kernel_jacobian(flow5(), p)) - 1.0) < 1e-6);
    CHECK(vd(flow5().apply(p), closed5().apply(p)) < 1e-5);
  }
  const double h = 1e-3 * (flow5().profile().r_out - flow5().profile().r_in);
  MapFn f = [&](const Point& x) {
    const Vec2 w = flow5().apply({x[0], x[1]});
    return Point{w[0], w[1]};
  };
  for (std::size_t i = 0; i < 40; ++i)
    CHECK(std::abs(jacobian_det(f, Point{band[i][0], band[i][1]}, h, Mode::torus, true) - 1.0) < 1e-4);
}

TEST_CASE("finite-difference Jacobian of the identity is 1", "[kernel]") {
  MapFn id = [](const Point& x) { return x; };
  CHECK(jacobian_det(id, Point{0.3, 0.7}, 1e-4, Mode::torus) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(jacobian_det(id, Point{0.3, 0.7, 0.2}, 1e-4, Mode::torus) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(jacobian_det(id, Point{0.0, 0.5}, 1e-3, Mode::cylinder), OutOfDomain);
}

TEST_CASE("scaled kernel acts cellwise", "[kernel]") {
  const auto& k = closed5();
  for (std::int64_t q : {1, 3, 7}) {
    for (std::int64_t j = 0; j < q; ++j) {
      const Vec2 c{0.5, (double(j) + 0.5) / double(q)};
      const Vec2 w = k.scaled_apply(q, c);
      CHECK(w[0] == Catch::Approx(0.5).margin(1e-15));
      CHECK(w[1] == Catch::Approx(c[1]).margin(1e-15));
    }
  }
  const Vec2 w = k.scaled_apply(3, {0.5, 0.1});
  CHECK(w[0] == Catch::Approx(0.3).margin(1e-15));
  CHECK(w[1] == Catch::Approx(1.0 / 6.0).margin(1e-15));

  // periodicity in the rigid region, and the half-open cell convention
  Rng rng(10);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(0.1, 0.9), r = rng.uniform(0.1, 0.9);
    const Vec2 a = k.scaled_apply(3, {x, r / 3.0});
    const Vec2 b = k.scaled_apply(3, {x, (1.0 + r) / 3.0});
    CHECK(b[0] == Catch::Approx(a[0]).margin(1e-14));
    CHECK(b[1] - 1.0 / 3.0 == Catch::Approx(a[1]).margin(1e-14));
    const Vec2 back = k.scaled_inverse(3, a);
    CHECK(vd(back, {x, r / 3.0}) < 1e-14);
  }
  const Vec2 edge = k.scaled_apply(4, {0.5, 0.25});
  CHECK(edge[1] >= 0.25);
}

TEST_CASE("heuristic quarter turn on cells", "[kernel]") {
  const auto a = heuristic_phi<Rational>(3, rq("1/2", "1/10"));
  CHECK(a[0] == make_rational(3, 10));
  CHECK(a[1] == make_rational(1, 6));
  const auto b = heuristic_phi<Rational>(3, rq("1/5", "1/2"));
  CHECK(b[0] == make_rational(1, 2));
  CHECK(b[1] == make_rational(3, 5));

  const auto pts = lab::rational_points(2, 300, 11);
  for (const auto& p : pts) {
    std::array<Rational, 2> w{p[0], p[1]};
    if (w[0] == 0 || w[1] == 0) continue;
    for (int i = 0; i < 4; ++i) w = heuristic_phi<Rational>(5, w);
    CHECK(w[0] == p[0]);
    CHECK(w[1] == p[1]);
    const auto f = heuristic_phi<Rational>(5, {p[0], p[1]});
    CHECK(heuristic_phi_inverse<Rational>(5, f) == std::array<Rational, 2>{p[0], p[1]});
    // commutes with the 1/q shift of the second coordinate
    const auto s = heuristic_phi<Rational>(5, {p[0], frac(Rational(p[1] + make_rational(1, 5)))});
    CHECK(s[0] == f[0]);
    CHECK(s[1] == frac(Rational(f[1] + make_rational(1, 5))));
    auto map = [](const RationalPoint& x) {
      const auto w2 = heuristic_phi<Rational>(5, {x[0], x[1]});
      return RationalPoint{w2[0], w2[1]};
    };
    CHECK(jacobian_det_exact(map, p, make_rational(1, 1L << 30)) == 1);
  }
}

TEST_CASE("smooth kernel agrees with the heuristic on the core of each cell", "[kernel]") {
  const auto& k = closed5();
  const double lo = 1.0 / 25.0, hi = 1.0 - lo;
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const std::int64_t q = 1 + static_cast<std::int64_t>(rng.below(6));
    const double x = rng.uniform(lo, hi), cy = rng.uniform(lo, hi);
    const double j = double(rng.below(static_cast<std::uint64_t>(q)));
    const Vec2 p{x, (j + cy) / double(q)};
    CHECK(vd(k.scaled_apply(q, p), heuristic_phi<double>(q, p)) < 1e-12);
  }
}

TEST_CASE("doubling the integrator step degrades drift, not area", "[kernel]") {
  IntegratorParams coarse;
  coarse.step_divisor = 128;
  const SmoothKernel k2(SmoothingProfile::for_stage(5), KernelMethod::flow, coarse);
  const auto band = region_samples(k2, Region::band, 100, 13);
  double d1 = 0.0, d2 = 0.0;
  for (const auto& p : band) {
    d1 = std::max(d1, std::abs(flow5().normalized_gauge(flow5().apply(p)) - flow5().normalized_gauge(p)));
    d2 = std::max(d2, std::abs(k2.normalized_gauge(k2.apply(p)) - k2.normalized_gauge(p)));
    CHECK(std::abs(det2(kernel_jacobian(k2, p)) - 1.0) < 1e-6);
  }
  CHECK(d2 > 2.0 * d1);
}
