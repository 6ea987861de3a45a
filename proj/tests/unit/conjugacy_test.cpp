#include <catch_amalgamated.hpp>

#include "akc/conjugacy.hpp"
#include "akc/lab/verify.hpp"
#include "akc/partition.hpp"
#include "fixtures.hpp"

using namespace akc;
using fixtures::rpt;

namespace {

std::shared_ptr<const SmoothKernel> kernel5() {
  static const auto k = make_kernel(5, KernelMethod::action_angle);
  return k;
}

RationalPoint phi_pair(std::int64_t q, int i, const RationalPoint& p) {
  return embed_pair([q](const std::array<Rational, 2>& w) { return heuristic_phi(q, w); }, i, p);
}

}  // namespace

TEST_CASE("base rotation", "[conjugacy]") {
  const auto p = rpt({"1/5", "9/10"});
  CHECK(base_rotation(Rational(0), p) == p);
  CHECK(base_rotation(make_rational(1, 2), base_rotation(make_rational(1, 2), p)) == p);
  CHECK(base_rotation(make_rational(3, 10), p) == rpt({"1/5", "1/5"}));
  const Point d = base_rotation(0.3, Point{0.2, 0.9});
  CHECK(d[1] == Catch::Approx(0.2).margin(1e-15));
}

TEST_CASE("pair embedding", "[conjugacy]") {
  const auto p = rpt({"1/10", "1/2", "1/10"});
  CHECK(embed_pair([](const std::array<Rational, 2>& w) { return w; }, 1, p) == p);
  CHECK(phi_pair(3, 2, p) == rpt({"1/10", "3/10", "1/6"}));
  const auto x = rpt({"1/7", "2/9", "3/11", "5/13"});
  CHECK(phi_pair(3, 1, phi_pair(3, 3, x)) == phi_pair(3, 3, phi_pair(3, 1, x)));
  CHECK_THROWS_AS(phi_pair(3, 3, p), InvalidArgument);
  CHECK_THROWS_AS(phi_pair(3, 0, p), InvalidArgument);
}

TEST_CASE("shear", "[conjugacy]") {
  CHECK(shear_apply(3, rpt({"1/5", "1/2"})) == rpt({"7/10", "1/2"}));
  CHECK(shear_apply(5, rpt({"1/3", "2/7", "0"})) == rpt({"1/3", "2/7", "0"}));
  CHECK_THROWS_AS(shear_apply(3, rpt({"1/5", "1/2"}), Mode::cylinder), ModeError);
  for (const auto& x : lab::rational_points(3, 200, 20)) {
    CHECK(shear_inverse(4, shear_apply(4, x)) == x);
    const Rational s = make_rational(1, 4);
    CHECK(shear_apply(4, base_rotation(s, x)) == base_rotation(s, shear_apply(4, x)));
  }
}

TEST_CASE("exact step oracle", "[conjugacy]") {
  CHECK(heuristic_h_apply(3, Mode::cylinder, rpt({"1/2", "1/10"})) == rpt({"3/10", "1/6"}));
  CHECK(heuristic_h_apply(3, Mode::torus, rpt({"1/5", "1/2"})) == rpt({"1/2", "13/30"}));
  // phi^(1) phi^(2), applied right to left
  CHECK(heuristic_h_apply(2, Mode::cylinder, rpt({"1/8", "3/8", "1/16"})) == rpt({"1/4", "7/16", "5/16"}));
  CHECK(heuristic_h_apply(2, Mode::torus, rpt({"1/8", "3/8", "1/16"})) == rpt({"1/4", "3/8", "1/4"}));
  for (const auto mode : {Mode::torus, Mode::cylinder})
    for (const auto& x : lab::rational_points(3, 200, 21)) {
      const auto y = heuristic_h_apply(4, mode, x);
      CHECK(heuristic_h_inverse(4, mode, y) == x);
      auto f = [&](const RationalPoint& z) { return heuristic_h_apply(4, mode, z); };
      // interior points only: the stencil must stay inside one affine piece
      bool interior = true;
      for (int c = 0; c < 3; ++c) interior = interior && x[c] > make_rational(1, 1000) && x[c] < make_rational(999, 1000);
      if (interior && mode == Mode::cylinder) CHECK(jacobian_det_exact(f, x, make_rational(1, 1L << 40)) == 1);
    }
}

TEST_CASE("smooth step matches the oracle in the rigid region", "[conjugacy]") {
  const ConjugacyStep cyl(5, Integer(3), 2, Mode::cylinder, kernel5());
  const Point a = cyl.apply(Point{0.5, 0.1});
  CHECK(a[0] == Catch::Approx(0.3).margin(1e-15));
  CHECK(a[1] == Catch::Approx(1.0 / 6.0).margin(1e-15));
  CHECK_FALSE(cyl.with_shear());

  const ConjugacyStep tor(5, Integer(3), 2, Mode::torus, kernel5());
  const Point b = tor.apply(Point{0.2, 0.5});
  CHECK(b[0] == Catch::Approx(0.5).margin(1e-14));
  CHECK(b[1] == Catch::Approx(13.0 / 30.0).margin(1e-14));
}

TEST_CASE("step inverse and commutation with the cell shift", "[conjugacy]") {
  for (const auto mode : {Mode::torus, Mode::cylinder})
    for (int d : {2, 3}) {
      const ConjugacyStep h(5, Integer(4), d, mode, kernel5());
      const auto xs = lab::uniform_points(d, 1000, 22);
      double rt = 0.0, comm = 0.0;
      std::size_t slab_bad = 0;
      for (const auto& x : xs) {
        const Point y = h.apply(x);
        rt = std::max(rt, max_dist(h.inverse(y), x, mode));
        comm = std::max(comm, max_dist(h.apply(base_rotation(0.25, x)), base_rotation(0.25, y), mode));
        if (std::floor(x.last() * 4.0) != std::floor(y.last() * 4.0)) ++slab_bad;
      }
      CHECK(rt < 1e-10);
      CHECK(comm < 1e-9);
      CHECK(slab_bad == 0);
    }
  for (const auto& x : lab::rational_points(2, 500, 23)) {
    const Rational s = make_rational(1, 4);
    CHECK(heuristic_h_apply(4, Mode::torus, base_rotation(s, x)) == base_rotation(s, heuristic_h_apply(4, Mode::torus, x)));
  }
}

TEST_CASE("stack folds steps right to left", "[conjugacy]") {
  const ConjugacyStack empty;
  const Point x{0.3, 0.8};
  CHECK(empty.apply(x) == x);
  CHECK(empty.inverse(x) == x);
  CHECK(K_project(empty, x) == 0.8);

  const ConjugacyStep h(5, Integer(3), 2, Mode::torus, kernel5());
  const ConjugacyStack one({h});
  for (const auto& p : lab::uniform_points(2, 100, 24)) CHECK(one.apply(p) == h.apply(p));

  const auto& b = fixtures::forced_build();
  const auto H = b.full_stack();
  const auto& s = H.steps();
  for (const auto& p : lab::uniform_points(2, 300, 25)) {
    CHECK(max_dist(H.apply(p), s[0].apply(s[1].apply(p)), Mode::torus) == 0.0);
    CHECK(max_dist(H.inverse(H.apply(p)), p, Mode::torus) < 2e-10);
  }
  CHECK_THROWS_AS(H.prefix(3), MissingStage);
}

TEST_CASE("stage map powers", "[conjugacy]") {
  const auto& b = fixtures::forced_build();
  for (std::size_t s = 0; s < b.size(); ++s) {
    const StageMap T = b.T(s);
    const long period = T.period().get_si();
    for (const auto& x : lab::uniform_points(2, 100, 26 + s)) {
      CHECK(max_dist(T.apply(x, 0), x, Mode::torus) < 1e-10);
      CHECK(max_dist(T.apply(x, period), x, Mode::torus) < 1e-10);
      CHECK(max_dist(T.apply_iterated(x, period), x, Mode::torus) < 1e-9);
      for (long p = -3; p <= 9; ++p)
        CHECK(max_dist(T.apply(x, p), T.apply_iterated(x, p), Mode::torus) < 1e-9);
    }
  }
  CHECK_THROWS_AS(b.T(2), MissingStage);
}

TEST_CASE("stage step commutes with the stage rotation and fixes coarse atoms", "[conjugacy]") {
  for (const auto mode : {Mode::torus, Mode::cylinder}) {
    const auto& b = fixtures::forced_build(mode);
    const auto& r = b.records();
    const auto& steps = b.full_stack().steps();
    for (std::size_t s = 0; s < b.size(); ++s) {
      const double a = r[s].alpha_n.get_d();
      for (const auto& x : lab::uniform_points(2, 500, 30 + s)) {
        CHECK(max_dist(steps[s].apply(base_rotation(a, x)), base_rotation(a, steps[s].apply(x)), mode) < 1e-9);
        if (s > 0) {
          const std::int64_t qp = r[s - 1].q.get_si();
          CHECK(atom_of(qp, 2, x.last()) == atom_of(qp, 2, steps[s].apply(x).last()));
        }
      }
    }
  }
}

TEST_CASE("factor map intertwines the stage map with the rotation", "[conjugacy]") {
  for (const auto mode : {Mode::torus, Mode::cylinder}) {
    const auto& b = fixtures::forced_build(mode);
    for (std::size_t s = 0; s < b.size(); ++s) {
      const auto Hn1 = b.H_next(s);
      const StageMap T = b.T(s);
      const double a = b.records()[s].alpha_n.get_d();
      for (const auto& x : lab::uniform_points(2, 500, 40 + s)) {
        const double k0 = K_project(Hn1, x), k1 = K_project(Hn1, T.apply(x));
        CHECK(circle_dist(wrap01(k1 - k0), a) < 1e-8);
      }
      for (const auto& x : lab::rational_points(2, 200, 50 + s)) {
        const Rational k0 = K_project(Hn1, x), k1 = K_project(Hn1, T.heuristic_apply(x));
        CHECK(frac(Rational(k1 - k0)) == frac(b.records()[s].alpha_n));
      }
    }
  }
}
