#include <catch_amalgamated.hpp>

#include "akc/continued_fraction.hpp"
#include "akc/schedule.hpp"
#include "fixtures.hpp"

using namespace akc;

namespace {

// q_{k+1} = a_{k+1} q_k + q_{k-1}, computed independently of the stream.
// q_0 = 1, q_{-1} = 0.
std::vector<Integer> denominators(const std::vector<Integer>& a) {
  std::vector<Integer> q;
  Integer prev = 0, cur = 1;
  for (const auto& ak : a) {
    const Integer next = ak * cur + prev;
    prev = cur;
    cur = next;
    q.push_back(next);
  }
  return q;
}

}  // namespace

TEST_CASE("single quotient 2 gives the convergent 1/2", "[rotation]") {
  auto s = PartialQuotientStream::from_list({Integer(2)}, "two");
  const auto c = cf_convergents(s, 1);
  REQUIRE(c.size() == 1);
  CHECK(c[0].value() == make_rational(1, 2));
}

TEST_CASE("golden quotients give Fibonacci convergents", "[rotation]") {
  auto s = PartialQuotientStream::golden();
  const auto c = cf_convergents(s, 5);
  const std::vector<Rational> want{make_rational(1, 1), make_rational(1, 2), make_rational(2, 3),
                                   make_rational(3, 5), make_rational(5, 8)};
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(c[i].value() == want[i]);
}

TEST_CASE("adaptive stream follows a_{k+1} = q_k^k", "[rotation]") {
  auto s = PartialQuotientStream::adaptive();
  const auto c = cf_convergents(s, 4);
  CHECK(c[0].q == 1);
  CHECK(c[1].q == 2);
  CHECK(c[2].q == 9);
  // a_4 = 9^3, q_4 = 729 * 9 + 2
  CHECK(c[3].q == 6563);
  std::vector<Integer> a;
  for (std::size_t k = 1; k <= 6; ++k) a.push_back(s.a(k));
  const auto q = denominators(a);
  for (std::size_t k = 1; k <= 6; ++k) CHECK(s.q(k) == q[k - 1]);
}

TEST_CASE("convergents are reduced, increasing, and within 1/q^2 of every enclosed value", "[rotation]") {
  for (auto s : {PartialQuotientStream::adaptive(), PartialQuotientStream::golden(),
                 PartialQuotientStream::silver()}) {
    const std::size_t depth = s.tag().rfind("adaptive", 0) == 0 ? 7 : 9;
    const Enclosure e = enclose_alpha(s, depth + 2);
    for (std::size_t k = 1; k <= depth; ++k) {
      const auto c = convergent(s, k);
      Integer g;
      mpz_gcd(g.get_mpz_t(), c.p.get_mpz_t(), c.q.get_mpz_t());
      CHECK(g == 1);
      if (k > 1) CHECK(c.q > s.q(k - 1));
      const Rational tol = make_rational(Integer(1), c.q * c.q);
      CHECK(abs_of(Rational(c.value() - e.lo)) < tol);
      CHECK(abs_of(Rational(c.value() - e.hi)) < tol);
    }
  }
}

TEST_CASE("enclosures bracket and nest", "[rotation]") {
  auto golden = PartialQuotientStream::golden();
  const auto e2 = enclose_alpha(golden, 2);
  CHECK(e2.lo == make_rational(1, 2));
  CHECK(e2.hi == Rational(1));

  auto silver = PartialQuotientStream::silver();
  const auto e4 = enclose_alpha(silver, 4);
  CHECK(e4.width() <= make_rational(1, 12 * 29));
  CHECK(e4.lo == make_rational(12, 29));
  CHECK(e4.hi == make_rational(5, 12));

  for (auto s : {PartialQuotientStream::adaptive(), PartialQuotientStream::golden(),
                 PartialQuotientStream::silver()}) {
    for (std::size_t depth = 2; depth < 8; ++depth) {
      const auto outer = enclose_alpha(s, depth);
      const auto inner = enclose_alpha(s, depth + 1);
      CHECK(inner.inside(outer));
      CHECK(inner.width() < outer.width());
    }
  }
  CHECK_THROWS_AS(enclose_alpha(golden, 1), InvalidArgument);
}

TEST_CASE("finite lists report exhaustion", "[rotation]") {
  auto s = PartialQuotientStream::from_list({Integer(1), Integer(2)}, "short");
  CHECK(s.has(2));
  CHECK_FALSE(s.has(3));
  CHECK_THROWS_AS(cf_convergents(s, 3), StreamExhausted);
}

TEST_CASE("Liouville witnesses exist for the adaptive stream", "[rotation]") {
  auto s = PartialQuotientStream::adaptive();
  const Rational delta = make_rational(1, 1000);
  const auto ws = liouville_certificate(s, 3, delta, pow_of(Integer(2), 65536));
  REQUIRE(ws.size() == 3);
  for (const auto& w : ws) {
    CHECK(w.value < delta);
    // value is q^k / q_next, an upper bound on q^k ||q alpha||
    std::size_t m = 1;
    while (s.q(m) != w.q) ++m;
    CHECK(w.value == make_rational(pow_of(w.q, w.k), s.q(m + 1)));
  }
}

TEST_CASE("golden ratio has no order-2 Liouville witness", "[rotation]") {
  auto s = PartialQuotientStream::golden();
  CHECK_THROWS_AS(liouville_witness(s, 2, make_rational(1, 20), pow_of(Integer(2), 200)),
                  CertificateNotFound);
  // q^2 ||q alpha|| stays bounded below along the convergents
  for (std::size_t m = 2; m < 40; ++m)
    CHECK(make_rational(pow_of(s.q(m), 2), s.q(m + 1)) > make_rational(1, 10));
}

TEST_CASE("order-1 witnesses exist for any irrational given a large cap", "[rotation]") {
  auto s = PartialQuotientStream::silver();
  const auto w = liouville_witness(s, 1, make_rational(1, 2), pow_of(Integer(2), 64));
  CHECK(w.value < make_rational(1, 2));
}

TEST_CASE("stage selection matches a brute-force scan", "[rotation]") {
  SECTION("P(q) = q, adaptive, epsilon 2^-5") {
    auto s = PartialQuotientStream::adaptive();
    const auto P = PolynomialBound::monomial(Rational(1), 1);
    const Rational eps = make_rational(1, 32);
    const auto r = select_stage_denominator(5, Integer(1), 0, P, eps, s, 2);
    std::size_t want = 0;
    for (std::size_t k = 1; k < 20 && want == 0; ++k) {
      if (s.q(k) <= 1) continue;
      const Rational bound = 2 * Rational(s.q(k)) * make_rational(Integer(1), s.q(k) * s.q(k + 1));
      if (bound < eps) want = k;
    }
    CHECK(r.convergent_index == want);
    CHECK(r.q_prime == 9);
    CHECK(r.gap_bound < eps);
    CHECK(r.q == r.q_prime);
  }
  SECTION("P = 1, epsilon 1: first convergent beyond q_prev") {
    auto s = PartialQuotientStream::golden();
    const auto r = select_stage_denominator(5, Integer(1), 0, PolynomialBound::constant(Rational(1)),
                                            Rational(1), s, 2);
    CHECK(r.q_prime == 2);
    CHECK(r.alpha_err_upper < make_rational(1, 2));
  }
  SECTION("golden ratio cannot beat P(q) = q^4") {
    auto s = PartialQuotientStream::golden();
    CHECK_THROWS_AS(select_stage_denominator(5, Integer(1), 0, PolynomialBound::monomial(Rational(1), 4),
                                             make_rational(1, 1000), s, 2, 50),
                    StreamExhausted);
  }
  SECTION("deterministic") {
    auto a = PartialQuotientStream::adaptive();
    auto b = PartialQuotientStream::adaptive();
    const auto P = PolynomialBound::monomial(Rational(3), 2);
    const auto ra = select_stage_denominator(5, Integer(4), 0, P, make_rational(1, 64), a, 2);
    const auto rb = select_stage_denominator(5, Integer(4), 0, P, make_rational(1, 64), b, 2);
    CHECK(ra.convergent_index == rb.convergent_index);
    CHECK(ra.q == rb.q);
    CHECK(ra.q % 16 == 0);
  }
}

TEST_CASE("forced schedule multiplies denominators", "[rotation]") {
  const auto& b = fixtures::forced_build();
  REQUIRE(b.size() == 2);
  const auto& r = b.records();
  CHECK(r[0].q == 3);
  CHECK(r[1].q == 18);
  CHECK(r[0].n == 5);
  CHECK(r[1].n == 6);
  for (const auto& x : r) {
    CHECK(x.q % x.q_prime == 0);
    CHECK(x.q % (x.q_prev * x.q_prev) == 0);
    CHECK(x.alpha_n.get_den() == x.q_prime);
    CHECK_FALSE(x.gap_enforced);
  }
  CHECK(r[1].q > r[0].q);
}

TEST_CASE("faithful single stage certifies its gap", "[rotation]") {
  ScheduleConfig c;
  c.kernel_samples = 1024;
  auto s = PartialQuotientStream::adaptive();
  const auto recs = schedule_build(c, s);
  REQUIRE(recs.size() == 1);
  const auto& r = recs.front();
  CHECK(r.gap_enforced);
  CHECK(r.gap_ok());
  CHECK(r.gap_bound < make_rational(1, 32));
  CHECK(r.convergent_index <= 30);
  CHECK(r.alpha_err_upper < make_rational(Integer(1), r.q_prime * r.q_prime));
}

TEST_CASE("invalid schedules are rejected", "[rotation]") {
  ScheduleConfig c;
  auto s = PartialQuotientStream::adaptive();
  c.d = 1;
  CHECK_THROWS_AS(schedule_build(c, s), InvalidConfig);
  c.d = 2;
  c.stages = 0;
  CHECK_THROWS_AS(schedule_build(c, s), InvalidConfig);
  c.stages = 2;
  c.profile = Profile::forced;
  c.forced_q_prime = {Integer(3)};
  CHECK_THROWS_AS(schedule_build(c, s), InvalidConfig);
}
