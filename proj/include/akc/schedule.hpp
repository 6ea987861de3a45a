#pragma once

// Stage schedule: choice of the rotation numbers alpha_n = p_n'/q_n', the
// scales q_n = q_{n-1}^d q_n', and the certified gap bounds that tie them
// together.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "akc/conjugacy.hpp"
#include "akc/continued_fraction.hpp"
#include "akc/errors.hpp"
#include "akc/kernel.hpp"
#include "akc/norms.hpp"
#include "akc/polynomial.hpp"
#include "akc/quotient_stream.hpp"
#include "akc/rational.hpp"

namespace akc {

enum class Profile { faithful, forced };

inline std::string to_string(Profile p) { return p == Profile::faithful ? "faithful" : "forced"; }

inline Profile parse_profile(const std::string& s) {
  if (s == "faithful") return Profile::faithful;
  if (s == "forced") return Profile::forced;
  throw InvalidConfig("unknown profile '" + s + "' (expected faithful or forced)");
}

struct StageRecord {
  int n = 0;
  int d = 2;
  Mode mode = Mode::torus;
  Integer q_prime, p_prime;
  Integer q_prev;            // q_{n-1}
  Integer q;                 // q_n = q_{n-1}^d q_n'
  Rational alpha_n;          // p_n' / q_n'
  Rational alpha_err_upper;  // certified upper bound on |alpha_n - alpha|
  Rational epsilon;
  Rational gap_bound;        // 2 P(q_n) |alpha_n - alpha|_upper
  std::size_t convergent_index = 0;  // 0 in the forced profile
  unsigned k_order = 1;              // metric order of the certificate
  bool gap_enforced = false;
  PolynomialBound P;
  std::vector<Rational> kernel_constants;  // K_j, index 1..k+1
  std::vector<Rational> H_seminorms;       // S_j(H_{n+1}), index 1..k+1
  std::vector<Rational> H_inv_seminorms;   // S_j(H_{n+1}^{-1})

  /// gap_bound < epsilon, decided exactly.
  bool gap_ok() const { return gap_bound < epsilon; }
  /// max(1, S_j(H_{n+1}), S_j(H_{n+1}^{-1})) over the recorded orders.
  Rational H_norm() const {
    return std::max(max_seminorm(H_seminorms), max_seminorm(H_inv_seminorms));
  }
};

/// P(q) = Bell(k) N(q)^{k+1}, N the coefficientwise max of the seminorm
/// polynomials of H_{n+1} = H_n h_{n,q} and its inverse through order k+1,
/// with the seminorms of H_n given as numbers.
struct GapCertificate {
  PolynomialBound P;
  SeminormPolys H_next, H_next_inv;
};

inline GapCertificate stage_gap_certificate(const std::vector<Rational>& H_prev,
                                            const std::vector<Rational>& H_prev_inv,
                                            const KernelConstants& kc, int d, Mode mode,
                                            unsigned k) {
  if (kc.K.size() != k + 2 || H_prev.size() != k + 2 || H_prev_inv.size() != k + 2)
    throw InvalidArgument("seminorm data must cover orders 1..k+1");
  const StepSeminorms step = step_seminorms(kc, d, mode);
  GapCertificate g;
  g.H_next = compose_polys(constant_seminorms(H_prev), step.forward);
  g.H_next_inv = compose_polys(step.inverse, constant_seminorms(H_prev_inv));
  PolynomialBound N = PolynomialBound::constant(Rational(1));
  for (unsigned j = 1; j <= k + 1; ++j) {
    N = PolynomialBound::coef_max(N, g.H_next[j]);
    N = PolynomialBound::coef_max(N, g.H_next_inv[j]);
  }
  g.P = Rational(drift_constant(k)) * N.pow(k + 1);
  return g;
}

/// Enclosure of alpha at the first depth with width below 2^-bits, or the
/// deepest available one.
inline Enclosure alpha_enclosure(PartialQuotientStream& s, unsigned bits = 256) {
  const Rational target = make_rational(Integer(1), pow_of(Integer(2), bits));
  std::size_t depth = 2;
  Enclosure e = enclose_alpha(s, depth);
  while (e.width() >= target && s.has(depth + 1) && depth < 4096) {
    ++depth;
    e = enclose_alpha(s, depth);
  }
  return e;
}

inline Rational err_upper(const Rational& x, const Enclosure& e) {
  return std::max(abs_of(Rational(x - e.lo)), abs_of(Rational(x - e.hi)));
}

/// The first convergent p'/q' (index > min_index) with q' > q_prev and
/// P(q_prev^d q') * 2 / (q_k q_{k+1}) < epsilon.
inline StageRecord select_stage_denominator(int n, const Integer& q_prev, std::size_t min_index,
                                            const PolynomialBound& P, const Rational& epsilon,
                                            PartialQuotientStream& stream, int d,
                                            std::size_t cap = 64) {
  if (!(epsilon > 0)) throw InvalidArgument("epsilon must be positive");
  const Integer scale = pow_of(q_prev, static_cast<unsigned long>(d));
  for (std::size_t k = min_index + 1; k <= cap; ++k) {
    if (!stream.has(k + 1))
      throw StreamExhausted("stream '" + stream.tag() + "' ended at convergent " +
                            std::to_string(k) + " before stage " + std::to_string(n) +
                            " could be certified");
    const Integer& qk = stream.q(k);
    if (qk <= q_prev) continue;
    const Rational err = convergent_error_upper(stream, k);
    const Integer qn = scale * qk;
    const Rational bound = 2 * P(Rational(qn)) * err;
    if (bound < epsilon) {
      StageRecord r;
      r.n = n;
      r.d = d;
      r.q_prime = qk;
      r.p_prime = stream.p(k);
      r.q_prev = q_prev;
      r.q = qn;
      r.alpha_n = make_rational(r.p_prime, r.q_prime);
      r.alpha_err_upper = err;
      r.epsilon = epsilon;
      r.gap_bound = bound;
      r.convergent_index = k;
      r.P = P;
      r.gap_enforced = true;
      return r;
    }
  }
  throw StreamExhausted("no convergent up to index " + std::to_string(cap) + " of stream '" +
                        stream.tag() + "' certifies stage " + std::to_string(n));
}

/// Numerator p coprime to q nearest to q x (ties to the smaller p).
inline Integer nearest_coprime_numerator(const Integer& q, const Rational& x) {
  const Rational t = Rational(q) * x;
  const Integer base = floor_of(t + make_rational(1, 2));
  for (Integer off = 0; off <= q; ++off) {
    for (const Integer& p : {Integer(base - off), Integer(base + off)}) {
      Integer g;
      mpz_gcd(g.get_mpz_t(), p.get_mpz_t(), q.get_mpz_t());
      if (g == 1) return p;
    }
  }
  return Integer(1);
}

struct ScheduleConfig {
  int d = 2;
  Mode mode = Mode::torus;
  Profile profile = Profile::faithful;
  int stages = 1;
  std::vector<Integer> forced_q_prime;
  Rational epsilon_base = make_rational(1, 2);  // epsilon_n = epsilon_base^n
  unsigned k_max = 1;
  bool demand_faithful_order = false;
  std::size_t convergent_cap = 64;
  KernelMethod method = KernelMethod::action_angle;
  std::size_t kernel_samples = 4096;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  int n0() const { return 2 * d + 1; }
  Rational epsilon(int n) const { return pow_of(epsilon_base, static_cast<unsigned long>(n)); }

  void validate() const {
    if (d < 2) throw InvalidConfig("dimension d must be >= 2, got " + std::to_string(d));
    if (d > kMaxDim) throw InvalidConfig("dimension d must be <= " + std::to_string(kMaxDim));
    if (stages < 1) throw InvalidConfig("stage count must be >= 1");
    if (k_max < 1) throw InvalidConfig("k_max must be >= 1");
    if (!(epsilon_base > 0 && epsilon_base < 1)) throw InvalidConfig("epsilon base must be in (0,1)");
    if (profile == Profile::forced) {
      if (forced_q_prime.size() < static_cast<std::size_t>(stages))
        throw InvalidConfig("forced profile needs one q' per stage");
      for (const auto& q : forced_q_prime)
        if (q < 1) throw InvalidConfig("forced q' values must be >= 1");
    }
  }
};

/// Metric order of the stage-n certificate: n, capped at k_max.
inline unsigned certificate_order(const ScheduleConfig& cfg, int n) {
  if (static_cast<unsigned>(n) + 1 > cfg.k_max && cfg.demand_faithful_order)
    throw OrderCapExceeded("stage " + std::to_string(n) + " needs order " + std::to_string(n + 1) +
                           " > k_max = " + std::to_string(cfg.k_max));
  return std::min<unsigned>(static_cast<unsigned>(n), cfg.k_max);
}

inline std::shared_ptr<const SmoothKernel> make_kernel(int n, KernelMethod method) {
  return std::make_shared<const SmoothKernel>(SmoothingProfile::for_stage(n), method);
}

/// Stage records n0 .. n0 + N - 1, with q_0 = 1 and H_{n0} = id.
inline std::vector<StageRecord> schedule_build(const ScheduleConfig& cfg,
                                               PartialQuotientStream& stream) {
  cfg.validate();
  std::vector<StageRecord> out;
  Integer q_prev = 1;
  std::size_t index = 0;
  const Enclosure alpha = alpha_enclosure(stream);
  for (int s = 0; s < cfg.stages; ++s) {
    const int n = cfg.n0() + s;
    const unsigned k = certificate_order(cfg, n);
    std::vector<Rational> H, Hi;
    if (out.empty()) {
      H.assign(k + 2, Rational(0));
      H[1] = 1;
      Hi = H;
    } else {
      H = out.back().H_seminorms;
      Hi = out.back().H_inv_seminorms;
      H.resize(k + 2, Rational(0));
      Hi.resize(k + 2, Rational(0));
    }
    const auto kernel = make_kernel(n, cfg.method);
    const KernelConstants kc =
        kernel_constants(*kernel, k + 1, cfg.kernel_samples, cfg.seed + static_cast<unsigned>(n),
                         cfg.threads);
    const GapCertificate cert = stage_gap_certificate(H, Hi, kc, cfg.d, cfg.mode, k);
    StageRecord r;
    if (cfg.profile == Profile::faithful) {
      r = select_stage_denominator(n, q_prev, index, cert.P, cfg.epsilon(n), stream, cfg.d,
                                   cfg.convergent_cap);
      index = r.convergent_index;
    } else {
      r.n = n;
      r.d = cfg.d;
      r.q_prime = cfg.forced_q_prime[static_cast<std::size_t>(s)];
      r.p_prime = nearest_coprime_numerator(r.q_prime, (alpha.lo + alpha.hi) / 2);
      r.q_prev = q_prev;
      r.q = pow_of(q_prev, static_cast<unsigned long>(cfg.d)) * r.q_prime;
      r.alpha_n = make_rational(r.p_prime, r.q_prime);
      r.alpha_err_upper = err_upper(r.alpha_n, alpha);
      r.epsilon = cfg.epsilon(n);
      r.P = cert.P;
      r.gap_bound = 2 * cert.P(Rational(r.q)) * r.alpha_err_upper;
      r.gap_enforced = false;
    }
    r.mode = cfg.mode;
    r.k_order = k;
    r.kernel_constants = kc.K;
    r.H_seminorms = evaluate(cert.H_next, Rational(r.q));
    r.H_inv_seminorms = evaluate(cert.H_next_inv, Rational(r.q));
    q_prev = r.q;
    out.push_back(std::move(r));
  }
  return out;
}

/// Runtime maps of a schedule: the kernels, the stack H_{n0} ... and the
/// stage maps.
class StageBuild {
public:
  StageBuild(std::vector<StageRecord> records, KernelMethod method = KernelMethod::action_angle)
      : records_(std::move(records)) {
    for (const auto& r : records_) {
      auto kernel = make_kernel(r.n, method);
      stack_.push(ConjugacyStep(r.n, r.q, r.d, r.mode, kernel));
    }
  }

  const std::vector<StageRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  const ConjugacyStack& full_stack() const noexcept { return stack_; }

  /// H_n for the stage at position s (identity for s = 0).
  ConjugacyStack H(std::size_t s) const { return stack_.prefix(s); }
  /// H_{n+1} for the stage at position s.
  ConjugacyStack H_next(std::size_t s) const { return stack_.prefix(s + 1); }
  StageMap T(std::size_t s) const {
    if (s >= records_.size()) throw MissingStage("stage position " + std::to_string(s));
    return StageMap(H(s), records_[s].alpha_n);
  }
  bool evaluable(std::size_t s) const { return H_next(s).evaluable(); }

private:
  std::vector<StageRecord> records_;
  ConjugacyStack stack_;
};

}  // namespace akc
