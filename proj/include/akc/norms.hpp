#pragma once

// C^k size of maps of M: empirical finite-difference estimates (lower
// bounds) and certified composition bounds (upper bounds), the drift bound
// for conjugated rotations, and the metrics d_0, d_k, d^{(q)}.
//
// Certified bounds work with the seminorms
//   S_j(f) = max_x max_i sum_{l_1..l_j} |d_{l_1} ... d_{l_j} f_i(x)|,
// the operator norm of D^j f on (l-infinity)^j. They dominate every entry
// |D_a f_i| with |a| = j and compose by the Faa di Bruno formula:
//   S_j(f o g) <= sum_m S_m(f) B_{j,m}(S_1(g), ..., S_{j-m+1}(g)).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "akc/conjugacy.hpp"
#include "akc/errors.hpp"
#include "akc/parallel.hpp"
#include "akc/point.hpp"
#include "akc/polynomial.hpp"
#include "akc/rational.hpp"

namespace akc {

using MapFn = std::function<Point(const Point&)>;

struct MultiIndex {
  std::array<int, kMaxDim> a{};
  int d = 0;
  int order() const {
    int s = 0;
    for (int i = 0; i < d; ++i) s += a[static_cast<std::size_t>(i)];
    return s;
  }
};

/// All multi-indices of dimension d and exact order `order`.
inline std::vector<MultiIndex> multi_indices(int d, int order) {
  std::vector<MultiIndex> out;
  MultiIndex cur;
  cur.d = d;
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == d - 1) {
      cur.a[static_cast<std::size_t>(i)] = left;
      out.push_back(cur);
      return;
    }
    for (int v = left; v >= 0; --v) {
      cur.a[static_cast<std::size_t>(i)] = v;
      rec(i + 1, left - v);
    }
  };
  rec(0, order);
  return out;
}

/// Number of ordered derivative tuples with multiplicities a: |a|! / a!.
inline double multinomial(const MultiIndex& m) {
  double r = std::tgamma(m.order() + 1.0);
  for (int i = 0; i < m.d; ++i) r /= std::tgamma(m.a[static_cast<std::size_t>(i)] + 1.0);
  return r;
}

inline double wrap_signed(double x) { return x - std::nearbyint(x); }

/// Per-order maxima of the derivatives of a map at a set of points:
/// entry[j] = max |D_a f_i| over |a| = j, column[j] = empirical S_j.
struct DerivativeStats {
  std::vector<double> entry, column;

  explicit DerivativeStats(int k = 0) : entry(static_cast<std::size_t>(k) + 1, 0.0),
                                        column(static_cast<std::size_t>(k) + 1, 0.0) {}
  void merge(const DerivativeStats& o) {
    for (std::size_t j = 0; j < entry.size(); ++j) {
      entry[j] = std::max(entry[j], o.entry[j]);
      column[j] = std::max(column[j], o.column[j]);
    }
  }
  double norm() const { return *std::max_element(entry.begin() + 1, entry.end()); }
};

namespace detail {

/// Central difference D_a of the lift of f at x with spacing h, all
/// components at once. Odd orders use half-step offsets.
inline std::array<double, kMaxDim> central_partial(const MapFn& f, const Point& x,
                                                   const Point& fx, const MultiIndex& a, double h,
                                                   Mode mode) {
  const int d = x.dim();
  std::array<int, kMaxDim> j{};
  std::array<double, kMaxDim> acc{};
  while (true) {
    Point y = x;
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      const int m = a.a[static_cast<std::size_t>(i)];
      if (m == 0) continue;
      const int ji = j[static_cast<std::size_t>(i)];
      y[i] += (0.5 * m - ji) * h;
      double binom = 1.0;
      for (int t = 1; t <= ji; ++t) binom = binom * (m - t + 1) / t;
      w *= (ji % 2 ? -binom : binom) / std::pow(h, m);
    }
    const Point fy = f(normalize(y, mode));
    for (int c = 0; c < d; ++c) acc[static_cast<std::size_t>(c)] += w * wrap_signed(fy[c] - fx[c]);
    int i = 0;
    for (; i < d; ++i) {
      auto& ji = j[static_cast<std::size_t>(i)];
      if (ji < a.a[static_cast<std::size_t>(i)]) {
        ++ji;
        break;
      }
      ji = 0;
    }
    if (i == d) break;
  }
  return acc;
}

/// Richardson-extrapolated partials of orders 1..k at x; also returns the
/// plain estimates at h and h/2 for the consistency check.
inline void stats_at(const MapFn& f, const Point& x, int k, double h, Mode mode,
                     DerivativeStats& rich, DerivativeStats& coarse, DerivativeStats& fine) {
  const int d = x.dim();
  const Point fx = f(x);
  for (int j = 1; j <= k; ++j) {
    std::array<double, kMaxDim> col_r{}, col_c{}, col_f{};
    for (const auto& a : multi_indices(d, j)) {
      const auto dc = central_partial(f, x, fx, a, h, mode);
      const auto df = central_partial(f, x, fx, a, 0.5 * h, mode);
      const double mult = multinomial(a);
      for (int c = 0; c < d; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        const double r = (4.0 * df[cc] - dc[cc]) / 3.0;
        auto put = [&](DerivativeStats& s, std::array<double, kMaxDim>& col, double v) {
          s.entry[static_cast<std::size_t>(j)] =
              std::max(s.entry[static_cast<std::size_t>(j)], std::abs(v));
          col[cc] += mult * std::abs(v);
        };
        put(rich, col_r, r);
        put(coarse, col_c, dc[cc]);
        put(fine, col_f, df[cc]);
      }
    }
    for (int c = 0; c < d; ++c) {
      const auto cc = static_cast<std::size_t>(c);
      const auto jj = static_cast<std::size_t>(j);
      rich.column[jj] = std::max(rich.column[jj], col_r[cc]);
      coarse.column[jj] = std::max(coarse.column[jj], col_c[cc]);
      fine.column[jj] = std::max(fine.column[jj], col_f[cc]);
    }
  }
}

}  // namespace detail

enum class NormKind { empirical_lower, certified_upper };

inline std::string to_string(NormKind k) {
  return k == NormKind::empirical_lower ? "empirical-lower" : "certified-upper";
}

struct NormEstimate {
  int k = 0;
  double value = 0.0;
  NormKind kind = NormKind::empirical_lower;
  std::string grid;
  double fd_step = 0.0;
  DerivativeStats stats;
};

/// Empirical ||f||_k = max over 1 <= |a| <= k of sup |D_a f_i| on the
/// samples, from Richardson-extrapolated central differences of the lift.
/// Throws StepTooLarge when the estimates at h and h/2 disagree by > 10%.
inline NormEstimate norm_estimate(const MapFn& f, int k, const std::vector<Point>& samples,
                                  double fd_step, Mode mode, unsigned threads = 0,
                                  std::string grid = "samples") {
  if (k < 1) throw InvalidArgument("norm order k must be >= 1");
  if (!(fd_step > 0.0)) throw InvalidArgument("fd_step must be positive");
  if (samples.empty()) throw InvalidArgument("norm estimate needs samples");
  const std::size_t chunks = (samples.size() + kChunk - 1) / kChunk;
  std::vector<DerivativeStats> rich(chunks, DerivativeStats(k)), coarse(chunks, DerivativeStats(k)),
      fine(chunks, DerivativeStats(k));
  for_chunks(samples.size(), threads, [&](std::size_t b, std::size_t e) {
    const std::size_t c = b / kChunk;
    for (std::size_t i = b; i < e; ++i)
      detail::stats_at(f, samples[i], k, fd_step, mode, rich[c], coarse[c], fine[c]);
  });
  NormEstimate est;
  est.k = k;
  est.fd_step = fd_step;
  est.grid = std::move(grid);
  est.stats = DerivativeStats(k);
  DerivativeStats sc(k), sf(k);
  for (std::size_t c = 0; c < chunks; ++c) {
    est.stats.merge(rich[c]);
    sc.merge(coarse[c]);
    sf.merge(fine[c]);
  }
  for (int j = 1; j <= k; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    const double a = sc.entry[jj], b = sf.entry[jj];
    // order-j central differences carry roundoff of order eps / h^j
    const double noise = 1e-12 / std::pow(fd_step, j);
    const double scale = std::max({b, 1e-9 * est.stats.norm(), noise});
    if (std::abs(a - b) > 0.1 * scale && scale > 0.0)
      throw StepTooLarge("order-" + std::to_string(j) + " estimates at h = " +
                         std::to_string(fd_step) + " and h/2 differ: " + std::to_string(a) +
                         " vs " + std::to_string(b));
  }
  est.value = est.stats.norm();
  return est;
}

/// Lattice of m^d points at cell centers plus `random` uniform points.
inline std::vector<Point> sample_grid(int d, int m, std::size_t random, std::uint64_t seed) {
  check_dimension(d);
  std::vector<Point> out;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(m);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Point p(d);
    std::size_t r = idx;
    for (int i = 0; i < d; ++i) {
      p[i] = (double(r % static_cast<std::size_t>(m)) + 0.5) / m;
      r /= static_cast<std::size_t>(m);
    }
    out.push_back(p);
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < random; ++i) {
    Point p(d);
    for (int c = 0; c < d; ++c) p[c] = rng.uniform();
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Combinatorics

inline Integer bell_number(unsigned k) {
  std::vector<Integer> row{Integer(1)};
  for (unsigned i = 0; i < k; ++i) {
    std::vector<Integer> next{row.back()};
    for (const auto& v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

inline Integer binomial(unsigned n, unsigned r) {
  Integer out;
  mpz_bin_uiui(out.get_mpz_t(), n, r);
  return out;
}

namespace detail {
inline double scaled(const Integer& c, double x) { return c.get_d() * x; }
inline Rational scaled(const Integer& c, const Rational& x) { return Rational(c) * x; }
inline PolynomialBound scaled(const Integer& c, const PolynomialBound& x) {
  return Rational(c) * x;
}
}  // namespace detail

/// Partial Bell polynomials B[j][m](x_1, ..., x_{j-m+1}) for j, m <= K;
/// x is indexed from 1 (x[0] unused).
template <class T>
std::vector<std::vector<T>> partial_bell(const std::vector<T>& x, unsigned K, const T& zero,
                                         const T& one) {
  std::vector<std::vector<T>> B(K + 1, std::vector<T>(K + 1, zero));
  B[0][0] = one;
  for (unsigned j = 1; j <= K; ++j)
    for (unsigned m = 1; m <= j; ++m) {
      T acc = zero;
      for (unsigned i = 1; i + m - 1 <= j; ++i) {
        const T& prev = B[j - i][m - 1];
        acc = acc + detail::scaled(binomial(j - 1, i - 1), x[i] * prev);
      }
      B[j][m] = acc;
    }
  return B;
}

/// Seminorm bounds S_1..S_K of f o g from those of f and g (index 0 unused).
template <class T>
std::vector<T> compose_seminorms(const std::vector<T>& f, const std::vector<T>& g, const T& zero,
                                 const T& one) {
  const unsigned K = static_cast<unsigned>(f.size()) - 1;
  if (g.size() != f.size()) throw InvalidArgument("seminorm orders differ");
  const auto B = partial_bell(g, K, zero, one);
  std::vector<T> out(K + 1, zero);
  for (unsigned j = 1; j <= K; ++j) {
    T acc = zero;
    for (unsigned m = 1; m <= j; ++m) acc = acc + f[m] * B[j][m];
    out[j] = acc;
  }
  return out;
}

/// Coarse majorant ||f o g||_k <= Bell(k) ||f||_k max(1, ||g||_k)^k in the
/// seminorm sense (all S_j <= the given norms).
inline Rational composition_norm_bound(const Rational& f_k, const Rational& g_k, unsigned k) {
  const Rational g = g_k > 1 ? g_k : Rational(1);
  return Rational(bell_number(k)) * f_k * pow_of(g, k);
}

/// Certified-upper combination of two certified estimates.
inline NormEstimate composition_norm_bound(const NormEstimate& f, const NormEstimate& g, int k) {
  if (f.kind != NormKind::certified_upper || g.kind != NormKind::certified_upper)
    throw InvalidArgument("composition bound needs certified-upper inputs");
  NormEstimate out;
  out.k = k;
  out.kind = NormKind::certified_upper;
  out.value = composition_norm_bound(exact(f.value), exact(g.value), static_cast<unsigned>(k))
                  .get_d();
  out.grid = "composition";
  return out;
}

/// C_3(k) = Bell(k): the drift of h S_alpha h^{-1} in d_k is at most
/// Bell(k) M^{k+1} |alpha - beta| with M bounding S_j(h), S_j(h^{-1}), j <= k+1.
inline Integer drift_constant(unsigned k) { return bell_number(k); }

inline Rational conjugacy_drift_bound(const Rational& h_norm_k1, unsigned k,
                                      const Rational& alpha_gap) {
  if (alpha_gap < 0) throw InvalidArgument("alpha gap must be >= 0");
  const Rational m = h_norm_k1 > 1 ? h_norm_k1 : Rational(1);
  return Rational(drift_constant(k)) * pow_of(m, k + 1) * alpha_gap;
}

// ---------------------------------------------------------------------------
// Certified seminorm polynomials of the step maps, in the variable q

using SeminormPolys = std::vector<PolynomialBound>;  // index 1..K

inline SeminormPolys identity_seminorms(unsigned K) {
  SeminormPolys s(K + 1, PolynomialBound());
  if (K >= 1) s[1] = PolynomialBound::constant(Rational(1));
  return s;
}

inline SeminormPolys constant_seminorms(const std::vector<Rational>& v) {
  SeminormPolys s;
  for (const auto& x : v) s.push_back(PolynomialBound::constant(x));
  return s;
}

inline SeminormPolys compose_polys(const SeminormPolys& f, const SeminormPolys& g) {
  return compose_seminorms(f, g, PolynomialBound(), PolynomialBound::constant(Rational(1)));
}

/// Kernel seminorm constants: K_j bounds S_j of phi_n and phi_n^{-1}
/// (index 1..K). The scaled kernel then satisfies S_j(phi_{n,q}) <= K_j q^j.
struct KernelConstants {
  int n = 0;
  std::vector<Rational> K;
  std::vector<double> sampled;
  double safety = 2.0;
};

/// Sampled S_j of phi_n and its inverse on lattice and band points, times
/// the safety factor, rounded up to a multiple of 2^-20.
inline KernelConstants kernel_constants(const SmoothKernel& kernel, unsigned K,
                                        std::size_t band_samples = 4096, std::uint64_t seed = 7,
                                        unsigned threads = 0, double safety = 2.0) {
  std::vector<Point> pts;
  for (const auto& p : sample_grid(2, 48, 0, seed)) pts.push_back(p);
  Rng rng(seed);
  const auto& prof = kernel.profile();
  while (pts.size() < 48 * 48 + band_samples) {
    Point p(2);
    p[0] = rng.uniform();
    p[1] = rng.uniform();
    if (kernel.region({p[0], p[1]}) == Region::band) pts.push_back(p);
  }
  // step scaled to the band width and 1/k
  const double h = 1e-4 * (prof.r_out - prof.r_in) / 0.0236 * 25.0 / double(prof.k);
  auto fwd = [&](const Point& x) {
    const Vec2 w = kernel.apply({std::clamp(x[0], 0.0, 1.0), std::clamp(x[1], 0.0, 1.0)});
    Point o(2);
    o[0] = w[0];
    o[1] = w[1];
    return o;
  };
  auto inv = [&](const Point& x) {
    const Vec2 w = kernel.inverse({std::clamp(x[0], 0.0, 1.0), std::clamp(x[1], 0.0, 1.0)});
    Point o(2);
    o[0] = w[0];
    o[1] = w[1];
    return o;
  };
  const auto a = norm_estimate(fwd, static_cast<int>(K), pts, h, Mode::torus, threads);
  const auto b = norm_estimate(inv, static_cast<int>(K), pts, h, Mode::torus, threads);
  KernelConstants kc;
  kc.n = prof.n;
  kc.safety = safety;
  kc.K.assign(K + 1, Rational(0));
  kc.sampled.assign(K + 1, 0.0);
  for (unsigned j = 1; j <= K; ++j) {
    const double s = std::max({a.stats.column[j], b.stats.column[j], 1.0});
    kc.sampled[j] = s;
    kc.K[j] = make_rational(Integer(static_cast<long>(std::ceil(safety * s * 1048576.0))),
                            Integer(1048576));
  }
  return kc;
}

/// Certified S_j polynomials of h_{n,q} and h_{n,q}^{-1} in q.
struct StepSeminorms {
  SeminormPolys forward, inverse;
};

inline StepSeminorms step_seminorms(const KernelConstants& kc, int d, Mode mode) {
  const unsigned K = static_cast<unsigned>(kc.K.size()) - 1;
  SeminormPolys phi(K + 1, PolynomialBound());
  for (unsigned j = 1; j <= K; ++j) phi[j] = PolynomialBound::monomial(kc.K[j], j);
  SeminormPolys shear = identity_seminorms(K);
  if (mode == Mode::torus && K >= 1)
    shear[1] = PolynomialBound({Rational(1), Rational(1)});  // row sums 1 + q
  StepSeminorms s;
  s.forward = shear;
  for (int i = d - 1; i >= 1; --i) s.forward = compose_polys(phi, s.forward);
  s.inverse = shear;
  for (int i = 1; i <= d - 1; ++i) s.inverse = compose_polys(s.inverse, phi);
  return s;
}

inline std::vector<Rational> evaluate(const SeminormPolys& p, const Rational& q) {
  std::vector<Rational> out;
  for (const auto& x : p) out.push_back(x.is_zero() ? Rational(0) : x(q));
  return out;
}

inline Rational max_seminorm(const std::vector<Rational>& s) {
  Rational m(1);
  for (std::size_t j = 1; j < s.size(); ++j) m = std::max(m, s[j]);
  return m;
}

// ---------------------------------------------------------------------------
// Metrics (empirical maxima over samples, so lower bounds of the true values)

inline double d0_distance(const MapFn& f, const MapFn& g, const std::vector<Point>& samples,
                          Mode mode, unsigned threads = 0) {
  return parallel_max(samples.size(), threads,
                      [&](std::size_t i) { return max_dist(f(samples[i]), g(samples[i]), mode); });
}

/// max(d_0(f, g), max_{1<=|a|<=k} |D_a f - D_a g|), derivatives taken of
/// the lifted difference f - g.
inline double dk_hat(const MapFn& f, const MapFn& g, int k, const std::vector<Point>& samples,
                     double fd_step, Mode mode, unsigned threads = 0) {
  double out = d0_distance(f, g, samples, mode, threads);
  if (k < 1) return out;
  const int d = samples.front().dim();
  MapFn diff = [&](const Point& x) {
    const Point a = f(x), b = g(x);
    Point o(d);
    for (int c = 0; c < d; ++c) o[c] = wrap_signed(a[c] - b[c]);
    return o;
  };
  const double deriv = parallel_max(samples.size(), threads, [&](std::size_t i) {
    DerivativeStats r(k), c(k), fi(k);
    detail::stats_at(diff, samples[i], k, fd_step, Mode::torus, r, c, fi);
    return r.norm();
  });
  return std::max(out, deriv);
}

inline double dk_distance(const MapFn& f, const MapFn& g, const MapFn& f_inv, const MapFn& g_inv,
                          int k, const std::vector<Point>& samples, double fd_step, Mode mode,
                          unsigned threads = 0) {
  return std::max(dk_hat(f, g, k, samples, fd_step, mode, threads),
                  dk_hat(f_inv, g_inv, k, samples, fd_step, mode, threads));
}

/// max over samples x and 0 <= i < q of d(T^i x, U^i x).
inline double dqn_distance(const StageMap& t, const StageMap& u, long q,
                           const std::vector<Point>& samples, Mode mode, unsigned threads = 0) {
  return parallel_max(samples.size(), threads, [&](std::size_t s) {
    double m = 0.0;
    for (long i = 0; i < q; ++i)
      m = std::max(m, max_dist(t.apply(samples[s], i), u.apply(samples[s], i), mode));
    return m;
  });
}

// ---------------------------------------------------------------------------
// Growth of ||h_{n,q}||_k

struct GrowthRow {
  long q = 0;
  double norm = 0.0;
  double ratio = 0.0;  // norm / q^{dk}
};

struct GrowthReport {
  int n = 0, d = 0, k = 0;
  std::vector<GrowthRow> rows;
  double median_ratio = 0.0;
  double max_ratio = 0.0;
  bool pass = false;
};

/// Samples the same points of the base cell for every q: uniform points in
/// cell coordinates, pulled back to M through the cell scaling and psi_q.
inline std::vector<Point> cell_samples(int d, long q, Mode mode, std::size_t count,
                                       std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point> out;
  for (std::size_t i = 0; i < count; ++i) {
    Point p(d);
    for (int c = 0; c + 1 < d; ++c) p[c] = rng.uniform(0.02, 0.98);
    p.last() = rng.uniform(0.02, 0.98) / double(q);
    if (mode == Mode::torus) p = shear_inverse(q, p);
    out.push_back(p);
  }
  return out;
}

/// Empirical ||h_{n,q}||_k for each q, ratio to q^{dk}; passes when the last
/// ratio is at most 1.1 times the median ratio.
inline GrowthReport growth_check(const SmoothKernel& kernel, int d, int k,
                                 const std::vector<long>& q_list, Mode mode = Mode::torus,
                                 std::size_t samples = 2048, std::uint64_t seed = 11,
                                 unsigned threads = 0) {
  if (k < 1) throw InvalidArgument("growth check needs k >= 1 (norms start at order 1)");
  if (q_list.empty()) throw InvalidArgument("empty q list");
  if (!std::is_sorted(q_list.begin(), q_list.end())) throw InvalidArgument("q list must ascend");
  GrowthReport rep;
  rep.n = kernel.profile().n;
  rep.d = d;
  rep.k = k;
  auto shared = std::make_shared<const SmoothKernel>(kernel);
  for (long q : q_list) {
    const double h = 1e-4 / double(q);
    if (q > (1L << 20))
      throw StepTooLarge("q = " + std::to_string(q) + " beyond the resolvable range");
    ConjugacyStep step(rep.n, Integer(q), d, mode, shared);
    MapFn f = [&](const Point& x) { return step.apply(x); };
    const auto est = norm_estimate(f, k, cell_samples(d, q, mode, samples, seed), h, mode, threads);
    GrowthRow row;
    row.q = q;
    row.norm = est.value;
    row.ratio = est.value / std::pow(double(q), double(d * k));
    rep.rows.push_back(row);
  }
  std::vector<double> r;
  for (const auto& row : rep.rows) r.push_back(row.ratio);
  rep.max_ratio = *std::max_element(r.begin(), r.end());
  std::vector<double> sorted = r;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  rep.median_ratio = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  rep.pass = r.back() <= 1.1 * rep.median_ratio;
  return rep;
}

}  // namespace akc
