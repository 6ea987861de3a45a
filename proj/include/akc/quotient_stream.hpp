#pragma once

// Lazily extended continued-fraction expansions alpha = [0; a_1, a_2, ...].

#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include "akc/errors.hpp"
#include "akc/rational.hpp"

namespace akc {

class PartialQuotientStream {
public:
  enum class Kind { adaptive, list, periodic };

  /// a_1 = 1, a_{k+1} = q_k^k. Terms whose bit length would exceed max_bits
  /// are reported as exhaustion rather than computed.
  static PartialQuotientStream adaptive(std::size_t max_bits = std::size_t{1} << 20) {
    PartialQuotientStream s(Kind::adaptive, "adaptive a_{k+1}=q_k^k");
    s.max_bits_ = max_bits;
    return s;
  }

  /// Finite prefix; asking for more terms raises StreamExhausted.
  static PartialQuotientStream from_list(std::vector<Integer> quotients,
                                         std::string tag = "list") {
    for (const auto& a : quotients)
      if (a < 1) throw InvalidArgument("partial quotients must be >= 1, got " + a.get_str());
    PartialQuotientStream s(Kind::list, std::move(tag));
    s.pattern_ = std::move(quotients);
    return s;
  }

  /// Purely periodic expansion repeating `cycle` forever.
  static PartialQuotientStream periodic(std::vector<Integer> cycle, std::string tag) {
    if (cycle.empty()) throw InvalidArgument("periodic stream needs a nonempty cycle");
    for (const auto& a : cycle)
      if (a < 1) throw InvalidArgument("partial quotients must be >= 1, got " + a.get_str());
    PartialQuotientStream s(Kind::periodic, std::move(tag));
    s.pattern_ = std::move(cycle);
    return s;
  }

  static PartialQuotientStream golden() { return periodic({Integer(1)}, "golden"); }
  static PartialQuotientStream silver() { return periodic({Integer(2)}, "sqrt2-1"); }

  /// One decimal integer per line; blank lines and '#' comments ignored.
  static PartialQuotientStream load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open quotient file '" + path + "'");
    std::vector<Integer> qs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
      const auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      const auto e = line.find_last_not_of(" \t\r");
      std::string tok = line.substr(b, e - b + 1);
      if (tok.find_first_not_of("0123456789") != std::string::npos)
        throw InvalidArgument(path + ":" + std::to_string(lineno) + ": not a positive integer");
      qs.emplace_back(tok);
    }
    return from_list(std::move(qs), "file:" + path);
  }

  const std::string& tag() const noexcept { return tag_; }
  Kind kind() const noexcept { return kind_; }

  /// Partial quotient a_k, k >= 1.
  const Integer& a(std::size_t k) {
    require(k);
    return a_[k - 1];
  }
  /// Convergent numerator p_k; p_0 = 0.
  const Integer& p(std::size_t k) {
    if (k > 0) require(k);
    return p_[k];
  }
  /// Convergent denominator q_k; q_0 = 1.
  const Integer& q(std::size_t k) {
    if (k > 0) require(k);
    return q_[k];
  }

  /// True if a_k exists (extending if needed), false on exhaustion.
  bool has(std::size_t k) {
    while (a_.size() < k)
      if (!extend()) return false;
    return true;
  }

  std::size_t cached() const noexcept { return a_.size(); }

private:
  PartialQuotientStream(Kind kind, std::string tag) : kind_(kind), tag_(std::move(tag)) {}

  void require(std::size_t k) {
    if (k == 0) throw InvalidArgument("partial quotients are indexed from 1");
    if (!has(k))
      throw StreamExhausted("stream '" + tag_ + "' has no term a_" + std::to_string(k));
  }

  bool extend() {
    const std::size_t k = a_.size() + 1;
    Integer next;
    switch (kind_) {
      case Kind::list:
        if (k > pattern_.size()) return false;
        next = pattern_[k - 1];
        break;
      case Kind::periodic:
        next = pattern_[(k - 1) % pattern_.size()];
        break;
      case Kind::adaptive:
        if (k == 1) {
          next = 1;
        } else {
          const Integer& qk = q_[k - 1];
          if (bit_length(qk) * (k - 1) > max_bits_) return false;
          next = pow_of(qk, k - 1);
        }
        break;
    }
    a_.push_back(next);
    const std::size_t n = a_.size();
    // p_k = a_k p_{k-1} + p_{k-2}, with p_{-1} = 1, q_{-1} = 0.
    const Integer pm2 = n >= 2 ? p_[n - 2] : Integer(1);
    const Integer qm2 = n >= 2 ? q_[n - 2] : Integer(0);
    p_.push_back(next * p_[n - 1] + pm2);
    q_.push_back(next * q_[n - 1] + qm2);
    return true;
  }

  Kind kind_;
  std::string tag_;
  std::size_t max_bits_ = 0;
  std::vector<Integer> pattern_;
  std::vector<Integer> a_;
  std::vector<Integer> p_{Integer(0)};
  std::vector<Integer> q_{Integer(1)};
};

}  // namespace akc
