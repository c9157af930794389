#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "b4nls/error.hpp"

// Exact arithmetic for the resonant phases lambda_k^4 + lambda_l^4 on S^5.
// Everything up to the final log-log fit is integer or rational.

namespace b4nls::resonance {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using Pair = std::pair<std::int64_t, std::int64_t>;

struct Beta {
  std::int64_t p = 0;
  std::int64_t q = 1;

  void validate() const {
    require(q >= 1, "beta denominator must be positive");
    require(std::gcd(p, q) == 1, "beta must be given in lowest terms (gcd(p, q) = 1)");
  }
  Rational value() const { return Rational(p, q); }
};

/// A = k (k + 4), the quantity whose square plus beta times itself is lambda_k^4.
inline BigInt shell(std::int64_t k) { return BigInt(k) * (k + 4); }

inline Rational lambda4(std::int64_t k, std::int64_t p, std::int64_t q) {
  require(k >= 1, "lambda4 needs k >= 1");
  Beta{p, q}.validate();
  const BigInt a = shell(k);
  return Rational(a * a) + Rational(p, q) * Rational(a);
}

/// Ordered pairs (k, l) with K <= k < 2K, L <= l < 2L and tau = lambda_k^4 + lambda_l^4,
/// by scanning the whole dyadic box.
inline std::vector<Pair> enumerate_A(std::int64_t K, std::int64_t L, const Rational& tau, std::int64_t p,
                                     std::int64_t q) {
  require(K >= 1 && K <= L, "dyadic ranges need 1 <= K <= L");
  std::vector<Rational> lam_l;
  for (std::int64_t l = L; l < 2 * L; ++l) lam_l.push_back(lambda4(l, p, q));
  std::vector<Pair> out;
  for (std::int64_t k = K; k < 2 * K; ++k) {
    const Rational rest = tau - lambda4(k, p, q);
    for (std::int64_t l = L; l < 2 * L; ++l)
      if (lam_l[static_cast<std::size_t>(l - L)] == rest) out.emplace_back(k, l);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sums of two squares

/// Floor square root by integer Newton iteration.
inline BigInt isqrt(const BigInt& n) {
  require(n >= 0, "square root of a negative integer");
  if (n < 2) return n;
  BigInt x = BigInt(1) << ((msb(n) / 2) + 1);
  while (true) {
    const BigInt y = (x + n / x) >> 1;
    if (y >= x) return x;
    x = y;
  }
}

inline bool is_square(const BigInt& n, BigInt& root) {
  if (n < 0) return false;
  root = isqrt(n);
  return root * root == n;
}

inline std::uint64_t isqrt64(std::uint64_t n) {
  if (n < 2) return n;
  std::uint64_t x = std::uint64_t{1} << ((64 - __builtin_clzll(n)) / 2 + 1);
  while (true) {
    const std::uint64_t y = (x + n / x) >> 1;
    if (y >= x) return x;
    x = y;
  }
}

/// r_2(n) by scanning x = 0 .. sqrt(n); intended for n <= 10^6.
inline std::int64_t r2_scan(const BigInt& n) {
  require(n >= 0 && n < (BigInt(1) << 62), "r2 scan needs 0 <= n < 2^62");
  const auto m = static_cast<std::uint64_t>(n);
  if (m == 0) return 1;
  std::int64_t count = 0;
  for (std::uint64_t x = 0; x * x <= m; ++x) {
    const std::uint64_t rest = m - x * x, y = isqrt64(rest);
    if (y * y != rest) continue;
    // (±x, ±y) with signs collapsing on zero coordinates.
    count += (x == 0 || y == 0) ? 2 : 4;
  }
  return count;
}

/// r_2(n) = 4 prod_{p = 1 mod 4} (e_p + 1) when every prime 3 mod 4 has an even
/// exponent, and 0 otherwise. Trial division gives up past `max_divisor`.
inline std::int64_t r2_factor(const BigInt& n, const BigInt& max_divisor = BigInt(1) << 32) {
  require(n >= 0, "r2 needs n >= 0");
  if (n == 0) return 1;
  BigInt m = n;
  while ((m & 1) == 0) m >>= 1;
  std::int64_t prod = 1;
  for (BigInt d = 3; d * d <= m; d += 2) {
    if (d > max_divisor)
      throw NumericalError("factorization budget exhausted for r2(" + n.str() + ")");
    if (m % d != 0) continue;
    int e = 0;
    while (m % d == 0) {
      m /= d;
      ++e;
    }
    if (d % 4 == 3) {
      if (e % 2) return 0;
    } else {
      prod *= e + 1;
    }
  }
  if (m > 1) {
    if (m % 4 == 3) return 0;
    prod *= 2;
  }
  return 4 * prod;
}

/// r_2(n) with both routes cross-checked whenever the scan is affordable.
inline std::int64_t two_squares_oracle(const BigInt& n) {
  const std::int64_t by_factor = r2_factor(n);
  if (n <= 1000000) {
    const std::int64_t by_scan = r2_scan(n);
    if (by_scan != by_factor)
      throw NumericalError("r2(" + n.str() + ") disagrees: scan " + std::to_string(by_scan) + ", factorization " +
                           std::to_string(by_factor));
  }
  return by_factor;
}

// ---------------------------------------------------------------------------
// Reduction: 4 q^2 tau + 2 p^2 = (2qA + p)^2 + (2qB + p)^2

/// The integer n = 4 q^2 tau + 2 p^2; throws if tau has a denominator not dividing q.
inline BigInt reduced_integer(const Rational& tau, std::int64_t p, std::int64_t q) {
  const Rational n = Rational(4 * q * q) * tau + Rational(2 * p * p);
  require(denominator(n) == 1, "tau is not of the form lambda_k^4 + lambda_l^4 for this beta");
  return numerator(n);
}

/// If x = 2qA + p with A = j (j + 4) for an integer j >= 1, returns j.
inline std::optional<std::int64_t> invert_shell(const BigInt& x, std::int64_t p, std::int64_t q) {
  const BigInt num = x - p;
  if (num <= 0 || num % (2 * q) != 0) return std::nullopt;
  BigInt root;
  if (!is_square(num / (2 * q) + 4, root) || root < 3) return std::nullopt;
  return static_cast<std::int64_t>(root - 2);
}

/// #A_{K,L}(tau) recovered from representations n = x^2 + y^2 with x and y of
/// the admissible form 2q k(k+4) + p. x runs over the K box, y is recovered
/// by an exact square root and inverted back to l.
inline std::int64_t reduction_count(std::int64_t K, std::int64_t L, const Rational& tau, std::int64_t p,
                                    std::int64_t q) {
  require(K >= 1 && K <= L, "dyadic ranges need 1 <= K <= L");
  Beta{p, q}.validate();
  const BigInt n = reduced_integer(tau, p, q);
  std::int64_t count = 0;
  BigInt y;
  for (std::int64_t k = K; k < 2 * K; ++k) {
    const BigInt x = 2 * q * shell(k) + p;
    if (!is_square(n - x * x, y)) continue;
    std::vector<BigInt> candidates{y};
    if (y != 0) candidates.push_back(-y);
    for (const auto& cand : candidates) {
      const auto l = invert_shell(cand, p, q);
      if (l && *l >= L && *l < 2 * L) ++count;
    }
  }
  return count;
}

// ---------------------------------------------------------------------------
// Tables, sweeps and periods

struct ResonanceTable {
  Beta beta;
  std::int64_t K = 1, L = 1;
  std::map<Rational, std::vector<Pair>> pairs;  // tau -> ordered pairs in the box
  std::size_t max_count = 0;
};

inline ResonanceTable build_table(std::int64_t K, std::int64_t L, std::int64_t p, std::int64_t q) {
  require(K >= 1 && K <= L, "dyadic ranges need 1 <= K <= L");
  ResonanceTable t{Beta{p, q}, K, L, {}, 0};
  t.beta.validate();
  for (std::int64_t k = K; k < 2 * K; ++k)
    for (std::int64_t l = L; l < 2 * L; ++l) {
      auto& v = t.pairs[lambda4(k, p, q) + lambda4(l, p, q)];
      v.emplace_back(k, l);
      t.max_count = std::max(t.max_count, v.size());
    }
  return t;
}

/// Minimal period of t -> exp(i t (lambda_k^4 + lambda_l^4)) in units of 2 pi,
/// i.e. b / |a| for tau = a / b in lowest terms; empty when tau = 0.
inline std::optional<Rational> phase_period(std::int64_t k, std::int64_t l, std::int64_t p, std::int64_t q) {
  const Rational tau = lambda4(k, p, q) + lambda4(l, p, q);
  if (tau == 0) return std::nullopt;
  return Rational(denominator(tau), abs(numerator(tau)));
}

struct SweepRow {
  std::int64_t K = 1;
  Rational tau;        // first tau (in increasing order) attaining the maximum
  std::size_t count = 0;  // max_tau #A_{K,K}(tau)
  std::size_t distinct_tau = 0;
};

struct SweepResult {
  Beta beta;
  std::vector<SweepRow> rows;
  double exponent = 0.0;  // least-squares slope of log(max count) against log K
  std::int64_t cross_checked_up_to = 0;  // largest K whose every tau passed the reduction check
};

struct SweepOptions {
  std::int64_t cross_check_max_K = 256;
};

/// For each dyadic K <= K_max, the largest multiplicity of tau over the box
/// [K, 2K)^2. Phases are keyed by the integer q * tau, exact in 128 bits for
/// the admitted parameter range. For K up to the cross-check limit every tau
/// is recounted through the two-squares reduction.
inline SweepResult counting_sweep(std::int64_t K_max, std::int64_t p, std::int64_t q, const SweepOptions& opt = {}) {
  Beta{p, q}.validate();
  require(K_max >= 1 && (K_max & (K_max - 1)) == 0, "K_max must be a power of two");
  require(K_max <= (std::int64_t{1} << 20) && std::abs(p) <= (1 << 20) && q <= (1 << 20),
          "sweep parameters exceed the exact 128-bit range");
  using I128 = __int128;
  const auto to_big = [](I128 v) {
    const bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
    BigInt out = static_cast<std::uint64_t>(u >> 64);
    out <<= 64;
    out += static_cast<std::uint64_t>(u);
    return neg ? BigInt(-out) : out;
  };

  SweepResult res;
  res.beta = Beta{p, q};
  for (std::int64_t K = 1; K <= K_max; K *= 2) {
    // q * lambda_j^4 = q A^2 + p A.
    std::vector<I128> ql;
    for (std::int64_t j = K; j < 2 * K; ++j) {
      const I128 a = static_cast<I128>(j) * (j + 4);
      ql.push_back(q * a * a + p * a);
    }
    std::map<I128, std::size_t> counts;
    for (const I128 x : ql)
      for (const I128 y : ql) ++counts[x + y];
    SweepRow row{K, Rational(0), 0, counts.size()};
    for (const auto& [key, c] : counts)
      if (c > row.count) {
        row.count = c;
        row.tau = Rational(to_big(key), BigInt(q));
      }
    if (K <= opt.cross_check_max_K) {
      for (const auto& [key, c] : counts) {
        const Rational tau(to_big(key), BigInt(q));
        const auto r = reduction_count(K, K, tau, p, q);
        if (r != static_cast<std::int64_t>(c))
          throw NumericalError("reduction count " + std::to_string(r) + " differs from box count " +
                               std::to_string(c) + " at K = " + std::to_string(K));
      }
      res.cross_checked_up_to = K;
    }
    res.rows.push_back(row);
  }

  const auto n = static_cast<double>(res.rows.size());
  if (res.rows.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : res.rows) {
      const double x = std::log(static_cast<double>(r.K)), y = std::log(static_cast<double>(r.count));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    res.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return res;
}

/// `K,tau_numerator,tau_denominator,count`, one row per dyadic K at its maximizing tau.
inline void write_sweep_csv(std::ostream& os, const SweepResult& res) {
  os << "K,tau_numerator,tau_denominator,count\n";
  for (const auto& r : res.rows)
    os << r.K << ',' << numerator(r.tau).str() << ',' << denominator(r.tau).str() << ',' << r.count << '\n';
}

inline void write_sweep_summary(std::ostream& os, const SweepResult& res) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", res.exponent);
  os << "{ \"beta\": \"" << res.beta.p << '/' << res.beta.q << "\", \"K_max\": "
     << (res.rows.empty() ? 0 : res.rows.back().K) << ", \"growth_exponent\": " << buf
     << ", \"cross_checked_up_to\": " << res.cross_checked_up_to << " }\n";
}

}  // namespace b4nls::resonance
