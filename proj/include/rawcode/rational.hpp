#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "rawcode/error.hpp"

namespace rawcode {

// Exact arithmetic kernel. mpq_class keeps values canonical (reduced, positive
// denominator) after every operation.
using BigInt = mpz_class;
using Rational = mpq_class;
using u128 = unsigned __int128;

inline Rational make_rational(long num, unsigned long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline Rational make_rational(const BigInt& num, const BigInt& den) {
  if (den == 0) throw DomainError("zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// 2^e for any signed exponent.
inline Rational pow2(long e) {
  BigInt p = 1;
  if (e >= 0) {
    mpz_mul_2exp(p.get_mpz_t(), p.get_mpz_t(), static_cast<mp_bitcnt_t>(e));
    return Rational(p);
  }
  mpz_mul_2exp(p.get_mpz_t(), p.get_mpz_t(), static_cast<mp_bitcnt_t>(-e));
  return make_rational(BigInt(1), p);
}

inline std::string to_string(const Rational& r) { return r.get_str(); }
inline std::string to_string(const BigInt& z) { return z.get_str(); }

inline double to_double(const Rational& r) { return r.get_d(); }

inline BigInt floor_of(const Rational& r) {
  BigInt q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

inline BigInt ceil_of(const Rational& r) {
  BigInt q;
  mpz_cdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

// Fractional part in [0,1).
inline Rational frac(const Rational& r) { return r - Rational(floor_of(r)); }

inline bool is_power_of_two(const BigInt& z) {
  return z > 0 && mpz_popcount(z.get_mpz_t()) == 1;
}

// If r = m / 2^e in lowest terms, returns e.
inline std::optional<unsigned long> dyadic_exponent(const Rational& r) {
  const BigInt& den = r.get_den();
  if (!is_power_of_two(den)) return std::nullopt;
  return mpz_scan1(den.get_mpz_t(), 0);
}

inline bool fits_u128(const BigInt& z) {
  return z >= 0 && mpz_sizeinbase(z.get_mpz_t(), 2) <= 128;
}

inline u128 to_u128(const BigInt& z) {
  if (!fits_u128(z)) throw DomainError("integer does not fit 128 bits: " + z.get_str());
  u128 out = 0;
  std::uint64_t words[2] = {0, 0};
  size_t count = 0;
  mpz_export(words, &count, -1, sizeof(std::uint64_t), 0, 0, z.get_mpz_t());
  out = (static_cast<u128>(words[1]) << 64) | words[0];
  return out;
}

inline BigInt from_u128(u128 v) {
  std::uint64_t words[2] = {static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(v >> 64)};
  BigInt z;
  mpz_import(z.get_mpz_t(), 2, -1, sizeof(std::uint64_t), 0, 0, words);
  return z;
}

inline BigInt from_u64(std::uint64_t v) { return from_u128(v); }

// Parses "p", "p/q", or a plain decimal such as "0.25" / "-1.5" into an exact
// rational.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational { throw InputError("malformed rational '" + std::string(text) + "'"); };
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (text.empty()) return fail();

  auto parse_int = [&](std::string_view s, BigInt& out) {
    if (s.empty()) return false;
    size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (size_t j = i; j < s.size(); ++j)
      if (s[j] < '0' || s[j] > '9') return false;
    std::string buf(s[0] == '+' ? s.substr(1) : s);
    return out.set_str(buf, 10) == 0;
  };

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    BigInt num, den;
    if (!parse_int(text.substr(0, slash), num)) return fail();
    std::string_view d = text.substr(slash + 1);
    if (!d.empty() && (d[0] == '-' || d[0] == '+')) return fail();
    if (!parse_int(d, den) || den == 0) return fail();
    return make_rational(num, den);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view fraction = text.substr(dot + 1);
    bool negative = !whole.empty() && whole[0] == '-';
    if (!whole.empty() && (whole[0] == '-' || whole[0] == '+')) whole.remove_prefix(1);
    BigInt w = 0, f = 0;
    if (!whole.empty() && !parse_int(whole, w)) return fail();
    if (!fraction.empty() && (fraction[0] == '-' || fraction[0] == '+')) return fail();
    if (!fraction.empty() && !parse_int(fraction, f)) return fail();
    if (whole.empty() && fraction.empty()) return fail();
    BigInt scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, fraction.size());
    Rational r = Rational(w) + make_rational(f, scale);
    return negative ? Rational(-r) : r;
  }
  BigInt n;
  if (!parse_int(text, n)) return fail();
  return Rational(n);
}

} // namespace rawcode
