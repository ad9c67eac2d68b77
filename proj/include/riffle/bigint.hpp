#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace riffle {

using Integer = mpz_class;
using Rational = mpq_class;

static_assert(sizeof(unsigned long) == 8, "64-bit unsigned long expected");

inline Integer from_u64(std::uint64_t v) { return Integer(static_cast<unsigned long>(v)); }

inline Integer factorial(unsigned long n) {
  Integer r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

// C(n, k); zero when k > n.
inline Integer binomial(unsigned long n, unsigned long k) {
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

inline Integer power(unsigned long base, unsigned long exponent) {
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), base, exponent);
  return r;
}

// n (n-1) ... (n-k+1)
inline Integer falling_factorial(unsigned long n, unsigned long k) {
  if (k > n) return 0;
  Integer r = 1;
  for (unsigned long i = 0; i < k; ++i) r *= n - i;
  return r;
}

inline Rational make_rational(const Integer& num, const Integer& den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline double to_double(const Rational& q) { return q.get_d(); }

inline std::string to_string(const Integer& z) { return z.get_str(); }
inline std::string to_string(const Rational& q) { return q.get_str(); }

inline Integer parse_integer(const std::string& s) { return Integer(s, 10); }

}  // namespace riffle
