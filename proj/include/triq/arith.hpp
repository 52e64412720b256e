#ifndef TRIQ_ARITH_HPP
#define TRIQ_ARITH_HPP

#include <gmpxx.h>

#include <optional>

namespace triq {

using Int = mpz_class;
using Rat = mpq_class;

// Deterministic primality test. Valid for all n below 3.317e24 (fixed
// Miller-Rabin witness set); larger inputs are rejected with
// std::domain_error rather than answered probabilistically.
bool is_prime(const Int& n);

// Legendre symbol (a|p). Requires p an odd prime; throws
// std::invalid_argument otherwise.
int legendre(const Int& a, const Int& p);

// Floor of the square root. Requires n >= 0.
Int isqrt(const Int& n);

// Exact square test: returns r >= 0 with r*r == n, or nullopt.
// No floating point anywhere; inputs may be thousands of digits.
std::optional<Int> is_perfect_square(const Int& n);

// Same test for rationals (numerator and denominator both squares).
std::optional<Rat> is_rational_square(const Rat& x);

// 2-adic valuation and odd part of n != 0.
unsigned long v2(const Int& n);
Int odd_part(const Int& n);

// Squarefree test, complete for |d| < 10^18 (trial division to 1e6 plus
// cofactor analysis). Larger inputs throw std::domain_error.
bool is_squarefree(const Int& d);

}  // namespace triq

#endif
