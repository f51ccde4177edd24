// rational.hpp — exact arbitrary-precision rationals for the coupling
// machinery. Thin helpers over GMP's canonical mpq/mpz types.
#pragma once

#include <gmpxx.h>

#include <string>

namespace bgp {

using Rational = mpq_class;
using BigInt = mpz_class;

/// Parses "p/q", a plain integer, or a decimal like "0.25" into a canonical
/// rational. Throws std::invalid_argument on malformed input.
Rational rational_from_string(const std::string& text);

/// Canonical "p/q" (or "p" when the denominator is 1).
std::string rational_to_string(const Rational& value);

/// Exact binomial coefficient; zero when k > n.
BigInt binomial(unsigned long n, unsigned long k);

/// Exact ceiling of a rational.
long ceil_to_long(const Rational& value);

}  // namespace bgp
