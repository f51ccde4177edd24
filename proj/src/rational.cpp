#include "bgp/rational.hpp"

#include <stdexcept>

namespace bgp {

Rational rational_from_string(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty rational literal");
    const auto dot = text.find('.');
    try {
        if (dot == std::string::npos) {
            Rational value(text);  // handles "p" and "p/q"
            if (value.get_den() == 0)
                throw std::invalid_argument("zero denominator: " + text);
            value.canonicalize();
            return value;
        }
        const std::string whole = text.substr(0, dot);
        const std::string frac = text.substr(dot + 1);
        if (frac.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("malformed decimal");
        BigInt denom = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) denom *= 10;
        const bool negative = !whole.empty() && whole[0] == '-';
        const std::string whole_digits =
            (negative || (!whole.empty() && whole[0] == '+')) ? whole.substr(1)
                                                              : whole;
        BigInt numer = whole_digits.empty() ? BigInt(0) : BigInt(whole_digits);
        numer = numer * denom + (frac.empty() ? BigInt(0) : BigInt(frac));
        if (negative) numer = -numer;
        Rational value(numer, denom);
        value.canonicalize();
        return value;
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed rational literal: " + text);
    }
}

std::string rational_to_string(const Rational& value) {
    Rational v = value;
    v.canonicalize();
    return v.get_str();
}

BigInt binomial(unsigned long n, unsigned long k) {
    BigInt result;
    mpz_bin_uiui(result.get_mpz_t(), n, k);
    return result;
}

long ceil_to_long(const Rational& value) {
    BigInt q;
    mpz_cdiv_q(q.get_mpz_t(), value.get_num().get_mpz_t(),
               value.get_den().get_mpz_t());
    if (!q.fits_slong_p()) throw std::overflow_error("ceiling overflows long");
    return q.get_si();
}

}  // namespace bgp
