#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

#include <boost/multiprecision/cpp_int.hpp>

#include "plab/error.hpp"

namespace plab {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Exact value of "7", "-3/4", "0.55" or "1.5e-3".
inline Rational parse_rational(const std::string& text) {
    auto fail = [&] { return Error("not a rational number: '" + text + "'"); };
    if (text.empty()) throw fail();
    try {
        if (const auto slash = text.find('/'); slash != std::string::npos) {
            const auto integer = [&](std::string part) {
                std::size_t sign = (!part.empty() && (part[0] == '-' || part[0] == '+')) ? 1 : 0;
                if (part.size() == sign || part.find_first_not_of("0123456789", sign) != std::string::npos) throw fail();
                part.erase(sign, std::min(part.find_first_not_of('0', sign), part.size() - 1) - sign);
                return BigInt(part);
            };
            const BigInt num = integer(text.substr(0, slash));
            const BigInt den = integer(text.substr(slash + 1));
            if (den == 0) throw fail();
            return Rational(num, den);
        }
        std::size_t pos = 0;
        bool negative = false;
        if (text[pos] == '+' || text[pos] == '-') negative = text[pos++] == '-';
        std::string digits;
        long exponent = 0;
        bool seen_point = false, seen_digit = false;
        for (; pos < text.size(); ++pos) {
            const char c = text[pos];
            if (c >= '0' && c <= '9') {
                digits.push_back(c);
                seen_digit = true;
                if (seen_point) --exponent;
            } else if (c == '.' && !seen_point) {
                seen_point = true;
            } else if (c == 'e' || c == 'E') {
                exponent += std::stol(text.substr(pos + 1));
                pos = text.size();
                break;
            } else {
                throw fail();
            }
        }
        if (!seen_digit) throw fail();
        // cpp_int reads a leading 0 as an octal prefix
        digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
        Rational value{BigInt(digits)};
        BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::labs(exponent)));
        value = exponent >= 0 ? value * Rational(scale) : value / Rational(scale);
        return negative ? Rational(-value) : value;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw fail();
    }
}

// Shortest decimal that round-trips the double, read exactly.
inline Rational rational_from_double(double x) {
    if (!std::isfinite(x)) throw Error("non-finite value cannot be made rational");
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw Error("double formatting failed");
    return parse_rational(std::string(buf, end));
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string to_string(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace plab
