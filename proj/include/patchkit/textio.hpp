#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <system_error>

#include "patchkit/errors.hpp"

namespace patchkit {

/// Shortest decimal form that parses back to the identical double.
/// Locale-independent by construction.
inline std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

/// Fixed significant-digit general form (for interchange formats that pin a
/// minimum precision).
inline std::string format_double(double value, int sig_digits) {
    char buf[80];
    const auto res =
        std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, sig_digits);
    return std::string(buf, res.ptr);
}

/// Parses a whole token as a finite double; no partial consumption, no locale.
inline bool parse_double(std::string_view token, double& out) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc{} && res.ptr == last && std::isfinite(out);
}

/// Parses a whole token as an int.
inline bool parse_int(std::string_view token, int& out) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc{} && res.ptr == last;
}

/// Strips leading and trailing ASCII whitespace.
inline std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

/// Unit-scaled decimal text, exact by construction. Scaling a stored double
/// by a power of ten for display (m -> mm, Hz -> GHz) must not round through
/// another multiplication, or values stop round-tripping bit-for-bit; these
/// helpers shift the decimal exponent in text instead, so the only rounding
/// anywhere is the single correctly-rounded from_chars conversion.
namespace scaled {

/// Splits "mantissa[e exponent]" and returns mantissa; exp_out accumulates.
inline std::string_view split_exponent(std::string_view token, int& exp_out) {
    const auto e = token.find_first_of("eE");
    exp_out = 0;
    if (e == std::string_view::npos) return token;
    std::string_view etxt = token.substr(e + 1);
    if (!etxt.empty() && etxt.front() == '+') etxt.remove_prefix(1);
    if (!parse_int(etxt, exp_out)) return {};
    return token.substr(0, e);
}

/// token * 10^shift as a correctly rounded finite double.
inline bool parse_shifted(std::string_view token, int shift, double& out) {
    int exp = 0;
    const std::string_view mantissa = split_exponent(token, exp);
    if (mantissa.empty()) return false;
    std::string rebuilt{mantissa};
    rebuilt += 'e';
    rebuilt += std::to_string(exp + shift);
    return parse_double(rebuilt, out);
}

/// value * 10^shift as decimal text, exact in the decimal domain: the
/// shortest scientific form of `value` has its exponent adjusted textually,
/// then is prettified to plain notation when the exponent is moderate.
inline std::string format_shifted(double value, int shift) {
    if (value == 0.0) return std::signbit(value) ? "-0" : "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::scientific);
    std::string_view sci(buf, static_cast<std::size_t>(res.ptr - buf));

    int exp = 0;
    std::string_view mantissa = split_exponent(sci, exp);
    exp += shift;

    std::string sign;
    if (!mantissa.empty() && mantissa.front() == '-') {
        sign = "-";
        mantissa.remove_prefix(1);
    }
    std::string digits;
    for (char ch : mantissa)
        if (ch != '.') digits += ch;
    while (digits.size() > 1 && digits.back() == '0') digits.pop_back();

    // Decimal point sits after `point` digits (scientific form: one leading digit).
    const int point = 1 + exp;
    const int len = static_cast<int>(digits.size());
    if (point >= -3 && point <= 17) {
        if (point <= 0) return sign + "0." + std::string(static_cast<std::size_t>(-point), '0') + digits;
        if (point >= len) return sign + digits + std::string(static_cast<std::size_t>(point - len), '0');
        return sign + digits.substr(0, static_cast<std::size_t>(point)) + "." +
               digits.substr(static_cast<std::size_t>(point));
    }
    std::string out = sign + digits.substr(0, 1);
    if (digits.size() > 1) out += "." + digits.substr(1);
    out += "e" + std::to_string(exp);
    return out;
}

} // namespace scaled

} // namespace patchkit
