#include "rsm/numeric.hpp"

#include <charconv>
#include <cctype>
#include <cstdlib>
#include <system_error>

#include "rsm/errors.hpp"

namespace rsm {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::AlphabetMismatch: return "alphabet-mismatch";
        case ErrorCode::InvalidDistribution: return "invalid-distribution";
        case ErrorCode::NonStationary: return "non-stationary";
        case ErrorCode::CouplingMismatch: return "coupling-mismatch";
        case ErrorCode::DepthTooSmall: return "depth-too-small";
        case ErrorCode::MultipleInvariantMeasures: return "multiple-invariant-measures";
        case ErrorCode::UnknownExample: return "unknown-example";
        case ErrorCode::TruncationTooSmall: return "truncation-too-small";
        case ErrorCode::InconsistentTables: return "inconsistent-tables";
        case ErrorCode::NotUniformMartingale: return "not-uniform-martingale-at-resolution";
        case ErrorCode::Unsupported: return "unsupported";
        case ErrorCode::Precondition: return "precondition";
        case ErrorCode::CannotCertify: return "cannot-certify";
        case ErrorCode::TauNegative: return "tau-negative";
        case ErrorCode::AlphabetTooLarge: return "alphabet-too-large";
        case ErrorCode::IncompleteRepresentation: return "incomplete-representation";
        case ErrorCode::Parse: return "parse";
        case ErrorCode::WarmUp: return "warm-up";
        case ErrorCode::Overflow: return "overflow";
    }
    return "error";
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

[[noreturn]] void bad(std::string_view text) {
    throw Error(ErrorCode::Parse, "cannot parse numeric value '" + std::string(text) + "'");
}

Rational parse_decimal(std::string_view s, std::string_view original) {
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    long exponent = 0;
    auto epos = s.find_first_of("eE");
    if (epos != std::string_view::npos) {
        std::string_view ex = s.substr(epos + 1);
        s = s.substr(0, epos);
        bool eneg = false;
        if (!ex.empty() && (ex.front() == '-' || ex.front() == '+')) {
            eneg = ex.front() == '-';
            ex.remove_prefix(1);
        }
        if (!all_digits(ex) || ex.size() > 6) bad(original);
        exponent = std::strtol(std::string(ex).c_str(), nullptr, 10);
        if (eneg) exponent = -exponent;
    }
    std::string digits;
    auto dot = s.find('.');
    std::string_view ip = s.substr(0, dot);
    std::string_view fp = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    if (ip.empty() && fp.empty()) bad(original);
    if ((!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp))) bad(original);
    digits.append(ip);
    digits.append(fp);
    exponent -= static_cast<long>(fp.size());
    mpz_class num(digits.empty() ? std::string("0") : digits, 10);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
    Rational r;
    if (exponent >= 0) {
        r = Rational(num * scale);
    } else {
        r = Rational(num, scale);
        r.canonicalize();
    }
    if (negative) r = -r;
    return r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    std::string_view s = trim(text);
    if (s.empty()) bad(text);
    auto slash = s.find('/');
    if (slash != std::string_view::npos) {
        std::string_view a = trim(s.substr(0, slash));
        std::string_view b = trim(s.substr(slash + 1));
        bool neg = false;
        if (!a.empty() && (a.front() == '-' || a.front() == '+')) {
            neg = a.front() == '-';
            a.remove_prefix(1);
        }
        if (!all_digits(a) || !all_digits(b)) bad(text);
        mpz_class num(std::string(a), 10), den(std::string(b), 10);
        if (den == 0) bad(text);
        Rational r(num, den);
        r.canonicalize();
        if (neg) r = -r;
        return r;
    }
    return parse_decimal(s, text);
}

std::string shortest_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    if (res.ec != std::errc()) return std::to_string(x);
    return std::string(buf, res.ptr);
}

Rational ScalarTraits<Rational>::ratio(long num, long den) {
    Rational r(num, den);
    r.canonicalize();
    return r;
}

Rational ScalarTraits<Rational>::from_double(double x) {
    // go through the shortest decimal so 0.1 becomes 1/10
    return parse_rational(shortest_double(x));
}

Rational ScalarTraits<Rational>::parse(std::string_view text) { return parse_rational(text); }

std::string ScalarTraits<Rational>::format(const Rational& x) { return x.get_str(); }

double ScalarTraits<double>::parse(std::string_view text) {
    std::string_view s = trim(text);
    if (s.find('/') != std::string_view::npos) return parse_rational(s).get_d();
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        // from_chars rejects a leading '+'
        if (!s.empty() && s.front() == '+') return parse(s.substr(1));
        bad(text);
    }
    return v;
}

std::string ScalarTraits<double>::format(double x) { return shortest_double(x); }

template <>
Rational inv_pow2<Rational>(unsigned k) {
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 2, k);
    Rational r(mpz_class(1), den);
    return r;
}

template <>
double inv_pow2<double>(unsigned k) {
    return std::ldexp(1.0, -static_cast<int>(k));
}

}  // namespace rsm
