#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace rsm {

using Rational = mpq_class;

enum class Backend { exact, floating };

/// Default tolerance used by the floating backend.
inline constexpr double kDefaultFloatTolerance = 1e-12;

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
    static constexpr bool exact = true;
    static constexpr Backend backend = Backend::exact;
    static Rational zero() { return Rational(0); }
    static Rational one() { return Rational(1); }
    static Rational ratio(long num, long den);
    static Rational from_double(double x);
    static double to_double(const Rational& x) { return x.get_d(); }
    static Rational parse(std::string_view text);
    static std::string format(const Rational& x);
    static double default_tolerance() { return 0.0; }
};

template <>
struct ScalarTraits<double> {
    static constexpr bool exact = false;
    static constexpr Backend backend = Backend::floating;
    static double zero() { return 0.0; }
    static double one() { return 1.0; }
    static double ratio(long num, long den) { return static_cast<double>(num) / static_cast<double>(den); }
    static double from_double(double x) { return x; }
    static double to_double(double x) { return x; }
    static double parse(std::string_view text);
    static std::string format(double x);
    static double default_tolerance() { return kDefaultFloatTolerance; }
};

template <class T>
T ratio(long num, long den) {
    return ScalarTraits<T>::ratio(num, den);
}

template <class T>
double to_double(const T& x) {
    return ScalarTraits<T>::to_double(x);
}

template <class T>
T parse_value(std::string_view text) {
    return ScalarTraits<T>::parse(text);
}

template <class T>
std::string format_value(const T& x) {
    return ScalarTraits<T>::format(x);
}

template <class T>
T abs_value(const T& x) {
    if (x < 0) return T(-x);
    return x;
}

/// Exact parse of "p/q", integers and decimals with optional exponent.
Rational parse_rational(std::string_view text);

/// Shortest decimal text that round-trips the double.
std::string shortest_double(double x);

// Tolerance-aware comparisons; tol is zero for the exact backend.
template <class T>
bool le_tol(const T& a, const T& b, double tol) {
    if (tol == 0.0) return a <= b;
    return to_double(T(a - b)) <= tol;
}

template <class T>
bool eq_tol(const T& a, const T& b, double tol) {
    if (tol == 0.0) return a == b;
    return std::fabs(to_double(T(a - b))) <= tol;
}

template <class T>
bool is_zero_tol(const T& a, double tol) {
    if (tol == 0.0) return a == 0;
    return std::fabs(to_double(a)) <= tol;
}

/// Power of two with a negative exponent, 2^-k.
template <class T>
T inv_pow2(unsigned k);

}  // namespace rsm
