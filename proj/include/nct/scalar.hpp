#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <type_traits>

namespace nct {

/// Exact coefficient type for identity tests; arithmetic never rounds.
using Rational = boost::multiprecision::cpp_rational;

/// The two coefficient modes of the library. A computation fixes one mode:
/// Rational for coefficientwise identities, double for norm certificates.
template <class S>
struct scalar_traits;

template <>
struct scalar_traits<double> {
    static constexpr bool is_exact = false;
    static double zero() { return 0.0; }
    static double one() { return 1.0; }
    static bool is_zero(double v) { return v == 0.0; }
    static double to_double(double v) { return v; }
    static double from_int(long long n) { return static_cast<double>(n); }
    static double ratio(long long num, long long den) {
        return static_cast<double>(num) / static_cast<double>(den);
    }
    static double div_int(double v, long long d) { return v / static_cast<double>(d); }
    static double abs_double(double v) { return std::fabs(v); }
};

template <>
struct scalar_traits<Rational> {
    static constexpr bool is_exact = true;
    static Rational zero() { return Rational(0); }
    static Rational one() { return Rational(1); }
    static bool is_zero(const Rational& v) { return v.is_zero(); }
    static double to_double(const Rational& v) { return v.convert_to<double>(); }
    static Rational from_int(long long n) { return Rational(n); }
    static Rational ratio(long long num, long long den) { return Rational(num, den); }
    static Rational div_int(const Rational& v, long long d) { return v / Rational(d); }
    static double abs_double(const Rational& v) { return std::fabs(v.convert_to<double>()); }
};

template <class S>
concept ScalarMode = std::is_same_v<S, double> || std::is_same_v<S, Rational>;

}  // namespace nct
