#ifndef MOT_SCALAR_HPP
#define MOT_SCALAR_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace mot {

// Exact arithmetic backend for the rational mode. All core algorithms are
// templated on the scalar type; S is either double or Rational.
using Rational = boost::multiprecision::cpp_rational;

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<double> {
    static constexpr bool exact = false;
    static double default_tol() { return 1e-12; }
    static double solver_tol() { return 1e-9; }
};

template <>
struct scalar_traits<Rational> {
    static constexpr bool exact = true;
    static Rational default_tol() { return Rational(0); }
    static Rational solver_tol() { return Rational(0); }
};

template <class S>
inline constexpr bool is_exact_v = scalar_traits<S>::exact;

inline double abs_value(double x) { return std::fabs(x); }
inline Rational abs_value(const Rational& x) { return x < 0 ? Rational(-x) : x; }

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

inline std::string scalar_to_string(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string scalar_to_string(const Rational& x) {
    if (denominator(x) == 1) return numerator(x).str();
    return numerator(x).str() + "/" + denominator(x).str();
}

// Accepts integers, fractions "p/q", and plain decimal strings ("-1.25").
inline Rational rational_from_string(const std::string& text) {
    auto bad = [&]() { return std::invalid_argument("not a rational literal: '" + text + "'"); };
    if (text.empty()) throw bad();
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        boost::multiprecision::cpp_int num(text.substr(0, slash));
        boost::multiprecision::cpp_int den(text.substr(slash + 1));
        if (den == 0) throw bad();
        return Rational(num, den);
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) return Rational(boost::multiprecision::cpp_int(text));
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    std::size_t frac_len = text.size() - dot - 1;
    if (frac_len == 0) throw bad();
    boost::multiprecision::cpp_int num(digits);
    boost::multiprecision::cpp_int den = 1;
    for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
    return Rational(num, den);
}

template <class S>
S scalar_from_string(const std::string& text);

template <>
inline double scalar_from_string<double>(const std::string& text) {
    auto slash = text.find('/');
    if (slash != std::string::npos)
        return std::stod(text.substr(0, slash)) / std::stod(text.substr(slash + 1));
    return std::stod(text);
}

template <>
inline Rational scalar_from_string<Rational>(const std::string& text) {
    return rational_from_string(text);
}

}  // namespace mot

#endif
