#ifndef AVOL_RATIONAL_HPP
#define AVOL_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace avol {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// "p/q" (or plain "p" for integers), canonical form.
inline std::string fraction_string(const Rational& r) { return r.str(); }

// Fixed-point decimal with the given number of fractional digits, round to nearest.
std::string decimal_string(const Rational& r, int digits = 17);

// Parse "p/q", "p", or a plain decimal like "-0.125".
Rational parse_rational(const std::string& text);

}  // namespace avol

#endif
