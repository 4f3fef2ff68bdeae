#pragma once

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace libpin {

// Every ratio in the engine (Jaccard scores, feature similarity, indicator
// sums, overlap) is kept exact; decimals exist only in rendered reports.
using Rational = boost::multiprecision::cpp_rational;

Rational make_ratio(std::int64_t numerator, std::int64_t denominator);

// "n/d", or "n" when the denominator is 1.
std::string to_exact_string(const Rational& value);

// Round-half-up decimal rendering with a fixed number of places.
std::string to_decimal_string(const Rational& value, int places = 6);

double to_double(const Rational& value);

}  // namespace libpin
