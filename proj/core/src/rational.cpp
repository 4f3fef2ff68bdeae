#include "libpin/rational.hpp"

#include "libpin/error.hpp"

namespace libpin {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed_document: return "MalformedDocument";
    case ErrorCode::schema_violation: return "SchemaViolation";
    case ErrorCode::duplicate_name: return "DuplicateName";
    case ErrorCode::duplicate_id: return "DuplicateId";
    case ErrorCode::level_unavailable: return "LevelUnavailable";
    case ErrorCode::unknown_version: return "UnknownVersion";
    case ErrorCode::code_level_unavailable: return "CodeLevelUnavailable";
    case ErrorCode::empty_profile: return "EmptyProfile";
    case ErrorCode::io_failure: return "IoFailure";
    case ErrorCode::stale_index: return "StaleIndex";
    case ErrorCode::infeasible_spec: return "InfeasibleSpec";
    case ErrorCode::invalid_argument: return "InvalidArgument";
  }
  return "UnknownError";
}

Rational make_ratio(std::int64_t numerator, std::int64_t denominator) {
  if (denominator == 0) {
    throw Error(ErrorCode::invalid_argument, "zero denominator");
  }
  return Rational(numerator, denominator);
}

std::string to_exact_string(const Rational& value) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  const auto num = numerator(value);
  const auto den = denominator(value);
  if (den == 1) {
    return num.str();
  }
  return num.str() + "/" + den.str();
}

std::string to_decimal_string(const Rational& value, int places) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;

  const bool negative = value < 0;
  const Rational magnitude = negative ? Rational(-value) : value;
  cpp_int scale = 1;
  for (int i = 0; i < places; ++i) {
    scale *= 10;
  }
  const cpp_int num = numerator(magnitude) * scale;
  const cpp_int den = denominator(magnitude);
  cpp_int scaled = num / den;
  if ((num % den) * 2 >= den) {
    scaled += 1;
  }
  std::string digits = scaled.str();
  if (places > 0) {
    if (digits.size() <= static_cast<std::size_t>(places)) {
      digits.insert(0, static_cast<std::size_t>(places) + 1 - digits.size(), '0');
    }
    digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
  }
  return negative && scaled != 0 ? "-" + digits : digits;
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

}  // namespace libpin
