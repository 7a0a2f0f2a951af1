#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace provex {

/// Raised by evaluation on type errors (mixed-kind comparison, sum over text).
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind : std::uint8_t { Int = 0, Decimal = 1, Text = 2, Date = 3 };

std::string_view kind_name(Kind kind);
Kind parse_kind(std::string_view name);

/// Exact fixed-point number with six fractional digits.
struct Decimal {
  static constexpr std::int64_t kScale = 1'000'000;
  std::int64_t micros = 0;

  static Decimal from_int(std::int64_t v) { return Decimal{v * kScale}; }
  auto operator<=>(const Decimal&) const = default;
};

/// ISO-8601 date text; ordered lexicographically.
struct Date {
  std::string iso;
  auto operator<=>(const Date&) const = default;
};

class Value {
 public:
  Value() : data_(std::int64_t{0}) {}
  Value(std::int64_t v) : data_(v) {}
  Value(int v) : data_(std::int64_t{v}) {}
  Value(Decimal v) : data_(v) {}
  Value(std::string v) : data_(std::move(v)) {}
  Value(const char* v) : data_(std::string(v)) {}
  Value(Date v) : data_(std::move(v)) {}

  Kind kind() const { return static_cast<Kind>(data_.index()); }

  std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
  Decimal as_decimal() const { return std::get<Decimal>(data_); }
  const std::string& as_text() const { return std::get<std::string>(data_); }
  const Date& as_date() const { return std::get<Date>(data_); }

  /// Total order used for set storage: kind first, then value.
  auto operator<=>(const Value&) const = default;
  bool operator==(const Value&) const = default;

  std::size_t hash() const;
  std::string to_string() const;

 private:
  std::variant<std::int64_t, Decimal, std::string, Date> data_;
};

/// Same-kind comparison for predicates; throws EvalError across kinds.
std::strong_ordering compare_values(const Value& a, const Value& b);

Value parse_value(std::string_view text, Kind kind);
Decimal parse_decimal(std::string_view text);
std::string format_decimal(Decimal d);
bool is_iso_date(std::string_view text);

/// Division rounded half-to-even; used by avg.
std::int64_t divide_half_even(__int128 numerator, std::int64_t denominator);

}  // namespace provex
