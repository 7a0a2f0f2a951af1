#include "provex/value.hpp"

#include <charconv>
#include <functional>

namespace provex {

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::Int:
      return "int";
    case Kind::Decimal:
      return "decimal";
    case Kind::Text:
      return "text";
    case Kind::Date:
      return "date";
  }
  return "?";
}

Kind parse_kind(std::string_view name) {
  if (name == "int" || name == "integer") return Kind::Int;
  if (name == "decimal") return Kind::Decimal;
  if (name == "text" || name == "string") return Kind::Text;
  if (name == "date") return Kind::Date;
  throw std::invalid_argument("unknown value kind '" + std::string(name) + "'");
}

std::size_t Value::hash() const {
  std::size_t h = std::hash<std::size_t>{}(data_.index());
  std::size_t v = 0;
  switch (kind()) {
    case Kind::Int:
      v = std::hash<std::int64_t>{}(as_int());
      break;
    case Kind::Decimal:
      v = std::hash<std::int64_t>{}(as_decimal().micros);
      break;
    case Kind::Text:
      v = std::hash<std::string>{}(as_text());
      break;
    case Kind::Date:
      v = std::hash<std::string>{}(as_date().iso);
      break;
  }
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::string Value::to_string() const {
  switch (kind()) {
    case Kind::Int:
      return std::to_string(as_int());
    case Kind::Decimal:
      return format_decimal(as_decimal());
    case Kind::Text:
      return as_text();
    case Kind::Date:
      return as_date().iso;
  }
  return {};
}

std::strong_ordering compare_values(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) {
    throw EvalError("cannot compare " + std::string(kind_name(a.kind())) + " value '" + a.to_string() +
                    "' with " + std::string(kind_name(b.kind())) + " value '" + b.to_string() + "'");
  }
  return a <=> b;
}

Decimal parse_decimal(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty decimal");
  bool negative = false;
  std::size_t pos = 0;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    pos = 1;
  }
  auto dot = text.find('.', pos);
  std::string_view whole = text.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw std::invalid_argument("malformed decimal '" + std::string(text) + "'");
  if (frac.size() > 6) throw std::invalid_argument("decimal '" + std::string(text) + "' has more than 6 fractional digits");
  std::int64_t w = 0;
  if (!whole.empty()) {
    auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
    if (ec != std::errc{} || p != whole.data() + whole.size())
      throw std::invalid_argument("malformed decimal '" + std::string(text) + "'");
  }
  std::int64_t f = 0;
  for (char c : frac) {
    if (c < '0' || c > '9') throw std::invalid_argument("malformed decimal '" + std::string(text) + "'");
    f = f * 10 + (c - '0');
  }
  for (std::size_t i = frac.size(); i < 6; ++i) f *= 10;
  std::int64_t micros = w * Decimal::kScale + f;
  return Decimal{negative ? -micros : micros};
}

std::string format_decimal(Decimal d) {
  std::int64_t m = d.micros;
  bool negative = m < 0;
  std::uint64_t u = negative ? static_cast<std::uint64_t>(-(m + 1)) + 1 : static_cast<std::uint64_t>(m);
  std::uint64_t whole = u / Decimal::kScale;
  std::string frac = std::to_string(u % Decimal::kScale);
  frac.insert(0, 6 - frac.size(), '0');
  while (frac.size() > 2 && frac.back() == '0') frac.pop_back();
  return (negative ? "-" : "") + std::to_string(whole) + "." + frac;
}

bool is_iso_date(std::string_view t) {
  if (t.size() != 10 || t[4] != '-' || t[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (t[i] < '0' || t[i] > '9') return false;
  return true;
}

Value parse_value(std::string_view text, Kind kind) {
  switch (kind) {
    case Kind::Int: {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || p != text.data() + text.size())
        throw std::invalid_argument("malformed integer '" + std::string(text) + "'");
      return Value(v);
    }
    case Kind::Decimal:
      return Value(parse_decimal(text));
    case Kind::Text:
      return Value(std::string(text));
    case Kind::Date:
      if (!is_iso_date(text)) throw std::invalid_argument("malformed ISO-8601 date '" + std::string(text) + "'");
      return Value(Date{std::string(text)});
  }
  throw std::invalid_argument("bad kind");
}

std::int64_t divide_half_even(__int128 numerator, std::int64_t denominator) {
  __int128 q = numerator / denominator;
  __int128 r = numerator % denominator;
  if (r == 0) return static_cast<std::int64_t>(q);
  __int128 twice = 2 * (r < 0 ? -r : r);
  __int128 den = denominator < 0 ? -static_cast<__int128>(denominator) : denominator;
  bool negative = (numerator < 0) != (denominator < 0);
  if (twice > den || (twice == den && (q % 2 != 0))) q += negative ? -1 : 1;
  return static_cast<std::int64_t>(q);
}

}  // namespace provex
