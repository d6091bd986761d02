#include "netwrangle/value.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <functional>

#include "netwrangle/error.hpp"
#include "netwrangle/json_codec.hpp"

namespace nw {

std::string_view toString(Kind kind) {
  switch (kind) {
    case Kind::Null: return "null";
    case Kind::Boolean: return "boolean";
    case Kind::Number: return "number";
    case Kind::Text: return "text";
    case Kind::List: return "list";
    case Kind::Map: return "map";
  }
  return "?";
}

std::string_view toString(ErrorCode code) {
  switch (code) {
    case ErrorCode::NameCollision: return "NameCollision";
    case ErrorCode::UnknownAttribute: return "UnknownAttribute";
    case ErrorCode::UnknownTable: return "UnknownTable";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::UnknownLink: return "UnknownLink";
    case ErrorCode::CyclicDerivation: return "CyclicDerivation";
    case ErrorCode::DanglingSource: return "DanglingSource";
    case ErrorCode::WrongInterpretation: return "WrongInterpretation";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::SideOccupied: return "SideOccupied";
    case ErrorCode::NoOp: return "NoOp";
    case ErrorCode::TooManyFacets: return "TooManyFacets";
    case ErrorCode::AmbiguousSides: return "AmbiguousSides";
    case ErrorCode::NeedBothSides: return "NeedBothSides";
    case ErrorCode::InvalidPath: return "InvalidPath";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::UnknownReducer: return "UnknownReducer";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::UnsupportedShape: return "UnsupportedShape";
    case ErrorCode::InvalidItem: return "InvalidItem";
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::ExpectationFailed: return "ExpectationFailed";
    case ErrorCode::StaleSequence: return "StaleSequence";
    case ErrorCode::Io: return "Io";
  }
  return "?";
}

Value::Value(double number, Tag) {
  if (std::isnan(number)) return;  // stays Null
  data_ = number;
}

Value::Value(ValueList list)
    : data_(std::make_shared<const ValueList>(std::move(list))) {}

Value::Value(ValueMap map)
    : data_(std::make_shared<const ValueMap>(std::move(map))) {}

const ValueList& Value::list() const {
  return *std::get<std::shared_ptr<const ValueList>>(data_);
}

const ValueMap& Value::map() const {
  return *std::get<std::shared_ptr<const ValueMap>>(data_);
}

bool operator==(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Kind::Null: return true;
    case Kind::Boolean: return a.boolean() == b.boolean();
    case Kind::Number: return a.number() == b.number();
    case Kind::Text: return a.text() == b.text();
    case Kind::List: {
      const auto& la = a.list();
      const auto& lb = b.list();
      return &la == &lb || la == lb;
    }
    case Kind::Map: {
      const auto& ma = a.map();
      const auto& mb = b.map();
      return &ma == &mb || ma == mb;
    }
  }
  return false;
}

ValueMap::ValueMap(std::initializer_list<Entry> entries) {
  for (const auto& [k, v] : entries) set(k, v);
}

void ValueMap::set(std::string key, Value value) {
  for (auto& entry : entries_) {
    if (entry.first == key) {
      entry.second = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

const Value* ValueMap::find(std::string_view key) const {
  for (const auto& entry : entries_)
    if (entry.first == key) return &entry.second;
  return nullptr;
}

Value ValueMap::get(std::string_view key) const {
  const Value* v = find(key);
  return v ? *v : Value{};
}

Ordering compare(const Value& a, const Value& b) {
  if (a.isNull() && b.isNull()) return Ordering::Equal;
  if (a.isNull()) return Ordering::Less;
  if (b.isNull()) return Ordering::Greater;
  if (a.kind() != b.kind()) return Ordering::Incomparable;
  auto order = [](const auto& x, const auto& y) {
    if (x < y) return Ordering::Less;
    if (y < x) return Ordering::Greater;
    return Ordering::Equal;
  };
  switch (a.kind()) {
    case Kind::Boolean: return order(a.boolean(), b.boolean());
    case Kind::Number: return order(a.number(), b.number());
    case Kind::Text: return order(a.text(), b.text());
    default: return Ordering::Incomparable;
  }
}

namespace {

bool isNumeral(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t digits = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++digits;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++digits;
  }
  if (digits == 0) return false;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t expDigits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++expDigits;
    if (expDigits == 0) return false;
  }
  return i == s.size();
}

bool equalsIgnoreCase(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

Value inferKind(std::string_view raw) {
  if (raw.empty()) return Value{};
  if (equalsIgnoreCase(raw, "true")) return Value{true};
  if (equalsIgnoreCase(raw, "false")) return Value{false};
  if (isNumeral(raw)) {
    std::string_view digits = raw.front() == '+' ? raw.substr(1) : raw;
    double out = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out);
    if (ec == std::errc{} && ptr == digits.data() + digits.size() && std::isfinite(out))
      return Value{out};
  }
  return Value{std::string(raw)};
}

std::string formatNumber(double number) {
  if (number == 0) return "0";
  if (std::nearbyint(number) == number && std::fabs(number) < 1e15) {
    return std::to_string(static_cast<long long>(number));
  }
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, number);
  return std::string(buffer, ptr);
}

std::string renderText(const Value& value) {
  switch (value.kind()) {
    case Kind::Null: return "";
    case Kind::Boolean: return value.boolean() ? "true" : "false";
    case Kind::Number: return formatNumber(value.number());
    case Kind::Text: return value.text();
    case Kind::List:
    case Kind::Map: return dumpCompact(toJson(value));
  }
  return "";
}

namespace {

std::size_t mix(std::size_t seed, std::size_t h) {
  return seed ^ (h + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

std::size_t hashValue(const Value& value) {
  std::size_t h = static_cast<std::size_t>(value.kind()) * 0x100000001b3ULL;
  switch (value.kind()) {
    case Kind::Null: return h;
    case Kind::Boolean: return mix(h, value.boolean() ? 1 : 2);
    case Kind::Number: {
      double d = value.number();
      if (d == 0) d = 0;  // -0 == +0
      return mix(h, std::hash<std::uint64_t>{}(std::bit_cast<std::uint64_t>(d)));
    }
    case Kind::Text: return mix(h, std::hash<std::string>{}(value.text()));
    case Kind::List:
      for (const auto& v : value.list()) h = mix(h, hashValue(v));
      return h;
    case Kind::Map:
      for (const auto& [k, v] : value.map())
        h = mix(mix(h, std::hash<std::string>{}(k)), hashValue(v));
      return h;
  }
  return h;
}

ValueKindSummary summarizeColumn(std::span<const Value> values) {
  ValueKindSummary summary;
  for (const auto& v : values) ++summary.counts[static_cast<std::size_t>(v.kind())];
  summary.total = values.size();
  std::size_t best = 0;
  for (Kind kind : kAllKinds) {
    std::size_t c = summary.count(kind);
    if (c > best) {
      best = c;
      summary.dominant = kind;
    }
  }
  return summary;
}

}  // namespace nw
