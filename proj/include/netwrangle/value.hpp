#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace nw {

class Value;
class ValueMap;
using ValueList = std::vector<Value>;

enum class Kind : std::uint8_t { Null, Boolean, Number, Text, List, Map };

inline constexpr std::array<Kind, 6> kAllKinds = {
    Kind::Null, Kind::Boolean, Kind::Number, Kind::Text, Kind::List, Kind::Map};

std::string_view toString(Kind kind);

/// Dynamically typed cell content. Immutable; nested lists and maps are
/// shared between copies.
class Value {
 public:
  Value() = default;
  Value(std::nullptr_t) {}
  Value(bool b) : data_(b) {}
  template <typename T>
    requires(std::is_arithmetic_v<T> && !std::is_same_v<T, bool>)
  Value(T number) : Value(static_cast<double>(number), Tag{}) {}
  Value(std::string text) : data_(std::move(text)) {}
  Value(std::string_view text) : data_(std::string(text)) {}
  Value(const char* text) : data_(std::string(text)) {}
  Value(ValueList list);
  Value(ValueMap map);

  Kind kind() const { return static_cast<Kind>(data_.index()); }
  bool isNull() const { return kind() == Kind::Null; }
  bool isBoolean() const { return kind() == Kind::Boolean; }
  bool isNumber() const { return kind() == Kind::Number; }
  bool isText() const { return kind() == Kind::Text; }
  bool isList() const { return kind() == Kind::List; }
  bool isMap() const { return kind() == Kind::Map; }

  bool boolean() const { return std::get<bool>(data_); }
  double number() const { return std::get<double>(data_); }
  const std::string& text() const { return std::get<std::string>(data_); }
  const ValueList& list() const;
  const ValueMap& map() const;

  friend bool operator==(const Value& a, const Value& b);

 private:
  struct Tag {};
  Value(double number, Tag);

  std::variant<std::monostate, bool, double, std::string,
               std::shared_ptr<const ValueList>,
               std::shared_ptr<const ValueMap>>
      data_;
};

/// Text-keyed map that keeps first-insertion order. Keys are unique;
/// inserting an existing key replaces its value in place.
class ValueMap {
 public:
  using Entry = std::pair<std::string, Value>;

  ValueMap() = default;
  ValueMap(std::initializer_list<Entry> entries);

  void set(std::string key, Value value);
  const Value* find(std::string_view key) const;
  Value get(std::string_view key) const;
  bool contains(std::string_view key) const { return find(key) != nullptr; }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const ValueMap& a, const ValueMap& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<Entry> entries_;
};

enum class Ordering { Less, Equal, Greater, Incomparable };

/// Total order within a scalar kind; Null sorts before every non-null value;
/// other cross-kind pairs and any list/map pair are incomparable.
Ordering compare(const Value& a, const Value& b);

/// Parses a raw text cell: numeral -> Number, true/false -> Boolean,
/// empty -> Null, anything else -> Text.
Value inferKind(std::string_view raw);

/// Renders a value as a text cell. Nested values use compact JSON.
std::string renderText(const Value& value);

/// Shortest round-trip decimal form; integral values print without a
/// fractional part.
std::string formatNumber(double number);

std::size_t hashValue(const Value& value);

struct ValueHash {
  std::size_t operator()(const Value& v) const { return hashValue(v); }
};

struct ValueKindSummary {
  std::array<std::size_t, 6> counts{};
  Kind dominant = Kind::Null;
  std::size_t total = 0;

  std::size_t count(Kind kind) const {
    return counts[static_cast<std::size_t>(kind)];
  }
};

ValueKindSummary summarizeColumn(std::span<const Value> values);

}  // namespace nw
