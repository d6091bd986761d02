#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "netwrangle/value.hpp"

namespace nw {

inline constexpr std::array<std::string_view, 10> kStandardReducers = {
    "count", "sum", "mean", "median", "mode", "concat", "min", "max", "any", "all"};

bool isStandardReducer(std::string_view name);

/// A reducer: either one of the standard names, or source text in the
/// expression language evaluated with `values` bound.
struct ExprSpec {
  enum class Mode { Standard, Custom };
  Mode mode = Mode::Standard;
  std::string text;

  static ExprSpec standard(std::string name) { return {Mode::Standard, std::move(name)}; }
  static ExprSpec custom(std::string source) { return {Mode::Custom, std::move(source)}; }

  friend bool operator==(const ExprSpec&, const ExprSpec&) = default;
};

enum class CompareOp { Less, LessEqual, Equal, NotEqual, GreaterEqual, Greater };

std::string_view toString(CompareOp op);
std::optional<CompareOp> parseCompareOp(std::string_view text);

struct PredicateSpec {
  struct Compare {
    std::string attribute;
    CompareOp op = CompareOp::Equal;
    Value literal;
  };
  struct Custom {
    std::string source;
  };
  std::variant<Compare, Custom> form;

  static PredicateSpec compare(std::string attr, CompareOp op, Value literal) {
    return {Compare{std::move(attr), op, std::move(literal)}};
  }
  static PredicateSpec custom(std::string source) { return {Custom{std::move(source)}}; }
};

/// Runtime problems (type errors, division by zero) never abort evaluation;
/// they yield Null and bump this tally.
struct Warnings {
  std::size_t count = 0;
  std::string first;

  void add(std::string message) {
    if (count++ == 0) first = std::move(message);
  }
};

namespace expr {
struct Node;
}

/// Parsed and bound expression. `row.<attr>` references are resolved to
/// column positions of the schema given at compile time.
class Expression {
 public:
  /// Parses and binds. Throws Error(SyntaxError) with a 1-based column, or
  /// Error(UnknownIdentifier) for unbound names and unknown attributes.
  /// Pass no schema to reject any use of `row`.
  static Expression compile(std::string_view source,
                            const std::vector<std::string>* schema = nullptr);

  /// Evaluates with `row` bound to `cells` (positional, matching the schema)
  /// and `values` bound to `values`.
  Value evaluate(std::span<const Value> cells, std::span<const Value> values,
                 Warnings& warnings) const;

  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::shared_ptr<const expr::Node> root_;
  std::vector<std::string> schema_;
};

/// Syntax-only check; throws like compile.
void parseOnly(std::string_view source);

/// Standard reducer semantics over a value list.
Value applyStandardReducer(std::string_view name, std::span<const Value> values);

/// Compiled ExprSpec; cheap to evaluate repeatedly.
class Reducer {
 public:
  explicit Reducer(const ExprSpec& spec);
  Value operator()(std::span<const Value> values, Warnings& warnings) const;

 private:
  ExprSpec spec_;
  std::optional<Expression> custom_;
};

Value evalReduce(const ExprSpec& spec, std::span<const Value> values, Warnings& warnings);

/// Compiled PredicateSpec bound to a table schema.
class Predicate {
 public:
  Predicate(const PredicateSpec& spec, const std::vector<std::string>& schema);
  bool operator()(std::span<const Value> cells, Warnings& warnings) const;

 private:
  std::optional<std::size_t> column_;
  CompareOp op_ = CompareOp::Equal;
  Value literal_;
  std::optional<Expression> custom_;
};

bool evalPredicate(const PredicateSpec& spec, const ValueMap& row, Warnings& warnings);

/// Custom-mode source that, unedited, evaluates identically to the
/// standard reducer. Throws Error(UnknownReducer).
std::string templateFor(std::string_view reducer);

}  // namespace nw
