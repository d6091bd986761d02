#include "netwrangle/expr.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "netwrangle/error.hpp"

namespace nw {

bool isStandardReducer(std::string_view name) {
  return std::find(kStandardReducers.begin(), kStandardReducers.end(), name) !=
         kStandardReducers.end();
}

std::string_view toString(CompareOp op) {
  switch (op) {
    case CompareOp::Less: return "<";
    case CompareOp::LessEqual: return "<=";
    case CompareOp::Equal: return "=";
    case CompareOp::NotEqual: return "!=";
    case CompareOp::GreaterEqual: return ">=";
    case CompareOp::Greater: return ">";
  }
  return "?";
}

std::optional<CompareOp> parseCompareOp(std::string_view text) {
  if (text == "<") return CompareOp::Less;
  if (text == "<=" || text == "≤") return CompareOp::LessEqual;
  if (text == "=" || text == "==") return CompareOp::Equal;
  if (text == "!=" || text == "<>" || text == "≠") return CompareOp::NotEqual;
  if (text == ">=" || text == "≥") return CompareOp::GreaterEqual;
  if (text == ">") return CompareOp::Greater;
  return std::nullopt;
}

namespace expr {

enum class Op {
  Add, Sub, Mul, Div, Mod,
  Lt, Le, Eq, Ne, Ge, Gt,
  And, Or, Not, Neg,
};

struct Node {
  enum class Type { Literal, RowRef, RowAttr, Var, Member, Index, Unary, Binary, If, Call, Lambda };
  Type type;
  Value literal;
  std::string name;  // var / member / call / lambda parameter
  std::size_t column = 0;
  Op op = Op::Add;
  std::vector<std::shared_ptr<const Node>> kids;
  std::size_t position = 0;
};

using NodePtr = std::shared_ptr<const Node>;

namespace {

enum class Tok { Number, String, Ident, Symbol, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t column;  // 1-based
  double number = 0;
};

[[noreturn]] void syntaxError(std::size_t column, const std::string& what) {
  throw Error(ErrorCode::SyntaxError,
              "syntax error at column " + std::to_string(column) + ": " + what);
}

std::vector<Token> tokenize(std::string_view src) {
  static const std::pair<std::string_view, std::string_view> kUnicode[] = {
      {"×", "*"}, {"÷", "/"}, {"≠", "!="},
      {"≤", "<="}, {"≥", ">="}, {"−", "-"},
  };
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    std::size_t col = i + 1;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      Token t{Tok::Number, std::string(src.substr(i, j - i)), col};
      t.number = std::stod(t.text);
      out.push_back(std::move(t));
      i = j;
      continue;
    }
    if (c == '"' || c == '\'') {
      std::string text;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < src.size()) {
        if (src[j] == '\\' && j + 1 < src.size()) {
          char e = src[j + 1];
          text += e == 'n' ? '\n' : e == 't' ? '\t' : e;
          j += 2;
          continue;
        }
        if (src[j] == c) {
          closed = true;
          ++j;
          break;
        }
        text += src[j++];
      }
      if (!closed) syntaxError(col, "unterminated string");
      out.push_back({Tok::String, std::move(text), col});
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), col});
      i = j;
      continue;
    }
    bool matched = false;
    for (const auto& [glyph, ascii] : kUnicode) {
      if (src.substr(i, glyph.size()) == glyph) {
        out.push_back({Tok::Symbol, std::string(ascii), col});
        i += glyph.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static const std::string_view kTwo[] = {"->", "<=", ">=", "==", "!=", "<>"};
    for (auto sym : kTwo) {
      if (src.substr(i, 2) == sym) {
        out.push_back({Tok::Symbol, std::string(sym), col});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("+-*/%()<>=,.[]").find(c) != std::string_view::npos) {
      out.push_back({Tok::Symbol, std::string(1, c), col});
      ++i;
      continue;
    }
    syntaxError(col, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", src.size() + 1});
  return out;
}

bool isKeyword(std::string_view s) {
  static const std::string_view kKeywords[] = {"if", "then", "else", "and", "or",
                                               "not", "true", "false", "null"};
  return std::find(std::begin(kKeywords), std::end(kKeywords), s) != std::end(kKeywords);
}

NodePtr makeNode(Node node) { return std::make_shared<const Node>(std::move(node)); }

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  NodePtr parseAll() {
    NodePtr n = expression();
    if (peek().kind != Tok::End) syntaxError(peek().column, "unexpected '" + peek().text + "'");
    return n;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool isSymbol(std::string_view s, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Symbol && peek(ahead).text == s;
  }
  bool isWord(std::string_view s) const {
    return peek().kind == Tok::Ident && peek().text == s;
  }
  void expectSymbol(std::string_view s) {
    if (!isSymbol(s)) syntaxError(peek().column, "expected '" + std::string(s) + "'");
    next();
  }
  void expectWord(std::string_view s) {
    if (!isWord(s)) syntaxError(peek().column, "expected '" + std::string(s) + "'");
    next();
  }

  NodePtr expression() {
    if (isWord("if")) {
      std::size_t col = next().column;
      NodePtr cond = expression();
      expectWord("then");
      NodePtr a = expression();
      expectWord("else");
      NodePtr b = expression();
      return makeNode({Node::Type::If, {}, {}, 0, Op::Add, {cond, a, b}, col});
    }
    return orExpr();
  }

  NodePtr binaryChain(NodePtr (Parser::*sub)(),
                      std::initializer_list<std::pair<std::string_view, Op>> ops,
                      bool words) {
    NodePtr left = (this->*sub)();
    for (;;) {
      bool found = false;
      for (const auto& [text, op] : ops) {
        if (words ? isWord(text) : isSymbol(text)) {
          std::size_t col = next().column;
          NodePtr right = (this->*sub)();
          left = makeNode({Node::Type::Binary, {}, {}, 0, op, {left, right}, col});
          found = true;
          break;
        }
      }
      if (!found) return left;
    }
  }

  NodePtr orExpr() { return binaryChain(&Parser::andExpr, {{"or", Op::Or}}, true); }
  NodePtr andExpr() { return binaryChain(&Parser::notExpr, {{"and", Op::And}}, true); }

  NodePtr notExpr() {
    if (isWord("not")) {
      std::size_t col = next().column;
      return makeNode({Node::Type::Unary, {}, {}, 0, Op::Not, {notExpr()}, col});
    }
    return comparison();
  }

  NodePtr comparison() {
    NodePtr left = additive();
    static const std::pair<std::string_view, Op> kOps[] = {
        {"<=", Op::Le}, {">=", Op::Ge}, {"==", Op::Eq}, {"!=", Op::Ne}, {"<>", Op::Ne},
        {"<", Op::Lt},  {">", Op::Gt},  {"=", Op::Eq}};
    for (const auto& [text, op] : kOps) {
      if (isSymbol(text)) {
        std::size_t col = next().column;
        NodePtr right = additive();
        return makeNode({Node::Type::Binary, {}, {}, 0, op, {left, right}, col});
      }
    }
    return left;
  }

  NodePtr additive() {
    return binaryChain(&Parser::multiplicative, {{"+", Op::Add}, {"-", Op::Sub}}, false);
  }
  NodePtr multiplicative() {
    return binaryChain(&Parser::unary, {{"*", Op::Mul}, {"/", Op::Div}, {"%", Op::Mod}}, false);
  }

  NodePtr unary() {
    if (isSymbol("-")) {
      std::size_t col = next().column;
      return makeNode({Node::Type::Unary, {}, {}, 0, Op::Neg, {unary()}, col});
    }
    return postfix();
  }

  NodePtr postfix() {
    NodePtr n = primary();
    for (;;) {
      if (isSymbol(".")) {
        std::size_t dotCol = next().column;
        if (peek().kind != Tok::Ident) syntaxError(dotCol, "expected attribute name after '.'");
        std::string name = next().text;
        n = makeNode({Node::Type::Member, {}, std::move(name), 0, Op::Add, {n}, dotCol});
      } else if (isSymbol("[")) {
        std::size_t col = next().column;
        NodePtr key = expression();
        expectSymbol("]");
        n = makeNode({Node::Type::Index, {}, {}, 0, Op::Add, {n, key}, col});
      } else {
        return n;
      }
    }
  }

  NodePtr callArgument() {
    if (peek().kind == Tok::Ident && !isKeyword(peek().text) && isSymbol("->", 1)) {
      const Token& param = next();
      next();
      NodePtr body = expression();
      return makeNode({Node::Type::Lambda, {}, param.text, 0, Op::Add, {body}, param.column});
    }
    return expression();
  }

  NodePtr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number:
        next();
        return makeNode({Node::Type::Literal, Value{t.number}, {}, 0, Op::Add, {}, t.column});
      case Tok::String:
        next();
        return makeNode({Node::Type::Literal, Value{t.text}, {}, 0, Op::Add, {}, t.column});
      case Tok::Ident: {
        if (t.text == "true" || t.text == "false") {
          next();
          return makeNode({Node::Type::Literal, Value{t.text == "true"}, {}, 0, Op::Add, {}, t.column});
        }
        if (t.text == "null") {
          next();
          return makeNode({Node::Type::Literal, Value{}, {}, 0, Op::Add, {}, t.column});
        }
        if (isKeyword(t.text)) syntaxError(t.column, "unexpected '" + t.text + "'");
        Token ident = next();
        if (isSymbol("(")) {
          next();
          std::vector<NodePtr> args;
          if (!isSymbol(")")) {
            args.push_back(callArgument());
            while (isSymbol(",")) {
              next();
              args.push_back(callArgument());
            }
          }
          expectSymbol(")");
          return makeNode({Node::Type::Call, {}, ident.text, 0, Op::Add, std::move(args), ident.column});
        }
        return makeNode({Node::Type::Var, {}, ident.text, 0, Op::Add, {}, ident.column});
      }
      case Tok::Symbol:
        if (t.text == "(") {
          next();
          NodePtr inner = expression();
          expectSymbol(")");
          return inner;
        }
        syntaxError(t.column, "unexpected '" + t.text + "'");
      case Tok::End: syntaxError(t.column, "unexpected end of expression");
    }
    syntaxError(t.column, "unexpected token");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

bool isListFunction(std::string_view name) {
  return isStandardReducer(name) || name == "filter" || name == "map";
}

bool isTypeTest(std::string_view name) {
  return name == "isnull" || name == "isnumber" || name == "istext" || name == "isbool" ||
         name == "islist" || name == "ismap";
}

std::size_t expectedArity(std::string_view name) {
  if (name == "filter" || name == "map") return 2;
  return 1;
}

// Resolves identifiers: `row.<attr>` to a column, lambda parameters and
// `values` to variables. Everything else is an unknown identifier.
NodePtr bindNode(const NodePtr& node, const std::vector<std::string>* schema,
                 std::vector<std::string>& scope) {
  auto unknown = [&](const std::string& what) -> NodePtr {
    throw Error(ErrorCode::UnknownIdentifier,
                "unknown identifier '" + what + "' at column " + std::to_string(node->position));
  };
  Node copy = *node;
  switch (node->type) {
    case Node::Type::Literal: return node;
    case Node::Type::Var: {
      if (std::find(scope.rbegin(), scope.rend(), node->name) != scope.rend()) return node;
      if (node->name == "values") return node;
      if (node->name == "row") {
        if (!schema) return unknown("row");
        copy.type = Node::Type::RowRef;
        return makeNode(std::move(copy));
      }
      return unknown(node->name);
    }
    case Node::Type::Member: {
      const Node& base = *node->kids[0];
      bool baseIsRow = base.type == Node::Type::Var && base.name == "row" &&
                       std::find(scope.begin(), scope.end(), "row") == scope.end();
      if (baseIsRow) {
        if (!schema) return unknown("row");
        auto it = std::find(schema->begin(), schema->end(), node->name);
        if (it == schema->end()) return unknown("row." + node->name);
        copy.type = Node::Type::RowAttr;
        copy.column = static_cast<std::size_t>(it - schema->begin());
        copy.kids.clear();
        return makeNode(std::move(copy));
      }
      copy.kids[0] = bindNode(node->kids[0], schema, scope);
      return makeNode(std::move(copy));
    }
    case Node::Type::Call: {
      if (!isListFunction(node->name) && !isTypeTest(node->name))
        return unknown(node->name);
      if (node->kids.size() != expectedArity(node->name))
        throw Error(ErrorCode::SyntaxError,
                    "syntax error at column " + std::to_string(node->position) + ": '" +
                        node->name + "' takes " + std::to_string(expectedArity(node->name)) +
                        " argument(s)");
      bool wantsLambda = node->name == "filter" || node->name == "map";
      for (std::size_t i = 0; i < node->kids.size(); ++i) {
        bool isLambda = node->kids[i]->type == Node::Type::Lambda;
        if (isLambda != (wantsLambda && i == 1))
          throw Error(ErrorCode::SyntaxError,
                      "syntax error at column " + std::to_string(node->kids[i]->position) +
                          ": lambda not allowed here");
        copy.kids[i] = bindNode(node->kids[i], schema, scope);
      }
      return makeNode(std::move(copy));
    }
    case Node::Type::Lambda: {
      scope.push_back(node->name);
      copy.kids[0] = bindNode(node->kids[0], schema, scope);
      scope.pop_back();
      return makeNode(std::move(copy));
    }
    default:
      for (auto& kid : copy.kids) kid = bindNode(kid, schema, scope);
      return makeNode(std::move(copy));
  }
}

struct Env {
  std::span<const Value> cells;
  std::span<const Value> values;
  const std::vector<std::string>* schema;
  std::vector<std::pair<const std::string*, Value>> locals;
  Warnings& warnings;
};

Value typeError(Env& env, const Node& node, const std::string& what) {
  env.warnings.add(what + " at column " + std::to_string(node.position));
  return Value{};
}

Value eval(const Node& node, Env& env);

Value evalCall(const Node& node, Env& env) {
  const std::string& fn = node.name;
  if (isTypeTest(fn)) {
    Value v = eval(*node.kids[0], env);
    if (fn == "isnull") return Value{v.isNull()};
    if (fn == "isnumber") return Value{v.isNumber()};
    if (fn == "istext") return Value{v.isText()};
    if (fn == "isbool") return Value{v.isBoolean()};
    if (fn == "islist") return Value{v.isList()};
    return Value{v.isMap()};
  }
  Value listValue = eval(*node.kids[0], env);
  if (!listValue.isList()) return typeError(env, node, fn + "() expects a list");
  const ValueList& list = listValue.list();
  if (fn == "filter" || fn == "map") {
    const Node& lambda = *node.kids[1];
    ValueList out;
    out.reserve(list.size());
    for (const auto& item : list) {
      env.locals.emplace_back(&lambda.name, item);
      Value r = eval(*lambda.kids[0], env);
      env.locals.pop_back();
      if (fn == "map") {
        out.push_back(std::move(r));
      } else if (r.isBoolean()) {
        if (r.boolean()) out.push_back(item);
      } else {
        typeError(env, lambda, "filter predicate did not return a boolean");
      }
    }
    return Value{std::move(out)};
  }
  return applyStandardReducer(fn, list);
}

Value arithmetic(Op op, const Value& a, const Value& b, Env& env, const Node& node) {
  if (op == Op::Add && a.isText() && b.isText()) return Value{a.text() + b.text()};
  if (!a.isNumber() || !b.isNumber())
    return typeError(env, node, "arithmetic on non-numeric values");
  double x = a.number(), y = b.number();
  switch (op) {
    case Op::Add: return Value{x + y};
    case Op::Sub: return Value{x - y};
    case Op::Mul: return Value{x * y};
    case Op::Div:
      if (y == 0) return typeError(env, node, "division by zero");
      return Value{x / y};
    case Op::Mod:
      if (y == 0) return typeError(env, node, "division by zero");
      return Value{std::fmod(x, y)};
    default: return Value{};
  }
}

Value eval(const Node& node, Env& env) {
  switch (node.type) {
    case Node::Type::Literal: return node.literal;
    case Node::Type::RowAttr:
      return node.column < env.cells.size() ? env.cells[node.column] : Value{};
    case Node::Type::RowRef: {
      ValueMap m;
      for (std::size_t i = 0; i < env.schema->size() && i < env.cells.size(); ++i)
        m.set((*env.schema)[i], env.cells[i]);
      return Value{std::move(m)};
    }
    case Node::Type::Var: {
      for (auto it = env.locals.rbegin(); it != env.locals.rend(); ++it)
        if (*it->first == node.name) return it->second;
      return Value{ValueList(env.values.begin(), env.values.end())};
    }
    case Node::Type::Member: {
      Value base = eval(*node.kids[0], env);
      if (!base.isMap()) return typeError(env, node, "member access on non-map");
      return base.map().get(node.name);
    }
    case Node::Type::Index: {
      Value base = eval(*node.kids[0], env);
      Value key = eval(*node.kids[1], env);
      if (base.isMap() && key.isText()) return base.map().get(key.text());
      if (base.isList() && key.isNumber()) {
        double k = key.number();
        if (k >= 0 && k < static_cast<double>(base.list().size()) && std::floor(k) == k)
          return base.list()[static_cast<std::size_t>(k)];
        return typeError(env, node, "list index out of range");
      }
      return typeError(env, node, "invalid index");
    }
    case Node::Type::Unary: {
      Value v = eval(*node.kids[0], env);
      if (node.op == Op::Not) {
        if (!v.isBoolean()) return typeError(env, node, "'not' on non-boolean");
        return Value{!v.boolean()};
      }
      if (!v.isNumber()) return typeError(env, node, "negation of non-number");
      return Value{-v.number()};
    }
    case Node::Type::Binary: {
      if (node.op == Op::And || node.op == Op::Or) {
        Value a = eval(*node.kids[0], env);
        if (!a.isBoolean()) return typeError(env, node, "boolean operator on non-boolean");
        if (node.op == Op::And && !a.boolean()) return Value{false};
        if (node.op == Op::Or && a.boolean()) return Value{true};
        Value b = eval(*node.kids[1], env);
        if (!b.isBoolean()) return typeError(env, node, "boolean operator on non-boolean");
        return b;
      }
      Value a = eval(*node.kids[0], env);
      Value b = eval(*node.kids[1], env);
      switch (node.op) {
        case Op::Eq: return Value{a == b};
        case Op::Ne: return Value{!(a == b)};
        case Op::Lt:
        case Op::Le:
        case Op::Gt:
        case Op::Ge: {
          if (a.isNull() != b.isNull()) return Value{false};
          Ordering o = compare(a, b);
          if (o == Ordering::Incomparable) return Value{false};
          switch (node.op) {
            case Op::Lt: return Value{o == Ordering::Less};
            case Op::Le: return Value{o != Ordering::Greater};
            case Op::Gt: return Value{o == Ordering::Greater};
            default: return Value{o != Ordering::Less};
          }
        }
        default: return arithmetic(node.op, a, b, env, node);
      }
    }
    case Node::Type::If: {
      Value c = eval(*node.kids[0], env);
      if (!c.isBoolean()) return typeError(env, node, "condition is not a boolean");
      return eval(*node.kids[c.boolean() ? 1 : 2], env);
    }
    case Node::Type::Call: return evalCall(node, env);
    case Node::Type::Lambda: return typeError(env, node, "lambda outside of filter/map");
  }
  return Value{};
}

}  // namespace
}  // namespace expr

Expression Expression::compile(std::string_view source, const std::vector<std::string>* schema) {
  expr::Parser parser(expr::tokenize(source));
  expr::NodePtr tree = parser.parseAll();
  std::vector<std::string> scope;
  Expression e;
  e.source_ = std::string(source);
  if (schema) e.schema_ = *schema;
  e.root_ = expr::bindNode(tree, schema ? &e.schema_ : nullptr, scope);
  return e;
}

Value Expression::evaluate(std::span<const Value> cells, std::span<const Value> values,
                           Warnings& warnings) const {
  expr::Env env{cells, values, &schema_, {}, warnings};
  return expr::eval(*root_, env);
}

void parseOnly(std::string_view source) {
  expr::Parser parser(expr::tokenize(source));
  parser.parseAll();
}

namespace {

std::vector<double> numbersOf(std::span<const Value> values) {
  std::vector<double> out;
  for (const auto& v : values)
    if (v.isNumber()) out.push_back(v.number());
  return out;
}

}  // namespace

Value applyStandardReducer(std::string_view name, std::span<const Value> values) {
  if (name == "count") return Value{static_cast<double>(values.size())};
  if (name == "concat") {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out += ',';
      out += renderText(values[i]);
    }
    return Value{std::move(out)};
  }
  if (name == "any" || name == "all") {
    bool any = false, all = true;
    for (const auto& v : values) {
      if (!v.isBoolean()) continue;
      any = any || v.boolean();
      all = all && v.boolean();
    }
    return Value{name == "any" ? any : all};
  }
  if (name == "mode") {
    std::vector<std::pair<Value, std::size_t>> tally;
    std::unordered_map<Value, std::size_t, ValueHash> slot;
    for (const auto& v : values) {
      if (v.isNull()) continue;
      auto [it, fresh] = slot.try_emplace(v, tally.size());
      if (fresh) tally.emplace_back(v, 0);
      ++tally[it->second].second;
    }
    if (tally.empty()) return Value{};
    std::size_t best = 0;
    for (std::size_t i = 1; i < tally.size(); ++i)
      if (tally[i].second > tally[best].second) best = i;
    return tally[best].first;
  }
  std::vector<double> nums = numbersOf(values);
  if (name == "sum") {
    double s = 0;
    for (double d : nums) s += d;
    return Value{s};
  }
  if (nums.empty()) {
    if (name == "mean" || name == "median" || name == "min" || name == "max") return Value{};
    throw Error(ErrorCode::UnknownReducer, "unknown reducer '" + std::string(name) + "'");
  }
  if (name == "mean") {
    double s = 0;
    for (double d : nums) s += d;
    return Value{s / static_cast<double>(nums.size())};
  }
  if (name == "min") return Value{*std::min_element(nums.begin(), nums.end())};
  if (name == "max") return Value{*std::max_element(nums.begin(), nums.end())};
  if (name == "median") {
    std::sort(nums.begin(), nums.end());
    std::size_t n = nums.size();
    if (n % 2 == 1) return Value{nums[n / 2]};
    return Value{(nums[n / 2 - 1] + nums[n / 2]) / 2.0};
  }
  throw Error(ErrorCode::UnknownReducer, "unknown reducer '" + std::string(name) + "'");
}

Reducer::Reducer(const ExprSpec& spec) : spec_(spec) {
  if (spec.mode == ExprSpec::Mode::Standard) {
    if (!isStandardReducer(spec.text))
      throw Error(ErrorCode::UnknownReducer, "unknown reducer '" + spec.text + "'");
  } else {
    custom_ = Expression::compile(spec.text);
  }
}

Value Reducer::operator()(std::span<const Value> values, Warnings& warnings) const {
  if (custom_) return custom_->evaluate({}, values, warnings);
  return applyStandardReducer(spec_.text, values);
}

Value evalReduce(const ExprSpec& spec, std::span<const Value> values, Warnings& warnings) {
  return Reducer(spec)(values, warnings);
}

Predicate::Predicate(const PredicateSpec& spec, const std::vector<std::string>& schema) {
  if (const auto* cmp = std::get_if<PredicateSpec::Compare>(&spec.form)) {
    auto it = std::find(schema.begin(), schema.end(), cmp->attribute);
    if (it == schema.end())
      throw Error(ErrorCode::UnknownAttribute, "unknown attribute '" + cmp->attribute + "'");
    column_ = static_cast<std::size_t>(it - schema.begin());
    op_ = cmp->op;
    literal_ = cmp->literal;
  } else {
    custom_ = Expression::compile(std::get<PredicateSpec::Custom>(spec.form).source, &schema);
  }
}

bool Predicate::operator()(std::span<const Value> cells, Warnings& warnings) const {
  if (custom_) {
    Value r = custom_->evaluate(cells, {}, warnings);
    if (!r.isBoolean()) {
      warnings.add("predicate returned " + std::string(toString(r.kind())) + ", not a boolean");
      return false;
    }
    return r.boolean();
  }
  static const Value kNull;
  const Value& cell = *column_ < cells.size() ? cells[*column_] : kNull;
  if (cell.isNull() != literal_.isNull()) return false;
  Ordering o = compare(cell, literal_);
  if (o == Ordering::Incomparable) return false;
  switch (op_) {
    case CompareOp::Less: return o == Ordering::Less;
    case CompareOp::LessEqual: return o != Ordering::Greater;
    case CompareOp::Equal: return o == Ordering::Equal;
    case CompareOp::NotEqual: return o != Ordering::Equal;
    case CompareOp::GreaterEqual: return o != Ordering::Less;
    case CompareOp::Greater: return o == Ordering::Greater;
  }
  return false;
}

bool evalPredicate(const PredicateSpec& spec, const ValueMap& row, Warnings& warnings) {
  std::vector<std::string> schema;
  std::vector<Value> cells;
  for (const auto& [k, v] : row) {
    schema.push_back(k);
    cells.push_back(v);
  }
  return Predicate(spec, schema)(cells, warnings);
}

std::string templateFor(std::string_view reducer) {
  static const std::string kNumbers = "filter(values, v -> isnumber(v))";
  if (reducer == "count") return "count(values)";
  if (reducer == "sum") return "sum(" + kNumbers + ")";
  if (reducer == "mean")
    return "if count(" + kNumbers + ") = 0\nthen null\nelse sum(" + kNumbers + ") / count(" +
           kNumbers + ")";
  if (reducer == "median" || reducer == "min" || reducer == "max")
    return std::string(reducer) + "(" + kNumbers + ")";
  if (reducer == "mode") return "mode(filter(values, v -> not isnull(v)))";
  if (reducer == "concat") return "concat(values)";
  if (reducer == "any" || reducer == "all")
    return std::string(reducer) + "(filter(values, v -> isbool(v)))";
  throw Error(ErrorCode::UnknownReducer, "unknown reducer '" + std::string(reducer) + "'");
}

}  // namespace nw
