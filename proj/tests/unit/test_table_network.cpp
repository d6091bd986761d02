#include <random>
#include <set>

#include "doctest.h"
#include "netwrangle/error.hpp"
#include "netwrangle/table_network.hpp"

using namespace nw;

namespace {

ValueMap row(std::initializer_list<ValueMap::Entry> entries) { return ValueMap(entries); }

std::vector<ValueMap> movies() {
  return {row({{"title", Value{"Notting Hill"}}, {"genre", Value{"Comedy"}}}),
          row({{"title", Value{"Pretty Woman"}}, {"genre", Value{"Comedy"}}}),
          row({{"title", Value{"Star Wars"}}, {"genre", Value{"Drama"}}})};
}

bool throwsCode(ErrorCode code, auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

}  // namespace

TEST_CASE("static tables assign ordinals in input order") {
  TableNetwork net;
  TableId id = net.addStaticTable("movies", {"title", "genre"}, movies()).id;
  TablePtr t = net.evaluate(id);
  CHECK(t->size() == 3);
  CHECK(t->ids == std::vector<std::int64_t>{0, 1, 2});
  CHECK(t->rows[2][0] == Value{"Star Wars"});

  TableId empty = net.addStaticTable("empty", {"a"}, {}).id;
  CHECK(net.rowCount(empty) == 0);

  TableId extra = net.addStaticTable("extra", {"a"}, {row({{"a", Value{1}}, {"b", Value{2}}})}).id;
  TablePtr e = net.evaluate(extra);
  CHECK(e->attributes == std::vector<std::string>{"a"});
  CHECK(e->warnings.size() == 1);

  TableId missing = net.addStaticTable("missing", {"a", "b"}, {row({{"a", Value{1}}})}).id;
  CHECK(net.evaluate(missing)->rows[0][1].isNull());

  CHECK(throwsCode(ErrorCode::NameCollision, [&] { net.addStaticTable("dup", {"a", "a"}, {}); }));
}

TEST_CASE("evaluation is cached and repeatable") {
  TableNetwork net;
  TableId m = net.addStaticTable("movies", {"title", "genre"}, movies()).id;
  TableId g = net.addDerived("genres", {m}, derive::Promoted{"genre"}).id;
  TablePtr a = net.evaluate(g);
  TablePtr b = net.evaluate(g);
  CHECK(a == b);
  REQUIRE(a->size() == 2);
  CHECK(a->attributes == std::vector<std::string>{"genre"});
  CHECK(a->rows[0][0] == Value{"Comedy"});
  CHECK(a->rows[1][0] == Value{"Drama"});

  net.setCaching(false);
  TablePtr c = net.evaluate(g);
  CHECK(c != a);
  CHECK(c->rows == a->rows);
  CHECK(c->ids == a->ids);
}

TEST_CASE("unroll flattens lists with a backlink") {
  TableNetwork net;
  ValueList cast{Value{"a"}, Value{"b"}, Value{"c"}, Value{"d"}};
  TableId m = net.addStaticTable("movies", {"title", "cast"},
                                 {row({{"title", Value{"X"}}, {"cast", Value{cast}}})}).id;
  const TableSpec& u = net.unroll(m, "cast");
  TablePtr t = net.evaluate(u.id);
  CHECK(t->size() == 4);
  auto origin = t->column("_origin");
  auto value = t->column("value");
  REQUIRE(origin);
  REQUIRE(value);
  for (std::size_t r = 0; r < 4; ++r) {
    CHECK(t->rows[r][*origin] == Value{0});
    CHECK(t->rows[r][*value] == cast[r]);
  }
  bool linked = false;
  for (const auto& [id, link] : net.links()) {
    if (link.source == u.id && link.target == m) {
      linked = true;
      CHECK(link.sourceKey == Key::attr("_origin"));
      CHECK(link.targetKey.isIndex());
      CHECK(net.matches(id)->pairCount == 4);
    }
  }
  CHECK(linked);
}

TEST_CASE("unroll of maps and of empty lists") {
  TableNetwork net;
  auto company = [](const char* name) {
    ValueMap m;
    m.set("name", Value{name});
    return Value{m};
  };
  TableId m = net.addStaticTable(
      "movies", {"companies"},
      {row({{"companies", Value{ValueList{company("A"), company("B")}}}}),
       row({{"companies", Value{ValueList{company("C")}}}}), row({{"companies", Value{ValueList{}}}})}).id;
  TablePtr t = net.evaluate(net.unroll(m, "companies").id);
  CHECK(t->size() == 3);
  REQUIRE(t->column("name"));
  CHECK(t->rows[2][*t->column("name")] == Value{"C"});
  CHECK(t->rows[2][*t->column("_origin")] == Value{1});

  TableId none = net.addStaticTable("none", {"l"}, {row({{"l", Value{ValueList{}}}})}).id;
  CHECK(net.rowCount(net.unroll(none, "l").id) == 0);
  CHECK(throwsCode(ErrorCode::UnknownAttribute, [&] { net.unroll(none, "zzz"); }));
}

TEST_CASE("expand turns map entries into columns") {
  TableNetwork net;
  ValueMap user;
  user.set("name", Value{"ann"});
  user.set("followers", Value{10});
  TableId tw = net.addStaticTable("tweets", {"text", "user"},
                                  {row({{"text", Value{"hi"}}, {"user", Value{user}}}),
                                   row({{"text", Value{"yo"}}, {"user", Value{"oops"}}})}).id;
  TablePtr t = net.evaluate(net.expand(tw, "user").id);
  REQUIRE(t->size() == 2);
  auto name = t->column("name");
  REQUIRE(name);
  CHECK(t->rows[0][*name] == Value{"ann"});
  CHECK(t->rows[1][*name].isNull());
  CHECK(t->rows[1][*t->column("followers")].isNull());
  CHECK(t->rows[1][*t->column("_origin")] == Value{1});

  TableId empty = net.addStaticTable("e", {"user"}, {}).id;
  CHECK(net.rowCount(net.expand(empty, "user").id) == 0);
  CHECK(throwsCode(ErrorCode::UnknownAttribute, [&] { net.expand(tw, "nope"); }));
}

TEST_CASE("links match by element and never on null") {
  TableNetwork net;
  TableId a = net.addStaticTable("a", {"k"},
                                 {row({{"k", Value{ValueList{Value{"c1"}, Value{"c2"}}}}}), row({{"k", Value{}}})}).id;
  TableId b = net.addStaticTable("b", {"k"}, {row({{"k", Value{"c1"}}}), row({{"k", Value{"c2"}}}),
                                              row({{"k", Value{}}})}).id;
  LinkId l = net.addTableLink({"", a, b, Key::attr("k"), Key::attr("k"), true}).id;
  auto m = net.matches(l);
  CHECK(m->pairCount == 2);
  CHECK(m->forward[0] == std::vector<std::uint32_t>{0, 1});
  CHECK(m->forward[1].empty());
  CHECK(m->backward[2].empty());

  TableId c = net.addStaticTable("c", {"x"}, {row({{"x", Value{1}}}), row({{"x", Value{2}}}), row({{"x", Value{3}}})}).id;
  LinkId idx = net.addTableLink({"", b, c, Key::index(), Key::index(), true}).id;
  CHECK(net.matches(idx)->pairCount == 3);
  CHECK(throwsCode(ErrorCode::UnknownAttribute,
                   [&] { net.addTableLink({"", a, b, Key::attr("zz"), Key::index(), true}); }));
  CHECK(throwsCode(ErrorCode::UnknownTable,
                   [&] { net.addTableLink({"", a, "ghost", Key::index(), Key::index(), true}); }));
}

TEST_CASE("derivations cannot form cycles") {
  TableNetwork net;
  TableId s = net.addStaticTable("s", {"v"}, {row({{"v", Value{1}}})}).id;
  TableId d1 = net.addDerived("d1", {s}, derive::Promoted{"v"}).id;
  TableId d2 = net.addDerived("d2", {d1}, derive::Promoted{"v"}).id;
  CHECK(throwsCode(ErrorCode::CyclicDerivation, [&] { net.redefine(d1, {d2}, derive::Promoted{"v"}); }));
  CHECK(throwsCode(ErrorCode::CyclicDerivation, [&] { net.redefine(d1, {d1}, derive::Promoted{"v"}); }));
  CHECK(net.rowCount(d2) == 1);
  CHECK(throwsCode(ErrorCode::DanglingSource, [&] { net.addDerived("x", {"ghost"}, derive::Promoted{"v"}); }));
}

TEST_CASE("invalidation reaches exactly the downstream closure") {
  TableNetwork net;
  TableId s = net.addStaticTable("s", {"g"}, {row({{"g", Value{"a"}}}), row({{"g", Value{"b"}}})}).id;
  TableId other = net.addStaticTable("o", {"g"}, {row({{"g", Value{"z"}}})}).id;
  TableId d = net.addDerived("d", {s}, derive::Promoted{"g"}).id;
  TableId dd = net.addDerived("dd", {d}, derive::Faceted{"g", Value{"a"}}).id;
  TableId od = net.addDerived("od", {other}, derive::Promoted{"g"}).id;
  TablePtr before = net.evaluate(dd);
  TablePtr untouched = net.evaluate(od);
  CHECK(net.downstream(s) == std::set<TableId>{d, dd});
  net.replaceStaticRows(s, {row({{"g", Value{"a"}}}), row({{"g", Value{"a"}}}), row({{"g", Value{"c"}}})});
  CHECK(net.evaluate(od) == untouched);
  TablePtr after = net.evaluate(dd);
  CHECK(after != before);
  CHECK(net.rowCount(d) == 2);
}

TEST_CASE("unrolled and promoted row counts on random tables") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> len(0, 4), val(0, 6), kind(0, 3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ValueMap> rows;
    std::size_t elements = 0;
    std::vector<Value> distinct;
    for (int r = 0; r < 15; ++r) {
      Value cell;
      switch (kind(rng)) {
        case 0: break;
        case 1: cell = Value{val(rng)}; break;
        case 2: cell = Value{"t" + std::to_string(val(rng))}; break;
        default: {
          ValueList l;
          for (int i = len(rng); i > 0; --i) l.emplace_back(val(rng));
          elements += l.size();
          cell = Value{l};
        }
      }
      if (!cell.isNull() && std::find(distinct.begin(), distinct.end(), cell) == distinct.end())
        distinct.push_back(cell);
      rows.push_back(row({{"c", cell}}));
    }
    TableNetwork net;
    TableId s = net.addStaticTable("s", {"c"}, rows).id;
    CHECK(net.rowCount(net.unroll(s, "c").id) == elements);
    TablePtr p = net.evaluate(net.addDerived("p", {s}, derive::Promoted{"c"}).id);
    REQUIRE(p->size() == distinct.size());
    for (std::size_t i = 0; i < distinct.size(); ++i) CHECK(p->rows[i][0] == distinct[i]);
  }
}

TEST_CASE("faceted and filtered tables keep source ordinals") {
  TableNetwork net;
  TableId m = net.addStaticTable("movies", {"title", "genre"}, movies()).id;
  TablePtr drama = net.evaluate(net.addDerived("drama", {m}, derive::Faceted{"genre", Value{"Drama"}}).id);
  CHECK(drama->ids == std::vector<std::int64_t>{2});
  TablePtr kept = net.evaluate(net.addDerived(
      "kept", {m}, derive::Filtered{PredicateSpec::compare("genre", CompareOp::Equal, Value{"Comedy"})}).id);
  CHECK(kept->ids == std::vector<std::int64_t>{0, 1});
  CHECK(throwsCode(ErrorCode::UnknownAttribute, [&] {
    net.addDerived("bad", {m}, derive::Filtered{PredicateSpec::compare("zz", CompareOp::Equal, Value{1})});
  }));
}
