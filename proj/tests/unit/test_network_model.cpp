#include <algorithm>
#include <random>

#include "doctest.h"
#include "netwrangle/error.hpp"
#include "support.hpp"

using namespace nw;
using namespace nw::test;

namespace {

bool throwsCode(ErrorCode code, auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

std::vector<std::int64_t> ords(const std::vector<ItemRef>& items) {
  std::vector<std::int64_t> out;
  for (const auto& i : items) out.push_back(i.rowId);
  return out;
}

std::multiset<std::pair<ItemRef, ItemRef>> neighborMultiset(const NetworkModel& m, const ClassId& cls) {
  std::multiset<std::pair<ItemRef, ItemRef>> out;
  TablePtr t = m.rows(cls);
  for (auto id : t->ids)
    for (const auto& n : m.neighbors({cls, id})) out.insert({n.edge, n.other});
  return out;
}

}  // namespace

TEST_CASE("interpretation changes") {
  NetworkModel m = movieModel();
  CHECK((m.cls("people").interpretation == Interpretation::Node));
  TablePtr before = m.rows("cast");
  m.interpret("people", Interpretation::Node);
  CHECK((m.cls("people").interpretation == Interpretation::Node));
  CHECK(m.neighbors({"people", 0}).size() == 2);

  m.interpret("cast", Interpretation::Node);
  CHECK_FALSE(m.cls("cast").ends.source.has_value());
  CHECK_FALSE(m.cls("cast").ends.target.has_value());
  CHECK(m.neighbors({"people", 0}).empty());
  CHECK(m.rows("cast")->rows == before->rows);

  m.interpret("cast", Interpretation::Edge);
  CHECK(m.resolveEndpoints({"cast", 0}).sources.empty());
  m.interpret("cast", Interpretation::Generic);
  CHECK(m.countInstances("cast") == 8);
  CHECK(throwsCode(ErrorCode::UnknownClass, [&] { m.interpret("ghost", Interpretation::Node); }));
}

TEST_CASE("endpoints follow the table paths") {
  NetworkModel m = movieModel();
  Endpoints e = m.resolveEndpoints({"cast", 0});
  CHECK(e.sources == std::vector<ItemRef>{{"people", 0}});
  CHECK(e.targets == std::vector<ItemRef>{{"movies", 0}});

  // Nested-loop oracle over the raw key columns.
  auto personKey = column(m, "cast", "person_id");
  auto movieKey = column(m, "cast", "movie_id");
  auto personId = column(m, "people", "id");
  auto movieId = column(m, "movies", "id");
  for (std::size_t r = 0; r < personKey.size(); ++r) {
    std::vector<std::int64_t> src, trg;
    for (std::size_t p = 0; p < personId.size(); ++p)
      if (personId[p] == personKey[r]) src.push_back(static_cast<std::int64_t>(p));
    for (std::size_t v = 0; v < movieId.size(); ++v)
      if (movieId[v] == movieKey[r]) trg.push_back(static_cast<std::int64_t>(v));
    Endpoints got = m.resolveEndpoints({"cast", static_cast<std::int64_t>(r)});
    CHECK(ords(got.sources) == src);
    CHECK(ords(got.targets) == trg);
  }
  CHECK(throwsCode(ErrorCode::WrongInterpretation, [&] { m.resolveEndpoints({"movies", 0}); }));
}

TEST_CASE("disconnected and multi-match edges") {
  NetworkModel m;
  addTable(m, "movies", {"mid"}, {{Value{1}}}, Interpretation::Node);
  addTable(m, "companies", {"name"}, {{Value{"Acme"}}, {Value{"Acme"}}, {Value{"Other"}}}, Interpretation::Node);
  addTable(m, "produced", {"movie", "company"}, {{Value{1}, Value{"Acme"}}}, Interpretation::Edge);
  Endpoints none = m.resolveEndpoints({"produced", 0});
  CHECK(none.sources.empty());
  CHECK(none.targets.empty());
  op(m, "connect", {{"source", "produced"}, {"target", "movies"}, {"sourceKey", "movie"}, {"targetKey", "mid"}});
  op(m, "connect", {{"source", "produced"}, {"target", "companies"}, {"sourceKey", "company"}, {"targetKey", "name"}});
  Endpoints e = m.resolveEndpoints({"produced", 0});
  CHECK(ords(e.sources) == std::vector<std::int64_t>{0});
  CHECK(ords(e.targets) == std::vector<std::int64_t>{0, 1});
  CHECK(m.edgeInstances("produced").size() == 2);
}

TEST_CASE("neighbors are ordered and carry roles") {
  NetworkModel m = movieModel();
  addTable(m, "loners", {"x"}, {{Value{1}}}, Interpretation::Node);
  CHECK(m.neighbors({"loners", 0}).empty());
  auto ann = m.neighbors({"people", 0});
  REQUIRE(ann.size() == 2);
  CHECK(ann[0].edge == ItemRef{"cast", 0});
  CHECK(ann[0].other == ItemRef{"movies", 0});
  CHECK(ann[1].edge == ItemRef{"cast", 6});
  CHECK((ann[0].role == Role::Source));
  auto alpha = m.neighbors({"movies", 0});
  CHECK(alpha.size() == 5);
  CHECK((alpha[0].role == Role::Target));
  CHECK(std::is_sorted(alpha.begin(), alpha.end(), [&](const Neighbor& a, const Neighbor& b) {
    auto pos = [&](const ClassId& c) {
      return std::find(m.classIds().begin(), m.classIds().end(), c) - m.classIds().begin();
    };
    return std::tuple(pos(a.edge.classId), a.edge.rowId, a.other) <
           std::tuple(pos(b.edge.classId), b.edge.rowId, b.other);
  }));
  CHECK(throwsCode(ErrorCode::WrongInterpretation, [&] { m.neighbors({"cast", 0}); }));
}

TEST_CASE("neighbors agree with endpoint resolution on random networks") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    Bipartite b = randomBipartite(rng, 8, 6, 0.3);
    const NetworkModel& m = b.model;
    std::multiset<std::tuple<ItemRef, ItemRef, ItemRef>> fromEdges, fromNodes;
    TablePtr cast = m.rows("cast");
    for (auto row : cast->ids) {
      Endpoints e = m.resolveEndpoints({"cast", row});
      for (const auto& s : e.sources)
        for (const auto& t : e.targets) {
          fromEdges.insert({{"cast", row}, s, t});
          fromEdges.insert({{"cast", row}, t, s});
        }
    }
    for (const ClassId& cls : {ClassId("actors"), ClassId("movies")})
      for (auto id : m.rows(cls)->ids)
        for (const auto& n : m.neighbors({cls, id})) fromNodes.insert({n.edge, ItemRef{cls, id}, n.other});
    CHECK(fromEdges == fromNodes);
  }
}

TEST_CASE("swapping an undirected edge keeps neighbor multisets") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    Bipartite b = randomBipartite(rng, 7, 5, 0.4);
    auto actors = neighborMultiset(b.model, "actors");
    auto movies = neighborMultiset(b.model, "movies");
    b.model.swapSides("cast");
    CHECK(neighborMultiset(b.model, "actors") == actors);
    CHECK(neighborMultiset(b.model, "movies") == movies);
  }
}

TEST_CASE("counts, deletion and renaming") {
  NetworkModel m = movieModel();
  CHECK(m.countInstances("cast") == 8);
  addTable(m, "empty", {"a"}, {});
  CHECK(m.countInstances("empty") == 0);
  op(m, "promote", {{"class", "movies"}, {"attribute", "genre"}});
  CHECK(m.countInstances("genre") == 2);

  m.deleteClass("people");
  CHECK_FALSE(m.hasClass("people"));
  CHECK_FALSE(m.cls("cast").ends.source.has_value());
  CHECK(m.cls("cast").ends.target.has_value());
  CHECK(m.resolveEndpoints({"cast", 0}).sources.empty());
  m.checkInvariants();

  m.renameClass("produced", "produced by");
  CHECK(m.cls("produced").label == "produced by");
  m.renameAttribute("movies", "title", "name");
  CHECK(m.rows("movies")->column("name"));
  CHECK(throwsCode(ErrorCode::NameCollision, [&] { m.renameAttribute("movies", "name", "genre"); }));
  CHECK(m.neighbors({"movies", 0}).size() == 2);
}

TEST_CASE("palette slots run out into gray") {
  NetworkModel m;
  std::vector<ClassId> ids;
  for (int i = 0; i < 10; ++i) ids.push_back(addTable(m, "c" + std::to_string(i), {"a"}, {}));
  for (int i = 0; i < 8; ++i) CHECK(m.cls(ids[i]).color == i);
  CHECK(m.cls(ids[8]).color == kGray);
  CHECK(m.cls(ids[9]).color == kGray);
  m.deleteClass(ids[3]);
  ClassId again = addTable(m, "late", {"a"}, {});
  CHECK(m.cls(again).color == 3);
}

TEST_CASE("class ids are unique while labels may repeat") {
  NetworkModel m;
  ClassId a = addTable(m, "x", {"a"}, {});
  ClassId b = addTable(m, "x", {"a"}, {});
  CHECK(a != b);
  CHECK(m.cls(a).label == m.cls(b).label);
}
