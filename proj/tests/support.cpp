#include "support.hpp"

#include <algorithm>

namespace nw::test {

ClassId addTable(NetworkModel& model, const std::string& name,
                 const std::vector<std::string>& attributes, const Rows& rows,
                 Interpretation interpretation) {
  std::vector<ValueMap> maps;
  for (const auto& r : rows) {
    ValueMap m;
    for (std::size_t c = 0; c < attributes.size(); ++c) m.set(attributes[c], r[c]);
    maps.push_back(std::move(m));
  }
  TableId t = model.tables().addStaticTable(name, attributes, maps).id;
  return model.addClass(name, t, interpretation).id;
}

std::vector<ClassId> op(NetworkModel& model, const std::string& name, Json params) {
  OpRecord r;
  r.op = name;
  r.params = std::move(params);
  return applyOp(model, r);
}

std::string fixtureDir() { return NW_FIXTURE_DIR; }

NetworkModel movieModel() {
  NetworkModel m;
  std::string dir = fixtureDir() + "/movies/";
  for (const char* name : {"movies", "people", "cast", "companies", "produced"})
    importFile(m, name, "csv", dir + name + ".csv");
  for (const char* n : {"movies", "people", "companies"}) op(m, "interpret", {{"class", n}, {"as", "node"}});
  for (const char* e : {"cast", "produced"}) op(m, "interpret", {{"class", e}, {"as", "edge"}});
  op(m, "connect", {{"source", "cast"}, {"target", "people"}, {"sourceKey", "person_id"}, {"targetKey", "id"}});
  op(m, "connect", {{"source", "cast"}, {"target", "movies"}, {"sourceKey", "movie_id"}, {"targetKey", "id"}});
  op(m, "connect",
     {{"source", "produced"}, {"target", "movies"}, {"sourceKey", "movie_id"}, {"targetKey", "id"}});
  op(m, "connect",
     {{"source", "produced"}, {"target", "companies"}, {"sourceKey", "company_id"}, {"targetKey", "id"}});
  return m;
}

namespace {

std::vector<Value> elements(const Value& v) {
  if (v.isNull()) return {};
  if (!v.isList()) return {v};
  std::vector<Value> out;
  for (const auto& e : v.list())
    if (!e.isNull()) out.push_back(e);
  return out;
}

bool intersects(const Value& a, const Value& b) {
  for (const auto& x : elements(a))
    for (const auto& y : elements(b))
      if (x == y) return true;
  return false;
}

}  // namespace

double bruteScore(const std::vector<Value>& src, const std::vector<Value>& trg) {
  auto f = [](std::size_t d) { return d == 0 ? -1.0 : 1.0 / static_cast<double>(d); };
  double a = 0, b = 0;
  for (const auto& s : src) {
    std::size_t d = 0;
    for (const auto& t : trg) d += intersects(s, t);
    a += f(d);
  }
  for (const auto& t : trg) {
    std::size_t d = 0;
    for (const auto& s : src) d += intersects(s, t);
    b += f(d);
  }
  return a / static_cast<double>(src.size()) + b / static_cast<double>(trg.size());
}

std::vector<Value> column(const NetworkModel& model, const ClassId& id, const std::string& attr) {
  TablePtr t = model.rows(id);
  std::vector<Value> out;
  auto col = t->column(attr);
  for (std::size_t r = 0; r < t->size(); ++r)
    out.push_back(attr == "@index" ? Value{t->ids[r]} : t->rows[r][*col]);
  return out;
}

std::multiset<std::pair<std::int64_t, std::int64_t>> pairMultiset(const NetworkModel& model,
                                                                   const ClassId& edge) {
  std::multiset<std::pair<std::int64_t, std::int64_t>> out;
  for (const auto& inst : model.edgeInstances(edge)) {
    auto a = inst.source.rowId, b = inst.target.rowId;
    out.insert({std::min(a, b), std::max(a, b)});
  }
  return out;
}

Bipartite randomBipartite(std::mt19937_64& rng, int actors, int movies, double density) {
  Bipartite b;
  Rows actorRows, movieRows, castRows;
  for (int a = 0; a < actors; ++a) actorRows.push_back({Value{a}, Value{"actor" + std::to_string(a)}});
  b.castOf.resize(movies);
  std::bernoulli_distribution pick(density);
  for (int m = 0; m < movies; ++m) {
    movieRows.push_back({Value{m}, Value{"movie" + std::to_string(m)}});
    for (int a = 0; a < actors; ++a)
      if (pick(rng)) {
        castRows.push_back({Value{m}, Value{a}});
        b.castOf[m].push_back(a);
      }
  }
  addTable(b.model, "actors", {"aid", "name"}, actorRows, Interpretation::Node);
  addTable(b.model, "movies", {"mid", "title"}, movieRows, Interpretation::Node);
  addTable(b.model, "cast", {"movie", "actor"}, castRows, Interpretation::Edge);
  op(b.model, "connect", {{"source", "cast"}, {"target", "actors"}, {"sourceKey", "actor"}, {"targetKey", "aid"}});
  op(b.model, "connect", {{"source", "cast"}, {"target", "movies"}, {"sourceKey", "movie"}, {"targetKey", "mid"}});
  return b;
}

}  // namespace nw::test
