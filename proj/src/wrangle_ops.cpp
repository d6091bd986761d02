#include "netwrangle/wrangle_ops.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <utility>

#include "netwrangle/error.hpp"

namespace nw {

namespace {

const std::vector<std::pair<std::string, OpCategory>>& opTable() {
  static const std::vector<std::pair<std::string, OpCategory>> table = {
      {"connect", OpCategory::Modeling},
      {"disconnect", OpCategory::Modeling},
      {"promote", OpCategory::Modeling},
      {"facet", OpCategory::Modeling},
      {"convertToEdges", OpCategory::Modeling},
      {"convertToNodes", OpCategory::Modeling},
      {"projectEdge", OpCategory::Modeling},
      {"createSupernode", OpCategory::Modeling},
      {"rollupEdges", OpCategory::Modeling},
      {"filterAttr", OpCategory::Item},
      {"filterConnectivity", OpCategory::Item},
      {"deriveInClass", OpCategory::Attribute},
      {"deriveConnected", OpCategory::Attribute},
      {"setDirection", OpCategory::Attribute},
      {"interpret", OpCategory::Housekeeping},
      {"unroll", OpCategory::Housekeeping},
      {"expand", OpCategory::Housekeeping},
      {"deleteClass", OpCategory::Housekeeping},
      {"renameClass", OpCategory::Housekeeping},
      {"renameAttribute", OpCategory::Housekeeping},
  };
  return table;
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::Validation, msg); }

const Json& required(const Json& params, const char* name) {
  if (!params.is_object() || !params.contains(name))
    invalid(std::string("missing parameter '") + name + "'");
  return params.at(name);
}

std::string requiredText(const Json& params, const char* name) {
  const Json& j = required(params, name);
  if (!j.is_string()) invalid(std::string("parameter '") + name + "' must be text");
  return j.get<std::string>();
}

std::string optionalText(const Json& params, const char* name, std::string fallback) {
  if (!params.contains(name) || params.at(name).is_null()) return fallback;
  if (!params.at(name).is_string()) invalid(std::string("parameter '") + name + "' must be text");
  return params.at(name).get<std::string>();
}

}  // namespace

std::optional<OpCategory> categoryOf(std::string_view op) {
  for (const auto& [name, cat] : opTable())
    if (name == op) return cat;
  return std::nullopt;
}

const std::vector<std::string>& knownOps() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, cat] : opTable()) out.push_back(name);
    return out;
  }();
  return names;
}

Json toJson(const OpRecord& record) {
  Json j = Json::object();
  j["op"] = record.op;
  j["params"] = record.params;
  if (!record.resultClassIds.empty()) j["resultClassIds"] = record.resultClassIds;
  if (record.expect) j["expect"] = *record.expect;
  return j;
}

OpRecord opFromJson(const Json& json) {
  if (!json.is_object()) invalid("op record must be an object");
  OpRecord r;
  r.op = requiredText(json, "op");
  if (json.contains("params")) {
    if (!json.at("params").is_object()) invalid("op params must be an object");
    r.params = json.at("params");
  }
  if (json.contains("resultClassIds") && json.at("resultClassIds").is_array())
    for (const auto& id : json.at("resultClassIds")) r.resultClassIds.push_back(id.get<std::string>());
  if (json.contains("expect") && !json.at("expect").is_null()) r.expect = json.at("expect");
  return r;
}

Key keyFromJson(const Json& json) {
  if (json.is_null()) return Key::index();
  if (!json.is_string()) invalid("key must be an attribute name or \"@index\"");
  return Key::parse(json.get<std::string>());
}

Json toJson(const Key& key) { return key.label(); }

PathSpec pathFromJson(const Json& json) {
  PathSpec p;
  if (json.is_array()) {
    if (json.empty()) invalid("path must not be empty");
    p.anchor = json.front().get<std::string>();
    for (std::size_t i = 1; i < json.size(); ++i) p.hops.push_back(json[i].get<std::string>());
    return p;
  }
  if (!json.is_object()) invalid("path must be an object");
  p.anchor = optionalText(json, "anchor", "");
  const Json& hops = required(json, "hops");
  if (!hops.is_array()) invalid("path hops must be a list");
  for (const auto& h : hops) {
    if (!h.is_string()) invalid("path hops must be class ids");
    p.hops.push_back(h.get<std::string>());
  }
  return p;
}

Json toJson(const PathSpec& path) {
  Json j = Json::object();
  j["anchor"] = path.anchor;
  j["hops"] = path.hops;
  return j;
}

ExprSpec exprFromJson(const Json& json) {
  if (json.is_string()) {
    std::string name = json.get<std::string>();
    if (!isStandardReducer(name)) throw Error(ErrorCode::UnknownReducer, "unknown reducer '" + name + "'");
    return ExprSpec::standard(name);
  }
  if (json.is_object()) {
    if (json.contains("custom")) {
      std::string src = json.at("custom").get<std::string>();
      parseOnly(src);
      return ExprSpec::custom(src);
    }
    if (json.contains("standard")) return exprFromJson(json.at("standard"));
  }
  invalid("expression must be a reducer name or {\"custom\": source}");
}

Json toJson(const ExprSpec& expr) {
  if (expr.mode == ExprSpec::Mode::Standard) return expr.text;
  Json j = Json::object();
  j["custom"] = expr.text;
  return j;
}

PredicateSpec predicateFromJson(const Json& json) {
  if (!json.is_object()) invalid("predicate must be an object");
  if (json.contains("custom")) {
    std::string src = json.at("custom").get<std::string>();
    parseOnly(src);
    return PredicateSpec::custom(src);
  }
  std::string attr = requiredText(json, "attribute");
  std::string opText = requiredText(json, "op");
  auto op = parseCompareOp(opText);
  if (!op) invalid("unknown comparison '" + opText + "'");
  Value literal = json.contains("value") ? fromJson(json.at("value")) : Value{};
  return PredicateSpec::compare(attr, *op, literal);
}

Json toJson(const PredicateSpec& predicate) {
  Json j = Json::object();
  if (const auto* c = std::get_if<PredicateSpec::Compare>(&predicate.form)) {
    j["attribute"] = c->attribute;
    j["op"] = std::string(toString(c->op));
    j["value"] = toJson(c->literal);
  } else {
    j["custom"] = std::get<PredicateSpec::Custom>(predicate.form).source;
  }
  return j;
}

ModelCounts snapshotCounts(const NetworkModel& model) {
  ModelCounts out;
  out.classes = model.classIds();
  for (const auto& id : out.classes) out.instances[id] = model.countInstances(id);
  return out;
}

void checkTaxonomy(std::string_view op, const ModelCounts& before, const ModelCounts& after) {
  auto cat = categoryOf(op);
  if (!cat) return;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::InvariantViolation, std::string(op) + ": " + what);
  };
  if (*cat == OpCategory::Item || *cat == OpCategory::Attribute) {
    if (before.classes != after.classes) fail("class set changed");
  }
  if (*cat == OpCategory::Attribute) {
    if (before.instances != after.instances) fail("instance counts changed");
  }
}

namespace {

const ClassSpec& requireKind(const NetworkModel& model, const ClassId& id, Interpretation kind) {
  const ClassSpec& c = model.cls(id);
  if (c.interpretation != kind)
    throw Error(ErrorCode::WrongInterpretation,
                "'" + id + "' is not a " + std::string(toString(kind)) + " class");
  return c;
}

EdgeSide directSide(const ClassId& node, const LinkId& link) { return EdgeSide{node, {{link, true}}}; }

// Edge table of rows {_source, _target} plus an Edge class joining `src`
// and `trg` through it. `trg` must be a node class; `src` is attached only
// when it is one.
ClassId attachPairTable(NetworkModel& model, const std::string& label, const TableId& pairTable,
                        const ClassId& src, const ClassId& trg, bool directed) {
  TableNetwork& t = model.tables();
  const ClassSpec& srcClass = model.cls(src);
  const ClassSpec& trgClass = model.cls(trg);
  LinkId ls = t.addTableLink({"", pairTable, srcClass.table, Key::attr("_source"), Key::index(), false}).id;
  LinkId lt = t.addTableLink({"", pairTable, trgClass.table, Key::attr("_target"), Key::index(), false}).id;
  bool srcIsNode = srcClass.interpretation == Interpretation::Node;
  bool trgIsNode = trgClass.interpretation == Interpretation::Node;
  ClassId edge = model.addClass(label, pairTable, Interpretation::Edge).id;
  if (srcIsNode) model.setSide(edge, Side::Source, directSide(src, ls));
  if (trgIsNode) model.setSide(edge, Side::Target, directSide(trg, lt));
  model.setDirected(edge, directed);
  return edge;
}

// One edge per key match between two classes.
ClassId matchEdgeClass(NetworkModel& model, const std::string& label, const ClassId& src,
                       const ClassId& trg, const Key& srcKey, const Key& trgKey, bool expandLists) {
  TableNetwork& t = model.tables();
  TableId st = model.cls(src).table;
  TableId tt = model.cls(trg).table;
  LinkId l = t.addTableLink({"", st, tt, srcKey, trgKey, expandLists}).id;
  TableId pairs = t.addDerived(label, {st, tt}, derive::Matched{{{l, true}}}).id;
  return attachPairTable(model, label, pairs, src, trg, false);
}

TableId materialize(NetworkModel& model, const std::string& name, std::vector<TableId> sources,
                    std::shared_ptr<MaterializedTable> rows) {
  return model.tables().addDerived(name, std::move(sources), derive::Materialized{std::move(rows)}).id;
}

std::vector<derive::Step> reversed(const std::vector<derive::Step>& steps) {
  std::vector<derive::Step> out;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) out.push_back({it->link, !it->forward});
  return out;
}

std::vector<TableId> tablesAlong(const TableNetwork& t, const TableId& start,
                                 const std::vector<derive::Step>& steps) {
  std::vector<TableId> out{start};
  for (const auto& s : steps) {
    const TableLink& l = t.link(s.link);
    out.push_back(s.forward ? l.target : l.source);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct ReducerParam {
  std::string attribute;
  ExprSpec reducer;
  std::string as;
};

std::vector<ReducerParam> reducersFrom(const Json& params) {
  std::vector<ReducerParam> out;
  if (!params.contains("reducers")) return out;
  const Json& list = params.at("reducers");
  if (!list.is_array()) invalid("reducers must be a list");
  for (const auto& r : list) {
    ReducerParam p;
    p.attribute = requiredText(r, "attribute");
    p.reducer = exprFromJson(required(r, "reducer"));
    p.as = optionalText(r, "as", p.attribute);
    out.push_back(std::move(p));
  }
  return out;
}

std::size_t columnOf(const MaterializedTable& table, const std::string& attr) {
  auto c = table.column(attr);
  if (!c) throw Error(ErrorCode::UnknownAttribute, "unknown attribute '" + attr + "'");
  return *c;
}

PathSpec pathParam(const Json& params, const ClassId& anchor) {
  PathSpec p = pathFromJson(required(params, "path"));
  if (p.anchor.empty()) p.anchor = anchor;
  if (p.anchor != anchor)
    throw Error(ErrorCode::InvalidPath, "path must be anchored at '" + anchor + "'");
  return p;
}

// --- modeling -------------------------------------------------------------

std::vector<ClassId> opConnect(NetworkModel& model, const Json& p) {
  ClassId src = requiredText(p, "source");
  ClassId trg = requiredText(p, "target");
  Key srcKey = keyFromJson(required(p, "sourceKey"));
  Key trgKey = keyFromJson(required(p, "targetKey"));
  const ClassSpec& a = model.cls(src);
  const ClassSpec& b = model.cls(trg);
  auto isNode = [](const ClassSpec& c) { return c.interpretation == Interpretation::Node; };
  auto isEdge = [](const ClassSpec& c) { return c.interpretation == Interpretation::Edge; };
  if (isNode(a) && isNode(b)) {
    std::string label = optionalText(p, "label", a.label + "-" + b.label);
    return {matchEdgeClass(model, label, src, trg, srcKey, trgKey, true)};
  }
  if (isEdge(a) && isEdge(b)) throw Error(ErrorCode::Unsupported, "cannot connect two edge classes");
  if (!(isEdge(a) && isNode(b)) && !(isNode(a) && isEdge(b)))
    throw Error(ErrorCode::Unsupported, "connect needs node or edge classes");
  const ClassSpec& edge = isEdge(a) ? a : b;
  const ClassSpec& node = isEdge(a) ? b : a;
  Key edgeKey = isEdge(a) ? srcKey : trgKey;
  Key nodeKey = isEdge(a) ? trgKey : srcKey;
  std::optional<Side> side;
  if (p.contains("side")) {
    side = parseSide(requiredText(p, "side"));
    if (!side) invalid("side must be 'source' or 'target'");
    if (edge.ends.side(*side)) throw Error(ErrorCode::SideOccupied, "side already attached");
  } else if (!edge.ends.source) {
    side = Side::Source;
  } else if (!edge.ends.target) {
    side = Side::Target;
  } else {
    throw Error(ErrorCode::SideOccupied, "both sides of '" + edge.id + "' are attached");
  }
  ClassId edgeId = edge.id, nodeId = node.id;
  LinkId l = model.tables().addTableLink({"", edge.table, node.table, edgeKey, nodeKey, true}).id;
  model.setSide(edgeId, *side, directSide(nodeId, l));
  return {};
}

std::vector<ClassId> opDisconnect(NetworkModel& model, const Json& p) {
  ClassId edge = requiredText(p, "edge");
  auto side = parseSide(requiredText(p, "side"));
  if (!side) invalid("side must be 'source' or 'target'");
  const ClassSpec& c = requireKind(model, edge, Interpretation::Edge);
  if (!c.ends.side(*side)) throw Error(ErrorCode::NoOp, "side is already disconnected");
  model.setSide(edge, *side, std::nullopt);
  return {};
}

std::vector<ClassId> opPromote(NetworkModel& model, const Json& p) {
  ClassId id = requiredText(p, "class");
  std::string attr = requiredText(p, "attribute");
  const ClassSpec& c = model.cls(id);
  TableId promoted = model.tables().addDerived(attr, {c.table}, derive::Promoted{attr}).id;
  ClassId node = model.addClass(optionalText(p, "label", attr), promoted, Interpretation::Node).id;
  const ClassSpec& src = model.cls(id);
  ClassId edge = matchEdgeClass(model, optionalText(p, "edgeLabel", src.label + "-" + attr), id,
                                node, Key::attr(attr), Key::attr(attr), false);
  return {node, edge};
}

std::vector<ClassId> opFacet(NetworkModel& model, const Json& p) {
  ClassId id = requiredText(p, "class");
  std::string attr = requiredText(p, "attribute");
  std::size_t maxFacets = p.value("maxFacets", std::size_t{64});
  const ClassSpec c = model.cls(id);
  TablePtr rows = model.rows(id);
  std::size_t col = columnOf(*rows, attr);
  std::vector<Value> values;
  std::unordered_map<Value, bool, ValueHash> seen;
  for (const auto& row : rows->rows)
    if (!row[col].isNull() && seen.emplace(row[col], true).second) values.push_back(row[col]);
  if (values.size() > maxFacets)
    throw Error(ErrorCode::TooManyFacets,
                std::to_string(values.size()) + " distinct values exceed the facet limit");
  std::vector<ClassId> out;
  for (const auto& v : values) {
    std::string text = renderText(v);
    TableId t = model.tables().addDerived(c.table + "_" + text, {c.table}, derive::Faceted{attr, v}).id;
    ClassId facet = model.addClass(text + " " + c.label, t, c.interpretation).id;
    if (c.interpretation == Interpretation::Edge) {
      for (Side s : {Side::Source, Side::Target}) {
        auto side = c.ends.side(s);
        if (!side) continue;
        side->steps.front().link = model.tables().retargetLink(side->steps.front().link, c.table, t);
        model.setSide(facet, s, side);
      }
      model.setDirected(facet, c.ends.directed);
    }
    out.push_back(facet);
  }
  return out;
}

std::vector<ClassId> opConvertToEdges(NetworkModel& model, const Json& p) {
  ClassId id = requiredText(p, "class");
  requireKind(model, id, Interpretation::Node);
  struct Adj {
    ClassId edge;
    Side side;
  };
  std::vector<Adj> adjs;
  for (const auto& eid : model.classIds()) {
    const ClassSpec& e = model.cls(eid);
    if (e.interpretation != Interpretation::Edge || eid == id) continue;
    for (Side s : {Side::Source, Side::Target})
      if (e.ends.side(s) && e.ends.side(s)->nodeClass == id) adjs.push_back({eid, s});
  }
  std::vector<Adj> chosen;
  if (p.contains("sides")) {
    const Json& sides = required(p, "sides");
    std::string se = requiredText(sides, "source"), te = requiredText(sides, "target");
    auto find = [&](const std::string& edge, const Adj* not_) -> const Adj* {
      for (const auto& a : adjs)
        if (a.edge == edge && &a != not_) return &a;
      return nullptr;
    };
    const Adj* sa = find(se, nullptr);
    if (!sa) invalid("'" + se + "' is not adjacent to '" + id + "'");
    const Adj* ta = find(te, sa);
    if (!ta) ta = find(te, nullptr);
    if (!ta) invalid("'" + te + "' is not adjacent to '" + id + "'");
    chosen = {*sa, *ta};
  } else if (adjs.size() > 2) {
    std::string list;
    for (const auto& a : adjs) list += (list.empty() ? "" : ", ") + a.edge;
    throw Error(ErrorCode::AmbiguousSides, "adjacent to more than two edge classes: " + list);
  } else if (adjs.size() == 1) {
    chosen = {adjs[0], adjs[0]};
  } else if (adjs.size() == 2) {
    chosen = adjs;
  }
  std::vector<std::optional<EdgeSide>> newSides;
  for (const auto& a : chosen) {
    const ClassSpec& e = model.cls(a.edge);
    const auto& mine = *e.ends.side(a.side);
    const auto& other = e.ends.side(a.side == Side::Source ? Side::Target : Side::Source);
    if (!other || other->nodeClass == id) {
      newSides.push_back(std::nullopt);
      continue;
    }
    EdgeSide s{other->nodeClass, reversed(mine.steps)};
    s.steps.insert(s.steps.end(), other->steps.begin(), other->steps.end());
    newSides.push_back(std::move(s));
  }
  std::set<ClassId> removed;
  for (const auto& a : chosen) removed.insert(a.edge);
  for (const auto& e : removed) model.deleteClass(e);
  model.interpret(id, Interpretation::Edge);
  if (newSides.size() == 2) {
    if (newSides[0]) model.setSide(id, Side::Source, newSides[0]);
    if (newSides[1]) model.setSide(id, Side::Target, newSides[1]);
  }
  return {};
}

std::vector<ClassId> opConvertToNodes(NetworkModel& model, const Json& p) {
  ClassId id = requiredText(p, "edge");
  const ClassSpec c = requireKind(model, id, Interpretation::Edge);
  model.interpret(id, Interpretation::Node);
  std::vector<ClassId> out;
  for (Side s : {Side::Source, Side::Target}) {
    const auto& side = c.ends.side(s);
    if (!side || !model.hasClass(side->nodeClass)) continue;
    TableNetwork& t = model.tables();
    const ClassSpec& node = model.cls(side->nodeClass);
    std::string label = c.label + "-" + node.label;
    TableId pairs = t.addDerived(label, tablesAlong(t, c.table, side->steps),
                                 derive::Matched{side->steps}).id;
    ClassId nodeId = node.id;
    ClassId edge = attachPairTable(model, label, pairs, id, nodeId, c.ends.directed);
    if (s == Side::Source) model.swapSides(edge);
    out.push_back(edge);
  }
  return out;
}

std::vector<ClassId> opProjectEdge(NetworkModel& model, const Json& p) {
  PathSpec path = pathFromJson(required(p, "path"));
  validatePath(model, path);
  requireKind(model, path.anchor, Interpretation::Node);
  if (path.hops.size() < 2) throw Error(ErrorCode::InvalidPath, "projection needs at least two hops");
  if (model.cls(path.last()).interpretation != Interpretation::Node)
    throw Error(ErrorCode::InvalidPath, "projection path must end at a node class");
  auto ends = walkPath(model, path);
  TablePtr anchorRows = model.rows(path.anchor);
  auto table = std::make_shared<MaterializedTable>();
  table->attributes = {"_source", "_target"};
  for (std::size_t r = 0; r < ends.size(); ++r)
    for (const auto& end : ends[r]) {
      table->ids.push_back(static_cast<std::int64_t>(table->rows.size()));
      table->rows.push_back({Value{anchorRows->ids[r]}, Value{end.rowId}});
    }
  const ClassSpec& a = model.cls(path.anchor);
  const ClassSpec& b = model.cls(path.last());
  std::string label = optionalText(p, "label", a.label + "-" + b.label);
  TableId t = materialize(model, label, {a.table, b.table}, table);
  return {attachPairTable(model, label, t, a.id, b.id, p.value("directed", false))};
}

std::vector<ClassId> opCreateSupernode(NetworkModel& model, const Json& p) {
  ClassId id = requiredText(p, "class");
  const ClassSpec c = requireKind(model, id, Interpretation::Node);
  std::string label = requiredText(p, "label");
  TablePtr rows = model.rows(id);
  std::vector<std::size_t> members;
  Warnings w;
  if (p.contains("filter") && !p.at("filter").is_null()) {
    Predicate pred(predicateFromJson(p.at("filter")), rows->attributes);
    for (std::size_t r = 0; r < rows->size(); ++r)
      if (pred(rows->rows[r], w)) members.push_back(r);
  } else {
    for (std::size_t r = 0; r < rows->size(); ++r) members.push_back(r);
  }
  auto super = std::make_shared<MaterializedTable>();
  super->attributes = {"label"};
  std::vector<Value> cells{Value{label}};
  for (const auto& red : reducersFrom(p)) {
    std::size_t col = columnOf(*rows, red.attribute);
    std::vector<Value> values;
    for (auto m : members) values.push_back(rows->rows[m][col]);
    if (std::find(super->attributes.begin(), super->attributes.end(), red.as) != super->attributes.end())
      throw Error(ErrorCode::NameCollision, "attribute '" + red.as + "' already exists");
    super->attributes.push_back(red.as);
    cells.push_back(evalReduce(red.reducer, values, w));
  }
  super->rows.push_back(std::move(cells));
  super->ids.push_back(0);
  if (members.empty()) super->warnings.push_back("supernode has no members");
  if (w.count) super->warnings.push_back(std::to_string(w.count) + " evaluation warning(s); first: " + w.first);
  TableId st = materialize(model, label, {c.table}, super);
  ClassId node = model.addClass(label, st, Interpretation::Node).id;
  auto links = std::make_shared<MaterializedTable>();
  links->attributes = {"_source", "_target"};
  for (auto m : members) {
    links->ids.push_back(static_cast<std::int64_t>(links->rows.size()));
    links->rows.push_back({Value{0}, Value{rows->ids[m]}});
  }
  std::string edgeLabel = optionalText(p, "edgeLabel", label + " members");
  TableId lt = materialize(model, edgeLabel, {st, c.table}, links);
  return {node, attachPairTable(model, edgeLabel, lt, node, id, false)};
}

std::vector<ClassId> opRollupEdges(NetworkModel& model, const Json& p) {
  ClassId id = requiredText(p, "edge");
  const ClassSpec c = requireKind(model, id, Interpretation::Edge);
  if (!c.ends.source || !c.ends.target)
    throw Error(ErrorCode::NeedBothSides, "rollup needs both sides of '" + id + "' attached");
  auto reducers = reducersFrom(p);
  TablePtr edgeRows = model.rows(id);
  std::vector<std::size_t> cols;
  for (const auto& r : reducers) cols.push_back(columnOf(*edgeRows, r.attribute));
  bool sameClass = c.ends.source->nodeClass == c.ends.target->nodeClass;
  std::vector<std::pair<ItemRef, ItemRef>> keys;
  std::map<std::pair<ItemRef, ItemRef>, std::vector<std::int64_t>> groups;
  for (const auto& inst : model.edgeInstances(id)) {
    auto key = std::make_pair(inst.source, inst.target);
    if (!c.ends.directed && sameClass && key.second < key.first) std::swap(key.first, key.second);
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) keys.push_back(key);
    it->second.push_back(inst.edgeRow);
  }
  auto table = std::make_shared<MaterializedTable>();
  table->attributes = {"_source", "_target", "count"};
  for (const auto& r : reducers) {
    if (std::find(table->attributes.begin(), table->attributes.end(), r.as) != table->attributes.end())
      throw Error(ErrorCode::NameCollision, "attribute '" + r.as + "' already exists");
    table->attributes.push_back(r.as);
  }
  Warnings w;
  for (const auto& key : keys) {
    const auto& members = groups[key];
    std::vector<Value> cells{Value{key.first.rowId}, Value{key.second.rowId},
                             Value{static_cast<double>(members.size())}};
    for (std::size_t i = 0; i < reducers.size(); ++i) {
      std::vector<Value> values;
      for (auto row : members) values.push_back(edgeRows->rows[*edgeRows->position(row)][cols[i]]);
      cells.push_back(evalReduce(reducers[i].reducer, values, w));
    }
    table->ids.push_back(static_cast<std::int64_t>(table->rows.size()));
    table->rows.push_back(std::move(cells));
  }
  if (w.count) table->warnings.push_back(std::to_string(w.count) + " evaluation warning(s); first: " + w.first);
  std::string label = optionalText(p, "label", c.label + " rollup");
  const ClassSpec& s = model.cls(c.ends.source->nodeClass);
  const ClassSpec& t = model.cls(c.ends.target->nodeClass);
  TableId rt = materialize(model, label, {c.table, s.table, t.table}, table);
  return {attachPairTable(model, label, rt, s.id, t.id, c.ends.directed)};
}

// --- item -------------------------------------------------------------------

std::vector<ClassId> opFilterAttr(NetworkModel& model, const Json& p) {
  ClassId id = requiredText(p, "class");
  PredicateSpec pred = predicateFromJson(required(p, "predicate"));
  TableId t = model.cls(id).table;
  TableId filtered = model.tables().addDerived(t + "_filtered", {t}, derive::Filtered{pred}).id;
  model.replaceTable(id, filtered);
  return {};
}

std::vector<ClassId> opFilterConnectivity(NetworkModel& model, const Json& p) {
  ClassId id = requiredText(p, "class");
  PathSpec path = pathParam(p, id);
  std::string target = optionalText(p, "targetAttribute", "");
  ExprSpec reducer = exprFromJson(required(p, "reducer"));
  PredicateSpec pred = predicateFromJson(required(p, "predicate"));
  std::string as = optionalText(p, "as", "value");
  Warnings w;
  auto reduced = reduceAlongPath(model, path, target, reducer, w);
  TablePtr rows = model.rows(id);
  std::vector<std::string> schema = rows->attributes;
  auto existing = rows->column(as);
  if (!existing) schema.push_back(as);
  Predicate test(pred, schema);
  std::set<std::int64_t> keep;
  for (std::size_t r = 0; r < rows->size(); ++r) {
    std::vector<Value> cells = rows->rows[r];
    if (existing)
      cells[*existing] = reduced[r];
    else
      cells.push_back(reduced[r]);
    if (test(cells, w)) keep.insert(rows->ids[r]);
  }
  TableId t = model.cls(id).table;
  TableId selected = model.tables().addDerived(t + "_filtered", {t}, derive::Selected{std::move(keep)}).id;
  model.replaceTable(id, selected);
  return {};
}

// --- attribute --------------------------------------------------------------

std::vector<ClassId> opDeriveInClass(NetworkModel& model, const Json& p) {
  ClassId id = requiredText(p, "class");
  std::string attr = requiredText(p, "newAttribute");
  ExprSpec expr = exprFromJson(required(p, "expression"));
  TableId t = model.cls(id).table;
  TableId derived = model.tables().addDerived(t + "_" + attr, {t}, derive::AttributeDerived{attr, expr}).id;
  model.replaceTable(id, derived);
  return {};
}

std::vector<ClassId> opDeriveConnected(NetworkModel& model, const Json& p) {
  ClassId id = requiredText(p, "class");
  PathSpec path = pathParam(p, id);
  std::string target = optionalText(p, "targetAttribute", "");
  ExprSpec reducer = exprFromJson(required(p, "reducer"));
  std::string attr = requiredText(p, "newAttribute");
  Warnings w;
  auto reduced = reduceAlongPath(model, path, target, reducer, w);
  TablePtr rows = model.rows(id);
  std::map<std::int64_t, Value> values;
  for (std::size_t r = 0; r < rows->size(); ++r) values[rows->ids[r]] = reduced[r];
  TableId t = model.cls(id).table;
  TableId derived =
      model.tables().addDerived(t + "_" + attr, {t}, derive::ColumnAttached{attr, std::move(values)}).id;
  model.replaceTable(id, derived);
  return {};
}

std::vector<ClassId> opSetDirection(NetworkModel& model, const Json& p) {
  ClassId id = requiredText(p, "edge");
  std::string mode = requiredText(p, "mode");
  requireKind(model, id, Interpretation::Edge);
  if (mode == "undirected") {
    model.setDirected(id, false);
  } else if (mode == "asIs") {
    model.setDirected(id, true);
  } else if (mode == "swapped") {
    model.setDirected(id, true);
    model.swapSides(id);
  } else {
    invalid("direction mode must be undirected, asIs or swapped");
  }
  return {};
}

// --- housekeeping -----------------------------------------------------------

std::vector<ClassId> opInterpret(NetworkModel& model, const Json& p) {
  ClassId id = requiredText(p, "class");
  auto as = parseInterpretation(requiredText(p, "as"));
  if (!as) invalid("interpretation must be generic, node or edge");
  model.interpret(id, *as);
  return {};
}

std::vector<ClassId> opNest(NetworkModel& model, const Json& p, bool unroll) {
  ClassId id = requiredText(p, "class");
  std::string attr = requiredText(p, "attribute");
  const ClassSpec c = model.cls(id);
  TableNetwork& t = model.tables();
  TableId created = unroll ? t.unroll(c.table, attr).id : t.expand(c.table, attr).id;
  if (!unroll) t.addTableLink({"", created, c.table, Key::attr("_origin"), Key::index(), false});
  bool node = c.interpretation == Interpretation::Node;
  ClassId child = model.addClass(optionalText(p, "label", attr), created,
                                 node ? Interpretation::Node : Interpretation::Generic).id;
  if (!node) return {child};
  std::string label = model.cls(child).label + "-" + c.label;
  return {child, matchEdgeClass(model, label, child, id, Key::attr("_origin"), Key::index(), false)};
}

std::vector<ClassId> opDeleteClass(NetworkModel& model, const Json& p) {
  model.deleteClass(requiredText(p, "class"));
  return {};
}

std::vector<ClassId> opRenameClass(NetworkModel& model, const Json& p) {
  model.renameClass(requiredText(p, "class"), requiredText(p, "label"));
  return {};
}

std::vector<ClassId> opRenameAttribute(NetworkModel& model, const Json& p) {
  ClassId id = requiredText(p, "class");
  std::string from = requiredText(p, "from");
  std::string to = requiredText(p, "to");
  TablePtr rows = model.rows(id);
  columnOf(*rows, from);
  if (from != to && rows->column(to))
    throw Error(ErrorCode::NameCollision, "attribute '" + to + "' already exists");
  model.renameAttribute(id, from, to);
  return {};
}

}  // namespace

std::vector<Value> reduceAlongPath(const NetworkModel& model, const PathSpec& path,
                                   const std::string& attribute, const ExprSpec& reducer,
                                   Warnings& warnings) {
  validatePath(model, path);
  TablePtr endRows = model.rows(path.last());
  std::optional<std::size_t> col;
  if (!attribute.empty()) col = columnOf(*endRows, attribute);
  Reducer reduce(reducer);
  auto ends = walkPath(model, path);
  std::vector<Value> out;
  out.reserve(ends.size());
  for (const auto& list : ends) {
    std::vector<Value> values;
    values.reserve(list.size());
    for (const auto& item : list) {
      if (!col) {
        values.emplace_back(item.rowId);
        continue;
      }
      auto pos = endRows->position(item.rowId);
      values.push_back(pos ? endRows->rows[*pos][*col] : Value{});
    }
    out.push_back(reduce(values, warnings));
  }
  return out;
}

std::vector<ClassId> applyOp(NetworkModel& model, const OpRecord& record) {
  const Json& p = record.params;
  const std::string& op = record.op;
  if (op == "connect") return opConnect(model, p);
  if (op == "disconnect") return opDisconnect(model, p);
  if (op == "promote") return opPromote(model, p);
  if (op == "facet") return opFacet(model, p);
  if (op == "convertToEdges") return opConvertToEdges(model, p);
  if (op == "convertToNodes") return opConvertToNodes(model, p);
  if (op == "projectEdge") return opProjectEdge(model, p);
  if (op == "createSupernode") return opCreateSupernode(model, p);
  if (op == "rollupEdges") return opRollupEdges(model, p);
  if (op == "filterAttr") return opFilterAttr(model, p);
  if (op == "filterConnectivity") return opFilterConnectivity(model, p);
  if (op == "deriveInClass") return opDeriveInClass(model, p);
  if (op == "deriveConnected") return opDeriveConnected(model, p);
  if (op == "setDirection") return opSetDirection(model, p);
  if (op == "interpret") return opInterpret(model, p);
  if (op == "unroll") return opNest(model, p, true);
  if (op == "expand") return opNest(model, p, false);
  if (op == "deleteClass") return opDeleteClass(model, p);
  if (op == "renameClass") return opRenameClass(model, p);
  if (op == "renameAttribute") return opRenameAttribute(model, p);
  invalid("unknown op '" + op + "'");
}

namespace {

void checkExpect(const NetworkModel& model, const Json& expect) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ExpectationFailed, msg); };
  if (expect.contains("classCount")) {
    auto want = expect.at("classCount").get<std::size_t>();
    if (model.classIds().size() != want)
      fail("expected " + std::to_string(want) + " classes, found " +
           std::to_string(model.classIds().size()));
  }
  if (expect.contains("instances")) {
    for (const auto& [cls, n] : expect.at("instances").items()) {
      if (!model.hasClass(cls)) fail("expected class '" + cls + "' is missing");
      auto got = model.countInstances(cls);
      if (got != n.get<std::size_t>())
        fail("class '" + cls + "': expected " + n.dump() + " instances, found " + std::to_string(got));
    }
  }
}

}  // namespace

OpRecord Engine::apply(OpRecord record) {
  if (!categoryOf(record.op)) invalid("unknown op '" + record.op + "'");
  NetworkModel next = model_;
  ModelCounts before = snapshotCounts(next);
  record.resultClassIds = applyOp(next, record);
  next.checkInvariants();
  checkTaxonomy(record.op, before, snapshotCounts(next));
  if (record.expect) checkExpect(next, *record.expect);
  model_ = std::move(next);
  history_.push_back(record);
  ++sequence_;
  return record;
}

}  // namespace nw
