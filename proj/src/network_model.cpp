#include "netwrangle/network_model.hpp"

#include <algorithm>
#include <set>

#include "netwrangle/error.hpp"

namespace nw {

std::string_view toString(Interpretation i) {
  switch (i) {
    case Interpretation::Generic: return "generic";
    case Interpretation::Node: return "node";
    case Interpretation::Edge: return "edge";
  }
  return "generic";
}

std::optional<Interpretation> parseInterpretation(std::string_view text) {
  if (text == "generic") return Interpretation::Generic;
  if (text == "node") return Interpretation::Node;
  if (text == "edge") return Interpretation::Edge;
  return std::nullopt;
}

std::string_view toString(Side s) { return s == Side::Source ? "source" : "target"; }

std::optional<Side> parseSide(std::string_view text) {
  if (text == "source") return Side::Source;
  if (text == "target") return Side::Target;
  return std::nullopt;
}

NetworkModel::NetworkModel(const NetworkModel& other)
    : tables_(other.tables_),
      classes_(other.classes_),
      order_(other.order_),
      version_(other.version_) {
  std::lock_guard lock(other.adjacencyMutex_);
  adjacency_ = other.adjacency_;
  adjacencyVersion_ = other.adjacencyVersion_;
}

NetworkModel& NetworkModel::operator=(const NetworkModel& other) {
  if (this == &other) return *this;
  tables_ = other.tables_;
  classes_ = other.classes_;
  order_ = other.order_;
  version_ = other.version_;
  std::scoped_lock lock(adjacencyMutex_, other.adjacencyMutex_);
  adjacency_ = other.adjacency_;
  adjacencyVersion_ = other.adjacencyVersion_;
  return *this;
}

const ClassSpec& NetworkModel::cls(const ClassId& id) const {
  auto it = classes_.find(id);
  if (it == classes_.end()) throw Error(ErrorCode::UnknownClass, "unknown class '" + id + "'");
  return it->second;
}

ClassSpec& NetworkModel::mut(const ClassId& id) {
  cls(id);
  return classes_.at(id);
}

std::vector<ClassId> NetworkModel::classesOf(Interpretation interpretation) const {
  std::vector<ClassId> out;
  for (const auto& id : order_)
    if (classes_.at(id).interpretation == interpretation) out.push_back(id);
  return out;
}

ClassId NetworkModel::freshClassId(const std::string& label) const {
  std::string base;
  for (char c : label) {
    unsigned char u = static_cast<unsigned char>(c);
    base += (std::isalnum(u) || c == '_' || c == '-' || u >= 0x80) ? c : '_';
  }
  if (base.empty()) base = "class";
  if (!classes_.count(base)) return base;
  for (int i = 2;; ++i) {
    std::string candidate = base + "_" + std::to_string(i);
    if (!classes_.count(candidate)) return candidate;
  }
}

int NetworkModel::freeColor() const {
  std::set<int> used;
  for (const auto& [id, c] : classes_) used.insert(c.color);
  for (int slot = 0; slot < kPaletteSize; ++slot)
    if (!used.count(slot)) return slot;
  return kGray;
}

const ClassSpec& NetworkModel::addClass(const std::string& label, const TableId& table,
                                        Interpretation interpretation,
                                        const std::optional<ClassId>& id) {
  if (label.empty()) throw Error(ErrorCode::Validation, "class label must not be empty");
  tables_.spec(table);
  ClassSpec spec;
  spec.id = id && !id->empty() && !classes_.count(*id) ? *id : freshClassId(label);
  spec.label = label;
  spec.table = table;
  spec.interpretation = interpretation;
  spec.color = freeColor();
  ClassId created = spec.id;
  classes_.emplace(created, std::move(spec));
  order_.push_back(created);
  touch();
  return classes_.at(created);
}

void NetworkModel::interpret(const ClassId& id, Interpretation interpretation) {
  ClassSpec& c = mut(id);
  if (c.interpretation == interpretation) return;
  if (c.interpretation == Interpretation::Node) {
    // Edges that ended at this class lose that side.
    for (auto& [eid, e] : classes_) {
      if (e.ends.source && e.ends.source->nodeClass == id) e.ends.source.reset();
      if (e.ends.target && e.ends.target->nodeClass == id) e.ends.target.reset();
    }
  }
  c.interpretation = interpretation;
  c.ends = EdgeEnds{};
  touch();
}

void NetworkModel::setSide(const ClassId& edge, Side side, std::optional<EdgeSide> path) {
  ClassSpec& c = mut(edge);
  if (c.interpretation != Interpretation::Edge)
    throw Error(ErrorCode::WrongInterpretation, "'" + edge + "' is not an edge class");
  if (path) {
    const ClassSpec& node = cls(path->nodeClass);
    if (node.interpretation != Interpretation::Node)
      throw Error(ErrorCode::WrongInterpretation, "'" + node.id + "' is not a node class");
  }
  c.ends.side(side) = std::move(path);
  touch();
}

void NetworkModel::setDirected(const ClassId& edge, bool directed) {
  ClassSpec& c = mut(edge);
  if (c.interpretation != Interpretation::Edge)
    throw Error(ErrorCode::WrongInterpretation, "'" + edge + "' is not an edge class");
  c.ends.directed = directed;
  touch();
}

void NetworkModel::swapSides(const ClassId& edge) {
  ClassSpec& c = mut(edge);
  if (c.interpretation != Interpretation::Edge)
    throw Error(ErrorCode::WrongInterpretation, "'" + edge + "' is not an edge class");
  std::swap(c.ends.source, c.ends.target);
  touch();
}

void NetworkModel::replaceTable(const ClassId& id, const TableId& table,
                                const std::optional<std::pair<std::string, std::string>>& rename) {
  ClassSpec& c = mut(id);
  TableId old = c.table;
  tables_.spec(table);
  for (auto& [eid, e] : classes_) {
    for (auto* side : {&e.ends.source, &e.ends.target}) {
      if (!*side || (*side)->steps.empty()) continue;
      auto& steps = (*side)->steps;
      if (eid == id)
        steps.front().link = tables_.retargetLink(steps.front().link, old, table, rename);
      if ((*side)->nodeClass == id)
        steps.back().link = tables_.retargetLink(steps.back().link, old, table, rename);
    }
  }
  c.table = table;
  touch();
}

void NetworkModel::deleteClass(const ClassId& id) {
  cls(id);
  for (auto& [eid, e] : classes_) {
    if (e.ends.source && e.ends.source->nodeClass == id) e.ends.source.reset();
    if (e.ends.target && e.ends.target->nodeClass == id) e.ends.target.reset();
  }
  classes_.erase(id);
  order_.erase(std::find(order_.begin(), order_.end(), id));
  touch();
}

void NetworkModel::renameClass(const ClassId& id, const std::string& label) {
  if (label.empty()) throw Error(ErrorCode::Validation, "class label must not be empty");
  mut(id).label = label;
  touch();
}

void NetworkModel::renameAttribute(const ClassId& id, const std::string& from,
                                   const std::string& to) {
  const ClassSpec& c = cls(id);
  if (from == to) return;
  const TableSpec& renamed =
      tables_.addDerived(c.table + "_renamed", {c.table}, derive::Renamed{from, to});
  replaceTable(id, renamed.id, std::make_pair(from, to));
}

std::vector<std::uint32_t> NetworkModel::walkSide(const EdgeSide& side, std::size_t pos) const {
  std::vector<std::uint32_t> frontier{static_cast<std::uint32_t>(pos)};
  for (const auto& step : side.steps) {
    auto m = tables_.matches(step.link);
    const auto& adj = step.forward ? m->forward : m->backward;
    std::vector<std::uint32_t> next;
    for (auto p : frontier)
      if (p < adj.size()) next.insert(next.end(), adj[p].begin(), adj[p].end());
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  return frontier;
}

namespace {

std::vector<ItemRef> toItems(const ClassId& cls, const MaterializedTable& table,
                             const std::vector<std::uint32_t>& positions) {
  std::vector<ItemRef> out;
  out.reserve(positions.size());
  for (auto p : positions) out.push_back({cls, table.ids[p]});
  return out;
}

}  // namespace

Endpoints NetworkModel::resolveEndpoints(const ItemRef& edge) const {
  const ClassSpec& c = cls(edge.classId);
  if (c.interpretation != Interpretation::Edge)
    throw Error(ErrorCode::WrongInterpretation, "'" + c.id + "' is not an edge class");
  TablePtr table = tables_.evaluate(c.table);
  auto pos = table->position(edge.rowId);
  if (!pos) throw Error(ErrorCode::InvalidItem, "no item " + edge.str());
  Endpoints out;
  auto resolve = [&](const std::optional<EdgeSide>& side, std::vector<ItemRef>& into) {
    if (!side) return;
    TablePtr nodes = tables_.evaluate(cls(side->nodeClass).table);
    into = toItems(side->nodeClass, *nodes, walkSide(*side, *pos));
  };
  resolve(c.ends.source, out.sources);
  resolve(c.ends.target, out.targets);
  return out;
}

std::size_t NetworkModel::countInstances(const ClassId& id) const {
  return tables_.evaluate(cls(id).table)->size();
}

std::shared_ptr<const Adjacency> NetworkModel::adjacency() const {
  {
    std::lock_guard lock(adjacencyMutex_);
    if (adjacency_ && adjacencyVersion_ == version_) return adjacency_;
  }
  auto adj = std::make_shared<Adjacency>();
  for (const auto& id : order_) {
    const ClassSpec& c = classes_.at(id);
    if (c.interpretation != Interpretation::Edge) continue;
    auto& list = adj->instances[id];
    if (!c.ends.source || !c.ends.target) continue;
    TablePtr table = tables_.evaluate(c.table);
    TablePtr srcNodes = tables_.evaluate(cls(c.ends.source->nodeClass).table);
    TablePtr trgNodes = tables_.evaluate(cls(c.ends.target->nodeClass).table);
    bool sameSides = *c.ends.source == *c.ends.target;
    for (std::size_t r = 0; r < table->size(); ++r) {
      auto src = walkSide(*c.ends.source, r);
      if (src.empty()) continue;
      std::int64_t row = table->ids[r];
      if (sameSides) {
        for (std::size_t i = 0; i < src.size(); ++i)
          for (std::size_t j = i + 1; j < src.size(); ++j)
            list.push_back({row, {c.ends.source->nodeClass, srcNodes->ids[src[i]]},
                            {c.ends.target->nodeClass, srcNodes->ids[src[j]]}});
        continue;
      }
      auto trg = walkSide(*c.ends.target, r);
      for (auto s : src)
        for (auto t : trg)
          list.push_back({row, {c.ends.source->nodeClass, srcNodes->ids[s]},
                          {c.ends.target->nodeClass, trgNodes->ids[t]}});
    }
    for (const auto& inst : list) {
      ItemRef edge{id, inst.edgeRow};
      adj->neighbors[inst.source].push_back({edge, inst.target, Role::Source});
      if (inst.target != inst.source)
        adj->neighbors[inst.target].push_back({edge, inst.source, Role::Target});
    }
  }
  // Deterministic order: edge class order, then edge row, then endpoint.
  std::map<ClassId, std::size_t> rank;
  for (std::size_t i = 0; i < order_.size(); ++i) rank[order_[i]] = i;
  for (auto& [node, list] : adj->neighbors) {
    std::stable_sort(list.begin(), list.end(), [&](const Neighbor& a, const Neighbor& b) {
      auto ra = rank[a.edge.classId], rb = rank[b.edge.classId];
      if (ra != rb) return ra < rb;
      if (a.edge.rowId != b.edge.rowId) return a.edge.rowId < b.edge.rowId;
      return a.other < b.other;
    });
  }
  std::lock_guard lock(adjacencyMutex_);
  adjacency_ = std::move(adj);
  adjacencyVersion_ = version_;
  return adjacency_;
}

std::vector<EdgeInstance> NetworkModel::edgeInstances(const ClassId& edge) const {
  const ClassSpec& c = cls(edge);
  if (c.interpretation != Interpretation::Edge)
    throw Error(ErrorCode::WrongInterpretation, "'" + edge + "' is not an edge class");
  auto adj = adjacency();
  auto it = adj->instances.find(edge);
  return it == adj->instances.end() ? std::vector<EdgeInstance>{} : it->second;
}

std::vector<Neighbor> NetworkModel::neighbors(const ItemRef& node) const {
  const ClassSpec& c = cls(node.classId);
  if (c.interpretation != Interpretation::Node)
    throw Error(ErrorCode::WrongInterpretation, "'" + c.id + "' is not a node class");
  auto adj = adjacency();
  auto it = adj->neighbors.find(node);
  return it == adj->neighbors.end() ? std::vector<Neighbor>{} : it->second;
}

void NetworkModel::checkInvariants() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvariantViolation, msg); };
  if (order_.size() != classes_.size()) fail("class order out of sync");
  for (const auto& id : order_) {
    const ClassSpec& c = classes_.at(id);
    if (c.id != id) fail("class id mismatch for '" + id + "'");
    if (c.label.empty()) fail("class '" + id + "' has an empty label");
    if (!tables_.hasTable(c.table)) fail("class '" + id + "' maps to missing table");
    if (c.interpretation != Interpretation::Edge && (c.ends.source || c.ends.target))
      fail("non-edge class '" + id + "' carries edge ends");
    for (const auto* side : {&c.ends.source, &c.ends.target}) {
      if (!*side) continue;
      auto n = classes_.find((*side)->nodeClass);
      if (n == classes_.end()) fail("edge '" + id + "' references a missing class");
      if (n->second.interpretation != Interpretation::Node)
        fail("edge '" + id + "' references non-node class '" + n->first + "'");
      if ((*side)->steps.empty()) fail("edge '" + id + "' has an empty path");
      TableId at = c.table;
      for (const auto& step : (*side)->steps) {
        const TableLink& l = tables_.link(step.link);
        const TableId& from = step.forward ? l.source : l.target;
        if (from != at) fail("edge '" + id + "' path is not a chain");
        at = step.forward ? l.target : l.source;
      }
      if (at != n->second.table) fail("edge '" + id + "' path does not end at its node class");
    }
  }
}

}  // namespace nw
