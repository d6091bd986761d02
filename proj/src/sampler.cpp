#include "netwrangle/sampler.hpp"

#include <algorithm>
#include <set>

#include "netwrangle/error.hpp"
#include "netwrangle/rng.hpp"

namespace nw {

bool NetworkSample::hasNode(const ItemRef& item) const {
  return std::find(nodes.begin(), nodes.end(), item) != nodes.end();
}

bool NetworkSample::hasEdge(const SampledEdge& edge) const {
  return std::find(edges.begin(), edges.end(), edge) != edges.end();
}

namespace {

SampledEdge oriented(const ItemRef& self, const Neighbor& n) {
  return n.role == Role::Source ? SampledEdge{n.edge, self, n.other}
                                : SampledEdge{n.edge, n.other, self};
}

struct Builder {
  const NetworkModel& model;
  std::shared_ptr<const Adjacency> adj;
  NetworkSample out;
  std::set<ItemRef> nodeSet;
  std::set<SampledEdge> edgeSet;
  std::map<ClassId, std::vector<ItemRef>> stacks;

  Builder(const NetworkModel& m, NetworkSample existing) : model(m), adj(m.adjacency()) {
    for (const auto& n : existing.nodes) addNode(n);
    for (const auto& e : existing.edges) addEdge(e);
  }

  std::size_t count(const ClassId& c) const {
    auto it = out.perClassCounts.find(c);
    return it == out.perClassCounts.end() ? 0 : it->second;
  }

  const std::vector<Neighbor>& neighborsOf(const ItemRef& n) const {
    static const std::vector<Neighbor> none;
    auto it = adj->neighbors.find(n);
    return it == adj->neighbors.end() ? none : it->second;
  }

  bool addNode(const ItemRef& n) {
    if (!nodeSet.insert(n).second) return false;
    out.nodes.push_back(n);
    ++out.perClassCounts[n.classId];
    return true;
  }

  bool addEdge(const SampledEdge& e) {
    if (!edgeSet.insert(e).second) return false;
    out.edges.push_back(e);
    ++out.perClassCounts[e.edge.classId];
    return true;
  }

  // Pairs between `n` and already admitted nodes, optionally under quota.
  void induce(const ItemRef& n, std::optional<std::size_t> quota) {
    for (const auto& nb : neighborsOf(n)) {
      if (!nodeSet.count(nb.other)) continue;
      if (quota && count(nb.edge.classId) >= *quota) continue;
      addEdge(oriented(n, nb));
    }
  }

  void pushNeighbors(const ItemRef& n) {
    const auto& list = neighborsOf(n);
    for (auto it = list.rbegin(); it != list.rend(); ++it)
      if (!nodeSet.count(it->other)) stacks[it->other.classId].push_back(it->other);
  }

  void admit(const ItemRef& n, std::optional<std::size_t> quota) {
    if (!addNode(n)) return;
    induce(n, quota);
    pushNeighbors(n);
  }
};

void requireItem(const NetworkModel& model, const ItemRef& item) {
  if (!model.hasClass(item.classId))
    throw Error(ErrorCode::InvalidItem, "unknown class in item " + item.str());
  if (!model.rows(item.classId)->position(item.rowId))
    throw Error(ErrorCode::InvalidItem, "no item " + item.str());
}

void seedInto(Builder& b, const std::vector<ItemRef>& items) {
  for (const auto& item : items) {
    requireItem(b.model, item);
    const ClassSpec& c = b.model.cls(item.classId);
    if (c.interpretation == Interpretation::Node) {
      b.admit(item, std::nullopt);
    } else if (c.interpretation == Interpretation::Edge) {
      auto inst = b.adj->instances.find(item.classId);
      if (inst == b.adj->instances.end()) continue;
      for (const auto& p : inst->second) {
        if (p.edgeRow != item.rowId) continue;
        b.admit(p.source, std::nullopt);
        b.admit(p.target, std::nullopt);
        b.addEdge({item, p.source, p.target});
      }
    } else {
      throw Error(ErrorCode::InvalidItem, "generic items cannot be sampled: " + item.str());
    }
  }
}

}  // namespace

NetworkSample sample(const NetworkModel& model, const SampleSpec& spec) {
  if (spec.targetPerClass == 0) throw Error(ErrorCode::Validation, "targetPerClass must be at least 1");
  const std::size_t quota = spec.targetPerClass;
  Builder b(model, {});
  Rng rng(spec.randomSeed);
  seedInto(b, spec.seeds);

  // Coverage: one pair per edge class when the quotas allow it.
  for (const auto& eid : model.classesOf(Interpretation::Edge)) {
    auto it = b.adj->instances.find(eid);
    if (it == b.adj->instances.end() || it->second.empty()) continue;
    if (b.count(eid) >= quota) continue;
    const auto& list = it->second;
    std::size_t offset = rng.below(list.size());
    for (std::size_t i = 0; i < list.size(); ++i) {
      const EdgeInstance& p = list[(offset + i) % list.size()];
      std::map<ClassId, std::size_t> need;
      for (const auto* end : {&p.source, &p.target})
        if (!b.nodeSet.count(*end)) ++need[end->classId];
      if (p.source == p.target && need.size() == 1) need.begin()->second = 1;
      bool fits = std::all_of(need.begin(), need.end(),
                              [&](const auto& kv) { return b.count(kv.first) + kv.second <= quota; });
      if (!fits) continue;
      b.admit(p.source, quota);
      b.admit(p.target, quota);
      if (b.count(eid) < quota) b.addEdge({{eid, p.edgeRow}, p.source, p.target});
      break;
    }
  }

  // Balanced depth-first phase.
  std::vector<ClassId> nodeClasses = model.classesOf(Interpretation::Node);
  std::map<ClassId, TablePtr> rows;
  for (const auto& c : nodeClasses) rows[c] = model.rows(c);
  while (true) {
    const ClassId* pick = nullptr;
    for (const auto& c : nodeClasses) {
      if (b.count(c) >= quota || b.count(c) >= rows[c]->size()) continue;
      if (!pick || b.count(c) < b.count(*pick)) pick = &c;
    }
    if (!pick) break;
    const ClassId& c = *pick;
    auto& stack = b.stacks[c];
    std::optional<ItemRef> next;
    while (!stack.empty()) {
      ItemRef top = stack.back();
      stack.pop_back();
      if (!b.nodeSet.count(top)) {
        next = top;
        break;
      }
    }
    if (!next) {
      const auto& t = *rows[c];
      std::size_t start = rng.below(t.size());
      for (std::size_t i = 0; i < t.size(); ++i) {
        ItemRef candidate{c, t.ids[(start + i) % t.size()]};
        if (!b.nodeSet.count(candidate)) {
          next = candidate;
          break;
        }
      }
    }
    if (!next) break;
    b.admit(*next, quota);
  }
  return std::move(b.out);
}

NetworkSample expandNeighbors(const NetworkModel& model, NetworkSample s, const ItemRef& node) {
  requireItem(model, node);
  if (!s.hasNode(node)) throw Error(ErrorCode::InvalidItem, "item not in sample: " + node.str());
  if (model.cls(node.classId).interpretation != Interpretation::Node)
    throw Error(ErrorCode::WrongInterpretation, "'" + node.classId + "' is not a node class");
  Builder b(model, std::move(s));
  for (const auto& nb : b.neighborsOf(node)) {
    b.addNode(nb.other);
    b.addEdge(oriented(node, nb));
  }
  return std::move(b.out);
}

NetworkSample seedFromTable(const NetworkModel& model, NetworkSample s,
                            const std::vector<ItemRef>& items) {
  Builder b(model, std::move(s));
  seedInto(b, items);
  return std::move(b.out);
}

}  // namespace nw
