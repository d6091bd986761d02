#include "netwrangle/paths.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "netwrangle/error.hpp"

namespace nw {

namespace {

bool attached(const ClassSpec& edge, const ClassId& node) {
  return (edge.ends.source && edge.ends.source->nodeClass == node) ||
         (edge.ends.target && edge.ends.target->nodeClass == node);
}

bool adjacent(const NetworkModel& model, const ClassId& a, const ClassId& b) {
  const ClassSpec& x = model.cls(a);
  const ClassSpec& y = model.cls(b);
  if (x.interpretation == Interpretation::Node && y.interpretation == Interpretation::Edge)
    return attached(y, a);
  if (x.interpretation == Interpretation::Edge && y.interpretation == Interpretation::Node)
    return attached(x, b);
  return false;
}

}  // namespace

void validatePath(const NetworkModel& model, const PathSpec& path) {
  if (!model.hasClass(path.anchor))
    throw Error(ErrorCode::UnknownClass, "unknown class '" + path.anchor + "'");
  if (path.hops.empty()) throw Error(ErrorCode::InvalidPath, "path has no hops");
  ClassId prev = path.anchor;
  for (std::size_t i = 0; i < path.hops.size(); ++i) {
    if (!model.hasClass(path.hops[i]))
      throw Error(ErrorCode::UnknownClass, "unknown class '" + path.hops[i] + "'");
    if (!adjacent(model, prev, path.hops[i]))
      throw Error(ErrorCode::InvalidPath, "hop " + std::to_string(i) + ": '" + prev +
                                              "' and '" + path.hops[i] + "' are not adjacent");
    prev = path.hops[i];
  }
}

namespace {

struct Walker {
  const NetworkModel& model;
  const PathSpec& path;
  std::shared_ptr<const Adjacency> adj;
  // Edge item -> its resolved pairs.
  std::map<ClassId, std::unordered_map<std::int64_t, std::vector<const EdgeInstance*>>> pairsOf;
  std::vector<ItemRef> visited;
  std::vector<ItemRef>* out = nullptr;

  bool seen(const ItemRef& item) const {
    return std::find(visited.begin(), visited.end(), item) != visited.end();
  }

  void enter(const ItemRef& item, std::size_t hop) {
    visited.push_back(item);
    step(item, hop);
    visited.pop_back();
  }

  void step(const ItemRef& cur, std::size_t hop) {
    if (hop == path.hops.size()) {
      out->push_back(cur);
      return;
    }
    const ClassId& next = path.hops[hop];
    const ClassSpec& curClass = model.cls(cur.classId);
    if (curClass.interpretation == Interpretation::Node) {
      auto it = adj->neighbors.find(cur);
      if (it == adj->neighbors.end()) return;
      if (hop + 1 == path.hops.size()) {
        std::vector<ItemRef> edges;
        for (const auto& n : it->second)
          if (n.edge.classId == next && !seen(n.edge)) edges.push_back(n.edge);
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        for (const auto& e : edges) enter(e, hop + 1);
        return;
      }
      const ClassId& after = path.hops[hop + 1];
      for (const auto& n : it->second) {
        if (n.edge.classId != next || n.other.classId != after) continue;
        if (seen(n.edge) || seen(n.other)) continue;
        visited.push_back(n.edge);
        enter(n.other, hop + 2);
        visited.pop_back();
      }
    } else {
      auto& pairs = pairsOf[cur.classId];
      auto it = pairs.find(cur.rowId);
      if (it == pairs.end()) return;
      std::vector<ItemRef> ends;
      for (const auto* inst : it->second) {
        if (inst->source.classId == next) ends.push_back(inst->source);
        if (inst->target.classId == next) ends.push_back(inst->target);
      }
      std::sort(ends.begin(), ends.end());
      ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
      for (const auto& e : ends)
        if (!seen(e)) enter(e, hop + 1);
    }
  }
};

}  // namespace

std::vector<std::vector<ItemRef>> walkPath(const NetworkModel& model, const PathSpec& path) {
  validatePath(model, path);
  Walker w{model, path, model.adjacency(), {}, {}, nullptr};
  for (const auto& [cls, list] : w.adj->instances)
    for (const auto& inst : list) w.pairsOf[cls][inst.edgeRow].push_back(&inst);
  TablePtr anchorRows = model.rows(path.anchor);
  std::vector<std::vector<ItemRef>> result(anchorRows->size());
  for (std::size_t r = 0; r < anchorRows->size(); ++r) {
    w.out = &result[r];
    w.enter({path.anchor, anchorRows->ids[r]}, 0);
  }
  return result;
}

PathEnumeration enumeratePaths(const NetworkModel& model, const ClassId& anchor,
                               std::size_t maxDepth, std::size_t limit) {
  model.cls(anchor);
  PathEnumeration out;
  std::deque<PathSpec> queue{PathSpec{anchor, {}}};
  while (!queue.empty()) {
    PathSpec cur = std::move(queue.front());
    queue.pop_front();
    if (cur.hops.size() >= maxDepth) continue;
    for (const auto& next : model.classIds()) {
      if (!adjacent(model, cur.last(), next)) continue;
      PathSpec longer = cur;
      longer.hops.push_back(next);
      if (out.paths.size() >= limit) {
        out.truncated = true;
        return out;
      }
      out.paths.push_back(longer);
      queue.push_back(std::move(longer));
    }
  }
  return out;
}

}  // namespace nw
