#pragma once

#include <cstddef>
#include <vector>

#include "netwrangle/network_model.hpp"

namespace nw {

/// Alternating node/edge class sequence starting next to `anchor`.
struct PathSpec {
  ClassId anchor;
  std::vector<ClassId> hops;

  ClassId last() const { return hops.empty() ? anchor : hops.back(); }
  friend bool operator==(const PathSpec&, const PathSpec&) = default;
};

/// Throws InvalidPath unless every consecutive pair is a node class and an
/// edge class with a side attached to that node class.
void validatePath(const NetworkModel& model, const PathSpec& path);

/// For each row of the anchor class (in table order), the end items of all
/// concrete instantiations of `path`, with multiplicity. An instantiation
/// never visits the same item twice. Moving from a node through an edge
/// class follows resolved pairs, so a node is never joined to another
/// endpoint on its own side of a cross-product edge.
std::vector<std::vector<ItemRef>> walkPath(const NetworkModel& model, const PathSpec& path);

struct PathEnumeration {
  std::vector<PathSpec> paths;
  bool truncated = false;
};

/// All valid paths from `anchor` with 1..maxDepth hops, loops allowed,
/// in breadth-first order, capped at `limit`.
PathEnumeration enumeratePaths(const NetworkModel& model, const ClassId& anchor,
                               std::size_t maxDepth, std::size_t limit);

}  // namespace nw
