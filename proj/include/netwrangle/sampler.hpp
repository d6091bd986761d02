#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "netwrangle/network_model.hpp"

namespace nw {

struct SampleSpec {
  std::size_t targetPerClass = 5;
  std::vector<ItemRef> seeds;
  std::uint64_t randomSeed = 0;
};

struct SampledEdge {
  ItemRef edge;
  ItemRef source;
  ItemRef target;

  friend bool operator==(const SampledEdge&, const SampledEdge&) = default;
  friend auto operator<=>(const SampledEdge&, const SampledEdge&) = default;
};

/// Nodes and resolved edge pairs; per-class counts cover node classes
/// (admitted nodes) and edge classes (admitted pairs).
struct NetworkSample {
  std::vector<ItemRef> nodes;
  std::vector<SampledEdge> edges;
  std::map<ClassId, std::size_t> perClassCounts;

  bool hasNode(const ItemRef& item) const;
  bool hasEdge(const SampledEdge& edge) const;
};

/// Class-balanced depth-first sample. Each edge class first contributes
/// one pair whose endpoints fit the quotas; then the under-quota node class
/// with the fewest sampled items (ties: class order) pops its own stack,
/// restarting at a random unvisited row when the stack is empty. Pairs are
/// admitted once both endpoints are in and their class is under quota.
NetworkSample sample(const NetworkModel& model, const SampleSpec& spec);

/// Adds every neighbor pair of `node` and the nodes on their other ends.
NetworkSample expandNeighbors(const NetworkModel& model, NetworkSample sample, const ItemRef& node);

/// Admits items regardless of quota. Edge items bring their endpoints;
/// pairs induced among admitted nodes are added.
NetworkSample seedFromTable(const NetworkModel& model, NetworkSample sample,
                            const std::vector<ItemRef>& items);

}  // namespace nw
