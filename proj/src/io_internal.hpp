#pragma once

#include <string>
#include <utility>
#include <vector>

#include "netwrangle/io.hpp"

namespace nw::detail {

using Flat = std::vector<std::pair<std::string, Value>>;

/// Public attributes of a row: no leading underscore, no nulls, nested maps
/// flattened to dotted names.
Flat flattenRow(const MaterializedTable& table, std::size_t pos);

struct Link {
  ClassId edgeClass;
  std::int64_t edgeRow = 0;
  std::optional<ItemRef> source;
  std::optional<ItemRef> target;
};

struct Selection {
  std::vector<ClassId> nodes;
  std::vector<ClassId> edges;
  std::vector<ClassId> all;
  std::vector<Link> links;
  std::vector<Link> dangling;
};

/// Selected classes in model order and the resolved links between
/// selected node classes.
Selection select(const NetworkModel& model, const ExportRequest& request);

/// Prefixes `key` with "attr:" when it is reserved.
std::string safeKey(const std::string& key, std::initializer_list<const char*> reserved);

}  // namespace nw::detail
