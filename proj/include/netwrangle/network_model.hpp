#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "netwrangle/table_network.hpp"

namespace nw {

using ClassId = std::string;

enum class Interpretation { Generic, Node, Edge };
enum class Side { Source, Target };
enum class Role { Source, Target };

std::string_view toString(Interpretation i);
std::optional<Interpretation> parseInterpretation(std::string_view text);
std::string_view toString(Side s);
std::optional<Side> parseSide(std::string_view text);

/// A chain of table links from an edge class's table to a node class's table.
struct EdgeSide {
  ClassId nodeClass;
  std::vector<derive::Step> steps;

  friend bool operator==(const EdgeSide& a, const EdgeSide& b) {
    if (a.nodeClass != b.nodeClass || a.steps.size() != b.steps.size()) return false;
    for (std::size_t i = 0; i < a.steps.size(); ++i)
      if (a.steps[i].link != b.steps[i].link || a.steps[i].forward != b.steps[i].forward)
        return false;
    return true;
  }
};

struct EdgeEnds {
  std::optional<EdgeSide> source;
  std::optional<EdgeSide> target;
  bool directed = false;

  std::optional<EdgeSide>& side(Side s) { return s == Side::Source ? source : target; }
  const std::optional<EdgeSide>& side(Side s) const { return s == Side::Source ? source : target; }
};

inline constexpr int kGray = -1;
inline constexpr int kPaletteSize = 8;

struct ClassSpec {
  ClassId id;
  std::string label;
  TableId table;
  Interpretation interpretation = Interpretation::Generic;
  EdgeEnds ends;
  int color = kGray;
};

struct ItemRef {
  ClassId classId;
  std::int64_t rowId = 0;

  std::string str() const { return classId + "/" + std::to_string(rowId); }
  friend bool operator==(const ItemRef&, const ItemRef&) = default;
  friend auto operator<=>(const ItemRef&, const ItemRef&) = default;
};

struct Endpoints {
  std::vector<ItemRef> sources;
  std::vector<ItemRef> targets;
};

/// One resolved (source, target) pair of an edge row.
struct EdgeInstance {
  std::int64_t edgeRow = 0;
  ItemRef source;
  ItemRef target;
};

struct Neighbor {
  ItemRef edge;
  ItemRef other;
  Role role = Role::Source;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Instance-level adjacency for one model version.
struct Adjacency {
  std::map<ClassId, std::vector<EdgeInstance>> instances;
  std::map<ItemRef, std::vector<Neighbor>> neighbors;
};

/// The upper layer: classes interpreting tables as generic items, nodes or
/// edges. Owns its table network.
class NetworkModel {
 public:
  NetworkModel() = default;
  NetworkModel(const NetworkModel& other);
  NetworkModel& operator=(const NetworkModel& other);

  TableNetwork& tables() {
    touch();
    return tables_;
  }
  const TableNetwork& tables() const { return tables_; }

  /// Creates a class; the id is derived from the label unless `id` is given
  /// and still free.
  const ClassSpec& addClass(const std::string& label, const TableId& table,
                            Interpretation interpretation = Interpretation::Generic,
                            const std::optional<ClassId>& id = std::nullopt);
  bool hasClass(const ClassId& id) const { return classes_.count(id) != 0; }
  const ClassSpec& cls(const ClassId& id) const;
  const std::vector<ClassId>& classIds() const { return order_; }
  std::vector<ClassId> classesOf(Interpretation interpretation) const;

  void interpret(const ClassId& id, Interpretation interpretation);
  void setSide(const ClassId& edge, Side side, std::optional<EdgeSide> path);
  void setDirected(const ClassId& edge, bool directed);
  void swapSides(const ClassId& edge);
  /// Points the class at a new table and rewrites every edge path step
  /// that touched the old table, renaming the key attribute when given.
  void replaceTable(const ClassId& id, const TableId& table,
                    const std::optional<std::pair<std::string, std::string>>& rename = {});
  void deleteClass(const ClassId& id);
  void renameClass(const ClassId& id, const std::string& label);
  void renameAttribute(const ClassId& id, const std::string& from, const std::string& to);

  /// Node positions reached from edge-table position `pos` along a side path.
  std::vector<std::uint32_t> walkSide(const EdgeSide& side, std::size_t pos) const;
  Endpoints resolveEndpoints(const ItemRef& edge) const;
  /// Resolved pairs of an edge class. When both sides follow the same path
  /// to the same class, each unordered pair of distinct endpoints appears
  /// once; otherwise the cross product of the two endpoint lists.
  std::vector<EdgeInstance> edgeInstances(const ClassId& edge) const;
  std::vector<Neighbor> neighbors(const ItemRef& node) const;
  std::size_t countInstances(const ClassId& id) const;
  TablePtr rows(const ClassId& id) const { return tables_.evaluate(cls(id).table); }

  std::shared_ptr<const Adjacency> adjacency() const;
  std::uint64_t version() const { return version_; }

  /// Mapping and reference checks; throws InvariantViolation.
  void checkInvariants() const;

 private:
  ClassSpec& mut(const ClassId& id);
  ClassId freshClassId(const std::string& label) const;
  int freeColor() const;
  void touch() { ++version_; }

  TableNetwork tables_;
  std::map<ClassId, ClassSpec> classes_;
  std::vector<ClassId> order_;
  std::uint64_t version_ = 0;

  mutable std::mutex adjacencyMutex_;
  mutable std::shared_ptr<const Adjacency> adjacency_;
  mutable std::uint64_t adjacencyVersion_ = ~0ULL;
};

}  // namespace nw
