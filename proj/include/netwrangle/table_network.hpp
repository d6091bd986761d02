#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "netwrangle/expr.hpp"
#include "netwrangle/value.hpp"

namespace nw {

using TableId = std::string;
using LinkId = std::string;

/// An attribute name, or the row index (the row's RowId ordinal).
struct Key {
  std::optional<std::string> attribute;

  static Key index() { return {}; }
  static Key attr(std::string name) { return {std::move(name)}; }
  bool isIndex() const { return !attribute.has_value(); }
  std::string label() const { return attribute.value_or("@index"); }
  static Key parse(const std::string& text) {
    return text == "@index" ? index() : attr(text);
  }

  friend bool operator==(const Key&, const Key&) = default;
  friend auto operator<=>(const Key&, const Key&) = default;
};

struct RowId {
  TableId table;
  std::int64_t ordinal = 0;

  friend bool operator==(const RowId&, const RowId&) = default;
  friend auto operator<=>(const RowId&, const RowId&) = default;
};

/// Evaluated rows of a table. Rows are positional over `attributes`;
/// `ids[i]` is the RowId ordinal of row i. Row-subset derivations keep
/// the ordinals of their source rows, so ids may be sparse but are
/// strictly increasing.
struct MaterializedTable {
  std::vector<std::string> attributes;
  std::vector<std::int64_t> ids;
  std::vector<std::vector<Value>> rows;
  std::vector<std::string> warnings;

  std::size_t size() const { return rows.size(); }
  std::optional<std::size_t> column(std::string_view name) const;
  std::optional<std::size_t> position(std::int64_t id) const;
  /// Key cell of row `pos`; the index key yields the RowId ordinal.
  Value keyCell(std::size_t pos, const Key& key) const;
  ValueMap rowMap(std::size_t pos) const;
};

using TablePtr = std::shared_ptr<const MaterializedTable>;

namespace derive {
struct Static { TablePtr rows; };
struct Expanded { std::string attribute; };
struct Unrolled { std::string attribute; };
struct Faceted { std::string attribute; Value match; };
struct Promoted { std::string attribute; };
struct AttributeDerived { std::string attribute; ExprSpec expression; };
struct Filtered { PredicateSpec predicate; };
struct Selected { std::set<std::int64_t> keep; };
struct ColumnAttached { std::string attribute; std::map<std::int64_t, Value> values; };
struct Renamed { std::string from; std::string to; };
struct Step { LinkId link; bool forward = true; };
/// One row per (start row, distinct end row) reachable along `steps`,
/// with attributes _source and _target holding the two RowId ordinals.
struct Matched { std::vector<Step> steps; };
/// Rows computed elsewhere (e.g. from model-level traversal) and frozen.
struct Materialized { TablePtr rows; };
}  // namespace derive

using Derivation =
    std::variant<derive::Static, derive::Expanded, derive::Unrolled, derive::Faceted,
                 derive::Promoted, derive::AttributeDerived, derive::Filtered,
                 derive::Selected, derive::ColumnAttached, derive::Renamed,
                 derive::Matched, derive::Materialized>;

std::string_view derivationName(const Derivation& d);

struct TableSpec {
  TableId id;
  std::vector<TableId> sources;
  Derivation derivation;
  bool isStatic() const { return std::holds_alternative<derive::Static>(derivation); }
};

/// Matches source row to target row iff their key sets intersect, where a
/// List cell contributes its elements (when `expandLists`) and any other
/// non-null cell contributes itself. Null never matches.
struct TableLink {
  LinkId id;
  TableId source;
  TableId target;
  Key sourceKey;
  Key targetKey;
  bool expandLists = true;
};

/// Row-position adjacency of a link, both directions, sorted.
struct LinkMatches {
  std::vector<std::vector<std::uint32_t>> forward;
  std::vector<std::vector<std::uint32_t>> backward;
  std::size_t pairCount = 0;
};

/// Key sets used for matching: each row's non-null key elements, hashed.
std::vector<std::vector<Value>> keyElements(const MaterializedTable& table, const Key& key,
                                            bool expandLists);

/// The lower layer: static and derived tables, the lazily evaluated
/// dependency graph among them, and links between tables.
///
/// Single writer; evaluation may be called concurrently (cache insertion is
/// guarded). Copies share immutable evaluated results.
class TableNetwork {
 public:
  TableNetwork() = default;
  TableNetwork(const TableNetwork& other);
  TableNetwork& operator=(const TableNetwork& other);

  /// Registers imported rows. Keys not in `attributes` are dropped with a
  /// warning. When `ids` is given it supplies the RowId ordinals.
  const TableSpec& addStaticTable(const std::string& name, std::vector<std::string> attributes,
                                  const std::vector<ValueMap>& rows,
                                  std::optional<std::vector<std::int64_t>> ids = std::nullopt);
  /// Replaces the rows of a static table; invalidates dependents.
  void replaceStaticRows(const TableId& id, const std::vector<ValueMap>& rows);

  const TableSpec& addDerived(const std::string& name, std::vector<TableId> sources,
                              Derivation derivation);

  /// Map attribute -> sibling columns, one row per source row, with an
  /// `_origin` backlink (source RowId ordinal).
  const TableSpec& expand(const TableId& source, const std::string& attribute);
  /// List attribute -> one row per element, with `_origin` backlink; also
  /// registers the link _origin -> source index. Returns the new table.
  const TableSpec& unroll(const TableId& source, const std::string& attribute);

  const TableLink& addTableLink(TableLink link);
  /// Copy of `link` with `from` replaced by `to` on either end, and the key
  /// attribute renamed when given. Reuses an identical existing link.
  LinkId retargetLink(const LinkId& link, const TableId& from, const TableId& to,
                      const std::optional<std::pair<std::string, std::string>>& rename = {});

  TablePtr evaluate(const TableId& id) const;
  std::shared_ptr<const LinkMatches> matches(const LinkId& id) const;

  bool hasTable(const TableId& id) const { return specs_.count(id) != 0; }
  const TableSpec& spec(const TableId& id) const;
  const TableLink& link(const LinkId& id) const;
  std::vector<TableId> tableIds() const;
  const std::map<LinkId, TableLink>& links() const { return links_; }
  std::vector<std::string> attributes(const TableId& id) const { return evaluate(id)->attributes; }
  std::size_t rowCount(const TableId& id) const { return evaluate(id)->size(); }

  /// Drops cached results for `id` and everything derived from it.
  void invalidate(const TableId& id);
  /// Transitive dependents of `id`, excluding `id`.
  std::set<TableId> downstream(const TableId& id) const;

  /// Replaces a derived table's definition (sources and derivation).
  /// Throws CyclicDerivation if the new sources depend on `id`.
  void redefine(const TableId& id, std::vector<TableId> sources, Derivation derivation);

  void setCaching(bool enabled) { caching_ = enabled; }
  /// Initial caching flag of networks constructed afterwards.
  static void setDefaultCaching(bool enabled);

 private:
  TableId freshId(const std::string& name) const;
  LinkId freshLinkId(const TableLink& link) const;
  TablePtr compute(const TableSpec& spec, std::set<TableId>& inProgress) const;
  TablePtr evaluateGuarded(const TableId& id, std::set<TableId>& inProgress) const;
  void checkAcyclic(const TableId& id, const std::vector<TableId>& sources) const;

  std::map<TableId, TableSpec> specs_;
  std::vector<TableId> order_;
  std::map<LinkId, TableLink> links_;
  bool caching_ = defaultCaching();
  static bool defaultCaching();

  mutable std::mutex cacheMutex_;
  mutable std::map<TableId, TablePtr> cache_;
  mutable std::map<LinkId, std::shared_ptr<const LinkMatches>> linkCache_;
};

}  // namespace nw
