#include "netwrangle/table_network.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <unordered_map>

#include "netwrangle/error.hpp"

namespace nw {

std::optional<std::size_t> MaterializedTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i] == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> MaterializedTable::position(std::int64_t id) const {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - ids.begin());
}

Value MaterializedTable::keyCell(std::size_t pos, const Key& key) const {
  if (key.isIndex()) return Value{ids[pos]};
  auto col = column(*key.attribute);
  return col ? rows[pos][*col] : Value{};
}

ValueMap MaterializedTable::rowMap(std::size_t pos) const {
  ValueMap m;
  for (std::size_t c = 0; c < attributes.size(); ++c) m.set(attributes[c], rows[pos][c]);
  return m;
}

std::string_view derivationName(const Derivation& d) {
  static constexpr std::string_view kNames[] = {
      "static",   "expanded", "unrolled",       "faceted", "promoted",    "derived",
      "filtered", "selected", "columnAttached", "renamed", "matched", "materialized"};
  return kNames[d.index()];
}

std::vector<std::vector<Value>> keyElements(const MaterializedTable& table, const Key& key,
                                            bool expandLists) {
  std::vector<std::vector<Value>> out(table.size());
  std::optional<std::size_t> col;
  if (!key.isIndex()) {
    col = table.column(*key.attribute);
    if (!col) throw Error(ErrorCode::UnknownAttribute, "unknown attribute '" + *key.attribute + "'");
  }
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (!col) {
      out[r].emplace_back(table.ids[r]);
      continue;
    }
    const Value& cell = table.rows[r][*col];
    if (cell.isNull()) continue;
    if (expandLists && cell.isList()) {
      for (const auto& e : cell.list())
        if (!e.isNull() && std::find(out[r].begin(), out[r].end(), e) == out[r].end())
          out[r].push_back(e);
    } else {
      out[r].push_back(cell);
    }
  }
  return out;
}

namespace {
std::atomic<bool> cachingDefault{true};
}  // namespace

void TableNetwork::setDefaultCaching(bool enabled) { cachingDefault = enabled; }
bool TableNetwork::defaultCaching() { return cachingDefault; }

TableNetwork::TableNetwork(const TableNetwork& other)
    : specs_(other.specs_), order_(other.order_), links_(other.links_), caching_(other.caching_) {
  std::lock_guard lock(other.cacheMutex_);
  cache_ = other.cache_;
  linkCache_ = other.linkCache_;
}

TableNetwork& TableNetwork::operator=(const TableNetwork& other) {
  if (this == &other) return *this;
  specs_ = other.specs_;
  order_ = other.order_;
  links_ = other.links_;
  caching_ = other.caching_;
  std::scoped_lock lock(cacheMutex_, other.cacheMutex_);
  cache_ = other.cache_;
  linkCache_ = other.linkCache_;
  return *this;
}

TableId TableNetwork::freshId(const std::string& name) const {
  std::string base;
  for (char c : name) {
    unsigned char u = static_cast<unsigned char>(c);
    base += (std::isalnum(u) || c == '_' || c == '-' || u >= 0x80) ? c : '_';
  }
  if (base.empty()) base = "table";
  if (!specs_.count(base)) return base;
  for (int i = 2;; ++i) {
    std::string candidate = base + "_" + std::to_string(i);
    if (!specs_.count(candidate)) return candidate;
  }
}

const TableSpec& TableNetwork::spec(const TableId& id) const {
  auto it = specs_.find(id);
  if (it == specs_.end()) throw Error(ErrorCode::UnknownTable, "unknown table '" + id + "'");
  return it->second;
}

const TableLink& TableNetwork::link(const LinkId& id) const {
  auto it = links_.find(id);
  if (it == links_.end()) throw Error(ErrorCode::UnknownLink, "unknown link '" + id + "'");
  return it->second;
}

std::vector<TableId> TableNetwork::tableIds() const { return order_; }

const TableSpec& TableNetwork::addStaticTable(const std::string& name,
                                              std::vector<std::string> attributes,
                                              const std::vector<ValueMap>& rows,
                                              std::optional<std::vector<std::int64_t>> ids) {
  std::set<std::string> seen;
  for (const auto& a : attributes)
    if (!seen.insert(a).second)
      throw Error(ErrorCode::NameCollision, "duplicate attribute '" + a + "' in '" + name + "'");
  auto table = std::make_shared<MaterializedTable>();
  table->attributes = std::move(attributes);
  std::size_t dropped = 0;
  for (const auto& row : rows) {
    std::vector<Value> cells;
    cells.reserve(table->attributes.size());
    for (const auto& a : table->attributes) cells.push_back(row.get(a));
    for (const auto& [k, v] : row)
      if (!seen.count(k)) ++dropped;
    table->rows.push_back(std::move(cells));
  }
  if (ids) {
    if (ids->size() != rows.size())
      throw Error(ErrorCode::Validation, "row id count does not match row count");
    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return (*ids)[a] < (*ids)[b]; });
    std::vector<std::vector<Value>> sorted;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i && (*ids)[order[i]] == (*ids)[order[i - 1]])
        throw Error(ErrorCode::Validation, "duplicate row id");
      table->ids.push_back((*ids)[order[i]]);
      sorted.push_back(std::move(table->rows[order[i]]));
    }
    table->rows = std::move(sorted);
  } else {
    for (std::size_t i = 0; i < rows.size(); ++i) table->ids.push_back(static_cast<std::int64_t>(i));
  }
  if (dropped)
    table->warnings.push_back(std::to_string(dropped) + " cell(s) with undeclared keys ignored");
  TableId id = freshId(name);
  specs_[id] = TableSpec{id, {}, derive::Static{std::move(table)}};
  order_.push_back(id);
  return specs_[id];
}

void TableNetwork::replaceStaticRows(const TableId& id, const std::vector<ValueMap>& rows) {
  auto& s = specs_.at(spec(id).id);
  if (!s.isStatic()) throw Error(ErrorCode::Unsupported, "'" + id + "' is not a static table");
  auto table = std::make_shared<MaterializedTable>();
  table->attributes = std::get<derive::Static>(s.derivation).rows->attributes;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<Value> cells;
    for (const auto& a : table->attributes) cells.push_back(rows[i].get(a));
    table->rows.push_back(std::move(cells));
    table->ids.push_back(static_cast<std::int64_t>(i));
  }
  s.derivation = derive::Static{std::move(table)};
  invalidate(id);
}

namespace {

void requireAttribute(const MaterializedTable& table, const std::string& attr,
                      const TableId& tableId) {
  if (!table.column(attr))
    throw Error(ErrorCode::UnknownAttribute,
                "unknown attribute '" + attr + "' in table '" + tableId + "'");
}

}  // namespace

void TableNetwork::checkAcyclic(const TableId& id, const std::vector<TableId>& sources) const {
  for (const auto& s : sources) {
    if (!specs_.count(s)) throw Error(ErrorCode::DanglingSource, "missing source table '" + s + "'");
    if (s == id || downstream(id).count(s))
      throw Error(ErrorCode::CyclicDerivation, "table '" + id + "' would depend on itself");
  }
}

const TableSpec& TableNetwork::addDerived(const std::string& name, std::vector<TableId> sources,
                                          Derivation derivation) {
  TableId id = freshId(name);
  checkAcyclic(id, sources);
  // Validate attribute references eagerly against the first source.
  if (!sources.empty()) {
    auto first = evaluate(sources.front());
    std::visit(
        [&](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, derive::Expanded> || std::is_same_v<T, derive::Unrolled> ||
                        std::is_same_v<T, derive::Faceted> || std::is_same_v<T, derive::Promoted>) {
            requireAttribute(*first, d.attribute, sources.front());
          } else if constexpr (std::is_same_v<T, derive::AttributeDerived> ||
                               std::is_same_v<T, derive::ColumnAttached>) {
            if (first->column(d.attribute))
              throw Error(ErrorCode::NameCollision, "attribute '" + d.attribute + "' already exists");
            if constexpr (std::is_same_v<T, derive::AttributeDerived>) {
              if (d.expression.mode == ExprSpec::Mode::Custom)
                Expression::compile(d.expression.text, &first->attributes);
            }
          } else if constexpr (std::is_same_v<T, derive::Filtered>) {
            Predicate(d.predicate, first->attributes);
          } else if constexpr (std::is_same_v<T, derive::Renamed>) {
            requireAttribute(*first, d.from, sources.front());
            if (first->column(d.to))
              throw Error(ErrorCode::NameCollision, "attribute '" + d.to + "' already exists");
          }
        },
        derivation);
  }
  specs_[id] = TableSpec{id, std::move(sources), std::move(derivation)};
  order_.push_back(id);
  return specs_[id];
}

void TableNetwork::redefine(const TableId& id, std::vector<TableId> sources,
                            Derivation derivation) {
  auto& s = specs_.at(spec(id).id);
  checkAcyclic(id, sources);
  s.sources = std::move(sources);
  s.derivation = std::move(derivation);
  invalidate(id);
}

const TableSpec& TableNetwork::expand(const TableId& source, const std::string& attribute) {
  return addDerived(source + "_" + attribute, {source}, derive::Expanded{attribute});
}

const TableSpec& TableNetwork::unroll(const TableId& source, const std::string& attribute) {
  const TableSpec& created = addDerived(source + "_" + attribute, {source}, derive::Unrolled{attribute});
  TableId id = created.id;
  addTableLink({"", id, source, Key::attr("_origin"), Key::index(), false});
  return specs_.at(id);
}

LinkId TableNetwork::freshLinkId(const TableLink&) const {
  return "l" + std::to_string(links_.size());
}

const TableLink& TableNetwork::addTableLink(TableLink link) {
  auto checkKey = [&](const TableId& t, const Key& k) {
    spec(t);
    if (!k.isIndex()) requireAttribute(*evaluate(t), *k.attribute, t);
  };
  checkKey(link.source, link.sourceKey);
  checkKey(link.target, link.targetKey);
  for (const auto& [id, existing] : links_) {
    if (existing.source == link.source && existing.target == link.target &&
        existing.sourceKey == link.sourceKey && existing.targetKey == link.targetKey &&
        existing.expandLists == link.expandLists)
      return existing;
  }
  link.id = freshLinkId(link);
  auto [it, _] = links_.emplace(link.id, std::move(link));
  return it->second;
}

LinkId TableNetwork::retargetLink(const LinkId& id, const TableId& from, const TableId& to,
                                  const std::optional<std::pair<std::string, std::string>>& rename) {
  TableLink copy = link(id);
  auto fix = [&](TableId& table, Key& key) {
    if (table != from) return;
    table = to;
    if (rename && key.attribute == rename->first) key.attribute = rename->second;
  };
  fix(copy.source, copy.sourceKey);
  fix(copy.target, copy.targetKey);
  if (copy.source == link(id).source && copy.target == link(id).target &&
      copy.sourceKey == link(id).sourceKey && copy.targetKey == link(id).targetKey)
    return id;
  return addTableLink(std::move(copy)).id;
}

std::set<TableId> TableNetwork::downstream(const TableId& id) const {
  std::set<TableId> out;
  std::deque<TableId> queue{id};
  while (!queue.empty()) {
    TableId cur = queue.front();
    queue.pop_front();
    for (const auto& [tid, s] : specs_) {
      if (out.count(tid)) continue;
      bool depends = std::find(s.sources.begin(), s.sources.end(), cur) != s.sources.end();
      if (depends) {
        out.insert(tid);
        queue.push_back(tid);
      }
    }
  }
  return out;
}

void TableNetwork::invalidate(const TableId& id) {
  std::set<TableId> affected = downstream(id);
  affected.insert(id);
  std::lock_guard lock(cacheMutex_);
  for (const auto& t : affected) cache_.erase(t);
  for (auto it = linkCache_.begin(); it != linkCache_.end();) {
    const auto& l = links_.at(it->first);
    if (affected.count(l.source) || affected.count(l.target))
      it = linkCache_.erase(it);
    else
      ++it;
  }
}

TablePtr TableNetwork::evaluate(const TableId& id) const {
  std::set<TableId> inProgress;
  return evaluateGuarded(id, inProgress);
}

TablePtr TableNetwork::evaluateGuarded(const TableId& id, std::set<TableId>& inProgress) const {
  if (caching_) {
    std::lock_guard lock(cacheMutex_);
    auto it = cache_.find(id);
    if (it != cache_.end()) return it->second;
  }
  auto specIt = specs_.find(id);
  if (specIt == specs_.end())
    throw Error(ErrorCode::DanglingSource, "missing source table '" + id + "'");
  if (!inProgress.insert(id).second)
    throw Error(ErrorCode::CyclicDerivation, "cyclic derivation through '" + id + "'");
  TablePtr result = compute(specIt->second, inProgress);
  inProgress.erase(id);
  if (caching_) {
    std::lock_guard lock(cacheMutex_);
    auto [it, inserted] = cache_.emplace(id, result);
    return it->second;  // first writer wins
  }
  return result;
}

std::shared_ptr<const LinkMatches> TableNetwork::matches(const LinkId& id) const {
  if (caching_) {
    std::lock_guard lock(cacheMutex_);
    auto it = linkCache_.find(id);
    if (it != linkCache_.end()) return it->second;
  }
  const TableLink& l = link(id);
  TablePtr src = evaluate(l.source);
  TablePtr trg = evaluate(l.target);
  auto srcKeys = keyElements(*src, l.sourceKey, l.expandLists);
  auto trgKeys = keyElements(*trg, l.targetKey, l.expandLists);
  std::unordered_map<Value, std::vector<std::uint32_t>, ValueHash> index;
  for (std::size_t t = 0; t < trgKeys.size(); ++t)
    for (const auto& k : trgKeys[t]) index[k].push_back(static_cast<std::uint32_t>(t));
  auto result = std::make_shared<LinkMatches>();
  result->forward.resize(src->size());
  result->backward.resize(trg->size());
  for (std::size_t s = 0; s < srcKeys.size(); ++s) {
    auto& out = result->forward[s];
    for (const auto& k : srcKeys[s]) {
      auto it = index.find(k);
      if (it != index.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    for (auto t : out) result->backward[t].push_back(static_cast<std::uint32_t>(s));
    result->pairCount += out.size();
  }
  if (caching_) {
    std::lock_guard lock(cacheMutex_);
    auto [it, _] = linkCache_.emplace(id, std::move(result));
    return it->second;
  }
  return result;
}

namespace {

std::size_t columnOrThrow(const MaterializedTable& t, const std::string& attr) {
  auto c = t.column(attr);
  if (!c) throw Error(ErrorCode::UnknownAttribute, "unknown attribute '" + attr + "'");
  return *c;
}

void addAttribute(std::vector<std::string>& attrs, const std::string& name) {
  if (std::find(attrs.begin(), attrs.end(), name) == attrs.end()) attrs.push_back(name);
}

// Copies rows of `src` accepted by `keep`, preserving RowIds.
template <typename Keep>
std::shared_ptr<MaterializedTable> subset(const MaterializedTable& src, Keep keep) {
  auto out = std::make_shared<MaterializedTable>();
  out->attributes = src.attributes;
  for (std::size_t r = 0; r < src.size(); ++r) {
    if (!keep(r)) continue;
    out->ids.push_back(src.ids[r]);
    out->rows.push_back(src.rows[r]);
  }
  return out;
}

std::string warningText(const Warnings& w, std::string_view what) {
  return std::to_string(w.count) + " " + std::string(what) + " warning(s); first: " + w.first;
}

}  // namespace

TablePtr TableNetwork::compute(const TableSpec& spec, std::set<TableId>& inProgress) const {
  std::vector<TablePtr> sources;
  for (const auto& s : spec.sources) sources.push_back(evaluateGuarded(s, inProgress));

  return std::visit(
      [&](const auto& d) -> TablePtr {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, derive::Static> || std::is_same_v<T, derive::Materialized>) {
          return d.rows;
        } else if constexpr (std::is_same_v<T, derive::Expanded>) {
          const auto& src = *sources.at(0);
          std::size_t col = columnOrThrow(src, d.attribute);
          auto out = std::make_shared<MaterializedTable>();
          for (const auto& row : src.rows)
            if (row[col].isMap())
              for (const auto& [k, v] : row[col].map())
                if (k != "_origin") addAttribute(out->attributes, k);
          out->attributes.push_back("_origin");
          for (std::size_t r = 0; r < src.size(); ++r) {
            std::vector<Value> cells(out->attributes.size());
            const Value& cell = src.rows[r][col];
            if (cell.isMap())
              for (std::size_t c = 0; c + 1 < out->attributes.size(); ++c)
                cells[c] = cell.map().get(out->attributes[c]);
            cells.back() = Value{src.ids[r]};
            out->rows.push_back(std::move(cells));
            out->ids.push_back(static_cast<std::int64_t>(r));
          }
          return out;
        } else if constexpr (std::is_same_v<T, derive::Unrolled>) {
          const auto& src = *sources.at(0);
          std::size_t col = columnOrThrow(src, d.attribute);
          auto out = std::make_shared<MaterializedTable>();
          bool scalars = false;
          for (const auto& row : src.rows) {
            if (!row[col].isList()) continue;
            for (const auto& e : row[col].list()) {
              if (e.isMap()) {
                for (const auto& [k, v] : e.map())
                  if (k != "_origin") addAttribute(out->attributes, k);
              } else {
                scalars = true;
              }
            }
          }
          if (scalars) addAttribute(out->attributes, "value");
          out->attributes.push_back("_origin");
          std::size_t valueCol = out->column("value").value_or(out->attributes.size());
          for (std::size_t r = 0; r < src.size(); ++r) {
            const Value& cell = src.rows[r][col];
            if (!cell.isList()) continue;
            for (const auto& e : cell.list()) {
              std::vector<Value> cells(out->attributes.size());
              if (e.isMap()) {
                for (std::size_t c = 0; c + 1 < out->attributes.size(); ++c)
                  if (c != valueCol || e.map().contains("value"))
                    cells[c] = e.map().get(out->attributes[c]);
              } else if (valueCol < out->attributes.size()) {
                cells[valueCol] = e;
              }
              cells.back() = Value{src.ids[r]};
              out->ids.push_back(static_cast<std::int64_t>(out->rows.size()));
              out->rows.push_back(std::move(cells));
            }
          }
          return out;
        } else if constexpr (std::is_same_v<T, derive::Faceted>) {
          const auto& src = *sources.at(0);
          std::size_t col = columnOrThrow(src, d.attribute);
          return subset(src, [&](std::size_t r) { return src.rows[r][col] == d.match; });
        } else if constexpr (std::is_same_v<T, derive::Promoted>) {
          const auto& src = *sources.at(0);
          std::size_t col = columnOrThrow(src, d.attribute);
          auto out = std::make_shared<MaterializedTable>();
          out->attributes = {d.attribute};
          std::unordered_map<Value, bool, ValueHash> seen;
          for (const auto& row : src.rows) {
            const Value& v = row[col];
            if (v.isNull() || !seen.emplace(v, true).second) continue;
            out->ids.push_back(static_cast<std::int64_t>(out->rows.size()));
            out->rows.push_back({v});
          }
          return out;
        } else if constexpr (std::is_same_v<T, derive::AttributeDerived>) {
          const auto& src = *sources.at(0);
          auto out = std::make_shared<MaterializedTable>(src);
          out->warnings.clear();
          out->attributes.push_back(d.attribute);
          Warnings w;
          if (d.expression.mode == ExprSpec::Mode::Custom) {
            Expression e = Expression::compile(d.expression.text, &src.attributes);
            for (auto& row : out->rows) row.push_back(e.evaluate(row, {}, w));
          } else {
            // A standard reducer applied to the row's cells.
            for (auto& row : out->rows) row.push_back(applyStandardReducer(d.expression.text, row));
          }
          if (w.count) out->warnings.push_back(warningText(w, "expression"));
          return out;
        } else if constexpr (std::is_same_v<T, derive::Filtered>) {
          const auto& src = *sources.at(0);
          Predicate p(d.predicate, src.attributes);
          Warnings w;
          auto out = subset(src, [&](std::size_t r) { return p(src.rows[r], w); });
          if (w.count) out->warnings.push_back(warningText(w, "predicate"));
          return out;
        } else if constexpr (std::is_same_v<T, derive::Selected>) {
          const auto& src = *sources.at(0);
          return subset(src, [&](std::size_t r) { return d.keep.count(src.ids[r]) != 0; });
        } else if constexpr (std::is_same_v<T, derive::ColumnAttached>) {
          const auto& src = *sources.at(0);
          auto out = std::make_shared<MaterializedTable>(src);
          out->warnings.clear();
          out->attributes.push_back(d.attribute);
          for (std::size_t r = 0; r < out->size(); ++r) {
            auto it = d.values.find(out->ids[r]);
            out->rows[r].push_back(it == d.values.end() ? Value{} : it->second);
          }
          return out;
        } else if constexpr (std::is_same_v<T, derive::Renamed>) {
          auto out = std::make_shared<MaterializedTable>(*sources.at(0));
          out->warnings.clear();
          out->attributes[columnOrThrow(*out, d.from)] = d.to;
          return out;
        } else {
          static_assert(std::is_same_v<T, derive::Matched>);
          if (d.steps.empty()) throw Error(ErrorCode::InvalidPath, "empty table path");
          const TableLink& first = link(d.steps.front().link);
          TablePtr start = evaluate(d.steps.front().forward ? first.source : first.target);
          const TableLink& last = link(d.steps.back().link);
          TablePtr end = evaluate(d.steps.back().forward ? last.target : last.source);
          std::vector<std::shared_ptr<const LinkMatches>> hops;
          for (const auto& s : d.steps) hops.push_back(matches(s.link));
          auto out = std::make_shared<MaterializedTable>();
          out->attributes = {"_source", "_target"};
          for (std::size_t r = 0; r < start->size(); ++r) {
            std::vector<std::uint32_t> frontier{static_cast<std::uint32_t>(r)};
            for (std::size_t h = 0; h < hops.size(); ++h) {
              const auto& adj = d.steps[h].forward ? hops[h]->forward : hops[h]->backward;
              std::vector<std::uint32_t> next;
              for (auto p : frontier) next.insert(next.end(), adj[p].begin(), adj[p].end());
              std::sort(next.begin(), next.end());
              next.erase(std::unique(next.begin(), next.end()), next.end());
              frontier = std::move(next);
            }
            for (auto p : frontier) {
              out->ids.push_back(static_cast<std::int64_t>(out->rows.size()));
              out->rows.push_back({Value{start->ids[r]}, Value{end->ids[p]}});
            }
          }
          return out;
        }
      },
      spec.derivation);
}

}  // namespace nw
