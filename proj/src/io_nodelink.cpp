#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "io_internal.hpp"
#include "netwrangle/error.hpp"
#include "netwrangle/json_codec.hpp"

namespace nw {

namespace {

constexpr std::initializer_list<const char*> kNodeReserved = {"id", "class"};
constexpr std::initializer_list<const char*> kLinkReserved = {"source", "target", "class",
                                                              "directed"};

void putAttributes(Json& obj, const detail::Flat& attrs,
                   std::initializer_list<const char*> reserved) {
  for (const auto& [k, v] : attrs) obj[detail::safeKey(k, reserved)] = toJson(v);
}

Json nodeJson(const NetworkModel& model, const ItemRef& item, const MaterializedTable& rows,
              std::size_t pos) {
  Json obj = Json::object();
  obj["id"] = item.str();
  obj["class"] = model.cls(item.classId).label;
  putAttributes(obj, detail::flattenRow(rows, pos), kNodeReserved);
  return canonicalize(obj, kNodeReserved);
}

Json endpoint(const std::optional<ItemRef>& item) {
  return item ? Json(item->str()) : Json(nullptr);
}

Json linkJson(const NetworkModel& model, const ClassId& edge, std::int64_t row,
              const std::optional<ItemRef>& source, const std::optional<ItemRef>& target) {
  const ClassSpec& c = model.cls(edge);
  TablePtr rows = model.rows(edge);
  Json obj = Json::object();
  obj["source"] = endpoint(source);
  obj["target"] = endpoint(target);
  obj["class"] = c.label;
  obj["directed"] = c.ends.directed;
  if (auto pos = rows->position(row)) putAttributes(obj, detail::flattenRow(*rows, *pos), kLinkReserved);
  return canonicalize(obj, kLinkReserved);
}

std::string stripPrefix(const std::string& key) {
  return key.rfind("attr:", 0) == 0 ? key.substr(5) : key;
}

struct ParsedId {
  ClassId cls;
  std::int64_t ordinal = 0;
};

std::optional<ParsedId> parseNodeId(const Json& id) {
  if (!id.is_string()) return std::nullopt;
  const std::string& s = id.get_ref<const std::string&>();
  auto slash = s.rfind('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 == s.size()) return std::nullopt;
  std::int64_t ord = 0;
  const char* first = s.data() + slash + 1;
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, ord);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return ParsedId{s.substr(0, slash), ord};
}

struct TableBuilder {
  std::vector<std::string> attributes;
  std::set<std::string> seen;
  std::vector<ValueMap> rows;
  std::vector<std::int64_t> ids;

  void add(const Json& obj, std::initializer_list<const char*> skip) {
    ValueMap row;
    for (const auto& [k, v] : obj.items()) {
      if (std::any_of(skip.begin(), skip.end(), [&](const char* s) { return k == s; })) continue;
      std::string name = stripPrefix(k);
      if (seen.insert(name).second) attributes.push_back(name);
      row.set(name, fromJson(v));
    }
    rows.push_back(std::move(row));
  }
};

std::vector<ClassId> importGeneric(NetworkModel& model, const std::string& name, const Json& nodes,
                                   const Json& links) {
  std::vector<ImportedTable> tables;
  for (const auto& [suffix, list] : {std::pair{"_nodes", &nodes}, std::pair{"_links", &links}}) {
    TableBuilder b;
    for (const auto& item : *list)
      if (item.is_object()) b.add(item, {});
    ImportedTable t;
    t.name = name + suffix;
    t.attributes = std::move(b.attributes);
    t.rows = std::move(b.rows);
    tables.push_back(std::move(t));
  }
  return addImported(model, tables);
}

}  // namespace

std::string exportNodeLink(const NetworkModel& model, const ExportRequest& request) {
  detail::Selection sel = detail::select(model, request);
  Json doc = Json::object();
  Json nodes = Json::array();
  for (const auto& c : sel.nodes) {
    TablePtr rows = model.rows(c);
    for (std::size_t pos = 0; pos < rows->size(); ++pos)
      nodes.push_back(nodeJson(model, {c, rows->ids[pos]}, *rows, pos));
  }
  Json links = Json::array();
  for (const auto& l : sel.links)
    links.push_back(linkJson(model, l.edgeClass, l.edgeRow, l.source, l.target));
  doc["nodes"] = std::move(nodes);
  doc["links"] = std::move(links);
  if (request.includeDisconnectedEdges) {
    Json dangling = Json::array();
    for (const auto& l : sel.dangling)
      dangling.push_back(linkJson(model, l.edgeClass, l.edgeRow, l.source, l.target));
    doc["danglingLinks"] = std::move(dangling);
  }
  return dumpDocument(doc);
}

std::string exportSample(const NetworkModel& model, const NetworkSample& sample) {
  Json doc = Json::object();
  Json nodes = Json::array();
  for (const auto& n : sample.nodes) {
    TablePtr rows = model.rows(n.classId);
    auto pos = rows->position(n.rowId);
    if (!pos) throw Error(ErrorCode::InvalidItem, "no item " + n.str());
    nodes.push_back(nodeJson(model, n, *rows, *pos));
  }
  Json links = Json::array();
  for (const auto& e : sample.edges)
    links.push_back(linkJson(model, e.edge.classId, e.edge.rowId, e.source, e.target));
  doc["nodes"] = std::move(nodes);
  doc["links"] = std::move(links);
  return dumpDocument(doc);
}

std::vector<ClassId> importNodeLink(NetworkModel& model, const std::string& name,
                                    std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::UnsupportedShape, std::string("invalid node-link document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array())
    throw Error(ErrorCode::UnsupportedShape, "node-link document needs a 'nodes' list");
  const Json& nodes = doc["nodes"];
  Json links = doc.contains("links") ? doc["links"] : Json::array();
  if (!links.is_array()) throw Error(ErrorCode::UnsupportedShape, "'links' must be a list");

  // Reconstruction needs well-formed ids, unique per node, and links
  // between known nodes.
  std::set<std::string> known;
  bool rebuild = true;
  for (const auto& n : nodes) {
    if (!n.is_object() || !n.contains("id") || !parseNodeId(n["id"]) ||
        model.hasClass(parseNodeId(n["id"])->cls) ||
        !known.insert(n["id"].get<std::string>()).second) {
      rebuild = false;
      break;
    }
  }
  if (rebuild) {
    for (const auto& l : links) {
      if (!l.is_object() || !l.contains("source") || !l.contains("target") ||
          !l["source"].is_string() || !l["target"].is_string() ||
          !known.count(l["source"].get<std::string>()) ||
          !known.count(l["target"].get<std::string>())) {
        rebuild = false;
        break;
      }
    }
  }
  if (!rebuild) return importGeneric(model, name, nodes, links);

  std::vector<ClassId> order;
  std::map<ClassId, TableBuilder> builders;
  std::map<ClassId, std::string> labels;
  for (const auto& n : nodes) {
    ParsedId id = *parseNodeId(n["id"]);
    if (!builders.count(id.cls)) {
      order.push_back(id.cls);
      labels[id.cls] = n.contains("class") && n["class"].is_string() ? n["class"].get<std::string>()
                                                                     : id.cls;
    }
    auto& b = builders[id.cls];
    b.add(n, kNodeReserved);
    b.ids.push_back(id.ordinal);
  }
  std::vector<ClassId> out;
  std::map<ClassId, TableId> nodeTables;
  for (const auto& c : order) {
    auto& b = builders[c];
    std::vector<std::size_t> perm(b.rows.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::stable_sort(perm.begin(), perm.end(), [&](auto x, auto y) { return b.ids[x] < b.ids[y]; });
    std::vector<ValueMap> rows;
    std::vector<std::int64_t> ids;
    for (auto i : perm) {
      rows.push_back(b.rows[i]);
      ids.push_back(b.ids[i]);
    }
    TableId table = model.tables().addStaticTable(labels[c], b.attributes, rows, ids).id;
    nodeTables[c] = table;
    out.push_back(model.addClass(labels[c], table, Interpretation::Node, c).id);
  }

  using GroupKey = std::tuple<std::string, ClassId, ClassId, bool>;
  std::vector<GroupKey> groupOrder;
  std::map<GroupKey, TableBuilder> groups;
  for (const auto& l : links) {
    ParsedId s = *parseNodeId(l["source"]);
    ParsedId t = *parseNodeId(l["target"]);
    std::string label = l.contains("class") && l["class"].is_string() ? l["class"].get<std::string>()
                                                                      : name + "_links";
    bool directed = l.contains("directed") && l["directed"].is_boolean() && l["directed"].get<bool>();
    GroupKey key{label, s.cls, t.cls, directed};
    if (!groups.count(key)) groupOrder.push_back(key);
    auto& b = groups[key];
    if (b.attributes.empty()) {
      b.attributes = {"_source", "_target"};
      b.seen = {"_source", "_target"};
    }
    b.add(l, kLinkReserved);
    b.rows.back().set("_source", Value{s.ordinal});
    b.rows.back().set("_target", Value{t.ordinal});
  }
  for (const auto& key : groupOrder) {
    const auto& [label, src, trg, directed] = key;
    auto& b = groups[key];
    TableId table = model.tables().addStaticTable(label, b.attributes, b.rows).id;
    LinkId toSource = model.tables()
                          .addTableLink({"", table, nodeTables[src], Key::attr("_source"),
                                         Key::index(), false})
                          .id;
    LinkId toTarget = model.tables()
                          .addTableLink({"", table, nodeTables[trg], Key::attr("_target"),
                                         Key::index(), false})
                          .id;
    ClassId edge = model.addClass(label, table, Interpretation::Edge).id;
    model.setSide(edge, Side::Source, EdgeSide{src, {{toSource, true}}});
    model.setSide(edge, Side::Target, EdgeSide{trg, {{toTarget, true}}});
    model.setDirected(edge, directed);
    out.push_back(edge);
  }
  return out;
}

}  // namespace nw
