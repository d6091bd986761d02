#include <algorithm>
#include <map>
#include <set>

#include <zlib.h>

#include "io_internal.hpp"
#include "netwrangle/error.hpp"
#include "netwrangle/json_codec.hpp"

namespace nw {

namespace {

void put16(std::string& out, std::uint16_t v) {
  out += static_cast<char>(v & 0xFF);
  out += static_cast<char>(v >> 8);
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

std::uint32_t get16(std::string_view b, std::size_t at) {
  if (at + 2 > b.size()) throw Error(ErrorCode::Io, "truncated zip archive");
  return static_cast<std::uint8_t>(b[at]) | (static_cast<std::uint8_t>(b[at + 1]) << 8);
}

std::uint32_t get32(std::string_view b, std::size_t at) {
  return get16(b, at) | (get16(b, at + 2) << 16);
}

constexpr std::uint16_t kDosTime = 0;
constexpr std::uint16_t kDosDate = 0x0021;

std::string cellText(const Value& v) {
  switch (v.kind()) {
    case Kind::Null: return "";
    case Kind::List:
    case Kind::Map: return dumpCompact(toJson(v));
    default: return renderText(v);
  }
}

std::vector<std::size_t> publicColumns(const MaterializedTable& t) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < t.attributes.size(); ++c)
    if (t.attributes[c].empty() || t.attributes[c].front() != '_') cols.push_back(c);
  return cols;
}

std::string xmlEscape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    auto u = static_cast<unsigned char>(ch);
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        if (u < 0x20 && ch != '\t' && ch != '\n' && ch != '\r') break;
        out += ch;
    }
  }
  return out;
}

struct GexfColumns {
  std::vector<std::string> names;
  std::map<std::string, std::string> types;
  std::map<std::string, std::size_t> ids;

  void observe(const std::string& name, const Value& v) {
    std::string t = v.isNumber() ? "double" : v.isBoolean() ? "boolean" : "string";
    auto it = types.find(name);
    if (it == types.end()) {
      names.push_back(name);
      types[name] = t;
    } else if (it->second != t) {
      it->second = "string";
    }
  }

  void finish() {
    std::sort(names.begin(), names.end());
    names.insert(names.begin(), "class");
    types["class"] = "string";
    for (std::size_t i = 0; i < names.size(); ++i) ids[names[i]] = i;
  }

  void declare(std::string& out, const char* kind) const {
    out += "    <attributes class=\"";
    out += kind;
    out += "\">\n";
    for (const auto& n : names)
      out += "      <attribute id=\"" + std::to_string(ids.at(n)) + "\" title=\"" + xmlEscape(n) +
             "\" type=\"" + types.at(n) + "\"/>\n";
    out += "    </attributes>\n";
  }
};

std::string gexfValue(const Value& v) {
  if (v.isBoolean()) return v.boolean() ? "true" : "false";
  return cellText(v);
}

void attvalues(std::string& out, const GexfColumns& cols, const std::string& cls,
               const detail::Flat& attrs) {
  out += "        <attvalues>\n";
  out += "          <attvalue for=\"" + std::to_string(cols.ids.at("class")) + "\" value=\"" +
         xmlEscape(cls) + "\"/>\n";
  for (const auto& [k, v] : attrs)
    out += "          <attvalue for=\"" + std::to_string(cols.ids.at(k)) + "\" value=\"" +
           xmlEscape(gexfValue(v)) + "\"/>\n";
  out += "        </attvalues>\n";
}

detail::Flat renamed(detail::Flat attrs) {
  for (auto& [k, v] : attrs) k = detail::safeKey(k, {"class"});
  return attrs;
}

}  // namespace

std::string writeZip(const std::vector<std::pair<std::string, std::string>>& files) {
  std::string out, central;
  for (const auto& [name, data] : files) {
    auto crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
    auto offset = static_cast<std::uint32_t>(out.size());
    put32(out, 0x04034b50);
    put16(out, 20);
    put16(out, 0x0800);
    put16(out, 0);
    put16(out, kDosTime);
    put16(out, kDosDate);
    put32(out, crc);
    put32(out, static_cast<std::uint32_t>(data.size()));
    put32(out, static_cast<std::uint32_t>(data.size()));
    put16(out, static_cast<std::uint16_t>(name.size()));
    put16(out, 0);
    out += name;
    out += data;

    put32(central, 0x02014b50);
    put16(central, 20);
    put16(central, 20);
    put16(central, 0x0800);
    put16(central, 0);
    put16(central, kDosTime);
    put16(central, kDosDate);
    put32(central, crc);
    put32(central, static_cast<std::uint32_t>(data.size()));
    put32(central, static_cast<std::uint32_t>(data.size()));
    put16(central, static_cast<std::uint16_t>(name.size()));
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put32(central, 0);
    put32(central, offset);
    central += name;
  }
  auto centralOffset = static_cast<std::uint32_t>(out.size());
  out += central;
  put32(out, 0x06054b50);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(files.size()));
  put16(out, static_cast<std::uint16_t>(files.size()));
  put32(out, static_cast<std::uint32_t>(central.size()));
  put32(out, centralOffset);
  put16(out, 0);
  return out;
}

std::vector<std::pair<std::string, std::string>> readZip(std::string_view bytes) {
  if (bytes.size() < 22) throw Error(ErrorCode::Io, "not a zip archive");
  std::size_t eocd = bytes.size() - 22;
  while (get32(bytes, eocd) != 0x06054b50) {
    if (eocd == 0) throw Error(ErrorCode::Io, "zip end record not found");
    --eocd;
  }
  std::size_t count = get16(bytes, eocd + 10);
  std::size_t at = get32(bytes, eocd + 16);
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (get32(bytes, at) != 0x02014b50) throw Error(ErrorCode::Io, "bad zip central entry");
    std::uint32_t method = get16(bytes, at + 10);
    std::uint32_t crc = get32(bytes, at + 16);
    std::uint32_t size = get32(bytes, at + 20);
    std::size_t nameLen = get16(bytes, at + 28);
    std::size_t extra = get16(bytes, at + 30);
    std::size_t comment = get16(bytes, at + 32);
    std::size_t local = get32(bytes, at + 42);
    if (at + 46 + nameLen > bytes.size()) throw Error(ErrorCode::Io, "truncated zip archive");
    std::string name(bytes.substr(at + 46, nameLen));
    if (method != 0) throw Error(ErrorCode::Io, "unsupported zip compression in '" + name + "'");
    if (get32(bytes, local) != 0x04034b50) throw Error(ErrorCode::Io, "bad zip local header");
    std::size_t data = local + 30 + get16(bytes, local + 26) + get16(bytes, local + 28);
    if (data + size > bytes.size()) throw Error(ErrorCode::Io, "truncated zip archive");
    std::string content(bytes.substr(data, size));
    auto actual = static_cast<std::uint32_t>(crc32(
        0L, reinterpret_cast<const Bytef*>(content.data()), static_cast<uInt>(content.size())));
    if (actual != crc) throw Error(ErrorCode::Io, "crc mismatch in '" + name + "'");
    out.emplace_back(std::move(name), std::move(content));
    at += 46 + nameLen + extra + comment;
  }
  return out;
}

std::string exportClassCsv(const NetworkModel& model, const ClassId& id,
                           bool includeDisconnectedEdges) {
  const ClassSpec& c = model.cls(id);
  TablePtr rows = model.rows(id);
  auto cols = publicColumns(*rows);
  bool edge = c.interpretation == Interpretation::Edge;
  std::vector<std::string> headers;
  if (edge) headers = {"_source", "_target"};
  headers.push_back("_id");
  for (auto col : cols) headers.push_back(rows->attributes[col]);
  std::vector<std::vector<std::string>> body;
  auto line = [&](std::size_t pos, const std::optional<ItemRef>& s, const std::optional<ItemRef>& t) {
    std::vector<std::string> cells;
    if (edge) cells = {s ? s->str() : "", t ? t->str() : ""};
    cells.push_back(std::to_string(rows->ids[pos]));
    for (auto col : cols) cells.push_back(cellText(rows->rows[pos][col]));
    body.push_back(std::move(cells));
  };
  if (!edge) {
    for (std::size_t pos = 0; pos < rows->size(); ++pos) line(pos, {}, {});
  } else {
    ExportRequest all;
    all.includeDisconnectedEdges = includeDisconnectedEdges;
    std::vector<ClassId> scope = model.classesOf(Interpretation::Node);
    scope.push_back(id);
    all.classes = scope;
    auto sel = detail::select(model, all);
    std::vector<const detail::Link*> links;
    for (const auto& l : sel.links) links.push_back(&l);
    for (const auto& l : sel.dangling) links.push_back(&l);
    std::stable_sort(links.begin(), links.end(),
                     [](auto* a, auto* b) { return a->edgeRow < b->edgeRow; });
    for (const auto* l : links) line(*rows->position(l->edgeRow), l->source, l->target);
  }
  return writeCsv(headers, body);
}

std::string exportCsvZip(const NetworkModel& model, const ExportRequest& request) {
  auto sel = detail::select(model, request);
  std::vector<std::pair<std::string, std::string>> files;
  std::set<std::string> used;
  for (const auto& id : sel.all) {
    std::string base = model.cls(id).label;
    for (char& ch : base)
      if (ch == '/' || ch == '\\' || ch == ':') ch = '_';
    std::string name = base + ".csv";
    for (int n = 2; used.count(name); ++n) name = base + "_" + std::to_string(n) + ".csv";
    used.insert(name);
    files.emplace_back(name, exportClassCsv(model, id, request.includeDisconnectedEdges));
  }
  return writeZip(files);
}

std::string exportGexf(const NetworkModel& model, const ExportRequest& request) {
  auto sel = detail::select(model, request);
  GexfColumns nodeCols, edgeCols;
  struct NodeOut {
    ItemRef item;
    std::string label;
    detail::Flat attrs;
  };
  std::vector<NodeOut> nodes;
  for (const auto& c : sel.nodes) {
    TablePtr rows = model.rows(c);
    for (std::size_t pos = 0; pos < rows->size(); ++pos) {
      ItemRef item{c, rows->ids[pos]};
      auto attrs = renamed(detail::flattenRow(*rows, pos));
      std::string label = item.str();
      for (const char* pick : {"name", "title", "label"}) {
        auto it = std::find_if(attrs.begin(), attrs.end(),
                               [&](const auto& kv) { return kv.first == pick && kv.second.isText(); });
        if (it != attrs.end()) {
          label = it->second.text();
          break;
        }
      }
      for (const auto& [k, v] : attrs) nodeCols.observe(k, v);
      nodes.push_back({item, std::move(label), std::move(attrs)});
    }
  }
  std::vector<detail::Flat> edgeAttrs;
  bool anyDirected = false, anyUndirected = false;
  for (const auto& l : sel.links) {
    TablePtr rows = model.rows(l.edgeClass);
    auto attrs = renamed(detail::flattenRow(*rows, *rows->position(l.edgeRow)));
    for (const auto& [k, v] : attrs) edgeCols.observe(k, v);
    edgeAttrs.push_back(std::move(attrs));
    (model.cls(l.edgeClass).ends.directed ? anyDirected : anyUndirected) = true;
  }
  nodeCols.finish();
  edgeCols.finish();
  bool allDirected = anyDirected && !anyUndirected;

  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<gexf xmlns=\"http://www.gexf.net/1.2draft\" version=\"1.2\">\n";
  out += "  <meta>\n    <creator>netwrangle</creator>\n  </meta>\n";
  out += std::string("  <graph mode=\"static\" defaultedgetype=\"") +
         (allDirected ? "directed" : "undirected") + "\">\n";
  nodeCols.declare(out, "node");
  edgeCols.declare(out, "edge");
  out += "    <nodes>\n";
  for (const auto& n : nodes) {
    out += "      <node id=\"" + xmlEscape(n.item.str()) + "\" label=\"" + xmlEscape(n.label) +
           "\">\n";
    attvalues(out, nodeCols, model.cls(n.item.classId).label, n.attrs);
    out += "      </node>\n";
  }
  out += "    </nodes>\n    <edges>\n";
  for (std::size_t i = 0; i < sel.links.size(); ++i) {
    const auto& l = sel.links[i];
    const ClassSpec& c = model.cls(l.edgeClass);
    out += "      <edge id=\"" + std::to_string(i) + "\" source=\"" + xmlEscape(l.source->str()) +
           "\" target=\"" + xmlEscape(l.target->str()) + "\" label=\"" + xmlEscape(c.label) + "\"";
    if (!allDirected && c.ends.directed) out += " type=\"directed\"";
    out += ">\n";
    attvalues(out, edgeCols, c.label, edgeAttrs[i]);
    out += "      </edge>\n";
  }
  out += "    </edges>\n  </graph>\n</gexf>\n";
  return out;
}

}  // namespace nw
