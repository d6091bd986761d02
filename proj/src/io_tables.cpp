#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "io_internal.hpp"
#include "netwrangle/error.hpp"
#include "netwrangle/json_codec.hpp"

namespace nw {

CsvData parseCsv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, fieldStarted = false, any = false;
  std::size_t i = 0;
  auto endField = [&] {
    record.push_back(std::move(field));
    field.clear();
    fieldStarted = false;
  };
  auto endRecord = [&] {
    endField();
    records.push_back(std::move(record));
    record.clear();
  };
  while (i < text.size()) {
    char c = text[i];
    any = true;
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
      } else {
        field += c;
      }
      ++i;
      continue;
    }
    if (c == '"' && !fieldStarted) {
      quoted = true;
      fieldStarted = true;
    } else if (c == ',') {
      endField();
    } else if (c == '\r' || c == '\n') {
      endRecord();
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      any = false;
    } else {
      field += c;
      fieldStarted = true;
    }
    ++i;
  }
  if (quoted) throw Error(ErrorCode::MalformedCsv, "unterminated quoted field");
  if (any) endRecord();
  // Blank lines are skipped.
  std::erase_if(records, [](const auto& r) { return r.size() == 1 && r.front().empty(); });
  if (records.empty()) throw Error(ErrorCode::MalformedCsv, "missing header row");
  CsvData out;
  out.headers = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != out.headers.size()) ++out.raggedRows;
    out.rows.push_back(std::move(records[r]));
  }
  return out;
}

std::string csvField(std::string_view text) {
  bool quote = text.find_first_of(",\"\r\n") != std::string_view::npos ||
               (!text.empty() && (text.front() == ' ' || text.back() == ' '));
  if (!quote) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string writeCsv(const std::vector<std::string>& headers,
                     const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csvField(cells[i]);
    }
    out += "\r\n";
  };
  line(headers);
  for (const auto& r : rows) line(r);
  return out;
}

ImportedTable importCsv(const std::string& name, std::string_view text) {
  CsvData csv = parseCsv(text);
  ImportedTable t;
  t.name = name;
  t.attributes = csv.headers;
  for (const auto& r : csv.rows) {
    ValueMap row;
    for (std::size_t c = 0; c < csv.headers.size(); ++c)
      row.set(csv.headers[c], c < r.size() ? inferKind(r[c]) : Value{});
    t.rows.push_back(std::move(row));
  }
  if (csv.raggedRows)
    t.warnings.push_back(std::to_string(csv.raggedRows) + " ragged row(s) padded or truncated");
  return t;
}

namespace {

ImportedTable tableFromList(const std::string& name, const Json& list) {
  ImportedTable t;
  t.name = name;
  std::size_t skipped = 0;
  for (const auto& item : list) {
    if (!item.is_object()) {
      ++skipped;
      continue;
    }
    ValueMap row;
    for (const auto& [k, v] : item.items()) {
      if (std::find(t.attributes.begin(), t.attributes.end(), k) == t.attributes.end())
        t.attributes.push_back(k);
      row.set(k, fromJson(v));
    }
    t.rows.push_back(std::move(row));
  }
  if (skipped) t.warnings.push_back(std::to_string(skipped) + " non-object item(s) skipped");
  return t;
}

}  // namespace

std::vector<ImportedTable> importNested(const std::string& name, std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::UnsupportedShape, std::string("invalid document: ") + e.what());
  }
  if (doc.is_array()) return {tableFromList(name, doc)};
  if (doc.is_object()) {
    std::vector<ImportedTable> out;
    for (const auto& [k, v] : doc.items()) {
      if (!v.is_array())
        throw Error(ErrorCode::UnsupportedShape, "member '" + k + "' is not a list");
      out.push_back(tableFromList(name.empty() ? k : name + "_" + k, v));
    }
    return out;
  }
  throw Error(ErrorCode::UnsupportedShape, "document must be a list of maps or a map of lists");
}

std::vector<ClassId> addImported(NetworkModel& model, const std::vector<ImportedTable>& tables) {
  std::vector<ClassId> out;
  for (const auto& t : tables) {
    TableId id = model.tables().addStaticTable(t.name, t.attributes, t.rows, t.ids).id;
    out.push_back(model.addClass(t.name, id).id);
  }
  return out;
}

std::optional<ExportFormat> parseExportFormat(std::string_view text) {
  if (text == "nodelink" || text == "json") return ExportFormat::NodeLink;
  if (text == "csvzip" || text == "zip") return ExportFormat::CsvZip;
  if (text == "gexf") return ExportFormat::Gexf;
  return std::nullopt;
}

std::string_view toString(ExportFormat format) {
  switch (format) {
    case ExportFormat::NodeLink: return "nodelink";
    case ExportFormat::CsvZip: return "csvzip";
    case ExportFormat::Gexf: return "gexf";
  }
  return "nodelink";
}

std::string exportDocument(const NetworkModel& model, const ExportRequest& request) {
  switch (request.format) {
    case ExportFormat::NodeLink: return exportNodeLink(model, request);
    case ExportFormat::CsvZip: return exportCsvZip(model, request);
    case ExportFormat::Gexf: return exportGexf(model, request);
  }
  return {};
}

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeFile(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

std::vector<ClassId> importText(NetworkModel& model, const std::string& name,
                                const std::string& format, std::string_view text) {
  if (format == "csv") return addImported(model, {importCsv(name, text)});
  if (format == "json" || format == "nested") return addImported(model, importNested(name, text));
  if (format == "nodelink") return importNodeLink(model, name, text);
  throw Error(ErrorCode::Validation, "unknown import format '" + format + "'");
}

std::vector<ClassId> importFile(NetworkModel& model, const std::string& name,
                                const std::string& format, const std::string& path) {
  return importText(model, name, format, readFile(path));
}

namespace detail {

namespace {

void flattenInto(Flat& out, const std::string& prefix, const Value& v) {
  if (v.isNull()) return;
  if (v.isMap()) {
    for (const auto& [k, inner] : v.map()) flattenInto(out, prefix + "." + k, inner);
    return;
  }
  out.emplace_back(prefix, v);
}

}  // namespace

Flat flattenRow(const MaterializedTable& table, std::size_t pos) {
  Flat out;
  for (std::size_t c = 0; c < table.attributes.size(); ++c) {
    const std::string& name = table.attributes[c];
    if (!name.empty() && name.front() == '_') continue;
    flattenInto(out, name, table.rows[pos][c]);
  }
  return out;
}

std::string safeKey(const std::string& key, std::initializer_list<const char*> reserved) {
  for (const char* r : reserved)
    if (key == r || key.rfind("attr:", 0) == 0) return "attr:" + key;
  return key;
}

Selection select(const NetworkModel& model, const ExportRequest& request) {
  Selection s;
  std::set<ClassId> chosen;
  if (request.classes) {
    for (const auto& id : *request.classes) chosen.insert(model.cls(id).id);
  } else {
    chosen.insert(model.classIds().begin(), model.classIds().end());
  }
  for (const auto& id : model.classIds()) {
    if (!chosen.count(id)) continue;
    s.all.push_back(id);
    auto kind = model.cls(id).interpretation;
    if (kind == Interpretation::Node) s.nodes.push_back(id);
    if (kind == Interpretation::Edge) s.edges.push_back(id);
  }
  std::set<ClassId> nodeSet(s.nodes.begin(), s.nodes.end());
  for (const auto& e : s.edges) {
    std::set<std::int64_t> complete;
    for (const auto& inst : model.edgeInstances(e)) {
      if (!nodeSet.count(inst.source.classId) || !nodeSet.count(inst.target.classId)) continue;
      s.links.push_back({e, inst.edgeRow, inst.source, inst.target});
      complete.insert(inst.edgeRow);
    }
    if (!request.includeDisconnectedEdges) continue;
    TablePtr rows = model.rows(e);
    for (std::size_t r = 0; r < rows->size(); ++r) {
      std::int64_t row = rows->ids[r];
      if (complete.count(row)) continue;
      Endpoints ends = model.resolveEndpoints({e, row});
      std::erase_if(ends.sources, [&](const ItemRef& i) { return !nodeSet.count(i.classId); });
      std::erase_if(ends.targets, [&](const ItemRef& i) { return !nodeSet.count(i.classId); });
      if (ends.sources.empty() && ends.targets.empty()) s.dangling.push_back({e, row, {}, {}});
      for (const auto& src : ends.sources) s.dangling.push_back({e, row, src, {}});
      for (const auto& trg : ends.targets) s.dangling.push_back({e, row, {}, trg});
    }
  }
  return s;
}

}  // namespace detail

}  // namespace nw
