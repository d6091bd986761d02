#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netwrangle/network_model.hpp"
#include "netwrangle/sampler.hpp"

namespace nw {

/// Rows ready for TableNetwork::addStaticTable.
struct ImportedTable {
  std::string name;
  std::vector<std::string> attributes;
  std::vector<ValueMap> rows;
  std::optional<std::vector<std::int64_t>> ids;
  std::vector<std::string> warnings;
};

struct CsvData {
  std::vector<std::string> headers;
  std::vector<std::vector<std::string>> rows;
  std::size_t raggedRows = 0;
};

/// RFC 4180: comma separated, double quotes with "" escapes, CRLF or LF.
/// Throws MalformedCsv when there is no header row or a quote is unclosed.
CsvData parseCsv(std::string_view text);
std::string csvField(std::string_view text);
std::string writeCsv(const std::vector<std::string>& headers,
                     const std::vector<std::vector<std::string>>& rows);

/// Cells typed with inferKind; short rows padded with Null, long rows cut.
ImportedTable importCsv(const std::string& name, std::string_view text);
/// A list of maps gives one table; a map of lists gives one table per key,
/// named "<name>_<key>" (or the key when `name` is empty).
std::vector<ImportedTable> importNested(const std::string& name, std::string_view text);

/// Registers static tables plus a generic class per table.
std::vector<ClassId> addImported(NetworkModel& model, const std::vector<ImportedTable>& tables);

enum class ExportFormat { NodeLink, CsvZip, Gexf };
std::optional<ExportFormat> parseExportFormat(std::string_view text);
std::string_view toString(ExportFormat format);

struct ExportRequest {
  ExportFormat format = ExportFormat::NodeLink;
  std::optional<std::vector<ClassId>> classes;
  bool includeDisconnectedEdges = false;
};

/// {nodes, links[, danglingLinks]}. Node ids are "<classId>/<ordinal>".
/// Attributes named with a leading underscore are internal and skipped;
/// nested maps flatten to dotted names; nulls are omitted; names clashing
/// with reserved keys get an "attr:" prefix.
std::string exportNodeLink(const NetworkModel& model, const ExportRequest& request);
/// Node-link document of a sample.
std::string exportSample(const NetworkModel& model, const NetworkSample& sample);
/// Imports a node-link document. When every node id has the
/// "<classId>/<ordinal>" form, node and edge classes are rebuilt;
/// otherwise the document becomes generic tables "<name>_nodes" and
/// "<name>_links".
std::vector<ClassId> importNodeLink(NetworkModel& model, const std::string& name,
                                    std::string_view text);

/// Stored (uncompressed) ZIP with fixed timestamps.
std::string writeZip(const std::vector<std::pair<std::string, std::string>>& files);
std::vector<std::pair<std::string, std::string>> readZip(std::string_view bytes);

std::string exportCsvZip(const NetworkModel& model, const ExportRequest& request);
/// CSV text of one class as written into the archive.
std::string exportClassCsv(const NetworkModel& model, const ClassId& id,
                           bool includeDisconnectedEdges = false);

std::string exportGexf(const NetworkModel& model, const ExportRequest& request);

std::string exportDocument(const NetworkModel& model, const ExportRequest& request);

std::string readFile(const std::string& path);
void writeFile(const std::string& path, std::string_view bytes);

/// Imports a file by format name: "csv", "json" (nested) or "nodelink".
std::vector<ClassId> importFile(NetworkModel& model, const std::string& name,
                                const std::string& format, const std::string& path);
std::vector<ClassId> importText(NetworkModel& model, const std::string& name,
                                const std::string& format, std::string_view text);

}  // namespace nw
