#include "netwrangle/pipeline.hpp"

#include <chrono>
#include <filesystem>

#include "netwrangle/json_codec.hpp"

namespace nw {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double millisSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

[[noreturn]] void invalid(const std::string& msg) {
  throw PipelineError(1, ErrorCode::Validation, msg);
}

std::string text(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_string())
    invalid(where + ": '" + key + "' must be a string");
  return obj.at(key).get<std::string>();
}

std::string resolve(const std::string& dir, const std::string& path) {
  fs::path p(path);
  return p.is_absolute() || dir.empty() ? p.string() : (fs::path(dir) / p).string();
}

Json exportJson(const ScriptExport& e) {
  Json j = Json::object();
  j["format"] = std::string(toString(e.request.format));
  j["path"] = e.path;
  if (e.request.classes) j["classes"] = *e.request.classes;
  j["includeDisconnectedEdges"] = e.request.includeDisconnectedEdges;
  return j;
}

std::vector<std::string> tableWarnings(const NetworkModel& model) {
  std::vector<std::string> out;
  for (const auto& id : model.classIds())
    for (const auto& w : model.rows(id)->warnings) out.push_back(id + ": " + w);
  return out;
}

Json snapshot(const Engine& engine) {
  const NetworkModel& m = engine.model();
  Json classes = Json::array();
  for (const auto& id : m.classIds()) {
    const ClassSpec& c = m.cls(id);
    Json j = Json::object();
    j["id"] = id;
    j["label"] = c.label;
    j["interpretation"] = std::string(toString(c.interpretation));
    j["color"] = c.color;
    j["instances"] = m.countInstances(id);
    if (c.interpretation == Interpretation::Edge) {
      j["source"] = c.ends.source ? Json(c.ends.source->nodeClass) : Json(nullptr);
      j["target"] = c.ends.target ? Json(c.ends.target->nodeClass) : Json(nullptr);
      j["directed"] = c.ends.directed;
    }
    classes.push_back(std::move(j));
  }
  Json s = Json::object();
  s["sequence"] = engine.sequence();
  s["classes"] = std::move(classes);
  return s;
}

}  // namespace

int exitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return 3;
    case ErrorCode::ExpectationFailed:
    case ErrorCode::InvariantViolation: return 2;
    default: return 1;
  }
}

Json toJson(const PipelineScript& script) {
  Json j = Json::object();
  j["version"] = script.version;
  Json imports = Json::array();
  for (const auto& i : script.imports)
    imports.push_back(Json{{"name", i.name}, {"format", i.format}, {"path", i.path}});
  j["imports"] = std::move(imports);
  Json ops = Json::array();
  for (const auto& op : script.ops) {
    Json o = Json::object();
    o["op"] = op.op;
    o["params"] = op.params;
    if (op.expect) o["expect"] = *op.expect;
    ops.push_back(std::move(o));
  }
  j["ops"] = std::move(ops);
  Json exports = Json::array();
  for (const auto& e : script.exports) exports.push_back(exportJson(e));
  j["exports"] = std::move(exports);
  return j;
}

PipelineScript scriptFromJson(const Json& json) {
  if (!json.is_object()) invalid("script must be an object");
  PipelineScript s;
  if (!json.contains("version") || !json.at("version").is_number_integer())
    invalid("script needs an integer 'version'");
  s.version = json.at("version").get<int>();
  if (s.version != 1) invalid("unsupported script version " + std::to_string(s.version));
  auto list = [&](const char* key) {
    if (!json.contains(key)) return Json::array();
    if (!json.at(key).is_array()) invalid(std::string("'") + key + "' must be a list");
    return json.at(key);
  };
  std::size_t i = 0;
  for (const auto& item : list("imports")) {
    std::string where = "import " + std::to_string(i++);
    if (!item.is_object()) invalid(where + ": must be an object");
    s.imports.push_back({text(item, "name", where), text(item, "format", where), text(item, "path", where)});
    const auto& f = s.imports.back().format;
    if (f != "csv" && f != "json" && f != "nested" && f != "nodelink")
      invalid(where + ": unknown format '" + f + "'");
  }
  i = 0;
  for (const auto& item : list("ops")) {
    std::string where = "op " + std::to_string(i++);
    OpRecord r;
    try {
      r = opFromJson(item);
    } catch (const Error& e) {
      invalid(where + ": " + e.what());
    }
    if (!categoryOf(r.op)) invalid(where + ": unknown op '" + r.op + "'");
    r.resultClassIds.clear();
    s.ops.push_back(std::move(r));
  }
  i = 0;
  for (const auto& item : list("exports")) {
    std::string where = "export " + std::to_string(i++);
    if (!item.is_object()) invalid(where + ": must be an object");
    ScriptExport e;
    auto format = parseExportFormat(text(item, "format", where));
    if (!format) invalid(where + ": unknown format");
    e.request.format = *format;
    e.path = text(item, "path", where);
    if (item.contains("classes") && !item.at("classes").is_null()) {
      if (!item.at("classes").is_array()) invalid(where + ": 'classes' must be a list");
      std::vector<ClassId> classes;
      for (const auto& c : item.at("classes")) {
        if (!c.is_string()) invalid(where + ": class ids must be strings");
        classes.push_back(c.get<std::string>());
      }
      e.request.classes = classes;
    }
    if (item.contains("includeDisconnectedEdges"))
      e.request.includeDisconnectedEdges = item.at("includeDisconnectedEdges").get<bool>();
    s.exports.push_back(std::move(e));
  }
  return s;
}

PipelineScript loadScript(const std::string& path) {
  std::string bytes;
  try {
    bytes = readFile(path);
  } catch (const Error& e) {
    throw PipelineError(3, ErrorCode::Io, e.what());
  }
  Json doc;
  try {
    doc = Json::parse(bytes);
  } catch (const std::exception& e) {
    invalid(std::string("script is not a valid document: ") + e.what());
  }
  return scriptFromJson(doc);
}

Json toJson(const RunReport& report) {
  Json j = Json::object();
  j["imported"] = report.imported;
  Json ops = Json::array();
  for (const auto& op : report.ops) {
    Json o = Json::object();
    o["index"] = op.index;
    o["op"] = op.op;
    o["created"] = op.created;
    o["classCount"] = op.classCount;
    Json inst = Json::object();
    for (const auto& [k, v] : op.instances) inst[k] = v;
    o["instances"] = std::move(inst);
    o["warnings"] = op.warnings;
    o["millis"] = op.millis;
    ops.push_back(std::move(o));
  }
  j["ops"] = std::move(ops);
  j["written"] = report.written;
  j["warnings"] = report.warnings;
  j["wallMillis"] = report.wallMillis;
  return j;
}

DryRun dryRun(const PipelineScript& script, const std::string& workingDir) {
  auto start = Clock::now();
  DryRun run;
  for (std::size_t i = 0; i < script.imports.size(); ++i) {
    const auto& imp = script.imports[i];
    try {
      auto created = importFile(run.engine.model(), imp.name, imp.format, resolve(workingDir, imp.path));
      run.engine.imports().push_back(imp);
      run.engine.bump();
      run.report.imported.insert(run.report.imported.end(), created.begin(), created.end());
    } catch (const Error& e) {
      throw PipelineError(exitCodeFor(e.code()), e.code(),
                          "import " + std::to_string(i) + " (" + imp.name + "): " + e.what());
    }
  }
  for (const auto& w : tableWarnings(run.engine.model())) run.report.warnings.push_back(w);
  for (std::size_t i = 0; i < script.ops.size(); ++i) {
    const auto& op = script.ops[i];
    auto opStart = Clock::now();
    OpReport r;
    r.index = i;
    r.op = op.op;
    try {
      OpRecord applied = run.engine.apply(op);
      r.created = applied.resultClassIds;
      ModelCounts counts = snapshotCounts(run.engine.model());
      r.classCount = counts.classes.size();
      r.instances = counts.instances;
      for (const auto& id : r.created)
        for (const auto& w : run.engine.model().rows(id)->warnings) r.warnings.push_back(id + ": " + w);
    } catch (const Error& e) {
      throw PipelineError(exitCodeFor(e.code()), e.code(),
                          "op " + std::to_string(i) + " (" + op.op + "): " + e.what());
    } catch (const Json::exception& e) {
      throw PipelineError(1, ErrorCode::Validation,
                          "op " + std::to_string(i) + " (" + op.op + "): " + e.what());
    }
    r.millis = millisSince(opStart);
    run.report.ops.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < script.exports.size(); ++i) {
    const auto& e = script.exports[i];
    try {
      run.outputs.emplace_back(resolve(workingDir, e.path), exportDocument(run.engine.model(), e.request));
    } catch (const Error& err) {
      throw PipelineError(exitCodeFor(err.code()), err.code(),
                          "export " + std::to_string(i) + ": " + err.what());
    }
  }
  run.report.wallMillis = millisSince(start);
  return run;
}

RunReport runScript(const PipelineScript& script, const std::string& workingDir) {
  auto start = Clock::now();
  DryRun run = dryRun(script, workingDir);
  std::vector<std::string> written;
  for (const auto& [path, bytes] : run.outputs) {
    try {
      writeFile(path, bytes);
      written.push_back(path);
    } catch (const Error& e) {
      std::error_code ec;
      for (const auto& w : written) fs::remove(w, ec);
      fs::remove(path, ec);
      throw PipelineError(3, ErrorCode::Io, e.what());
    }
  }
  run.report.written = written;
  run.report.wallMillis = millisSince(start);
  return run.report;
}

PipelineScript recordSession(const Engine& engine) {
  PipelineScript s;
  s.imports = engine.imports();
  for (auto op : engine.history()) {
    op.resultClassIds.clear();
    s.ops.push_back(std::move(op));
  }
  return s;
}

Json projectDocument(const Engine& engine) {
  Json doc = toJson(recordSession(engine));
  doc["snapshot"] = snapshot(engine);
  return doc;
}

Engine loadProject(const std::string& path) {
  std::string bytes;
  try {
    bytes = readFile(path);
  } catch (const Error& e) {
    throw PipelineError(3, ErrorCode::Io, e.what());
  }
  Json doc;
  try {
    doc = Json::parse(bytes);
  } catch (const std::exception& e) {
    invalid(std::string("project is not a valid document: ") + e.what());
  }
  PipelineScript script = scriptFromJson(doc);
  script.exports.clear();
  std::string dir = fs::path(path).parent_path().string();
  Engine engine = dryRun(script, dir).engine;
  if (doc.contains("snapshot") && doc.at("snapshot").contains("classes")) {
    for (const auto& c : doc.at("snapshot").at("classes")) {
      std::string id = c.value("id", "");
      if (!engine.model().hasClass(id))
        throw PipelineError(2, ErrorCode::InvariantViolation,
                            "replay did not recreate class '" + id + "'");
      auto want = c.value("instances", std::size_t{0});
      auto got = engine.model().countInstances(id);
      if (want != got)
        throw PipelineError(2, ErrorCode::InvariantViolation,
                            "replay of '" + id + "' gives " + std::to_string(got) +
                                " instances, snapshot has " + std::to_string(want));
    }
  }
  return engine;
}

}  // namespace nw
