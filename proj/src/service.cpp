#include "netwrangle/service.hpp"

#include <atomic>
#include <charconv>
#include <random>
#include <shared_mutex>

#include "httplib.h"
#include "netwrangle/connect_heuristic.hpp"
#include "netwrangle/json_codec.hpp"
#include "netwrangle/log.hpp"
#include "netwrangle/paths.hpp"

namespace nw {

namespace {

constexpr std::size_t kMaxDepth = 8;
constexpr std::size_t kDefaultDepth = 4;
constexpr std::size_t kPathLimit = 1000;

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::Validation, msg); }

std::size_t number(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  std::string v = req.get_param_value(key);
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    bad(std::string("query parameter '") + key + "' must be a non-negative integer");
  return out;
}

std::string param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) bad(std::string("missing query parameter '") + key + "'");
  return req.get_param_value(key);
}

std::vector<std::string> splitList(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    if (comma > start) out.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

Json parseBody(const httplib::Request& req) {
  try {
    return Json::parse(req.body);
  } catch (const std::exception& e) {
    bad(std::string("request body is not a valid document: ") + e.what());
  }
}

Json stepsJson(const EdgeSide& side) {
  Json steps = Json::array();
  for (const auto& s : side.steps) steps.push_back(Json{{"link", s.link}, {"forward", s.forward}});
  return Json{{"nodeClass", side.nodeClass}, {"steps", steps}};
}

Json summaryJson(const MaterializedTable& t, std::size_t col) {
  std::vector<Value> cells;
  cells.reserve(t.size());
  for (const auto& r : t.rows) cells.push_back(r[col]);
  ValueKindSummary s = summarizeColumn(cells);
  Json kinds = Json::object();
  for (Kind k : {Kind::Null, Kind::Boolean, Kind::Number, Kind::Text, Kind::List, Kind::Map})
    if (s.count(k)) kinds[std::string(toString(k))] = s.count(k);
  return Json{{"dominant", std::string(toString(s.dominant))}, {"kinds", kinds}, {"total", s.total}};
}

}  // namespace

ItemRef parseItemRef(const std::string& text) {
  auto slash = text.rfind('/');
  std::int64_t ord = 0;
  if (slash == std::string::npos || slash == 0)
    throw Error(ErrorCode::InvalidItem, "item id must look like <class>/<ordinal>: " + text);
  auto [ptr, ec] = std::from_chars(text.data() + slash + 1, text.data() + text.size(), ord);
  if (ec != std::errc() || ptr != text.data() + text.size() || slash + 1 == text.size())
    throw Error(ErrorCode::InvalidItem, "item id must look like <class>/<ordinal>: " + text);
  return {text.substr(0, slash), ord};
}

Json toJson(const NetworkSample& sample) {
  Json nodes = Json::array();
  for (const auto& n : sample.nodes) nodes.push_back(n.str());
  Json edges = Json::array();
  for (const auto& e : sample.edges)
    edges.push_back(Json{{"edge", e.edge.str()}, {"source", e.source.str()}, {"target", e.target.str()}});
  Json counts = Json::object();
  for (const auto& [k, v] : sample.perClassCounts) counts[k] = v;
  return Json{{"nodes", nodes}, {"edges", edges}, {"perClassCounts", counts}};
}

NetworkSample sampleFromJson(const Json& json) {
  NetworkSample s;
  if (json.is_null()) return s;
  if (!json.is_object()) bad("sample must be an object");
  for (const auto& n : json.value("nodes", Json::array())) {
    ItemRef item = parseItemRef(n.get<std::string>());
    s.nodes.push_back(item);
    ++s.perClassCounts[item.classId];
  }
  for (const auto& e : json.value("edges", Json::array())) {
    SampledEdge edge{parseItemRef(e.at("edge").get<std::string>()),
                     parseItemRef(e.at("source").get<std::string>()),
                     parseItemRef(e.at("target").get<std::string>())};
    s.edges.push_back(edge);
    ++s.perClassCounts[edge.edge.classId];
  }
  return s;
}

Json modelJson(const NetworkModel& model, std::uint64_t sequence) {
  Json classes = Json::array();
  for (const auto& id : model.classIds()) {
    const ClassSpec& c = model.cls(id);
    Json j = Json::object();
    j["id"] = id;
    j["label"] = c.label;
    j["interpretation"] = std::string(toString(c.interpretation));
    j["color"] = c.color;
    j["table"] = c.table;
    j["attributes"] = model.rows(id)->attributes;
    j["instances"] = model.countInstances(id);
    if (c.interpretation == Interpretation::Edge) {
      j["source"] = c.ends.source ? stepsJson(*c.ends.source) : Json(nullptr);
      j["target"] = c.ends.target ? stepsJson(*c.ends.target) : Json(nullptr);
      j["directed"] = c.ends.directed;
    }
    classes.push_back(std::move(j));
  }
  return Json{{"sequence", sequence}, {"classes", classes}};
}

struct Service::Impl {
  Engine engine;
  mutable std::shared_mutex mutex;
  httplib::Server server;
  std::atomic<std::uint64_t> incidents{0};
  std::uint64_t incidentSalt = std::random_device{}();

  explicit Impl(Engine e) : engine(std::move(e)) { routes(); }

  static void reply(httplib::Response& res, const Json& body, int status = 200) {
    res.status = status;
    res.set_content(dumpDocument(body), "application/json");
  }

  void guarded(const httplib::Request& req, httplib::Response& res,
               const std::function<void()>& body) {
    try {
      body();
    } catch (const Error& e) {
      int status = e.code() == ErrorCode::StaleSequence ? 409 : 400;
      reply(res, Json{{"error", {{"code", std::string(toString(e.code()))}, {"message", e.what()}}}},
            status);
    } catch (const Json::exception& e) {
      reply(res, Json{{"error", {{"code", "Validation"}, {"message", e.what()}}}}, 400);
    } catch (const std::exception& e) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "inc-%06llx-%04llx",
                    static_cast<unsigned long long>(incidentSalt & 0xFFFFFF),
                    static_cast<unsigned long long>(++incidents));
      log::error(std::string(buf) + " " + req.method + " " + req.path + ": " + e.what());
      reply(res, Json{{"error", {{"code", "Internal"}, {"message", "internal error"}, {"incident", buf}}}},
            500);
    }
  }

  void get(const std::string& pattern,
           std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server.Get(pattern, [this, handler](const httplib::Request& req, httplib::Response& res) {
      guarded(req, res, [&] {
        std::shared_lock lock(mutex);
        handler(req, res);
      });
    });
  }

  void post(const std::string& pattern,
            std::function<void(const httplib::Request&, httplib::Response&)> handler, bool mutating) {
    server.Post(pattern, [this, handler, mutating](const httplib::Request& req, httplib::Response& res) {
      guarded(req, res, [&] {
        if (mutating) {
          std::unique_lock lock(mutex);
          handler(req, res);
        } else {
          std::shared_lock lock(mutex);
          handler(req, res);
        }
      });
    });
  }

  void checkSequence(const Json& body, const httplib::Request& req) {
    std::optional<std::uint64_t> expected;
    if (body.is_object() && body.contains("expectSeq") && !body.at("expectSeq").is_null())
      expected = body.at("expectSeq").get<std::uint64_t>();
    else if (req.has_param("expectSeq"))
      expected = number(req, "expectSeq", 0);
    if (expected && *expected != engine.sequence())
      throw Error(ErrorCode::StaleSequence, "sequence is " + std::to_string(engine.sequence()) +
                                                 ", request expected " + std::to_string(*expected));
  }

  void routes() {
    get("/model", [this](const auto&, auto& res) { reply(res, modelJson(engine.model(), engine.sequence())); });

    get("/project", [this](const auto&, auto& res) { reply(res, projectDocument(engine)); });

    get(R"(/classes/([^/]+)/rows)", [this](const httplib::Request& req, httplib::Response& res) {
      const NetworkModel& m = engine.model();
      ClassId id = req.matches[1];
      TablePtr t = m.rows(id);
      std::size_t offset = number(req, "offset", 0);
      std::size_t limit = std::min<std::size_t>(number(req, "limit", 50), 1000);
      std::vector<std::size_t> order(t->size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      if (req.has_param("sortBy")) {
        std::string by = req.get_param_value("sortBy");
        bool desc = req.has_param("dir") && req.get_param_value("dir") == "desc";
        if (req.has_param("dir") && !desc && req.get_param_value("dir") != "asc")
          bad("dir must be asc or desc");
        auto col = by == "@index" ? std::nullopt : t->column(by);
        if (by != "@index" && !col) throw Error(ErrorCode::UnknownAttribute, "no attribute '" + by + "'");
        auto cell = [&](std::size_t p) { return col ? t->rows[p][*col] : Value{t->ids[p]}; };
        auto less = [&](std::size_t a, std::size_t b) {
          Value x = cell(a), y = cell(b);
          Ordering o = compare(x, y);
          if (o == Ordering::Incomparable) return x.kind() < y.kind();
          return o == Ordering::Less;
        };
        std::stable_sort(order.begin(), order.end(),
                         [&](auto a, auto b) { return desc ? less(b, a) : less(a, b); });
      }
      Json rows = Json::array();
      for (std::size_t i = offset; i < order.size() && i < offset + limit; ++i) {
        std::size_t p = order[i];
        Json r = Json::object();
        r["@index"] = t->ids[p];
        for (std::size_t c = 0; c < t->attributes.size(); ++c) r[t->attributes[c]] = nw::toJson(t->rows[p][c]);
        rows.push_back(std::move(r));
      }
      Json summaries = Json::object();
      for (std::size_t c = 0; c < t->attributes.size(); ++c) summaries[t->attributes[c]] = summaryJson(*t, c);
      reply(res, Json{{"sequence", engine.sequence()}, {"classId", id}, {"total", t->size()},
                      {"offset", offset}, {"limit", limit}, {"attributes", t->attributes},
                      {"rows", rows}, {"summaries", summaries}, {"warnings", t->warnings}});
    });

    post("/ops", [this](const httplib::Request& req, httplib::Response& res) {
      Json body = parseBody(req);
      checkSequence(body, req);
      OpRecord applied = engine.apply(opFromJson(body));
      log::info("applied " + applied.op + ", sequence " + std::to_string(engine.sequence()));
      reply(res, Json{{"sequence", engine.sequence()}, {"record", nw::toJson(applied)},
                      {"model", modelJson(engine.model(), engine.sequence())}});
    }, true);

    get("/connect/scores", [this](const httplib::Request& req, httplib::Response& res) {
      ClassId src = param(req, "src"), trg = param(req, "trg");
      std::size_t k = number(req, "sample", 0);
      std::uint64_t seed = number(req, "seed", 0);
      auto scores = k ? scoreAllPairsSampled(engine.model(), src, trg, k, seed)
                      : scoreAllPairs(engine.model(), src, trg);
      Json list = Json::array();
      for (const auto& s : scores) list.push_back(nw::toJson(s));
      reply(res, Json{{"sequence", engine.sequence()}, {"src", src}, {"trg", trg}, {"scores", list}});
    });

    get("/paths", [this](const httplib::Request& req, httplib::Response& res) {
      ClassId anchor = param(req, "anchor");
      std::size_t depth = number(req, "maxDepth", kDefaultDepth);
      if (depth < 1 || depth > kMaxDepth) bad("maxDepth must be between 1 and 8");
      if (!engine.model().hasClass(anchor)) throw Error(ErrorCode::UnknownClass, "no class '" + anchor + "'");
      PathEnumeration e = enumeratePaths(engine.model(), anchor, depth, kPathLimit);
      Json paths = Json::array();
      for (const auto& p : e.paths) paths.push_back(nw::toJson(p));
      reply(res, Json{{"sequence", engine.sequence()}, {"paths", paths}, {"truncated", e.truncated}});
    });

    post("/preview/derive", [this](const httplib::Request& req, httplib::Response& res) {
      Json body = parseBody(req);
      if (!body.is_object() || !body.contains("class") || !body.contains("path") || !body.contains("reducer"))
        bad("preview needs 'class', 'path' and 'reducer'");
      ClassId id = body.at("class").get<std::string>();
      PathSpec path = pathFromJson(body.at("path"));
      if (path.anchor.empty()) path.anchor = id;
      if (path.anchor != id) throw Error(ErrorCode::InvalidPath, "path must be anchored at '" + id + "'");
      std::string attr = body.value("targetAttribute", std::string());
      ExprSpec reducer = exprFromJson(body.at("reducer"));
      Warnings w;
      auto values = reduceAlongPath(engine.model(), path, attr, reducer, w);
      TablePtr rows = engine.model().rows(id);
      std::size_t limit = body.value("sampleRows", std::size_t{20});
      Json out = Json::array();
      for (std::size_t r = 0; r < rows->size() && r < limit; ++r)
        out.push_back(Json{{"@index", rows->ids[r]}, {"value", nw::toJson(values[r])}});
      reply(res, Json{{"sequence", engine.sequence()}, {"values", out}, {"warnings", w.count},
                      {"firstWarning", w.first}});
    }, false);

    get("/sample", [this](const httplib::Request& req, httplib::Response& res) {
      SampleSpec spec;
      spec.targetPerClass = number(req, "perClass", 5);
      spec.randomSeed = number(req, "seed", 0);
      if (req.has_param("seeds"))
        for (const auto& s : splitList(req.get_param_value("seeds"))) spec.seeds.push_back(parseItemRef(s));
      respondSample(res, sample(engine.model(), spec));
    });

    post("/sample/expand", [this](const httplib::Request& req, httplib::Response& res) {
      Json body = parseBody(req);
      NetworkSample s = sampleFromJson(body.value("sample", Json()));
      respondSample(res, expandNeighbors(engine.model(), std::move(s),
                                         parseItemRef(body.at("node").get<std::string>())));
    }, false);

    post("/sample/seed", [this](const httplib::Request& req, httplib::Response& res) {
      Json body = parseBody(req);
      NetworkSample s = sampleFromJson(body.value("sample", Json()));
      std::vector<ItemRef> items;
      for (const auto& i : body.at("items")) items.push_back(parseItemRef(i.get<std::string>()));
      respondSample(res, seedFromTable(engine.model(), std::move(s), items));
    }, false);

    get("/export", [this](const httplib::Request& req, httplib::Response& res) {
      ExportRequest r;
      auto format = parseExportFormat(req.has_param("format") ? req.get_param_value("format") : "nodelink");
      if (!format) bad("unknown export format");
      r.format = *format;
      if (req.has_param("classes")) r.classes = splitList(req.get_param_value("classes"));
      r.includeDisconnectedEdges = req.has_param("includeDisconnectedEdges") &&
                                   req.get_param_value("includeDisconnectedEdges") == "true";
      std::string bytes = exportDocument(engine.model(), r);
      const char* type = r.format == ExportFormat::CsvZip ? "application/zip"
                         : r.format == ExportFormat::Gexf ? "application/xml"
                                                          : "application/json";
      res.set_content(bytes, type);
    });

    post("/import", [this](const httplib::Request& req, httplib::Response& res) {
      std::string name, format, text, path;
      if (req.is_multipart_form_data()) {
        if (!req.has_file("file")) bad("multipart import needs a 'file' part");
        auto file = req.get_file_value("file");
        text = file.content;
        path = file.filename;
        name = req.has_file("name") ? req.get_file_value("name").content : "";
        format = req.has_file("format") ? req.get_file_value("format").content : "";
      } else {
        Json body = parseBody(req);
        name = body.value("name", std::string());
        format = body.value("format", std::string());
        text = body.value("text", std::string());
        path = body.value("path", std::string());
        checkSequence(body, req);
      }
      if (name.empty() || format.empty()) bad("import needs 'name' and 'format'");
      Engine next = engine;
      auto created = importText(next.model(), name, format, text);
      next.imports().push_back({name, format, path.empty() ? name : path});
      next.bump();
      engine = std::move(next);
      reply(res, Json{{"sequence", engine.sequence()}, {"created", created},
                      {"model", modelJson(engine.model(), engine.sequence())}});
    }, true);
  }

  void respondSample(httplib::Response& res, const NetworkSample& s) {
    Json doc = Json::parse(exportSample(engine.model(), s));
    reply(res, Json{{"sequence", engine.sequence()}, {"sample", nw::toJson(s)}, {"document", doc}});
  }
};

Service::Service(Engine engine) : impl_(std::make_unique<Impl>(std::move(engine))) {}
Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port)) throw Error(ErrorCode::Io, "cannot bind port " + std::to_string(port));
  return port;
}

void Service::listen() { impl_->server.listen_after_bind(); }
void Service::stop() { impl_->server.stop(); }
void Service::waitUntilReady() { impl_->server.wait_until_ready(); }

std::uint64_t Service::sequence() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->engine.sequence();
}

Engine Service::snapshot() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->engine;
}

}  // namespace nw
