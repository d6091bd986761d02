#include <csignal>
#include <filesystem>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "netwrangle/connect_heuristic.hpp"
#include "netwrangle/json_codec.hpp"
#include "netwrangle/log.hpp"
#include "netwrangle/pipeline.hpp"
#include "netwrangle/service.hpp"

namespace fs = std::filesystem;
using namespace nw;

namespace {

Service* running = nullptr;

void onSignal(int) {
  if (running) running->stop();
}

int fail(int exitCode, std::string_view code, const std::string& message) {
  Json err = Json{{"error", {{"code", std::string(code)}, {"message", message}, {"exitCode", exitCode}}}};
  std::cerr << dumpCompact(err) << std::endl;
  return exitCode;
}

std::string dirOf(const std::string& path) { return fs::path(path).parent_path().string(); }

void printHead(const NetworkModel& model, const ClassId& id, std::size_t head) {
  TablePtr t = model.rows(id);
  std::cout << "\n== " << id << " (" << t->size() << " rows)\n";
  std::cout << "@index";
  for (const auto& a : t->attributes) std::cout << '\t' << a;
  std::cout << '\n';
  for (std::size_t r = 0; r < t->size() && r < head; ++r) {
    std::cout << t->ids[r];
    for (const auto& cell : t->rows[r])
      std::cout << '\t' << (cell.isList() || cell.isMap() ? dumpCompact(toJson(cell)) : renderText(cell));
    std::cout << '\n';
  }
}

void printModel(const NetworkModel& model) {
  for (const auto& id : model.classIds()) {
    const ClassSpec& c = model.cls(id);
    std::cout << std::left << std::setw(24) << id << std::setw(9) << toString(c.interpretation)
              << std::right << std::setw(9) << model.countInstances(id) << "  " << c.label;
    if (c.interpretation == Interpretation::Edge) {
      std::cout << "  [" << (c.ends.source ? c.ends.source->nodeClass : "-")
                << (c.ends.directed ? " -> " : " -- ") << (c.ends.target ? c.ends.target->nodeClass : "-")
                << "]";
    }
    std::cout << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"netwrangle: wrangle tables into multivariate networks"};
  app.require_subcommand(1);
  std::string logLevel = "warn";
  bool noCache = false;
  app.add_option("--log-level", logLevel, "debug, info, warn, error or off");
  app.add_flag("--no-cache", noCache, "recompute derived tables on every access");

  std::string script, project, out, format = "nodelink", src, trg, cls, host = "127.0.0.1";
  std::size_t head = 10, sampleK = 0, perClass = 5, top = 0;
  std::uint64_t seed = 0;
  int port = 8080;
  bool asJson = false, disconnected = false;
  std::vector<std::string> classes;

  auto* run = app.add_subcommand("run", "validate and execute a pipeline script");
  run->add_option("script", script)->required();
  run->add_option("--report", out, "write the run report here instead of stdout");

  auto* validate = app.add_subcommand("validate", "dry-run a pipeline script without writing");
  validate->add_option("script", script)->required();

  auto* inspect = app.add_subcommand("inspect", "print the model summary and table heads");
  inspect->add_option("project", project)->required();
  inspect->add_option("--class", cls);
  inspect->add_option("--head", head);

  auto* score = app.add_subcommand("score", "rank attribute pairs for connecting two classes");
  score->add_option("project", project)->required();
  score->add_option("--src", src)->required();
  score->add_option("--trg", trg)->required();
  score->add_option("--sample", sampleK, "score on k sampled source rows");
  score->add_option("--seed", seed);
  score->add_option("--top", top, "print only the best N pairs");
  score->add_flag("--json", asJson);

  auto* sampleCmd = app.add_subcommand("sample", "emit a class-balanced node-link sample");
  sampleCmd->add_option("project", project)->required();
  sampleCmd->add_option("--per-class", perClass);
  sampleCmd->add_option("--seed", seed);
  sampleCmd->add_option("--out", out);

  auto* serve = app.add_subcommand("serve", "start the HTTP service");
  serve->add_option("project", project)->required();
  serve->add_option("--port", port);
  serve->add_option("--host", host);

  auto* exportCmd = app.add_subcommand("export", "export the model");
  exportCmd->add_option("project", project)->required();
  exportCmd->add_option("--format", format, "nodelink, csvzip or gexf");
  exportCmd->add_option("--out", out)->required();
  exportCmd->add_option("--classes", classes)->delimiter(',');
  exportCmd->add_flag("--include-disconnected", disconnected);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail(1, "Usage", e.what());
  }

  auto level = log::parseLevel(logLevel);
  if (!level) return fail(1, "Usage", "unknown log level '" + logLevel + "'");
  log::setLevel(*level);
  TableNetwork::setDefaultCaching(!noCache);

  try {
    if (*run) {
      RunReport report = runScript(loadScript(script), dirOf(script));
      std::string text = dumpDocument(toJson(report));
      if (out.empty()) std::cout << text;
      else writeFile(out, text);
      return 0;
    }
    if (*validate) {
      DryRun dry = dryRun(loadScript(script), dirOf(script));
      Json ok = Json{{"valid", true}, {"ops", dry.report.ops.size()}, {"exports", dry.outputs.size()}};
      std::cout << dumpDocument(ok);
      return 0;
    }
    Engine engine = loadProject(project);
    const NetworkModel& model = engine.model();
    if (*inspect) {
      printModel(model);
      if (!cls.empty()) {
        printHead(model, model.cls(cls).id, head);
      } else {
        for (const auto& id : model.classIds()) printHead(model, id, head);
      }
      return 0;
    }
    if (*score) {
      auto scores = sampleK ? scoreAllPairsSampled(model, src, trg, sampleK, seed) : scoreAllPairs(model, src, trg);
      if (top && scores.size() > top) scores.resize(top);
      if (asJson) {
        Json list = Json::array();
        for (const auto& s : scores) list.push_back(toJson(s));
        std::cout << dumpDocument(list);
        return 0;
      }
      std::cout << std::left << std::setw(20) << src << std::setw(20) << trg << std::right << std::setw(9)
                << "total" << std::setw(9) << "src" << std::setw(9) << "trg" << '\n';
      for (const auto& s : scores)
        std::cout << std::left << std::setw(20) << s.srcKey.label() << std::setw(20) << s.trgKey.label()
                  << std::right << std::fixed << std::setprecision(4) << std::setw(9) << s.total
                  << std::setw(9) << s.srcContribution << std::setw(9) << s.trgContribution
                  << (s.approximate ? "  ~" : "") << '\n';
      return 0;
    }
    if (*sampleCmd) {
      SampleSpec spec;
      spec.targetPerClass = perClass;
      spec.randomSeed = seed;
      std::string doc = exportSample(model, sample(model, spec));
      if (out.empty()) std::cout << doc;
      else writeFile(out, doc);
      return 0;
    }
    if (*exportCmd) {
      ExportRequest r;
      auto f = parseExportFormat(format);
      if (!f) return fail(1, "Validation", "unknown export format '" + format + "'");
      r.format = *f;
      if (!classes.empty()) r.classes = classes;
      r.includeDisconnectedEdges = disconnected;
      writeFile(out, exportDocument(model, r));
      return 0;
    }
    if (*serve) {
      Service service(std::move(engine));
      int bound = service.bind(host, port);
      running = &service;
      std::signal(SIGINT, onSignal);
      std::signal(SIGTERM, onSignal);
      std::cout << "listening on http://" << host << ':' << bound << std::endl;
      service.listen();
      running = nullptr;
      return 0;
    }
  } catch (const PipelineError& e) {
    return fail(e.exitCode(), toString(e.code()), e.what());
  } catch (const Error& e) {
    return fail(exitCodeFor(e.code()), toString(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail(2, "Internal", e.what());
  }
  return 0;
}
