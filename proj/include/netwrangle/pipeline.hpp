#pragma once

#include <map>
#include <string>
#include <vector>

#include "netwrangle/error.hpp"
#include "netwrangle/io.hpp"
#include "netwrangle/wrangle_ops.hpp"

namespace nw {

struct ScriptExport {
  ExportRequest request;
  std::string path;
};

/// Replayable batch description. Relative paths resolve against the
/// working directory given to runScript.
struct PipelineScript {
  int version = 1;
  std::vector<ImportRecord> imports;
  std::vector<OpRecord> ops;
  std::vector<ScriptExport> exports;
};

Json toJson(const PipelineScript& script);
/// Structural parse; unknown ops are rejected with their index.
PipelineScript scriptFromJson(const Json& json);
PipelineScript loadScript(const std::string& path);

struct OpReport {
  std::size_t index = 0;
  std::string op;
  std::vector<ClassId> created;
  std::size_t classCount = 0;
  std::map<ClassId, std::size_t> instances;
  std::vector<std::string> warnings;
  double millis = 0;
};

struct RunReport {
  std::vector<std::string> imported;
  std::vector<OpReport> ops;
  std::vector<std::string> written;
  std::vector<std::string> warnings;
  double wallMillis = 0;
};

Json toJson(const RunReport& report);

/// Thrown by the pipeline; carries the process exit status.
class PipelineError : public Error {
 public:
  PipelineError(int exitCode, ErrorCode code, const std::string& message)
      : Error(code, message), exitCode_(exitCode) {}
  int exitCode() const noexcept { return exitCode_; }

 private:
  int exitCode_;
};

/// 1 validation, 2 runtime, 3 I/O.
int exitCodeFor(ErrorCode code);

/// Everything except writing: imports are read, ops applied and export
/// bytes rendered in memory. Throws PipelineError.
struct DryRun {
  Engine engine;
  RunReport report;
  std::vector<std::pair<std::string, std::string>> outputs;
};
DryRun dryRun(const PipelineScript& script, const std::string& workingDir);

/// Validates by dry run, then writes the exports. A failed write removes
/// the files already written by this run.
RunReport runScript(const PipelineScript& script, const std::string& workingDir);

PipelineScript recordSession(const Engine& engine);

/// Script plus a snapshot of class labels, colors, interpretations and
/// instance counts.
Json projectDocument(const Engine& engine);
/// Rebuilds the engine of a project (or a bare script) by replay and checks
/// the stored snapshot counts.
Engine loadProject(const std::string& path);

}  // namespace nw
