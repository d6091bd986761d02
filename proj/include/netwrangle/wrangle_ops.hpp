#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netwrangle/json_codec.hpp"
#include "netwrangle/network_model.hpp"
#include "netwrangle/paths.hpp"

namespace nw {

enum class OpCategory { Modeling, Item, Attribute, Housekeeping };

/// A replayable operation. `params` is op-specific; `expect` optionally
/// pins instance counts per class id after the op.
struct OpRecord {
  std::string op;
  Json params = Json::object();
  std::vector<ClassId> resultClassIds;
  std::optional<Json> expect;
};

Json toJson(const OpRecord& record);
OpRecord opFromJson(const Json& json);

std::optional<OpCategory> categoryOf(std::string_view op);
const std::vector<std::string>& knownOps();

// Parameter codecs shared with the pipeline and the service.
Key keyFromJson(const Json& json);
Json toJson(const Key& key);
PathSpec pathFromJson(const Json& json);
Json toJson(const PathSpec& path);
ExprSpec exprFromJson(const Json& json);
Json toJson(const ExprSpec& expr);
PredicateSpec predicateFromJson(const Json& json);
Json toJson(const PredicateSpec& predicate);

struct ModelCounts {
  std::vector<ClassId> classes;
  std::map<ClassId, std::size_t> instances;
};
ModelCounts snapshotCounts(const NetworkModel& model);

/// Applies `record` to `model` in place and returns the created class ids.
/// On error the model may be partially modified; callers wanting atomicity
/// apply to a copy (see Engine).
std::vector<ClassId> applyOp(NetworkModel& model, const OpRecord& record);

/// Per-row connectivity reduction along `path`: for each anchor row (table
/// order), `attribute` of the end items reduced with `reducer`. An empty
/// attribute reduces the end items' RowId ordinals.
std::vector<Value> reduceAlongPath(const NetworkModel& model, const PathSpec& path,
                                   const std::string& attribute, const ExprSpec& reducer,
                                   Warnings& warnings);

struct ImportRecord {
  std::string name;
  std::string format;
  std::string path;
};

/// Owns the working model, the op history and the mutation sequence.
/// Every apply is transactional: it runs on a copy and swaps on success.
class Engine {
 public:
  NetworkModel& model() { return model_; }
  const NetworkModel& model() const { return model_; }

  OpRecord apply(OpRecord record);
  const std::vector<OpRecord>& history() const { return history_; }
  std::vector<ImportRecord>& imports() { return imports_; }
  const std::vector<ImportRecord>& imports() const { return imports_; }
  std::uint64_t sequence() const { return sequence_; }
  void bump() { ++sequence_; }

 private:
  NetworkModel model_;
  std::vector<OpRecord> history_;
  std::vector<ImportRecord> imports_;
  std::uint64_t sequence_ = 0;
};

/// Taxonomy postconditions of one op; throws InvariantViolation.
void checkTaxonomy(std::string_view op, const ModelCounts& before, const ModelCounts& after);

}  // namespace nw
