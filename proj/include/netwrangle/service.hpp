#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "netwrangle/pipeline.hpp"
#include "netwrangle/sampler.hpp"

namespace nw {

/// "<classId>/<ordinal>"; throws InvalidItem.
ItemRef parseItemRef(const std::string& text);

Json toJson(const NetworkSample& sample);
NetworkSample sampleFromJson(const Json& json);

/// Model summary served at GET /model.
Json modelJson(const NetworkModel& model, std::uint64_t sequence);

/// HTTP facade over one engine. Reads share a lock; mutations are
/// serialized and bump the sequence number.
class Service {
 public:
  explicit Service(Engine engine);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds to `port` (0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); blocks.
  void listen();
  void stop();
  void waitUntilReady();

  std::uint64_t sequence() const;
  /// Copy of the current engine.
  Engine snapshot() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace nw
