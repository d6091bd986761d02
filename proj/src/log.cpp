#include "netwrangle/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace nw::log {

namespace {
std::atomic<Level> current{Level::Warn};
std::mutex sink;
}  // namespace

std::optional<Level> parseLevel(std::string_view text) {
  if (text == "debug") return Level::Debug;
  if (text == "info") return Level::Info;
  if (text == "warn" || text == "warning") return Level::Warn;
  if (text == "error") return Level::Error;
  if (text == "off") return Level::Off;
  return std::nullopt;
}

void setLevel(Level l) { current = l; }
Level level() { return current; }

void write(Level l, std::string_view message) {
  if (l < current.load() || l == Level::Off) return;
  static constexpr const char* names[] = {"debug", "info", "warn", "error", "off"};
  std::lock_guard lock(sink);
  std::cerr << '[' << names[static_cast<int>(l)] << "] " << message << '\n';
}

}  // namespace nw::log
