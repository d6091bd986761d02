#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace nw::log {

enum class Level { Debug, Info, Warn, Error, Off };

std::optional<Level> parseLevel(std::string_view text);
void setLevel(Level level);
Level level();
/// One line on stderr: "[level] message".
void write(Level level, std::string_view message);

inline void debug(std::string_view m) { write(Level::Debug, m); }
inline void info(std::string_view m) { write(Level::Info, m); }
inline void warn(std::string_view m) { write(Level::Warn, m); }
inline void error(std::string_view m) { write(Level::Error, m); }

}  // namespace nw::log
