#include "netwrangle/json_codec.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace nw {

Json toJson(const Value& value) {
  switch (value.kind()) {
    case Kind::Null: return nullptr;
    case Kind::Boolean: return value.boolean();
    case Kind::Number: {
      double d = value.number();
      if (std::nearbyint(d) == d && std::fabs(d) <= 9007199254740992.0)
        return static_cast<std::int64_t>(d);
      return d;
    }
    case Kind::Text: return value.text();
    case Kind::List: {
      Json out = Json::array();
      for (const auto& v : value.list()) out.push_back(toJson(v));
      return out;
    }
    case Kind::Map: {
      Json out = Json::object();
      for (const auto& [k, v] : value.map()) out[k] = toJson(v);
      return out;
    }
  }
  return nullptr;
}

Value fromJson(const Json& json) {
  switch (json.type()) {
    case Json::value_t::null:
    case Json::value_t::discarded: return Value{};
    case Json::value_t::boolean: return Value{json.get<bool>()};
    case Json::value_t::number_integer: return Value{json.get<std::int64_t>()};
    case Json::value_t::number_unsigned: return Value{json.get<std::uint64_t>()};
    case Json::value_t::number_float: return Value{json.get<double>()};
    case Json::value_t::string: return Value{json.get<std::string>()};
    case Json::value_t::array: {
      ValueList list;
      list.reserve(json.size());
      for (const auto& item : json) list.push_back(fromJson(item));
      return Value{std::move(list)};
    }
    case Json::value_t::object: {
      ValueMap map;
      for (const auto& [k, v] : json.items()) map.set(k, fromJson(v));
      return Value{std::move(map)};
    }
    case Json::value_t::binary: return Value{};
  }
  return Value{};
}

Json canonicalize(const Json& json, std::initializer_list<const char*> reserved) {
  if (json.is_array()) {
    Json out = Json::array();
    for (const auto& item : json) out.push_back(canonicalize(item, reserved));
    return out;
  }
  if (!json.is_object()) return json;
  std::vector<std::string> keys;
  for (const auto& [k, v] : json.items()) keys.push_back(k);
  auto rank = [&](const std::string& key) {
    std::size_t i = 0;
    for (const char* r : reserved) {
      if (key == r) return i;
      ++i;
    }
    return reserved.size();
  };
  std::stable_sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) {
    auto ra = rank(a), rb = rank(b);
    if (ra != rb) return ra < rb;
    return a < b;
  });
  Json out = Json::object();
  for (const auto& k : keys) out[k] = canonicalize(json.at(k), reserved);
  return out;
}

std::string dumpDocument(const Json& json) { return json.dump(2) + "\n"; }

std::string dumpCompact(const Json& json) { return json.dump(); }

}  // namespace nw
