#include "netwrangle/connect_heuristic.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "netwrangle/error.hpp"
#include "netwrangle/rng.hpp"

namespace nw {

namespace {

using Elements = std::vector<std::vector<Value>>;
using Index = std::unordered_map<Value, std::vector<std::uint32_t>, ValueHash>;

double f(std::size_t deg) { return deg > 0 ? 1.0 / static_cast<double>(deg) : -1.0; }

/// Mean of f over a degree histogram; `scale` extrapolates sampled counts.
double contribution(const std::map<std::size_t, std::size_t>& histogram, double scale = 1.0) {
  double sum = 0;
  std::size_t items = 0;
  for (const auto& [deg, count] : histogram) {
    sum += static_cast<double>(count) * (deg > 0 ? 1.0 / (static_cast<double>(deg) * scale) : -1.0);
    items += count;
  }
  return sum / static_cast<double>(items);
}

std::vector<Key> keysOf(const MaterializedTable& t) {
  std::vector<Key> keys;
  for (const auto& a : t.attributes) keys.push_back(Key::attr(a));
  keys.push_back(Key::index());
  return keys;
}

Index buildIndex(const Elements& elements) {
  Index index;
  index.reserve(elements.size());
  for (std::size_t r = 0; r < elements.size(); ++r)
    for (const auto& v : elements[r]) index[v].push_back(static_cast<std::uint32_t>(r));
  return index;
}

void requireRows(const MaterializedTable& src, const MaterializedTable& trg) {
  if (src.size() == 0 || trg.size() == 0)
    throw Error(ErrorCode::EmptyClass, "cannot score against an empty class");
}

ConnectionScore finish(const Key& srcKey, const Key& trgKey, const std::vector<std::size_t>& srcDeg,
                       const std::vector<std::size_t>& trgDeg) {
  ConnectionScore s;
  s.srcKey = srcKey;
  s.trgKey = trgKey;
  s.isIndexPair = srcKey.isIndex() || trgKey.isIndex();
  for (auto d : srcDeg) ++s.srcHistogram[d];
  for (auto d : trgDeg) ++s.trgHistogram[d];
  s.srcContribution = contribution(s.srcHistogram);
  s.trgContribution = contribution(s.trgHistogram);
  s.total = s.srcContribution + s.trgContribution;
  return s;
}

ConnectionScore scoreElements(const Elements& src, const Elements& trg, const Index& trgIndex,
                              const Key& srcKey, const Key& trgKey) {
  std::vector<std::size_t> srcDeg(src.size(), 0), trgDeg(trg.size(), 0);
  std::vector<std::uint32_t> matched;
  for (std::size_t s = 0; s < src.size(); ++s) {
    const auto& els = src[s];
    if (els.size() == 1) {
      auto it = trgIndex.find(els.front());
      if (it == trgIndex.end()) continue;
      srcDeg[s] = it->second.size();
      for (auto t : it->second) ++trgDeg[t];
      continue;
    }
    matched.clear();
    for (const auto& v : els) {
      auto it = trgIndex.find(v);
      if (it != trgIndex.end()) matched.insert(matched.end(), it->second.begin(), it->second.end());
    }
    std::sort(matched.begin(), matched.end());
    matched.erase(std::unique(matched.begin(), matched.end()), matched.end());
    srcDeg[s] = matched.size();
    for (auto t : matched) ++trgDeg[t];
  }
  return finish(srcKey, trgKey, srcDeg, trgDeg);
}

struct Element {
  std::size_t hash;
  const Value* value;
};

/// Key elements of selected rows as (hash, pointer) pairs, row r spanning
/// items[offsets[r], offsets[r + 1]).
struct FlatElements {
  std::vector<std::uint32_t> offsets{0};
  std::vector<Element> items;
  bool multi = false;
};

FlatElements flatten(const MaterializedTable& t, const Key& key, const std::vector<Value>& ordinals,
                     const std::vector<std::uint32_t>& rows) {
  FlatElements out;
  std::optional<std::size_t> col;
  if (!key.isIndex()) {
    col = t.column(*key.attribute);
    if (!col) throw Error(ErrorCode::UnknownAttribute, "unknown attribute '" + *key.attribute + "'");
  }
  ValueHash hash;
  out.items.reserve(rows.size());
  for (auto r : rows) {
    const Value& cell = col ? t.rows[r][*col] : ordinals[r];
    std::size_t first = out.items.size();
    if (cell.isList()) {
      for (const auto& e : cell.list()) {
        if (e.isNull()) continue;
        bool seen = false;
        for (std::size_t i = first; i < out.items.size() && !seen; ++i) seen = *out.items[i].value == e;
        if (!seen) out.items.push_back({hash(e), &e});
      }
    } else if (!cell.isNull()) {
      out.items.push_back({hash(cell), &cell});
    }
    if (out.items.size() - first > 1) out.multi = true;
    out.offsets.push_back(static_cast<std::uint32_t>(out.items.size()));
  }
  return out;
}

/// Open-addressed table from distinct sampled key elements to their
/// sampled positions; small enough to stay cache resident.
struct SampleIndex {
  struct Slot {
    std::size_t hash;
    const Value* value;
    std::uint32_t begin;
    std::uint32_t end;
  };
  std::vector<Slot> slots;
  std::vector<std::uint32_t> positions;
  std::size_t mask = 0;
  bool multi = false;

  static std::size_t mix(std::size_t h) {
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ULL;
    return h ^ (h >> 33);
  }

  const Slot* find(const Element& e) const {
    for (std::size_t i = mix(e.hash) & mask;; i = (i + 1) & mask) {
      const Slot& s = slots[i];
      if (!s.value) return nullptr;
      if (s.hash == e.hash && *s.value == *e.value) return &s;
    }
  }
};

SampleIndex indexSample(const FlatElements& flat) {
  std::unordered_map<Value, std::vector<std::uint32_t>, ValueHash> groups;
  std::vector<const Value*> order;
  for (std::size_t j = 0; j + 1 < flat.offsets.size(); ++j)
    for (auto i = flat.offsets[j]; i < flat.offsets[j + 1]; ++i) {
      auto [it, fresh] = groups.try_emplace(*flat.items[i].value);
      if (fresh) order.push_back(flat.items[i].value);
      it->second.push_back(static_cast<std::uint32_t>(j));
    }
  SampleIndex index;
  index.multi = flat.multi;
  std::size_t capacity = 16;
  while (capacity < groups.size() * 4) capacity <<= 1;
  index.slots.assign(capacity, {0, nullptr, 0, 0});
  index.mask = capacity - 1;
  ValueHash hash;
  for (const Value* v : order) {
    const auto& pos = groups.at(*v);
    std::size_t h = hash(*v);
    std::size_t at = SampleIndex::mix(h) & index.mask;
    while (index.slots[at].value) at = (at + 1) & index.mask;
    auto begin = static_cast<std::uint32_t>(index.positions.size());
    index.positions.insert(index.positions.end(), pos.begin(), pos.end());
    index.slots[at] = {h, v, begin, static_cast<std::uint32_t>(index.positions.size())};
  }
  return index;
}

}  // namespace

void rankScores(std::vector<ConnectionScore>& scores) {
  auto indexCount = [](const ConnectionScore& s) {
    return int(s.srcKey.isIndex()) + int(s.trgKey.isIndex());
  };
  std::stable_sort(scores.begin(), scores.end(), [&](const auto& a, const auto& b) {
    if (a.total != b.total) return a.total > b.total;
    if (indexCount(a) != indexCount(b)) return indexCount(a) < indexCount(b);
    if (a.srcKey.label() != b.srcKey.label()) return a.srcKey.label() < b.srcKey.label();
    return a.trgKey.label() < b.trgKey.label();
  });
}

ConnectionScore scoreTables(const MaterializedTable& src, const MaterializedTable& trg,
                            const Key& srcKey, const Key& trgKey) {
  requireRows(src, trg);
  Elements s = keyElements(src, srcKey, true);
  Elements t = keyElements(trg, trgKey, true);
  return scoreElements(s, t, buildIndex(t), srcKey, trgKey);
}

std::vector<ConnectionScore> scoreAllTables(const MaterializedTable& src,
                                            const MaterializedTable& trg) {
  requireRows(src, trg);
  auto srcKeys = keysOf(src);
  auto trgKeys = keysOf(trg);
  std::vector<Elements> srcEls;
  for (const auto& k : srcKeys) srcEls.push_back(keyElements(src, k, true));
  std::vector<ConnectionScore> out;
  for (const auto& tk : trgKeys) {
    Elements trgEls = keyElements(trg, tk, true);
    Index index = buildIndex(trgEls);
    for (std::size_t i = 0; i < srcKeys.size(); ++i)
      out.push_back(scoreElements(srcEls[i], trgEls, index, srcKeys[i], tk));
  }
  rankScores(out);
  return out;
}

std::vector<ConnectionScore> scoreAllTablesSampled(const MaterializedTable& src,
                                                   const MaterializedTable& trg, std::size_t k,
                                                   std::uint64_t seed) {
  if (k == 0) throw Error(ErrorCode::Validation, "sample size must be at least 1");
  requireRows(src, trg);
  const std::size_t n = src.size();
  // Partial Fisher-Yates draws the sample without replacement.
  std::vector<std::uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  const std::size_t size = std::min(k, n);
  Rng rng(seed);
  for (std::size_t i = 0; i < size; ++i) std::swap(rows[i], rows[i + rng.below(n - i)]);
  rows.resize(size);
  std::sort(rows.begin(), rows.end());
  const double scale = static_cast<double>(n) / static_cast<double>(size);

  auto ordinals = [](const MaterializedTable& t) {
    std::vector<Value> out;
    out.reserve(t.size());
    for (auto id : t.ids) out.emplace_back(id);
    return out;
  };
  std::vector<Value> srcOrdinals = ordinals(src), trgOrdinals = ordinals(trg);
  std::vector<std::uint32_t> allTrg(trg.size());
  std::iota(allTrg.begin(), allTrg.end(), 0u);

  auto srcKeys = keysOf(src);
  auto trgKeys = keysOf(trg);
  std::vector<SampleIndex> samples;
  for (const auto& key : srcKeys) samples.push_back(indexSample(flatten(src, key, srcOrdinals, rows)));

  std::vector<ConnectionScore> out;
  std::vector<std::uint32_t> hits;
  std::vector<std::size_t> srcDeg(size), trgHits(trg.size());
  for (const auto& tk : trgKeys) {
    FlatElements t = flatten(trg, tk, trgOrdinals, allTrg);
    for (std::size_t i = 0; i < srcKeys.size(); ++i) {
      const SampleIndex& index = samples[i];
      const bool dedupe = index.multi || t.multi;
      std::fill(srcDeg.begin(), srcDeg.end(), 0);
      std::fill(trgHits.begin(), trgHits.end(), 0);
      for (std::size_t r = 0; r < trg.size(); ++r) {
        hits.clear();
        for (auto e = t.offsets[r]; e < t.offsets[r + 1]; ++e)
          if (const auto* slot = index.find(t.items[e]))
            hits.insert(hits.end(), index.positions.begin() + slot->begin, index.positions.begin() + slot->end);
        if (hits.empty()) continue;
        if (dedupe) {
          std::sort(hits.begin(), hits.end());
          hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
        }
        trgHits[r] = hits.size();
        for (auto s : hits) ++srcDeg[s];
      }
      ConnectionScore s;
      s.srcKey = srcKeys[i];
      s.trgKey = tk;
      s.isIndexPair = s.srcKey.isIndex() || tk.isIndex();
      s.approximate = size < n;
      for (auto d : srcDeg) ++s.srcHistogram[d];
      for (auto c : trgHits) ++s.trgHistogram[c];
      s.srcContribution = contribution(s.srcHistogram);
      s.trgContribution = contribution(s.trgHistogram, scale);
      s.total = s.srcContribution + s.trgContribution;
      out.push_back(std::move(s));
    }
  }
  rankScores(out);
  return out;
}

ConnectionScore scorePair(const NetworkModel& model, const ClassId& src, const ClassId& trg,
                          const Key& srcKey, const Key& trgKey) {
  return scoreTables(*model.rows(src), *model.rows(trg), srcKey, trgKey);
}

std::vector<ConnectionScore> scoreAllPairs(const NetworkModel& model, const ClassId& src,
                                           const ClassId& trg) {
  return scoreAllTables(*model.rows(src), *model.rows(trg));
}

std::vector<ConnectionScore> scoreAllPairsSampled(const NetworkModel& model, const ClassId& src,
                                                  const ClassId& trg, std::size_t k,
                                                  std::uint64_t seed) {
  return scoreAllTablesSampled(*model.rows(src), *model.rows(trg), k, seed);
}

Json toJson(const ConnectionScore& score) {
  auto hist = [](const std::map<std::size_t, std::size_t>& h) {
    Json j = Json::object();
    for (const auto& [deg, count] : h) j[std::to_string(deg)] = count;
    return j;
  };
  Json j = Json::object();
  j["srcKey"] = score.srcKey.label();
  j["trgKey"] = score.trgKey.label();
  j["total"] = score.total;
  j["srcContribution"] = score.srcContribution;
  j["trgContribution"] = score.trgContribution;
  j["srcDegreeHistogram"] = hist(score.srcHistogram);
  j["trgDegreeHistogram"] = hist(score.trgHistogram);
  j["isIndexPair"] = score.isIndexPair;
  j["approximate"] = score.approximate;
  return j;
}

}  // namespace nw
