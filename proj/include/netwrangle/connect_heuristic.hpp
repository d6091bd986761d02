#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "netwrangle/json_codec.hpp"
#include "netwrangle/network_model.hpp"

namespace nw {

/// Score of joining two classes on srcKey = trgKey. Each side contributes
/// the mean over its items of 1/deg (deg > 0) or -1 (unmatched), where deg
/// counts matched rows on the other side.
struct ConnectionScore {
  Key srcKey;
  Key trgKey;
  double total = 0;
  double srcContribution = 0;
  double trgContribution = 0;
  std::map<std::size_t, std::size_t> srcHistogram;
  std::map<std::size_t, std::size_t> trgHistogram;
  bool isIndexPair = false;
  bool approximate = false;
};

ConnectionScore scoreTables(const MaterializedTable& src, const MaterializedTable& trg,
                            const Key& srcKey, const Key& trgKey);
/// Every attribute/index combination, ranked.
std::vector<ConnectionScore> scoreAllTables(const MaterializedTable& src,
                                            const MaterializedTable& trg);
/// Samples min(k, n) source rows. Source degrees are exact (all target rows
/// are streamed); target degrees are extrapolated from matches against the
/// sample, deg ~ c * n / k, with c = 0 counted as unmatched.
std::vector<ConnectionScore> scoreAllTablesSampled(const MaterializedTable& src,
                                                   const MaterializedTable& trg, std::size_t k,
                                                   std::uint64_t seed);

ConnectionScore scorePair(const NetworkModel& model, const ClassId& src, const ClassId& trg,
                          const Key& srcKey, const Key& trgKey);
std::vector<ConnectionScore> scoreAllPairs(const NetworkModel& model, const ClassId& src,
                                           const ClassId& trg);
std::vector<ConnectionScore> scoreAllPairsSampled(const NetworkModel& model, const ClassId& src,
                                                  const ClassId& trg, std::size_t k,
                                                  std::uint64_t seed);

/// Total descending; ties prefer attribute keys over the index, then names.
void rankScores(std::vector<ConnectionScore>& scores);

Json toJson(const ConnectionScore& score);

}  // namespace nw
