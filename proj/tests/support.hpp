#pragma once

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "netwrangle/io.hpp"
#include "netwrangle/wrangle_ops.hpp"

namespace nw::test {

using Rows = std::vector<std::vector<Value>>;

/// Static table plus a class over it.
ClassId addTable(NetworkModel& model, const std::string& name,
                 const std::vector<std::string>& attributes, const Rows& rows,
                 Interpretation interpretation = Interpretation::Generic);

std::vector<ClassId> op(NetworkModel& model, const std::string& name, Json params);

std::string fixtureDir();
/// The movie fixture after the modeling ops of the fixture pipeline.
NetworkModel movieModel();

/// Nested-loop connection score: degrees counted by comparing every
/// source cell with every target cell.
double bruteScore(const std::vector<Value>& src, const std::vector<Value>& trg);

/// Column of a class table by name, "@index" giving the ordinals.
std::vector<Value> column(const NetworkModel& model, const ClassId& id, const std::string& attr);

/// Unordered distinct node pairs joined by an edge class, as ordinals.
std::multiset<std::pair<std::int64_t, std::int64_t>> pairMultiset(const NetworkModel& model,
                                                                   const ClassId& edge);

/// Random bipartite actor/movie network connected through a "cast" edge
/// table. Returns the edge class id ("cast").
struct Bipartite {
  NetworkModel model;
  std::vector<std::vector<std::int64_t>> castOf;  // movie -> actor ordinals
};
Bipartite randomBipartite(std::mt19937_64& rng, int actors, int movies, double density);

}  // namespace nw::test
