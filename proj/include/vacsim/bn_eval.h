// Copyright 2026 The vacsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VACSIM_BN_EVAL_H_
#define VACSIM_BN_EVAL_H_

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "vacsim/common.h"

// Bayesian-network structure audit over discretized simulation logs:
// multinomial scores, greedy hill climbing, bootstrap edge frequencies.
namespace vacsim::bn {

inline constexpr int kMaxNodes = 16;

struct DiscreteDataset {
  std::vector<std::string> names;
  std::vector<int> bins;
  // rows[i][v] is the category of variable v in row i.
  std::vector<std::vector<int>> rows;

  int num_vars() const { return static_cast<int>(names.size()); }
  int IndexOf(std::string_view name) const;
  void Validate() const;
};

// Quantile binning with left-closed intervals. `columns[v]` holds the raw
// values of variable v.
DiscreteDataset Discretize(const std::vector<std::string>& names,
                           const std::vector<std::vector<double>>& columns,
                           const std::vector<int>& bins);
// Cut points of one column: value x falls in bin k when cuts[k-1] <= x < cuts[k].
std::vector<double> QuantileCuts(std::vector<double> values, int bins);

using Edge = std::pair<int, int>;  // (parent, child)

class Dag {
 public:
  Dag() = default;
  explicit Dag(int n);

  int size() const { return n_; }
  bool HasEdge(int from, int to) const;
  std::uint32_t Parents(int v) const { return parents_[v]; }
  std::vector<Edge> Edges() const;
  std::size_t EdgeCount() const;

  // Would adding from->to keep the graph acyclic?
  bool CanAdd(int from, int to) const;
  // Mutators check acyclicity and throw kInvalidArgument on violation.
  void Add(int from, int to);
  void Remove(int from, int to);
  void Reverse(int from, int to);
  bool IsAcyclic() const;

  bool operator==(const Dag&) const = default;

 private:
  bool Reaches(int from, int to) const;

  int n_ = 0;
  std::vector<std::uint32_t> parents_;
};

struct Blacklist {
  std::set<Edge> edges;

  bool Forbids(int from, int to) const { return edges.count({from, to}) > 0; }
  // Forbids every X -> target for X != target.
  static Blacklist NoParentsOf(const DiscreteDataset& data, std::string_view target);
  static Blacklist FromNames(const DiscreteDataset& data,
                             const std::vector<std::pair<std::string, std::string>>& pairs);
};

enum class Criterion { kAic, kBic };
std::string ToString(Criterion c);
Criterion ParseCriterion(const std::string& text);

// Log-likelihood of v given its parents minus penalty * free parameters.
double FamilyScore(const DiscreteDataset& data, int v, std::uint32_t parents,
                   Criterion criterion);
double Score(const Dag& dag, const DiscreteDataset& data, Criterion criterion);

enum class MoveKind { kAdd = 0, kDelete = 1, kReverse = 2 };

struct HillClimbResult {
  Dag dag;
  double score = 0.0;
  double empty_score = 0.0;
  // Score after each accepted move, starting with the empty graph.
  std::vector<double> trace;
  int iterations = 0;
  bool hit_iteration_cap = false;
};

// Greedy search from the empty graph; ties among equal-gain moves resolve
// lexicographically on (operation, source, target). Deterministic, so the
// seed does not influence the result.
HillClimbResult HillClimb(const DiscreteDataset& data, const Blacklist& blacklist,
                          Criterion criterion, std::uint64_t seed = 0,
                          int max_iterations = 1000);

struct EnsembleStructure {
  std::vector<std::string> names;
  int bootstraps = 0;
  // frequency[parent][child]
  std::vector<std::vector<double>> frequency;
  int capped_runs = 0;

  double Frequency(std::string_view parent, std::string_view child) const;
};

EnsembleStructure BootstrapEnsemble(const DiscreteDataset& data, const Blacklist& blacklist,
                                    Criterion criterion, int n_bootstraps,
                                    std::uint64_t seed, int max_iterations = 1000);

struct CausalVerdict {
  bool holds = false;
  double frequency = 0.0;
};

// True iff the parent->child frequency reaches the threshold (inclusive).
CausalVerdict CheckCausalClaim(const EnsembleStructure& ensemble, std::string_view parent,
                               std::string_view child, double threshold = 0.5);

// Every DAG over n <= 5 nodes that respects the blacklist.
std::vector<Dag> EnumerateDags(int n, const Blacklist& blacklist = {});

// CSV `parent,child,frequency` for every ordered pair.
std::string FormatEdgeCsv(const EnsembleStructure& ensemble);

// Reads columns `death,recovery,infected,susceptible,vaccine_percent` from a
// simulation log CSV; other columns (region id, dates) are ignored.
std::vector<std::vector<double>> ReadAuditColumns(std::string_view text, std::string source,
                                                  const std::vector<std::string>& names);
const std::vector<std::string>& AuditVariables();

}  // namespace vacsim::bn

#endif  // VACSIM_BN_EVAL_H_
