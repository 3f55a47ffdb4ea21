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

#include "vacsim/bn_eval.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <random>

#include "vacsim/csv.h"

namespace vacsim::bn {

int DiscreteDataset::IndexOf(std::string_view name) const {
  for (int v = 0; v < num_vars(); ++v) {
    if (names[v] == name) return v;
  }
  throw Error(ErrorCode::kNotFound, "unknown variable '" + std::string(name) + "'");
}

void DiscreteDataset::Validate() const {
  if (names.empty() || names.size() != bins.size()) {
    throw Error(ErrorCode::kInvalidArgument, "dataset needs one bin count per variable");
  }
  if (num_vars() > kMaxNodes) {
    throw Error(ErrorCode::kInvalidArgument, "too many variables");
  }
  for (int b : bins) {
    if (b < 2) throw Error(ErrorCode::kInvalidArgument, "every variable needs >= 2 bins");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != names.size()) {
      throw Error(ErrorCode::kInvalidArgument, "ragged dataset row " + std::to_string(i));
    }
    for (int v = 0; v < num_vars(); ++v) {
      if (rows[i][v] < 0 || rows[i][v] >= bins[v]) {
        throw Error(ErrorCode::kInvalidArgument,
                    "category out of range in row " + std::to_string(i) + ", " + names[v]);
      }
    }
  }
}

std::vector<double> QuantileCuts(std::vector<double> values, int bins) {
  if (bins < 2) throw Error(ErrorCode::kInvalidArgument, "bins must be >= 2");
  if (values.empty()) throw Error(ErrorCode::kDegenerate, "empty column");
  for (double v : values) RequireFinite(v, "audit value");
  std::sort(values.begin(), values.end());
  if (values.front() == values.back()) {
    throw Error(ErrorCode::kDegenerate, "constant column cannot be discretized");
  }
  const std::size_t n = values.size();
  std::vector<double> cuts;
  double floor = values.front();
  for (int k = 1; k < bins; ++k) {
    double cut = values[k * n / bins];
    if (cut <= floor) {
      // Tied quantile: move to the next distinct value so no bin is empty
      // by construction.
      auto next = std::upper_bound(values.begin(), values.end(), floor);
      if (next == values.end()) {
        throw Error(ErrorCode::kDegenerate, "fewer distinct values than bins");
      }
      cut = *next;
    }
    cuts.push_back(cut);
    floor = cut;
  }
  return cuts;
}

DiscreteDataset Discretize(const std::vector<std::string>& names,
                           const std::vector<std::vector<double>>& columns,
                           const std::vector<int>& bins) {
  if (names.size() != columns.size() || names.size() != bins.size() || names.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "names, columns and bins must align");
  }
  const std::size_t n = columns.front().size();
  DiscreteDataset data{names, bins, std::vector<std::vector<int>>(n, std::vector<int>(names.size()))};
  for (std::size_t v = 0; v < columns.size(); ++v) {
    if (columns[v].size() != n) throw Error(ErrorCode::kInvalidArgument, "ragged columns");
    std::vector<double> cuts;
    try {
      cuts = QuantileCuts(columns[v], bins[v]);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (" + names[v] + ")");
    }
    for (std::size_t i = 0; i < n; ++i) {
      data.rows[i][v] = static_cast<int>(
          std::upper_bound(cuts.begin(), cuts.end(), columns[v][i]) - cuts.begin());
    }
  }
  data.Validate();
  return data;
}

Dag::Dag(int n) : n_(n), parents_(n, 0) {
  if (n < 0 || n > kMaxNodes) throw Error(ErrorCode::kInvalidArgument, "bad node count");
}

bool Dag::HasEdge(int from, int to) const { return (parents_[to] >> from) & 1u; }

std::vector<Edge> Dag::Edges() const {
  std::vector<Edge> out;
  for (int from = 0; from < n_; ++from) {
    for (int to = 0; to < n_; ++to) {
      if (HasEdge(from, to)) out.emplace_back(from, to);
    }
  }
  return out;
}

std::size_t Dag::EdgeCount() const {
  std::size_t count = 0;
  for (auto p : parents_) count += std::popcount(p);
  return count;
}

bool Dag::Reaches(int from, int to) const {
  // Walk parent links backwards from `to`.
  std::uint32_t seen = 0, frontier = 1u << to;
  while (frontier) {
    if (frontier & (1u << from)) return true;
    seen |= frontier;
    std::uint32_t next = 0;
    for (int v = 0; v < n_; ++v) {
      if (frontier & (1u << v)) next |= parents_[v];
    }
    frontier = next & ~seen;
  }
  return false;
}

bool Dag::CanAdd(int from, int to) const {
  return from != to && !HasEdge(from, to) && !Reaches(to, from);
}

void Dag::Add(int from, int to) {
  if (!CanAdd(from, to)) {
    throw Error(ErrorCode::kInvalidArgument, "edge would create a cycle or duplicate");
  }
  parents_[to] |= 1u << from;
}

void Dag::Remove(int from, int to) {
  if (!HasEdge(from, to)) throw Error(ErrorCode::kInvalidArgument, "no such edge");
  parents_[to] &= ~(1u << from);
}

void Dag::Reverse(int from, int to) {
  Remove(from, to);
  if (!CanAdd(to, from)) {
    parents_[to] |= 1u << from;
    throw Error(ErrorCode::kInvalidArgument, "reversal would create a cycle");
  }
  parents_[from] |= 1u << to;
}

bool Dag::IsAcyclic() const {
  for (int v = 0; v < n_; ++v) {
    for (int p = 0; p < n_; ++p) {
      if (HasEdge(p, v) && p == v) return false;
    }
  }
  // Kahn's algorithm.
  std::vector<int> indegree(n_);
  for (int v = 0; v < n_; ++v) indegree[v] = std::popcount(parents_[v]);
  std::vector<int> ready;
  for (int v = 0; v < n_; ++v) {
    if (indegree[v] == 0) ready.push_back(v);
  }
  int visited = 0;
  while (!ready.empty()) {
    int u = ready.back();
    ready.pop_back();
    ++visited;
    for (int v = 0; v < n_; ++v) {
      if (HasEdge(u, v) && --indegree[v] == 0) ready.push_back(v);
    }
  }
  return visited == n_;
}

Blacklist Blacklist::NoParentsOf(const DiscreteDataset& data, std::string_view target) {
  int t = data.IndexOf(target);
  Blacklist b;
  for (int v = 0; v < data.num_vars(); ++v) {
    if (v != t) b.edges.insert({v, t});
  }
  return b;
}

Blacklist Blacklist::FromNames(const DiscreteDataset& data,
                               const std::vector<std::pair<std::string, std::string>>& pairs) {
  Blacklist b;
  for (const auto& [from, to] : pairs) b.edges.insert({data.IndexOf(from), data.IndexOf(to)});
  return b;
}

std::string ToString(Criterion c) { return c == Criterion::kAic ? "aic" : "bic"; }

Criterion ParseCriterion(const std::string& text) {
  if (text == "aic" || text == "AIC") return Criterion::kAic;
  if (text == "bic" || text == "BIC") return Criterion::kBic;
  throw Error(ErrorCode::kInvalidArgument, "criterion must be aic or bic");
}

double FamilyScore(const DiscreteDataset& data, int v, std::uint32_t parents,
                   Criterion criterion) {
  std::vector<int> ps;
  long long q = 1;
  for (int p = 0; p < data.num_vars(); ++p) {
    if (parents & (1u << p)) {
      ps.push_back(p);
      q *= data.bins[p];
    }
  }
  if (q > 10'000'000) throw Error(ErrorCode::kInvalidArgument, "parent set too large");
  const int r = data.bins[v];
  std::vector<double> counts(static_cast<std::size_t>(q * r), 0.0);
  for (const auto& row : data.rows) {
    long long j = 0;
    for (int p : ps) j = j * data.bins[p] + row[p];
    counts[j * r + row[v]] += 1.0;
  }
  double ll = 0.0;
  for (long long j = 0; j < q; ++j) {
    double nj = 0.0;
    for (int k = 0; k < r; ++k) nj += counts[j * r + k];
    if (nj == 0) continue;
    for (int k = 0; k < r; ++k) {
      double njk = counts[j * r + k];
      if (njk > 0) ll += njk * std::log(njk / nj);
    }
  }
  const double n = static_cast<double>(data.rows.size());
  const double penalty = criterion == Criterion::kAic ? 1.0 : std::log(std::max(n, 1.0)) / 2.0;
  return ll - penalty * static_cast<double>((r - 1) * q);
}

double Score(const Dag& dag, const DiscreteDataset& data, Criterion criterion) {
  if (dag.size() != data.num_vars()) {
    throw Error(ErrorCode::kInvalidArgument, "graph and data have different variables");
  }
  double total = 0.0;
  for (int v = 0; v < dag.size(); ++v) total += FamilyScore(data, v, dag.Parents(v), criterion);
  return total;
}

HillClimbResult HillClimb(const DiscreteDataset& data, const Blacklist& blacklist,
                          Criterion criterion, std::uint64_t /*seed*/, int max_iterations) {
  data.Validate();
  const int n = data.num_vars();
  std::map<std::pair<int, std::uint32_t>, double> cache;
  auto family = [&](int v, std::uint32_t parents) {
    auto [it, added] = cache.try_emplace({v, parents}, 0.0);
    if (added) it->second = FamilyScore(data, v, parents, criterion);
    return it->second;
  };

  HillClimbResult result;
  result.dag = Dag(n);
  std::vector<double> current(n);
  for (int v = 0; v < n; ++v) current[v] = family(v, 0);
  auto total = [&] {
    double s = 0.0;
    for (double f : current) s += f;
    return s;
  };
  result.empty_score = total();
  result.trace.push_back(result.empty_score);

  Dag& dag = result.dag;
  while (true) {
    const double score = total();
    const double tol = 1e-9 * std::max(1.0, std::abs(score));
    double best = tol;
    MoveKind best_kind{};
    int best_from = -1, best_to = -1;
    auto consider = [&](MoveKind kind, int from, int to, double delta) {
      if (delta > best + (best_from < 0 ? 0.0 : tol)) {
        best = delta;
        best_kind = kind;
        best_from = from;
        best_to = to;
      }
    };
    for (int from = 0; from < n; ++from) {
      for (int to = 0; to < n; ++to) {
        if (from == to || blacklist.Forbids(from, to) || !dag.CanAdd(from, to)) continue;
        if (dag.HasEdge(to, from)) continue;
        consider(MoveKind::kAdd, from, to,
                 family(to, dag.Parents(to) | (1u << from)) - current[to]);
      }
    }
    for (int from = 0; from < n; ++from) {
      for (int to = 0; to < n; ++to) {
        if (!dag.HasEdge(from, to)) continue;
        consider(MoveKind::kDelete, from, to,
                 family(to, dag.Parents(to) & ~(1u << from)) - current[to]);
      }
    }
    for (int from = 0; from < n; ++from) {
      for (int to = 0; to < n; ++to) {
        if (!dag.HasEdge(from, to) || blacklist.Forbids(to, from)) continue;
        Dag trial = dag;
        trial.Remove(from, to);
        if (!trial.CanAdd(to, from)) continue;
        double delta = family(to, dag.Parents(to) & ~(1u << from)) - current[to] +
                       family(from, dag.Parents(from) | (1u << to)) - current[from];
        consider(MoveKind::kReverse, from, to, delta);
      }
    }
    if (best_from < 0) break;
    if (result.iterations >= max_iterations) {
      result.hit_iteration_cap = true;
      break;
    }
    switch (best_kind) {
      case MoveKind::kAdd:
        dag.Add(best_from, best_to);
        break;
      case MoveKind::kDelete:
        dag.Remove(best_from, best_to);
        break;
      case MoveKind::kReverse:
        dag.Reverse(best_from, best_to);
        current[best_from] = family(best_from, dag.Parents(best_from));
        break;
    }
    current[best_to] = family(best_to, dag.Parents(best_to));
    ++result.iterations;
    result.trace.push_back(total());
  }
  result.score = total();
  return result;
}

double EnsembleStructure::Frequency(std::string_view parent, std::string_view child) const {
  auto index = [&](std::string_view name) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
      throw Error(ErrorCode::kNotFound, "unknown node '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - names.begin());
  };
  return frequency[index(parent)][index(child)];
}

EnsembleStructure BootstrapEnsemble(const DiscreteDataset& data, const Blacklist& blacklist,
                                    Criterion criterion, int n_bootstraps, std::uint64_t seed,
                                    int max_iterations) {
  if (n_bootstraps < 1) throw Error(ErrorCode::kInvalidArgument, "need >= 1 bootstrap");
  data.Validate();
  if (data.rows.empty()) throw Error(ErrorCode::kDegenerate, "empty dataset");
  const int n = data.num_vars();
  EnsembleStructure out;
  out.names = data.names;
  out.bootstraps = n_bootstraps;
  std::vector<std::vector<int>> counts(n, std::vector<int>(n, 0));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, data.rows.size() - 1);
  DiscreteDataset sample{data.names, data.bins, {}};
  sample.rows.resize(data.rows.size());
  for (int b = 0; b < n_bootstraps; ++b) {
    for (auto& row : sample.rows) row = data.rows[pick(rng)];
    auto result = HillClimb(sample, blacklist, criterion, seed, max_iterations);
    if (result.hit_iteration_cap) ++out.capped_runs;
    for (auto [from, to] : result.dag.Edges()) ++counts[from][to];
  }
  out.frequency.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out.frequency[i][j] = static_cast<double>(counts[i][j]) / n_bootstraps;
  }
  return out;
}

CausalVerdict CheckCausalClaim(const EnsembleStructure& ensemble, std::string_view parent,
                               std::string_view child, double threshold) {
  double f = ensemble.Frequency(parent, child);
  return {f >= threshold, f};
}

std::vector<Dag> EnumerateDags(int n, const Blacklist& blacklist) {
  if (n < 1 || n > 5) throw Error(ErrorCode::kInvalidArgument, "enumeration supports 1..5 nodes");
  std::vector<Edge> candidates;
  for (int from = 0; from < n; ++from) {
    for (int to = 0; to < n; ++to) {
      if (from != to && !blacklist.Forbids(from, to)) candidates.emplace_back(from, to);
    }
  }
  std::vector<Dag> out;
  const std::uint64_t subsets = 1ULL << candidates.size();
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    Dag dag(n);
    bool ok = true;
    for (std::size_t e = 0; e < candidates.size() && ok; ++e) {
      if (!(mask >> e & 1)) continue;
      auto [from, to] = candidates[e];
      if (dag.HasEdge(to, from) || !dag.CanAdd(from, to)) {
        ok = false;
      } else {
        dag.Add(from, to);
      }
    }
    // Insertion order can reject a set whose members are jointly acyclic
    // only if a cycle exists, so rejection is exact.
    if (ok) out.push_back(dag);
  }
  return out;
}

std::string FormatEdgeCsv(const EnsembleStructure& ensemble) {
  std::string out = csv::JoinRow({"parent", "child", "frequency"});
  const auto n = ensemble.names.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      out += csv::JoinRow({ensemble.names[i], ensemble.names[j],
                           csv::FormatDouble(ensemble.frequency[i][j])});
    }
  }
  return out;
}

const std::vector<std::string>& AuditVariables() {
  static const std::vector<std::string> names = {"death", "recovery", "infected",
                                                 "susceptible", "vaccine_percent"};
  return names;
}

std::vector<std::vector<double>> ReadAuditColumns(std::string_view text, std::string source,
                                                  const std::vector<std::string>& names) {
  csv::Table t = csv::ReadString(text, std::move(source));
  std::vector<int> index;
  for (const auto& name : names) index.push_back(t.Column(name));
  std::vector<std::vector<double>> columns(names.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t v = 0; v < names.size(); ++v) {
      columns[v].push_back(csv::ParseDouble(t, r, index[v]));
    }
  }
  return columns;
}

}  // namespace vacsim::bn
