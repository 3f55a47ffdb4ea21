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

#ifndef VACSIM_TESTS_BN_DATA_H_
#define VACSIM_TESTS_BN_DATA_H_

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "vacsim/bn_eval.h"

// Synthetic datasets with known dependency structure for the structure
// learning tests.
namespace vacsim::testing {

inline bn::DiscreteDataset IndependentData(int vars, int bins, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> cat(0, bins - 1);
  bn::DiscreteDataset d;
  for (int v = 0; v < vars; ++v) {
    d.names.push_back(std::string(1, char('A' + v)));
    d.bins.push_back(bins);
  }
  for (int i = 0; i < n; ++i) {
    std::vector<int> row;
    for (int v = 0; v < vars; ++v) row.push_back(cat(rng));
    d.rows.push_back(row);
  }
  return d;
}

// A -> B -> C over three categories; each child copies its parent with
// probability `copy`, otherwise draws uniformly.
inline bn::DiscreteDataset ChainData(int n, double copy, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> cat(0, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bn::DiscreteDataset d;
  d.names = {"A", "B", "C"};
  d.bins = {3, 3, 3};
  for (int i = 0; i < n; ++i) {
    int a = cat(rng);
    int b = u(rng) < copy ? a : cat(rng);
    int c = u(rng) < copy ? b : cat(rng);
    d.rows.push_back({a, b, c});
  }
  return d;
}

// Raw audit columns in AuditVariables() order: the vaccine share drives the
// susceptible count; deaths and recoveries follow infections.
inline std::vector<std::vector<double>> AuditColumns(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> share(0.0, 60.0);
  std::lognormal_distribution<double> infections(10.0, 0.8);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::vector<double>> cols(5);
  for (int i = 0; i < n; ++i) {
    const double vaccine = share(rng);
    const double infected = infections(rng);
    cols[0].push_back(0.015 * infected * (1 + 0.1 * noise(rng)));          // death
    cols[1].push_back(0.9 * infected * (1 + 0.1 * noise(rng)));            // recovery
    cols[2].push_back(infected);                                            // infected
    cols[3].push_back(1e6 - 1.2e4 * vaccine + 1.5e5 * noise(rng));         // susceptible
    cols[4].push_back(vaccine);                                             // vaccine_percent
  }
  return cols;
}

inline bn::DiscreteDataset AuditData(int n, std::uint64_t seed) {
  const auto& names = bn::AuditVariables();
  return bn::Discretize(names, AuditColumns(n, seed), std::vector<int>(names.size(), 3));
}

// Draws a dataset from a random DAG over 1..3 variables with 2..3 bins. A
// child copies one of its parents, or with `parity` set, the sum of all of
// them modulo its bin count; parity children are pairwise independent of
// each parent, which hides them from single-edge moves.
inline bn::DiscreteDataset RandomSmallDataset(std::mt19937_64& rng, bool parity) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int vars = std::uniform_int_distribution<int>(1, 3)(rng);
  const auto dags = bn::EnumerateDags(vars);
  const bn::Dag& truth = dags[std::uniform_int_distribution<std::size_t>(0, dags.size() - 1)(rng)];
  bn::DiscreteDataset d;
  for (int v = 0; v < vars; ++v) {
    d.names.push_back(std::string(1, char('A' + v)));
    d.bins.push_back(std::uniform_int_distribution<int>(2, 3)(rng));
  }
  const int n = std::uniform_int_distribution<int>(30, 400)(rng);
  const double strength = u(rng);
  // Topological order: repeatedly take nodes whose parents are placed.
  std::vector<int> order;
  std::vector<bool> placed(vars, false);
  while (static_cast<int>(order.size()) < vars) {
    for (int v = 0; v < vars; ++v) {
      if (placed[v]) continue;
      bool ready = true;
      for (int p = 0; p < vars; ++p) ready &= !((truth.Parents(v) >> p & 1u) && !placed[p]);
      if (ready) {
        order.push_back(v);
        placed[v] = true;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    std::vector<int> row(vars, 0);
    for (int v : order) {
      std::vector<int> parents;
      for (int p = 0; p < vars; ++p) {
        if (truth.Parents(v) >> p & 1u) parents.push_back(p);
      }
      if (!parents.empty() && u(rng) < strength) {
        int value = 0;
        if (parity) {
          for (int p : parents) value += row[p];
        } else {
          value = row[parents[std::uniform_int_distribution<std::size_t>(
              0, parents.size() - 1)(rng)]];
        }
        row[v] = value % d.bins[v];
      } else {
        row[v] = std::uniform_int_distribution<int>(0, d.bins[v] - 1)(rng);
      }
    }
    d.rows.push_back(row);
  }
  return d;
}

// True when no single add, delete or reverse move improves the score.
inline bool IsLocalOptimum(const bn::DiscreteDataset& d, const bn::Dag& dag,
                           bn::Criterion c) {
  const double score = bn::Score(dag, d, c);
  const double tol = 1e-9 * std::max(1.0, std::abs(score));
  const int n = d.num_vars();
  for (int from = 0; from < n; ++from) {
    for (int to = 0; to < n; ++to) {
      if (from == to) continue;
      bn::Dag g = dag;
      try {
        if (!g.HasEdge(from, to)) {
          if (g.HasEdge(to, from) || !g.CanAdd(from, to)) continue;
          g.Add(from, to);
          if (bn::Score(g, d, c) > score + tol) return false;
        } else {
          g.Remove(from, to);
          if (bn::Score(g, d, c) > score + tol) return false;
          g = dag;
          g.Reverse(from, to);
          if (bn::Score(g, d, c) > score + tol) return false;
        }
      } catch (const Error&) {
        // Reversal would close a cycle.
      }
    }
  }
  return true;
}

struct ExhaustiveReport {
  int runs = 0;
  // Hill climbing reached the enumerated optimum.
  int equal = 0;
  // Stopped below the optimum at a genuine local optimum.
  int local_optima = 0;
  // Stopped below the optimum with an improving move left: a search defect.
  int defects = 0;
  // Runs over one or two variables, where every local optimum is global.
  int small_runs = 0;
  int small_equal = 0;
};

// Compares hill climbing against the best of all DAGs under both criteria.
inline ExhaustiveReport ExhaustiveComparison(int datasets, std::uint64_t seed, bool parity) {
  std::mt19937_64 rng(seed);
  ExhaustiveReport report;
  for (int k = 0; k < datasets; ++k) {
    auto d = RandomSmallDataset(rng, parity);
    const auto dags = bn::EnumerateDags(d.num_vars());
    for (auto c : {bn::Criterion::kAic, bn::Criterion::kBic}) {
      double best = -INFINITY;
      for (const auto& g : dags) best = std::max(best, bn::Score(g, d, c));
      const auto climbed = bn::HillClimb(d, {}, c);
      const bool equal = climbed.score >= best - 1e-9 * std::max(1.0, std::abs(best));
      ++report.runs;
      if (d.num_vars() <= 2) {
        ++report.small_runs;
        report.small_equal += equal;
      }
      if (equal) {
        ++report.equal;
      } else if (IsLocalOptimum(d, climbed.dag, c)) {
        ++report.local_optima;
      } else {
        ++report.defects;
      }
    }
  }
  return report;
}

}  // namespace vacsim::testing

#endif  // VACSIM_TESTS_BN_DATA_H_
