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

#ifndef VACSIM_EPI_ENGINE_H_
#define VACSIM_EPI_ENGINE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "vacsim/common.h"

// Deterministic SEIRD dynamics for a single region:
//
//   dS = -beta*S*I/N
//   dE =  beta*S*I/N - sigma*E
//   dI =  sigma*E - (gamma + mu)*I
//   dR =  gamma*I
//   dD =  mu*I
//
// Everything here is a pure function of its arguments.
namespace vacsim::epi {

struct CompartmentState {
  double susceptible = 0.0;
  double exposed = 0.0;
  double infected = 0.0;
  double recovered = 0.0;
  double dead = 0.0;

  double Total() const {
    return susceptible + exposed + infected + recovered + dead;
  }
  // E + I + R + D.
  double EverInfected() const { return exposed + infected + recovered + dead; }

  bool operator==(const CompartmentState&) const = default;
};

struct EpiParams {
  double transmission_rate_beta = 0.0;
  double incubation_rate_sigma = 0.0;
  double recovery_rate_gamma = 0.0;
  double fatality_rate_mu = 0.0;
  double population_n = 1.0;

  void Validate() const;
  bool operator==(const EpiParams&) const = default;
};

struct Trajectory {
  Date start_date;
  double step_days = 1.0;
  std::vector<CompartmentState> states;
  // Number of times a negative compartment had to be clamped to zero.
  int clamp_events = 0;
};

struct ObservationRow {
  Date date;
  double confirmed = 0.0;
  double recovered = 0.0;
  double deaths = 0.0;
};

struct ObservedSeries {
  std::string region;
  std::vector<ObservationRow> rows;

  // Dates strictly increasing, cumulative columns non-decreasing.
  void Validate() const;
};

CompartmentState SeirdDerivative(const CompartmentState& state,
                                 const EpiParams& params);

inline constexpr double kDefaultDt = 0.25;

// Classical RK4 with fixed step `dt` (rounded down so that a whole number of
// sub-steps makes up one day). One state is stored per day, so the result
// holds horizon_days + 1 states.
Trajectory Integrate(const CompartmentState& initial, const EpiParams& params,
                     int horizon_days, double dt = kDefaultDt,
                     Date start_date = {});

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct ParamBounds {
  Interval beta{0.02, 1.5};
  Interval sigma{0.05, 1.0};
  Interval gamma{0.01, 0.5};
  Interval mu{1e-4, 0.05};
};

struct FitOptions {
  ParamBounds bounds;
  int grid_points = 6;
  int max_evaluations = 6000;
  // Relative simplex size at which a local search stops.
  double tolerance = 1e-9;
  int restarts = 3;
  // Normalized RMSE (root mean squared residual / peak confirmed) above which
  // a stalled fit is reported as non-converged.
  double rmse_ceiling = 0.2;
  double dt = kDefaultDt;
};

struct FitResult {
  EpiParams params;
  double ssr = 0.0;
  double best_grid_ssr = 0.0;
  int evaluations = 0;
};

// Initial compartments implied by one observation row: I = active cases,
// R = recovered, D = deaths, E = I, S = remainder.
CompartmentState InitialStateFromObservation(const ObservationRow& row,
                                             double population);

// Sum of squared residuals between observed cumulative confirmed/recovered/
// deaths and the model's I+R+D, R and D curves.
double SeriesSsr(const ObservedSeries& observed, const EpiParams& params,
                 double dt = kDefaultDt);

// Needs at least kMinFitRows observations.
inline constexpr std::size_t kMinFitRows = 14;

// Log-grid search over the bounds followed by Nelder-Mead refinement in
// log-parameter space. Seeded restarts perturb the incumbent.
FitResult FitParams(const ObservedSeries& observed, double population,
                    const FitOptions& options, std::uint64_t seed);

struct DerivedRates {
  double death_rate = 0.0;       // percent
  double recovery_rate = 0.0;    // percent
  double total_predicted_cases = 0.0;
  double susceptible = 0.0;
  bool degenerate = false;       // no predicted cases; rates forced to 0
};

DerivedRates DeriveRates(const Trajectory& trajectory);

// Moves min(doses * efficacy, S) persons from S to R.
CompartmentState ApplyVaccine(const CompartmentState& state, double doses,
                              double efficacy);

}  // namespace vacsim::epi

#endif  // VACSIM_EPI_ENGINE_H_
