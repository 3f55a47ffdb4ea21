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

#include "vacsim/epi_engine.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

namespace vacsim::epi {
namespace {

CompartmentState Axpy(const CompartmentState& x, double a,
                      const CompartmentState& k) {
  return {x.susceptible + a * k.susceptible, x.exposed + a * k.exposed,
          x.infected + a * k.infected, x.recovered + a * k.recovered,
          x.dead + a * k.dead};
}

// Clamps negatives to zero and lets S absorb the difference so the total
// stays at N. Returns true if anything was clamped.
bool ClampToPopulation(CompartmentState& s, double population) {
  bool clamped = false;
  for (double* v : {&s.exposed, &s.infected, &s.recovered, &s.dead}) {
    if (*v < 0.0) {
      *v = 0.0;
      clamped = true;
    }
  }
  if (s.susceptible < 0.0 || clamped) {
    if (s.susceptible < 0.0) clamped = true;
    double rest = s.exposed + s.infected + s.recovered + s.dead;
    if (rest > population) {
      double scale = population / rest;
      s.exposed *= scale;
      s.infected *= scale;
      s.recovered *= scale;
      s.dead *= scale;
      rest = population;
    }
    s.susceptible = population - rest;
  }
  return clamped;
}

void ValidateState(const CompartmentState& s) {
  for (double v : {s.susceptible, s.exposed, s.infected, s.recovered, s.dead}) {
    RequireFinite(v, "compartment");
    if (v < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "compartments must be >= 0");
    }
  }
}

using ParamVec = std::array<double, 4>;  // log beta, sigma, gamma, mu

EpiParams FromLog(const ParamVec& x, double population) {
  return {std::exp(x[0]), std::exp(x[1]), std::exp(x[2]), std::exp(x[3]),
          population};
}

struct LogBounds {
  ParamVec lo;
  ParamVec hi;

  ParamVec Clamp(ParamVec x) const {
    for (int i = 0; i < 4; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
  }
};

class Objective {
 public:
  Objective(const ObservedSeries& observed, double population, double dt,
            int budget)
      : observed_(observed), population_(population), dt_(dt), budget_(budget) {}

  double operator()(const ParamVec& x) {
    ++evaluations_;
    return SeriesSsr(observed_, FromLog(x, population_), dt_);
  }
  bool Exhausted() const { return evaluations_ >= budget_; }
  int evaluations() const { return evaluations_; }

 private:
  const ObservedSeries& observed_;
  double population_;
  double dt_;
  int budget_;
  int evaluations_ = 0;
};

struct Point {
  ParamVec x;
  double f;
};

// Nelder-Mead on the box-clamped log parameters. Never returns a point worse
// than `start`.
Point NelderMead(Objective& objective, const LogBounds& bounds, Point start,
                 double initial_step, double tolerance) {
  constexpr int kDim = 4;
  std::array<Point, kDim + 1> simplex;
  simplex[0] = start;
  for (int i = 0; i < kDim; ++i) {
    ParamVec x = start.x;
    double span = bounds.hi[i] - bounds.lo[i];
    x[i] += initial_step * span;
    if (x[i] > bounds.hi[i]) x[i] = start.x[i] - initial_step * span;
    x = bounds.Clamp(x);
    simplex[i + 1] = {x, objective(x)};
  }
  auto eval = [&](const ParamVec& x) {
    ParamVec c = bounds.Clamp(x);
    return Point{c, objective(c)};
  };
  while (!objective.Exhausted()) {
    std::sort(simplex.begin(), simplex.end(),
              [](const Point& a, const Point& b) { return a.f < b.f; });
    double size = 0.0;
    for (int i = 1; i <= kDim; ++i) {
      for (int d = 0; d < kDim; ++d) {
        size = std::max(size, std::abs(simplex[i].x[d] - simplex[0].x[d]));
      }
    }
    double spread = simplex[kDim].f - simplex[0].f;
    if (size < tolerance ||
        spread <= tolerance * tolerance * (1.0 + std::abs(simplex[0].f))) {
      break;
    }
    ParamVec centroid{};
    for (int i = 0; i < kDim; ++i) {
      for (int d = 0; d < kDim; ++d) centroid[d] += simplex[i].x[d] / kDim;
    }
    auto along = [&](double t) {
      ParamVec x;
      for (int d = 0; d < kDim; ++d) {
        x[d] = centroid[d] + t * (simplex[kDim].x[d] - centroid[d]);
      }
      return x;
    };
    Point reflected = eval(along(-1.0));
    if (reflected.f < simplex[0].f) {
      Point expanded = eval(along(-2.0));
      simplex[kDim] = expanded.f < reflected.f ? expanded : reflected;
    } else if (reflected.f < simplex[kDim - 1].f) {
      simplex[kDim] = reflected;
    } else {
      bool outside = reflected.f < simplex[kDim].f;
      Point contracted = eval(along(outside ? -0.5 : 0.5));
      if (contracted.f < std::min(reflected.f, simplex[kDim].f)) {
        simplex[kDim] = contracted;
      } else {
        for (int i = 1; i <= kDim; ++i) {
          ParamVec x;
          for (int d = 0; d < kDim; ++d) {
            x[d] = simplex[0].x[d] + 0.5 * (simplex[i].x[d] - simplex[0].x[d]);
          }
          simplex[i] = eval(x);
        }
      }
    }
  }
  Point best = *std::min_element(
      simplex.begin(), simplex.end(),
      [](const Point& a, const Point& b) { return a.f < b.f; });
  return best.f <= start.f ? best : start;
}

}  // namespace

void EpiParams::Validate() const {
  for (double v : {transmission_rate_beta, incubation_rate_sigma,
                   recovery_rate_gamma, fatality_rate_mu, population_n}) {
    RequireFinite(v, "epidemic parameter");
  }
  if (transmission_rate_beta < 0 || incubation_rate_sigma < 0 ||
      recovery_rate_gamma < 0 || fatality_rate_mu < 0) {
    throw Error(ErrorCode::kInvalidArgument, "rates must be >= 0");
  }
  if (population_n <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "population must be > 0");
  }
}

void ObservedSeries::Validate() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::string where = region + " row " + std::to_string(i + 1);
    for (double v : {r.confirmed, r.recovered, r.deaths}) {
      if (!std::isfinite(v) || v < 0) {
        throw Error(ErrorCode::kSchema, "counts must be finite and >= 0", where);
      }
    }
    if (r.recovered + r.deaths > r.confirmed) {
      throw Error(ErrorCode::kSchema,
                  "recovered + deaths exceeds confirmed", where);
    }
    if (i == 0) continue;
    const auto& p = rows[i - 1];
    if (!(p.date < r.date)) {
      throw Error(ErrorCode::kSchema, "dates must be strictly increasing", where);
    }
    if (r.confirmed < p.confirmed || r.recovered < p.recovered ||
        r.deaths < p.deaths) {
      throw Error(ErrorCode::kSchema, "cumulative counts decreased", where);
    }
  }
}

CompartmentState SeirdDerivative(const CompartmentState& s, const EpiParams& p) {
  double infection = p.transmission_rate_beta * s.susceptible * s.infected /
                     p.population_n;
  double onset = p.incubation_rate_sigma * s.exposed;
  double recovery = p.recovery_rate_gamma * s.infected;
  double death = p.fatality_rate_mu * s.infected;
  return {-infection, infection - onset, onset - recovery - death, recovery,
          death};
}

Trajectory Integrate(const CompartmentState& initial, const EpiParams& params,
                     int horizon_days, double dt, Date start_date) {
  params.Validate();
  ValidateState(initial);
  RequireFinite(dt, "dt");
  if (horizon_days <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "horizon must be > 0");
  }
  if (!(dt > 0.0 && dt <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dt must lie in (0, 1]");
  }
  const int substeps = static_cast<int>(std::ceil(1.0 / dt - 1e-9));
  const double h = 1.0 / substeps;
  const double population = params.population_n;

  Trajectory traj;
  traj.start_date = start_date;
  traj.states.reserve(horizon_days + 1);
  CompartmentState s = initial;
  traj.states.push_back(s);
  for (int day = 0; day < horizon_days; ++day) {
    for (int k = 0; k < substeps; ++k) {
      CompartmentState k1 = SeirdDerivative(s, params);
      CompartmentState k2 = SeirdDerivative(Axpy(s, h / 2, k1), params);
      CompartmentState k3 = SeirdDerivative(Axpy(s, h / 2, k2), params);
      CompartmentState k4 = SeirdDerivative(Axpy(s, h, k3), params);
      s = {s.susceptible + h / 6 * (k1.susceptible + 2 * k2.susceptible +
                                    2 * k3.susceptible + k4.susceptible),
           s.exposed + h / 6 * (k1.exposed + 2 * k2.exposed + 2 * k3.exposed +
                                k4.exposed),
           s.infected + h / 6 * (k1.infected + 2 * k2.infected +
                                 2 * k3.infected + k4.infected),
           s.recovered + h / 6 * (k1.recovered + 2 * k2.recovered +
                                  2 * k3.recovered + k4.recovered),
           s.dead + h / 6 * (k1.dead + 2 * k2.dead + 2 * k3.dead + k4.dead)};
      if (ClampToPopulation(s, std::max(population, initial.Total()))) {
        ++traj.clamp_events;
      }
    }
    traj.states.push_back(s);
  }
  return traj;
}

CompartmentState InitialStateFromObservation(const ObservationRow& row,
                                             double population) {
  double active = std::max(0.0, row.confirmed - row.recovered - row.deaths);
  CompartmentState s;
  s.infected = active;
  s.exposed = active;
  s.recovered = row.recovered;
  s.dead = row.deaths;
  s.susceptible = population - s.EverInfected();
  if (s.susceptible < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "observed cases exceed population");
  }
  return s;
}

double SeriesSsr(const ObservedSeries& observed, const EpiParams& params,
                 double dt) {
  const auto& rows = observed.rows;
  int horizon = rows.back().date - rows.front().date;
  CompartmentState initial =
      InitialStateFromObservation(rows.front(), params.population_n);
  Trajectory traj = Integrate(initial, params, std::max(horizon, 1), dt);
  double ssr = 0.0;
  for (const auto& row : rows) {
    const auto& s = traj.states[row.date - rows.front().date];
    double confirmed = s.infected + s.recovered + s.dead;
    ssr += (confirmed - row.confirmed) * (confirmed - row.confirmed) +
           (s.recovered - row.recovered) * (s.recovered - row.recovered) +
           (s.dead - row.deaths) * (s.dead - row.deaths);
  }
  return ssr;
}

FitResult FitParams(const ObservedSeries& observed, double population,
                    const FitOptions& options, std::uint64_t seed) {
  observed.Validate();
  if (observed.rows.size() < kMinFitRows) {
    throw Error(ErrorCode::kInvalidArgument,
                "need at least " + std::to_string(kMinFitRows) +
                    " observations to fit " + observed.region);
  }
  if (!(population > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "population must be > 0");
  }
  double peak = 0.0;
  for (const auto& r : observed.rows) peak = std::max(peak, r.confirmed);
  if (peak <= 0.0) {
    throw Error(ErrorCode::kDegenerate,
                "series for " + observed.region + " has no cases to fit");
  }
  const auto& b = options.bounds;
  LogBounds bounds;
  const Interval* intervals[4] = {&b.beta, &b.sigma, &b.gamma, &b.mu};
  for (int i = 0; i < 4; ++i) {
    if (!(intervals[i]->lo > 0 && intervals[i]->hi > intervals[i]->lo)) {
      throw Error(ErrorCode::kInvalidArgument, "degenerate parameter bounds");
    }
    bounds.lo[i] = std::log(intervals[i]->lo);
    bounds.hi[i] = std::log(intervals[i]->hi);
  }
  if (options.grid_points < 2) {
    throw Error(ErrorCode::kInvalidArgument, "grid needs >= 2 points per axis");
  }

  Objective objective(observed, population, options.dt,
                      options.max_evaluations +
                          static_cast<int>(std::pow(options.grid_points, 4)));
  const int g = options.grid_points;
  Point best{{}, std::numeric_limits<double>::infinity()};
  for (int i0 = 0; i0 < g; ++i0)
    for (int i1 = 0; i1 < g; ++i1)
      for (int i2 = 0; i2 < g; ++i2)
        for (int i3 = 0; i3 < g; ++i3) {
          int idx[4] = {i0, i1, i2, i3};
          ParamVec x;
          for (int d = 0; d < 4; ++d) {
            x[d] = bounds.lo[d] + (bounds.hi[d] - bounds.lo[d]) * idx[d] / (g - 1);
          }
          double f = objective(x);
          if (f < best.f) best = {x, f};
        }
  const double grid_ssr = best.f;

  best = NelderMead(objective, bounds, best, 0.5 / (g - 1), options.tolerance);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, 1.0);
  for (int r = 0; r < options.restarts && !objective.Exhausted(); ++r) {
    Point start = best;
    for (int d = 0; d < 4; ++d) {
      start.x[d] += 0.05 * (bounds.hi[d] - bounds.lo[d]) * jitter(rng);
    }
    start.x = bounds.Clamp(start.x);
    start.f = objective(start.x);
    Point candidate = NelderMead(objective, bounds, start, 0.05, options.tolerance);
    if (candidate.f < best.f) best = candidate;
    // A restart from the incumbent polishes without perturbation.
    best = NelderMead(objective, bounds, best, 0.01, options.tolerance);
  }

  double rmse =
      std::sqrt(best.f / (3.0 * static_cast<double>(observed.rows.size()))) / peak;
  if (!std::isfinite(best.f) || rmse > options.rmse_ceiling) {
    throw Error(ErrorCode::kNonConvergence,
                "fit for " + observed.region + " stalled with normalized RMSE " +
                    std::to_string(rmse));
  }
  return {FromLog(best.x, population), best.f, grid_ssr, objective.evaluations()};
}

DerivedRates DeriveRates(const Trajectory& trajectory) {
  if (trajectory.states.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty trajectory");
  }
  const CompartmentState& last = trajectory.states.back();
  DerivedRates out;
  out.total_predicted_cases = last.EverInfected();
  out.susceptible = last.susceptible;
  if (out.total_predicted_cases <= 0.0) {
    out.degenerate = true;
    out.total_predicted_cases = 0.0;
    out.susceptible = last.Total();
    return out;
  }
  out.death_rate = 100.0 * last.dead / out.total_predicted_cases;
  out.recovery_rate = 100.0 * last.recovered / out.total_predicted_cases;
  return out;
}

CompartmentState ApplyVaccine(const CompartmentState& state, double doses,
                              double efficacy) {
  RequireFinite(doses, "doses");
  RequireFinite(efficacy, "efficacy");
  if (doses < 0) throw Error(ErrorCode::kInvalidArgument, "doses must be >= 0");
  if (efficacy < 0 || efficacy > 1) {
    throw Error(ErrorCode::kInvalidArgument, "efficacy must lie in [0, 1]");
  }
  double moved = std::min(doses * efficacy, state.susceptible);
  CompartmentState out = state;
  out.susceptible -= moved;
  out.recovered += moved;
  return out;
}

}  // namespace vacsim::epi
