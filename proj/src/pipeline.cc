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

#include "vacsim/pipeline.h"

#include <algorithm>
#include <set>

#include "vacsim/csv.h"

namespace vacsim::pipeline {
namespace {

using nlohmann::json;

template <typename T>
void Read(const json& obj, const char* key, T& field) {
  if (obj.contains(key)) field = obj.at(key).get<T>();
}

void ReadDate(const json& obj, const char* key, Date& field) {
  if (obj.contains(key)) field = Date::Parse(obj.at(key).get<std::string>());
}

std::string OptimizerName(nn::OptimizerKind kind) {
  return kind == nn::OptimizerKind::kAdam ? "adam" : "sgd";
}

nn::OptimizerKind ParseOptimizer(const std::string& text) {
  if (text == "adam") return nn::OptimizerKind::kAdam;
  if (text == "sgd") return nn::OptimizerKind::kSgd;
  throw Error(ErrorCode::kInvalidArgument, "unknown optimizer '" + text + "'");
}

void ReadOptimizer(const json& obj, nn::OptimizerKind& field) {
  if (obj.contains("optimizer")) field = ParseOptimizer(obj.at("optimizer").get<std::string>());
}

json IntervalJson(const epi::Interval& i) { return json::array({i.lo, i.hi}); }

void ReadInterval(const json& obj, const char* key, epi::Interval& field) {
  if (!obj.contains(key)) return;
  auto v = obj.at(key).get<std::vector<double>>();
  if (v.size() != 2) throw Error(ErrorCode::kSchema, std::string(key) + " bounds need 2 values");
  field = {v[0], v[1]};
}

// Runs one stage, labelling any failure with the stage name.
template <typename F>
auto Stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.WithStage(name);
  }
}

std::string JsonText(const json& doc) { return doc.dump(2) + "\n"; }

std::string SimulationCsv(const std::vector<SimulationRow>& rows) {
  std::string out = csv::JoinRow({"region", "date", "bucket_size", "death", "recovery",
                                  "infected", "susceptible", "vaccine_percent"});
  for (const auto& r : rows) {
    out += csv::JoinRow({r.region, r.date.ToString(), std::to_string(r.bucket_size),
                         csv::FormatDouble(r.death), csv::FormatDouble(r.recovery),
                         csv::FormatDouble(r.infected), csv::FormatDouble(r.susceptible),
                         csv::FormatDouble(r.vaccine_percent)});
  }
  return out;
}

std::string ConfigHash(const RunConfig& config) {
  json doc = ToJson(config);
  // Data identity is carried by the snapshot hash, not by where files live.
  doc.erase("series");
  doc.erase("statics");
  doc.erase("output_dir");
  return data::Sha256Hex(doc.dump());
}

}  // namespace

void RunConfig::Validate() const {
  if (train_end < train_start || test_end < test_start) {
    throw Error(ErrorCode::kInvalidArgument, "windows must be ordered start <= end");
  }
  if (distribution_date < test_start || test_end < distribution_date) {
    throw Error(ErrorCode::kInvalidArgument, "distribution date lies outside the test window");
  }
  if (log_passes < 1) throw Error(ErrorCode::kInvalidArgument, "log_passes must be >= 1");
  if (buckets.empty()) throw Error(ErrorCode::kInvalidArgument, "bucket sweep is empty");
  for (int b : buckets) {
    if (b < 2) throw Error(ErrorCode::kInvalidArgument, "bucket sizes must be >= 2");
  }
  if (!(doses >= 0) || !(efficacy >= 0 && efficacy <= 1) || horizon_days < 1) {
    throw Error(ErrorCode::kInvalidArgument, "invalid evaluation settings");
  }
  env.Validate();
  dqn.Validate();
  actor_critic.Validate();
  bandit.Validate();
}

json ToJson(const RunConfig& c) {
  const auto& b = c.fit.bounds;
  return {
      {"series", c.series_path.generic_string()},
      {"statics", c.statics_path.generic_string()},
      {"regions", c.regions},
      {"training_window", {{"start", c.train_start.ToString()}, {"end", c.train_end.ToString()}}},
      {"test_window", {{"start", c.test_start.ToString()}, {"end", c.test_end.ToString()}}},
      {"distribution_date", c.distribution_date.ToString()},
      {"buckets", c.buckets},
      {"agent", agents::ToString(c.agent)},
      {"seeds",
       {{"fit", c.seeds.fit}, {"agent", c.seeds.agent}, {"log", c.seeds.log}, {"bandit", c.seeds.bandit}}},
      {"log_passes", c.log_passes},
      {"env",
       {{"bucket_size", c.env.bucket_size},
        {"batch_size", c.env.batch_size},
        {"reward_width", c.env.reward_width}}},
      {"dqn",
       {{"discount_gamma", c.dqn.discount_gamma},
        {"epsilon", c.dqn.epsilon},
        {"learning_rate", c.dqn.learning_rate},
        {"batch", c.dqn.batch},
        {"target_sync_every", c.dqn.target_sync_every},
        {"episodes", c.dqn.episodes},
        {"buffer_capacity", c.dqn.buffer_capacity},
        {"hidden", c.dqn.hidden},
        {"hidden_bias_scale", c.dqn.hidden_bias_scale},
        {"initial_q", c.dqn.initial_q},
        {"optimizer", OptimizerName(c.dqn.optimizer)}}},
      {"actor_critic",
       {{"exploration", c.actor_critic.exploration},
        {"entropy_weight", c.actor_critic.entropy_weight},
        {"discount", c.actor_critic.discount},
        {"actor_learning_rate", c.actor_critic.actor_learning_rate},
        {"critic_learning_rate", c.actor_critic.critic_learning_rate},
        {"rollout_length", c.actor_critic.rollout_length},
        {"episodes", c.actor_critic.episodes},
        {"hidden", c.actor_critic.hidden},
        {"hidden_bias_scale", c.actor_critic.hidden_bias_scale},
        {"optimizer", OptimizerName(c.actor_critic.optimizer)},
        {"linear_decay", c.actor_critic.linear_decay}}},
      {"bandit",
       {{"epsilon", c.bandit.epsilon},
        {"ridge", c.bandit.ridge},
        {"link", c.bandit.link == bandit::Link::kLog ? "log" : "identity"},
        {"per_bucket", c.bandit.per_bucket},
        {"min_log_reward", c.bandit.min_log_reward}}},
      {"fit",
       {{"grid_points", c.fit.grid_points},
        {"max_evaluations", c.fit.max_evaluations},
        {"tolerance", c.fit.tolerance},
        {"restarts", c.fit.restarts},
        {"rmse_ceiling", c.fit.rmse_ceiling},
        {"dt", c.fit.dt},
        {"bounds",
         {{"beta", IntervalJson(b.beta)},
          {"sigma", IntervalJson(b.sigma)},
          {"gamma", IntervalJson(b.gamma)},
          {"mu", IntervalJson(b.mu)}}}}},
      {"evaluation",
       {{"doses", c.doses},
        {"efficacy", c.efficacy},
        {"horizon_days", c.horizon_days},
        {"cases_mode", eval::ToString(c.cases_mode)}}},
      {"output_dir", c.output_dir.generic_string()}};
}

namespace {

// Every key must appear in the canonical document; a misspelled option would
// otherwise fall back to its default without notice.
void RejectUnknownKeys(const json& doc, const json& reference, const std::string& where) {
  if (!doc.is_object()) return;
  for (const auto& [key, value] : doc.items()) {
    if (!reference.contains(key)) {
      throw Error(ErrorCode::kSchema, "unknown run config key", where + key);
    }
    if (value.is_object() && reference.at(key).is_object()) {
      RejectUnknownKeys(value, reference.at(key), where + key + ".");
    }
  }
}

}  // namespace

RunConfig RunConfigFromJson(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw Error(ErrorCode::kSchema, "run config must be a JSON object");
  RejectUnknownKeys(doc, ToJson(RunConfig{}), "");
  RunConfig c;
  try {
    auto path = [&](const char* key, std::filesystem::path& field) {
      if (!doc.contains(key)) return;
      std::filesystem::path p = doc.at(key).get<std::string>();
      field = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    };
    path("series", c.series_path);
    path("statics", c.statics_path);
    // The output directory is relative to the working directory.
    if (doc.contains("output_dir")) c.output_dir = doc.at("output_dir").get<std::string>();
    Read(doc, "regions", c.regions);
    if (doc.contains("training_window")) {
      ReadDate(doc.at("training_window"), "start", c.train_start);
      ReadDate(doc.at("training_window"), "end", c.train_end);
    }
    if (doc.contains("test_window")) {
      ReadDate(doc.at("test_window"), "start", c.test_start);
      ReadDate(doc.at("test_window"), "end", c.test_end);
    }
    ReadDate(doc, "distribution_date", c.distribution_date);
    if (doc.contains("buckets")) {
      const auto& b = doc.at("buckets");
      if (b.is_array()) {
        c.buckets = b.get<std::vector<int>>();
      } else {
        int start = b.at("start").get<int>(), stop = b.at("stop").get<int>(),
            step = b.at("step").get<int>();
        if (step < 1) throw Error(ErrorCode::kInvalidArgument, "bucket step must be >= 1");
        c.buckets.clear();
        for (int v = start; v <= stop; v += step) c.buckets.push_back(v);
      }
    }
    if (doc.contains("agent")) c.agent = agents::ParsePolicyKind(doc.at("agent").get<std::string>());
    if (doc.contains("seeds")) {
      const auto& s = doc.at("seeds");
      Read(s, "fit", c.seeds.fit);
      Read(s, "agent", c.seeds.agent);
      Read(s, "log", c.seeds.log);
      Read(s, "bandit", c.seeds.bandit);
    }
    Read(doc, "log_passes", c.log_passes);
    if (doc.contains("env")) {
      const auto& e = doc.at("env");
      Read(e, "bucket_size", c.env.bucket_size);
      Read(e, "batch_size", c.env.batch_size);
      Read(e, "reward_width", c.env.reward_width);
    }
    if (doc.contains("dqn")) {
      const auto& d = doc.at("dqn");
      Read(d, "discount_gamma", c.dqn.discount_gamma);
      Read(d, "epsilon", c.dqn.epsilon);
      Read(d, "learning_rate", c.dqn.learning_rate);
      Read(d, "batch", c.dqn.batch);
      Read(d, "target_sync_every", c.dqn.target_sync_every);
      Read(d, "episodes", c.dqn.episodes);
      Read(d, "buffer_capacity", c.dqn.buffer_capacity);
      Read(d, "hidden", c.dqn.hidden);
      Read(d, "hidden_bias_scale", c.dqn.hidden_bias_scale);
      Read(d, "initial_q", c.dqn.initial_q);
      ReadOptimizer(d, c.dqn.optimizer);
    }
    if (doc.contains("actor_critic")) {
      const auto& a = doc.at("actor_critic");
      Read(a, "exploration", c.actor_critic.exploration);
      Read(a, "entropy_weight", c.actor_critic.entropy_weight);
      Read(a, "discount", c.actor_critic.discount);
      Read(a, "actor_learning_rate", c.actor_critic.actor_learning_rate);
      Read(a, "critic_learning_rate", c.actor_critic.critic_learning_rate);
      Read(a, "rollout_length", c.actor_critic.rollout_length);
      Read(a, "episodes", c.actor_critic.episodes);
      Read(a, "hidden", c.actor_critic.hidden);
      Read(a, "hidden_bias_scale", c.actor_critic.hidden_bias_scale);
      ReadOptimizer(a, c.actor_critic.optimizer);
      Read(a, "linear_decay", c.actor_critic.linear_decay);
    }
    if (doc.contains("bandit")) {
      const auto& b = doc.at("bandit");
      Read(b, "epsilon", c.bandit.epsilon);
      Read(b, "ridge", c.bandit.ridge);
      if (b.contains("link")) {
        auto link = b.at("link").get<std::string>();
        if (link != "log" && link != "identity") {
          throw Error(ErrorCode::kInvalidArgument, "unknown link '" + link + "'");
        }
        c.bandit.link = link == "log" ? bandit::Link::kLog : bandit::Link::kIdentity;
      }
      Read(b, "per_bucket", c.bandit.per_bucket);
      Read(b, "min_log_reward", c.bandit.min_log_reward);
    }
    if (doc.contains("fit")) {
      const auto& f = doc.at("fit");
      Read(f, "grid_points", c.fit.grid_points);
      Read(f, "max_evaluations", c.fit.max_evaluations);
      Read(f, "tolerance", c.fit.tolerance);
      Read(f, "restarts", c.fit.restarts);
      Read(f, "rmse_ceiling", c.fit.rmse_ceiling);
      Read(f, "dt", c.fit.dt);
      if (f.contains("bounds")) {
        const auto& b = f.at("bounds");
        ReadInterval(b, "beta", c.fit.bounds.beta);
        ReadInterval(b, "sigma", c.fit.bounds.sigma);
        ReadInterval(b, "gamma", c.fit.bounds.gamma);
        ReadInterval(b, "mu", c.fit.bounds.mu);
      }
    }
    if (doc.contains("evaluation")) {
      const auto& e = doc.at("evaluation");
      Read(e, "doses", c.doses);
      Read(e, "efficacy", c.efficacy);
      Read(e, "horizon_days", c.horizon_days);
      if (e.contains("cases_mode")) {
        c.cases_mode = eval::ParseCasesMode(e.at("cases_mode").get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("run config: ") + e.what());
  }
  c.Validate();
  return c;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(data::ReadFileBytes(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, e.what(), path.string());
  }
  return RunConfigFromJson(doc, path.parent_path());
}

const DistributionSet& RunArtifact::Distribution(int bucket, Date date) const {
  auto it = distributions.find(bucket);
  if (it != distributions.end()) {
    for (const auto& set : it->second) {
      if (set.date == date) return set;
    }
  }
  throw Error(ErrorCode::kNotFound,
              "no distribution for bucket " + std::to_string(bucket) + " on " + date.ToString());
}

int ScaleBucket(int action, int from_bucket, int to_bucket) {
  if (from_bucket < 1 || to_bucket < 1 || action < 0 || action >= from_bucket) {
    throw Error(ErrorCode::kInvalidArgument, "action outside the source bucket range");
  }
  // Round half up in exact integer arithmetic.
  long long scaled = (2LL * action * to_bucket + from_bucket) / (2LL * from_bucket);
  return static_cast<int>(std::clamp<long long>(scaled, 0, to_bucket - 1));
}

DistributionSet Normalize(std::span<const std::pair<std::string, int>> actions, Date date,
                          int bucket_size) {
  std::vector<std::pair<std::string, double>> weights;
  for (const auto& [region, a] : actions) {
    if (a < 0) throw Error(ErrorCode::kInvalidArgument, "negative action", region);
    weights.emplace_back(region, static_cast<double>(a));
  }
  return Proportional(weights, date, bucket_size);
}

std::vector<bandit::BanditExample> GenerateLog(
    const agents::PolicyArtifact& policy,
    const std::vector<std::vector<env::StateContext>>& days,
    const env::EnvConfig& env_config, std::uint64_t seed, int passes) {
  if (passes < 1) throw Error(ErrorCode::kInvalidArgument, "log passes must be >= 1");
  if (days.empty()) throw Error(ErrorCode::kCoverage, "no training days to replay");
  for (std::size_t d = 1; d < days.size(); ++d) {
    if (days[d].empty() || days[d - 1].empty() ||
        days[d].front().date != days[d - 1].front().date + 1) {
      throw Error(ErrorCode::kCoverage, "training days are not consecutive");
    }
  }
  std::mt19937_64 rng(seed);
  env::VaccineEnv env(env_config);
  std::vector<bandit::BanditExample> log;
  long long round = 0;
  for (int pass = 0; pass < passes; ++pass) {
    for (const auto& day : days) {
      env::Observation obs = env.Reset(day);
      while (!env.done()) {
        int recipient = env.cursor();
        auto choice = agents::SampleBehavior(policy, obs, rng);
        auto out = env.Step(choice.action);
        bandit::BanditExample e;
        e.round = round++;
        e.date = day[recipient].date;
        e.region = day[recipient].region;
        e.bucket_size = policy.bucket_size;
        e.action = choice.action;
        e.reward = out.reward;
        e.probability = choice.probability;
        e.context = obs;
        log.push_back(std::move(e));
        obs = out.observation;
      }
    }
  }
  return log;
}

agents::PolicyArtifact TrainAgent(const RunConfig& config, const agents::DaySet& days,
                                  const env::EnvConfig& env_config) {
  if (config.agent == agents::PolicyKind::kDqn) {
    return agents::TrainDqn(days, env_config, config.dqn, config.seeds.agent);
  }
  return agents::TrainActorCritic(days, env_config, config.actor_critic, config.seeds.agent);
}

DistributionSet Allocate(const bandit::BanditModel& model, const env::FeatureScaling& scaling,
                         std::span<const env::StateContext> day, int bucket) {
  std::vector<std::pair<std::string, int>> actions;
  for (const auto& ctx : day) {
    auto obs = scaling.Apply(ctx);
    int a = model.config.per_bucket
                ? bandit::Predict(model, obs, bucket).action
                : ScaleBucket(bandit::Predict(model, obs, model.n_actions).action,
                              model.n_actions, bucket);
    actions.emplace_back(ctx.region, a);
  }
  return Normalize(actions, day.front().date, bucket);
}

DistributionSet AllocateFromPolicy(const agents::PolicyArtifact& policy,
                                   std::span<const env::StateContext> day, int bucket) {
  std::vector<std::pair<std::string, int>> actions;
  for (const auto& ctx : day) {
    int a = agents::GreedyAction(policy, policy.scaling.Apply(ctx));
    actions.emplace_back(ctx.region, ScaleBucket(a, policy.bucket_size, bucket));
  }
  return Normalize(actions, day.front().date, bucket);
}

eval::Scenario BuildScenario(const data::Snapshot& snapshot, const data::FitMap& fits,
                             const RunConfig& config, Date date) {
  eval::Scenario s;
  s.start = date;
  s.doses = config.doses;
  s.efficacy = config.efficacy;
  s.horizon_days = config.horizon_days;
  s.dt = config.fit.dt;
  s.mode = config.cases_mode;
  for (const auto& region : snapshot.Regions()) {
    auto state = data::ProjectedStates(snapshot, fits, region, date, date).front();
    s.regions.push_back({region, fits.at(region).params, state});
  }
  return s;
}

data::Snapshot SelectRegions(const data::Snapshot& snapshot,
                             const std::vector<std::string>& regions) {
  if (regions.empty()) return snapshot;
  std::set<std::string> unique(regions.begin(), regions.end());
  if (unique.size() != regions.size()) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate region in configuration");
  }
  data::Snapshot out;
  out.hash = snapshot.hash;
  for (const auto& r : regions) {
    try {
      out.statics.push_back(snapshot.Static(r));
      out.series.push_back(snapshot.Series(r));
    } catch (const Error&) {
      throw Error(ErrorCode::kCoverage, "configured region " + r + " is not in the snapshot");
    }
  }
  return out;
}

RunArtifact RunVacsim(const RunConfig& config) {
  config.Validate();
  auto snapshot = Stage("ingest", [&] {
    return data::LoadSnapshot(config.series_path, config.statics_path);
  });
  return RunVacsim(config, snapshot);
}

RunArtifact RunVacsim(const RunConfig& config, const data::Snapshot& full) {
  config.Validate();
  RunArtifact run;
  run.config = config;
  run.snapshot_hash = full.hash;
  run.config_hash = ConfigHash(config);
  run.run_id = "run-" + data::Sha256Hex(run.config_hash + run.snapshot_hash).substr(0, 12);

  auto snapshot = Stage("ingest", [&] { return SelectRegions(full, config.regions); });
  run.fits = Stage("fit", [&] { return data::FitSnapshot(snapshot, config.fit, config.seeds.fit); });
  auto train_days = Stage("contexts", [&] {
    return data::BuildContexts(snapshot, run.fits, config.train_start, config.train_end);
  });
  run.test_contexts = Stage("contexts", [&] {
    return data::BuildContexts(snapshot, run.fits, config.test_start, config.test_end);
  });

  env::EnvConfig env_config = config.env;
  env_config.recipients_per_day = static_cast<int>(snapshot.statics.size());
  std::vector<env::StateContext> flat;
  for (const auto& day : train_days) flat.insert(flat.end(), day.begin(), day.end());
  env_config.scaling = env::FeatureScaling::Fit(flat);

  run.policy = Stage("train", [&] { return TrainAgent(config, train_days, env_config); });
  run.log = Stage("log", [&] {
    return GenerateLog(run.policy, train_days, env_config, config.seeds.log, config.log_passes);
  });
  run.bandit = Stage("bandit", [&] {
    if (!config.bandit.per_bucket) {
      return bandit::Train(run.log, config.bandit, config.seeds.bandit);
    }
    std::vector<bandit::BanditExample> expanded;
    for (const auto& e : run.log) {
      for (int b : config.buckets) {
        auto copy = e;
        copy.bucket_size = b;
        copy.action = ScaleBucket(e.action, e.bucket_size, b);
        expanded.push_back(std::move(copy));
      }
    }
    return bandit::Train(expanded, config.bandit, config.seeds.bandit);
  });

  Stage("test", [&] {
    for (int b : config.buckets) {
      for (const auto& day : run.test_contexts) {
        run.distributions[b].push_back(Allocate(run.bandit, env_config.scaling, day, b));
        run.policy_distributions[b].push_back(AllocateFromPolicy(run.policy, day, b));
      }
    }
    return 0;
  });

  Stage("evaluate", [&] {
    auto scenario = BuildScenario(snapshot, run.fits, config, config.distribution_date);
    run.naive = eval::NaivePolicy(scenario);
    for (int b : config.buckets) {
      const auto& candidate = run.Distribution(b, config.distribution_date);
      auto naive = run.naive;
      naive.bucket_size = b;
      run.comparisons[b] = eval::Compare(candidate, naive, scenario);
      auto trajectories = eval::ProjectWithAllocation(candidate, scenario);
      for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const auto& region = scenario.regions[i].region;
        const auto& traj = trajectories[i];
        for (std::size_t d = 0; d < traj.states.size(); ++d) {
          const auto& s = traj.states[d];
          run.simulation.push_back({region, config.distribution_date + static_cast<int>(d), b,
                                    s.dead, s.recovered, s.infected, s.susceptible,
                                    candidate.PercentOf(region)});
        }
      }
    }
    return 0;
  });
  return run;
}

std::map<std::string, std::string> RenderRunFiles(const RunArtifact& run) {
  std::map<std::string, std::string> files;
  json fits = json::object();
  for (const auto& [region, fit] : run.fits) {
    const auto& p = fit.params;
    fits[region] = {{"beta", p.transmission_rate_beta},
                    {"sigma", p.incubation_rate_sigma},
                    {"gamma", p.recovery_rate_gamma},
                    {"mu", p.fatality_rate_mu},
                    {"population", p.population_n},
                    {"ssr", fit.ssr}};
  }
  std::vector<std::string> test_days;
  for (const auto& day : run.test_contexts) test_days.push_back(day.front().date.ToString());
  json config = ToJson(run.config);
  config.erase("series");
  config.erase("statics");
  config.erase("output_dir");
  files["run.json"] = JsonText({{"format", "vacsim.run"},
                                {"version", 1},
                                {"run_id", run.run_id},
                                {"config", config},
                                {"config_hash", run.config_hash},
                                {"snapshot_hash", run.snapshot_hash},
                                {"fits", fits},
                                {"test_days", test_days},
                                {"distribution_date", run.config.distribution_date.ToString()}});
  files["policy.json"] = JsonText(agents::ToJson(run.policy));
  files["bandit.json"] = JsonText(bandit::ToJson(run.bandit));
  files["log.csv"] = bandit::FormatLogCsv(run.log);
  std::vector<env::StateContext> contexts;
  for (const auto& day : run.test_contexts) contexts.insert(contexts.end(), day.begin(), day.end());
  files["contexts.csv"] = env::FormatContextsCsv(contexts);
  json summary_buckets = json::array();
  for (const auto& [b, sets] : run.distributions) {
    files["distribution_" + std::to_string(b) + ".csv"] = FormatDistributionCsv(sets);
    files["policy_distribution_" + std::to_string(b) + ".csv"] =
        FormatDistributionCsv(run.policy_distributions.at(b));
    const auto& report = run.comparisons.at(b);
    files["comparison_" + std::to_string(b) + ".csv"] = eval::FormatComparisonCsv(report);
    summary_buckets.push_back(
        {{"bucket_size", b},
         {"distribution", ToJson(run.Distribution(b, run.config.distribution_date))},
         {"cumulative_difference", report.cumulative_difference}});
  }
  files["summary.json"] = JsonText({{"run_id", run.run_id},
                                    {"distribution_date", run.config.distribution_date.ToString()},
                                    {"cases_mode", eval::ToString(run.config.cases_mode)},
                                    {"doses", run.config.doses},
                                    {"efficacy", run.config.efficacy},
                                    {"naive", ToJson(run.naive)},
                                    {"buckets", summary_buckets}});
  files["simulation_log.csv"] = SimulationCsv(run.simulation);
  return files;
}

std::filesystem::path WriteRun(const RunArtifact& run) {
  auto dir = run.config.output_dir / run.run_id;
  std::filesystem::create_directories(dir);
  for (const auto& [name, bytes] : RenderRunFiles(run)) data::WriteFileBytes(dir / name, bytes);
  return dir;
}

}  // namespace vacsim::pipeline
