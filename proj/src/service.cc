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

#include "vacsim/service.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <set>

#include "httplib.h"

#include "vacsim/csv.h"

namespace vacsim::service {

using nlohmann::json;

namespace {

constexpr const char* kStage = "service";

Error Fail(ErrorCode code, const std::string& message) {
  return Error(code, message, {}, kStage);
}

std::string JsonText(const json& doc) { return doc.dump(2) + "\n"; }

json ContextToJson(const env::StateContext& c) {
  auto names = env::FeatureNames();
  auto values = c.Features();
  json out = {{"region", c.region}, {"date", c.date.ToString()}};
  for (int j = 0; j < env::kNumFeatures; ++j) out[names[j]] = values[j];
  return out;
}

// Assigns one named feature; false when the name is unknown.
bool SetFeature(env::StateContext& c, std::string_view name, double v) {
  double* fields[] = {&c.total_predicted_cases, &c.predicted_death_rate,
                      &c.predicted_recovery_rate, &c.susceptible, &c.population,
                      &c.icu_beds, &c.hospital_beds, &c.ventilators, &c.age_over_50};
  auto names = env::FeatureNames();
  for (int j = 0; j < env::kNumFeatures; ++j) {
    if (name == names[j]) {
      *fields[j] = v;
      return true;
    }
  }
  return false;
}

env::StateContext ContextFromJson(const json& doc) {
  env::StateContext c;
  c.region = doc.at("region").get<std::string>();
  c.date = Date::Parse(doc.at("date").get<std::string>());
  for (const char* name : env::FeatureNames()) {
    SetFeature(c, name, doc.at(name).get<double>());
  }
  c.Validate();
  return c;
}

json ScenarioSummary(const Scenario& s) {
  json out = {{"id", s.id},
              {"status", ToString(s.status)},
              {"snapshot_hash", s.snapshot.hash},
              {"regions", pipeline::SelectRegions(s.snapshot, s.config.regions).Regions()},
              {"buckets", s.config.buckets},
              {"distribution_date", s.config.distribution_date.ToString()}};
  if (s.status == Status::kReady) {
    out["run_id"] = s.run_id;
    out["model_version"] = s.versions.back().version;
    out["feedback_events"] = s.feedback.size();
    out["last_feedback_date"] =
        s.feedback.empty() ? json(nullptr) : json(s.feedback.back().date.ToString());
    std::vector<std::string> days;
    for (const auto& day : s.test_contexts) days.push_back(day.front().date.ToString());
    out["test_days"] = days;
  }
  if (s.failure) out["error"] = ErrorBody(*s.failure);
  return out;
}

void RequireReady(const Scenario& s) {
  if (s.status != Status::kReady) {
    throw Fail(ErrorCode::kNotReady, "scenario " + s.id + " is " + ToString(s.status));
  }
}

const std::vector<env::StateContext>& DayOf(const Scenario& s, Date date) {
  for (const auto& day : s.test_contexts) {
    if (day.front().date == date) return day;
  }
  throw Fail(ErrorCode::kNotFound, "no contexts for " + date.ToString());
}

std::vector<json> ReadJournal(const std::filesystem::path& path) {
  std::vector<json> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

std::string ModelFile(int version) { return "bandit_v" + std::to_string(version) + ".json"; }

}  // namespace

std::string ToString(Status status) {
  switch (status) {
    case Status::kDraft: return "draft";
    case Status::kTraining: return "training";
    case Status::kReady: return "ready";
    case Status::kFailed: return "failed";
  }
  return "unknown";
}

Status ParseStatus(const std::string& text) {
  for (auto s : {Status::kDraft, Status::kTraining, Status::kReady, Status::kFailed}) {
    if (ToString(s) == text) return s;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown status '" + text + "'");
}

json ToJson(const FeedbackEvent& e) {
  json contexts = json::array();
  for (const auto& c : e.contexts) contexts.push_back(ContextToJson(c));
  return {{"date", e.date.ToString()},
          {"bucket_size", e.bucket_size},
          {"distribution", e.distribution},
          {"susceptible_change", e.susceptible_change},
          {"contexts", contexts}};
}

FeedbackEvent FeedbackFromJson(const json& doc) {
  static const std::set<std::string> known = {"date", "bucket_size", "distribution",
                                              "susceptible_change", "contexts"};
  FeedbackEvent e;
  try {
    if (!doc.is_object()) throw Error(ErrorCode::kSchema, "feedback must be an object");
    for (const auto& [key, value] : doc.items()) {
      if (!known.count(key)) throw Error(ErrorCode::kSchema, "unknown feedback field '" + key + "'");
    }
    e.date = Date::Parse(doc.at("date").get<std::string>());
    if (doc.contains("bucket_size")) e.bucket_size = doc.at("bucket_size").get<int>();
    const auto& dist = doc.at("distribution");
    // Accept either {region: percent} or a serialized distribution set.
    if (dist.is_object() && dist.contains("shares")) {
      for (const auto& share : DistributionFromJson(dist).shares) {
        e.distribution[share.region] = share.percent;
      }
    } else {
      e.distribution = dist.get<std::map<std::string, double>>();
    }
    e.susceptible_change = doc.at("susceptible_change").get<std::map<std::string, double>>();
    if (doc.contains("contexts")) {
      for (const auto& c : doc.at("contexts")) e.contexts.push_back(ContextFromJson(c));
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kSchema, std::string("malformed feedback: ") + ex.what());
  }
  if (e.bucket_size < 0) throw Error(ErrorCode::kInvalidArgument, "bucket_size must be >= 0");
  return e;
}

std::vector<bandit::BanditExample> FeedbackExamples(const FeedbackEvent& event,
                                                    const bandit::BanditModel& model,
                                                    const env::FeatureScaling& scaling,
                                                    double reward_width, long long first_round) {
  const int n = event.bucket_size > 0 ? event.bucket_size : model.n_actions;
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "bucket size must be >= 2");
  if (event.contexts.empty()) throw Error(ErrorCode::kInvalidArgument, "feedback has no contexts");
  if (event.distribution.size() != event.contexts.size() ||
      event.susceptible_change.size() != event.contexts.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "distribution and susceptible_change must cover exactly the context regions");
  }
  double total = 0.0;
  for (const auto& c : event.contexts) {
    auto it = event.susceptible_change.find(c.region);
    if (it == event.susceptible_change.end() || !event.distribution.count(c.region)) {
      throw Error(ErrorCode::kInvalidArgument, "no feedback for region " + c.region);
    }
    RequireFinite(it->second, "susceptible change");
    total += std::abs(it->second);
  }
  if (!(total > 0)) throw Error(ErrorCode::kDegenerate, "susceptible change is zero everywhere");

  std::vector<bandit::BanditExample> out;
  long long round = first_round;
  for (const auto& c : event.contexts) {
    double percent = event.distribution.at(c.region);
    if (!(percent >= 0 && percent <= 100)) {
      throw Error(ErrorCode::kInvalidArgument, "percent out of range for " + c.region);
    }
    int action = std::clamp(static_cast<int>(std::lround(percent / 100.0 * n)), 0, n - 1);
    double share = std::abs(event.susceptible_change.at(c.region)) / total;
    bandit::BanditExample e;
    e.round = round++;
    e.date = event.date;
    e.region = c.region;
    e.bucket_size = n;
    e.action = action;
    e.reward = env::Reward(static_cast<double>(action) / n, share, reward_width);
    e.probability = 1.0;
    e.context = scaling.Apply(c);
    out.push_back(e);
  }
  return out;
}

Worker::Worker() : thread_([this] { Loop(); }) {}

Worker::~Worker() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  thread_.join();
}

void Worker::Post(std::function<void()> task) {
  {
    std::lock_guard lock(mu_);
    tasks_.push_back(std::move(task));
  }
  cv_.notify_all();
}

void Worker::Drain() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return tasks_.empty() && !busy_; });
}

void Worker::Loop() {
  std::unique_lock lock(mu_);
  while (true) {
    cv_.wait(lock, [this] { return stop_ || !tasks_.empty(); });
    // Pending tasks still run on shutdown.
    if (tasks_.empty()) return;
    auto task = std::move(tasks_.front());
    tasks_.pop_front();
    busy_ = true;
    lock.unlock();
    task();
    lock.lock();
    busy_ = false;
    cv_.notify_all();
  }
}

ScenarioService::ScenarioService(std::filesystem::path data_dir)
    : data_dir_(std::move(data_dir)) {
  std::filesystem::create_directories(data_dir_ / "scenarios");
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(data_dir_ / "scenarios")) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) Load(dir);
}

ScenarioService::~ScenarioService() {
  for (auto& [id, s] : scenarios_) s->worker.Drain();
}

std::shared_ptr<Scenario> ScenarioService::Find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = scenarios_.find(id);
  if (it == scenarios_.end()) throw Fail(ErrorCode::kNotFound, "no scenario '" + id + "'");
  return it->second;
}

std::vector<std::string> ScenarioService::Ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, s] : scenarios_) out.push_back(id);
  return out;
}

void ScenarioService::Journal(const Scenario& s, const json& entry) {
  std::ofstream out(s.dir / "journal.jsonl", std::ios::app);
  out << entry.dump() << "\n";
  if (!out) throw Fail(ErrorCode::kIo, "cannot append to journal of " + s.id);
}

json ScenarioService::Create(const json& body) {
  if (!body.is_object() || !body.contains("series") || !body.contains("statics") ||
      !body.at("series").is_string() || !body.at("statics").is_string()) {
    throw Error(ErrorCode::kSchema, "body needs string fields 'series' and 'statics'", {},
                "ingest");
  }
  auto s = std::make_shared<Scenario>();
  s->series_csv = body.at("series").get<std::string>();
  s->statics_csv = body.at("statics").get<std::string>();
  s->config_doc = body.value("config", json::object());
  try {
    s->snapshot = data::SnapshotFromText(s->series_csv, s->statics_csv);
    s->config = pipeline::RunConfigFromJson(s->config_doc);
    s->config.Validate();
    pipeline::SelectRegions(s->snapshot, s->config.regions);
  } catch (const Error& e) {
    throw e.stage().empty() ? e.WithStage("ingest") : e;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed config: ") + e.what(), {}, "ingest");
  }

  {
    std::lock_guard lock(mu_);
    char id[32];
    std::snprintf(id, sizeof(id), "sc-%06d", next_id_++);
    s->id = id;
    s->dir = data_dir_ / "scenarios" / s->id;
    scenarios_[s->id] = s;
  }
  std::filesystem::create_directories(s->dir);
  data::WriteFileBytes(s->dir / "series.csv", s->series_csv);
  data::WriteFileBytes(s->dir / "statics.csv", s->statics_csv);
  data::WriteFileBytes(s->dir / "config.json", JsonText(s->config_doc));
  Journal(*s, {{"event", "created"}, {"snapshot_hash", s->snapshot.hash}});
  std::shared_lock lock(s->mu);
  return ScenarioSummary(*s);
}

json ScenarioService::StartTraining(const std::string& id) {
  auto s = Find(id);
  {
    std::unique_lock lock(s->mu);
    if (s->status != Status::kDraft) {
      throw Fail(ErrorCode::kConflict, "scenario " + id + " is " + ToString(s->status) +
                                           "; training starts only from draft");
    }
    s->status = Status::kTraining;
    Journal(*s, {{"event", "status"}, {"status", "training"}});
  }
  s->worker.Post([this, s] { Train(s); });
  std::shared_lock lock(s->mu);
  return ScenarioSummary(*s);
}

void ScenarioService::Train(const std::shared_ptr<Scenario>& s) {
  std::optional<Error> failure;
  pipeline::RunArtifact run;
  try {
    run = pipeline::RunVacsim(s->config, s->snapshot);
    auto dir = s->dir / "runs" / run.run_id;
    std::filesystem::create_directories(dir);
    for (const auto& [name, bytes] : pipeline::RenderRunFiles(run)) {
      data::WriteFileBytes(dir / name, bytes);
    }
    std::filesystem::create_directories(s->dir / "models");
    data::WriteFileBytes(s->dir / "models" / ModelFile(1), JsonText(bandit::ToJson(run.bandit)));
  } catch (const Error& e) {
    failure = e.stage().empty() ? e.WithStage(kStage) : e;
  } catch (const std::exception& e) {
    failure = Fail(ErrorCode::kIo, e.what());
  }

  std::unique_lock lock(s->mu);
  if (failure) {
    s->status = Status::kFailed;
    s->failure = failure;
    Journal(*s, {{"event", "status"}, {"status", "failed"}, {"error", ErrorBody(*failure)}});
    return;
  }
  s->run_id = run.run_id;
  s->fits = std::move(run.fits);
  s->policy = std::move(run.policy);
  s->test_contexts = std::move(run.test_contexts);
  s->versions = {std::move(run.bandit)};
  long long next = 0;
  for (const auto& e : run.log) next = std::max(next, e.round + 1);
  s->next_round = next;
  s->status = Status::kReady;
  Journal(*s, {{"event", "status"},
               {"status", "ready"},
               {"run_id", s->run_id},
               {"next_round", s->next_round}});
}

void ScenarioService::RestoreReady(Scenario& s, const std::string& run_id) {
  auto dir = s.dir / "runs" / run_id;
  s.run_id = run_id;
  s.policy = agents::PolicyFromJson(json::parse(data::ReadFileBytes(dir / "policy.json")));
  s.versions = {bandit::BanditFromJson(
      json::parse(data::ReadFileBytes(s.dir / "models" / ModelFile(1))))};
  auto contexts = env::ReadContextsCsv(dir / "contexts.csv");
  s.test_contexts.clear();
  for (auto& [date, day] : env::GroupByDate(contexts)) s.test_contexts.push_back(std::move(day));
  json run = json::parse(data::ReadFileBytes(dir / "run.json"));
  s.fits.clear();
  for (const auto& [region, f] : run.at("fits").items()) {
    epi::FitResult fit;
    fit.params = {f.at("beta").get<double>(), f.at("sigma").get<double>(),
                  f.at("gamma").get<double>(), f.at("mu").get<double>(),
                  f.at("population").get<double>()};
    fit.ssr = f.at("ssr").get<double>();
    s.fits[region] = fit;
  }
}

void ScenarioService::Load(const std::filesystem::path& dir) {
  auto s = std::make_shared<Scenario>();
  s->id = dir.filename().string();
  s->dir = dir;
  s->series_csv = data::ReadFileBytes(dir / "series.csv");
  s->statics_csv = data::ReadFileBytes(dir / "statics.csv");
  s->config_doc = json::parse(data::ReadFileBytes(dir / "config.json"));
  s->snapshot = data::SnapshotFromText(s->series_csv, s->statics_csv);
  s->config = pipeline::RunConfigFromJson(s->config_doc);

  for (const auto& entry : ReadJournal(dir / "journal.jsonl")) {
    const auto event = entry.at("event").get<std::string>();
    if (event == "status") {
      s->status = ParseStatus(entry.at("status").get<std::string>());
      if (s->status == Status::kReady) {
        RestoreReady(*s, entry.at("run_id").get<std::string>());
        s->next_round = entry.at("next_round").get<long long>();
      } else if (s->status == Status::kFailed) {
        const auto& e = entry.at("error");
        s->failure = Error(ErrorCode::kIo, e.at("message").get<std::string>(),
                           e.value("location", ""), e.value("stage", ""));
        for (int c = 0; c <= static_cast<int>(ErrorCode::kIo); ++c) {
          if (vacsim::ToString(static_cast<ErrorCode>(c)) == e.at("code").get<std::string>()) {
            s->failure = Error(static_cast<ErrorCode>(c), s->failure->what(),
                               s->failure->location(), s->failure->stage());
          }
        }
      }
    } else if (event == "feedback") {
      // Replays the event from the previous version.
      auto fb = FeedbackFromJson(entry.at("feedback"));
      auto model = s->versions.back();
      auto examples = FeedbackExamples(fb, model, s->policy.scaling,
                                       s->config.env.reward_width, s->next_round);
      bandit::Update(model, examples);
      s->next_round += static_cast<long long>(examples.size());
      s->versions.push_back(std::move(model));
      s->feedback.push_back(std::move(fb));
    }
  }
  if (s->status == Status::kTraining) {
    // The process stopped mid-job.
    s->status = Status::kFailed;
    s->failure = Fail(ErrorCode::kIo, "training interrupted by a restart");
    Journal(*s, {{"event", "status"}, {"status", "failed"}, {"error", ErrorBody(*s->failure)}});
  }
  std::lock_guard lock(mu_);
  int number = 0;
  if (std::sscanf(s->id.c_str(), "sc-%d", &number) == 1) next_id_ = std::max(next_id_, number + 1);
  scenarios_[s->id] = s;
}

json ScenarioService::Get(const std::string& id) const {
  auto s = Find(id);
  std::shared_lock lock(s->mu);
  return ScenarioSummary(*s);
}

json ScenarioService::Allocation(const std::string& id, int bucket,
                                 std::optional<Date> date) const {
  auto s = Find(id);
  std::shared_lock lock(s->mu);
  RequireReady(*s);
  if (bucket < 2) throw Fail(ErrorCode::kInvalidArgument, "bucket must be >= 2");
  const auto& day = DayOf(*s, date.value_or(s->config.distribution_date));
  auto dist = pipeline::Allocate(s->versions.back(), s->policy.scaling, day, bucket);
  return {{"scenario", s->id},
          {"run_id", s->run_id},
          {"model_version", s->versions.back().version},
          {"distribution", ToJson(dist)}};
}

json ScenarioService::WhatIf(const std::string& id, const json& overrides) const {
  static const std::set<std::string> known = {"doses", "efficacy", "bucket_size", "date",
                                              "horizon_days", "contexts"};
  auto s = Find(id);
  std::shared_lock lock(s->mu);
  RequireReady(*s);
  if (!overrides.is_object()) throw Fail(ErrorCode::kSchema, "overrides must be an object");
  pipeline::RunConfig config = s->config;
  int bucket = *std::max_element(config.buckets.begin(), config.buckets.end());
  Date date = config.distribution_date;
  std::vector<env::StateContext> day;
  try {
    for (const auto& [key, value] : overrides.items()) {
      if (!known.count(key)) throw Fail(ErrorCode::kInvalidArgument, "unknown override '" + key + "'");
    }
    if (overrides.contains("doses")) config.doses = overrides.at("doses").get<double>();
    if (overrides.contains("efficacy")) config.efficacy = overrides.at("efficacy").get<double>();
    if (overrides.contains("horizon_days")) {
      config.horizon_days = overrides.at("horizon_days").get<int>();
    }
    if (overrides.contains("bucket_size")) bucket = overrides.at("bucket_size").get<int>();
    if (overrides.contains("date")) date = Date::Parse(overrides.at("date").get<std::string>());
    day = DayOf(*s, date);
    if (overrides.contains("contexts")) {
      for (const auto& [region, edits] : overrides.at("contexts").items()) {
        auto it = std::find_if(day.begin(), day.end(),
                               [&](const auto& c) { return c.region == region; });
        if (it == day.end()) throw Fail(ErrorCode::kNotFound, "no region '" + region + "'");
        for (const auto& [name, v] : edits.items()) {
          if (!SetFeature(*it, name, v.get<double>())) {
            throw Fail(ErrorCode::kInvalidArgument, "unknown context field '" + name + "'");
          }
        }
        it->Validate();
      }
    }
  } catch (const json::exception& e) {
    throw Fail(ErrorCode::kSchema, std::string("malformed overrides: ") + e.what());
  }
  if (bucket < 2) throw Fail(ErrorCode::kInvalidArgument, "bucket_size must be >= 2");
  if (!(config.doses >= 0) || !(config.efficacy >= 0 && config.efficacy <= 1) ||
      config.horizon_days < 1) {
    throw Fail(ErrorCode::kInvalidArgument,
               "doses must be >= 0, efficacy in [0, 1] and horizon_days >= 1");
  }

  auto candidate = pipeline::Allocate(s->versions.back(), s->policy.scaling, day, bucket);
  auto snapshot = pipeline::SelectRegions(s->snapshot, config.regions);
  auto scenario = pipeline::BuildScenario(snapshot, s->fits, config, date);
  auto naive = eval::NaivePolicy(scenario, bucket);
  auto report = eval::Compare(candidate, naive, scenario);
  json contexts = json::array();
  for (const auto& c : day) contexts.push_back(ContextToJson(c));
  return {{"scenario", s->id},
          {"model_version", s->versions.back().version},
          {"allocation", ToJson(candidate)},
          {"naive", ToJson(naive)},
          {"comparison", eval::ToJson(report)},
          {"contexts", contexts}};
}

json ScenarioService::Feedback(const std::string& id, const json& body) {
  auto s = Find(id);
  auto event = FeedbackFromJson(body);
  std::promise<json> done;
  auto result = done.get_future();
  s->worker.Post([&, s] {
    try {
      std::unique_lock lock(s->mu);
      RequireReady(*s);
      if (!s->feedback.empty() && !(s->feedback.back().date < event.date)) {
        throw Fail(ErrorCode::kOutOfOrder, "feedback for " + event.date.ToString() +
                                               " does not follow " +
                                               s->feedback.back().date.ToString());
      }
      if (event.contexts.empty()) {
        event.contexts = DayOf(*s, s->config.distribution_date);
        for (auto& c : event.contexts) c.date = event.date;
      }
      auto model = s->versions.back();
      auto examples = FeedbackExamples(event, model, s->policy.scaling,
                                       s->config.env.reward_width, s->next_round);
      bandit::Update(model, examples);
      data::WriteFileBytes(s->dir / "models" / ModelFile(model.version),
                           JsonText(bandit::ToJson(model)));
      Journal(*s, {{"event", "feedback"}, {"feedback", ToJson(event)}});
      s->next_round += static_cast<long long>(examples.size());
      s->versions.push_back(std::move(model));
      s->feedback.push_back(event);
      done.set_value({{"scenario", s->id},
                      {"model_version", s->versions.back().version},
                      {"examples", examples.size()},
                      {"date", event.date.ToString()}});
    } catch (...) {
      done.set_exception(std::current_exception());
    }
  });
  try {
    return result.get();
  } catch (const Error& e) {
    throw e.stage().empty() ? e.WithStage(kStage) : e;
  }
}

json ScenarioService::Rewards(const std::string& id, const std::string& run_id) const {
  auto s = Find(id);
  std::shared_lock lock(s->mu);
  RequireReady(*s);
  if (run_id != s->run_id) throw Fail(ErrorCode::kNotFound, "no run '" + run_id + "'");
  const auto& curve = s->policy.reward_curve;
  const std::size_t window = std::max<std::size_t>(1, curve.size() / 50);
  std::vector<double> moving;
  double sum = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    sum += curve[i];
    if (i >= window) sum -= curve[i - window];
    moving.push_back(sum / static_cast<double>(std::min(i + 1, window)));
  }
  return {{"scenario", s->id},
          {"run_id", run_id},
          {"agent", agents::ToString(s->policy.kind)},
          {"episodes", curve.size()},
          {"window", window},
          {"reward_curve", curve},
          {"moving_average", moving}};
}

void ScenarioService::Wait(const std::string& id) { Find(id)->worker.Drain(); }

std::string ScenarioService::StateDigest(const std::string& id) const {
  auto s = Find(id);
  std::shared_lock lock(s->mu);
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(s->dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) {
    auto bytes = data::ReadFileBytes(f);
    all += std::filesystem::relative(f, s->dir).generic_string() + "\n" +
           std::to_string(bytes.size()) + "\n" + bytes;
  }
  return data::Sha256Hex(all);
}

const bandit::BanditModel& ScenarioService::Model(const std::string& id, int version) const {
  auto s = Find(id);
  std::shared_lock lock(s->mu);
  RequireReady(*s);
  if (version < 1 || version > static_cast<int>(s->versions.size())) {
    throw Fail(ErrorCode::kNotFound, "no model version " + std::to_string(version));
  }
  // Versions are append-only, so the reference stays valid while `s` lives.
  return s->versions[version - 1];
}

int HttpStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return 400;
    case ErrorCode::kSchema:
    case ErrorCode::kCoverage:
    case ErrorCode::kDegenerate: return 422;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kNotReady:
    case ErrorCode::kConflict:
    case ErrorCode::kOutOfOrder: return 409;
    default: return 500;
  }
}

json ErrorBody(const Error& error) {
  json out = {{"code", std::string(vacsim::ToString(error.code()))},
              {"stage", error.stage()},
              {"message", error.what()}};
  if (!error.location().empty()) out["location"] = error.location();
  return out;
}

namespace {

void Reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename F>
void Handle(httplib::Response& res, int ok_status, F&& body) {
  try {
    Reply(res, ok_status, body());
  } catch (const Error& e) {
    Error labelled = e.stage().empty() ? e.WithStage(kStage) : e;
    Reply(res, HttpStatus(e.code()), ErrorBody(labelled));
  } catch (const json::exception& e) {
    Reply(res, 422, ErrorBody(Error(ErrorCode::kSchema, e.what(), {}, kStage)));
  } catch (const std::exception& e) {
    Reply(res, 500, ErrorBody(Error(ErrorCode::kIo, e.what(), {}, kStage)));
  }
}

json ParseBody(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchema, std::string("request body is not JSON: ") + e.what(), {},
                kStage);
  }
}

}  // namespace

void RegisterRoutes(httplib::Server& server, ScenarioService& service) {
  const std::string base = "/api/v1/scenarios";
  server.Post(base, [&](const httplib::Request& req, httplib::Response& res) {
    Handle(res, 201, [&] { return service.Create(ParseBody(req)); });
  });
  server.Post(base + "/([^/]+)/train", [&](const httplib::Request& req, httplib::Response& res) {
    Handle(res, 202, [&] { return service.StartTraining(req.matches[1]); });
  });
  server.Get(base + "/([^/]+)", [&](const httplib::Request& req, httplib::Response& res) {
    Handle(res, 200, [&] { return service.Get(req.matches[1]); });
  });
  server.Get(base + "/([^/]+)/allocation", [&](const httplib::Request& req,
                                               httplib::Response& res) {
    Handle(res, 200, [&] {
      if (!req.has_param("bucket")) {
        throw Error(ErrorCode::kInvalidArgument, "query parameter 'bucket' is required");
      }
      int bucket = 0;
      try {
        bucket = std::stoi(req.get_param_value("bucket"));
      } catch (const std::exception&) {
        throw Error(ErrorCode::kInvalidArgument, "bucket must be an integer");
      }
      std::optional<Date> date;
      if (req.has_param("date")) date = Date::Parse(req.get_param_value("date"));
      return service.Allocation(req.matches[1], bucket, date);
    });
  });
  server.Post(base + "/([^/]+)/whatif", [&](const httplib::Request& req, httplib::Response& res) {
    Handle(res, 200, [&] { return service.WhatIf(req.matches[1], ParseBody(req)); });
  });
  server.Post(base + "/([^/]+)/feedback", [&](const httplib::Request& req,
                                              httplib::Response& res) {
    Handle(res, 200, [&] { return service.Feedback(req.matches[1], ParseBody(req)); });
  });
  server.Get(base + "/([^/]+)/runs/([^/]+)/rewards", [&](const httplib::Request& req,
                                                         httplib::Response& res) {
    Handle(res, 200, [&] { return service.Rewards(req.matches[1], req.matches[2]); });
  });
}

void Serve(ScenarioService& service, const std::string& host, int port) {
  httplib::Server server;
  RegisterRoutes(server, service);
  if (!server.listen(host, port)) {
    throw Error(ErrorCode::kIo, "cannot listen on " + host + ":" + std::to_string(port), {},
                kStage);
  }
}

}  // namespace vacsim::service
