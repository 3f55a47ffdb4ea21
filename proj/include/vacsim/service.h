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

#ifndef VACSIM_SERVICE_H_
#define VACSIM_SERVICE_H_

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "vacsim/pipeline.h"

namespace httplib {
class Server;
}

// Scenario management over the pipeline: persisted scenarios, background
// training, what-if queries and online bandit feedback.
namespace vacsim::service {

enum class Status { kDraft, kTraining, kReady, kFailed };
std::string ToString(Status status);
Status ParseStatus(const std::string& text);

// One day of observed outcomes for a distribution that was applied.
struct FeedbackEvent {
  Date date;
  // Optional; defaults to the scenario's contexts on its distribution date.
  std::vector<env::StateContext> contexts;
  // Chosen percentages per region.
  std::map<std::string, double> distribution;
  // Next-day change in susceptible persons per region.
  std::map<std::string, double> susceptible_change;
  // 0 means the model's full action range.
  int bucket_size = 0;

  bool operator==(const FeedbackEvent&) const = default;
};

nlohmann::json ToJson(const FeedbackEvent& event);
FeedbackEvent FeedbackFromJson(const nlohmann::json& doc);

// Converts an event into bandit examples. Each region contributes one
// example at the action its percentage maps to, rewarded with exp(-(A - S)^2 / w)
// where S is the region's share of the absolute susceptible change, logged
// with probability 1. `first_round` numbers the examples.
std::vector<bandit::BanditExample> FeedbackExamples(const FeedbackEvent& event,
                                                    const bandit::BanditModel& model,
                                                    const env::FeatureScaling& scaling,
                                                    double reward_width, long long first_round);

// Serial task queue backed by one thread.
class Worker {
 public:
  Worker();
  ~Worker();
  Worker(const Worker&) = delete;
  Worker& operator=(const Worker&) = delete;

  void Post(std::function<void()> task);
  // Blocks until every posted task has finished.
  void Drain();

 private:
  void Loop();

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> tasks_;
  bool busy_ = false;
  bool stop_ = false;
  std::thread thread_;
};

struct Scenario {
  std::string id;
  std::filesystem::path dir;
  std::string series_csv;
  std::string statics_csv;
  nlohmann::json config_doc;
  pipeline::RunConfig config;
  data::Snapshot snapshot;  // as uploaded, all regions

  Status status = Status::kDraft;
  std::optional<Error> failure;

  // Present once ready.
  std::string run_id;
  data::FitMap fits;
  agents::PolicyArtifact policy;
  std::vector<std::vector<env::StateContext>> test_contexts;
  std::vector<bandit::BanditModel> versions;  // versions[k] has version k + 1
  std::vector<FeedbackEvent> feedback;
  long long next_round = 0;

  mutable std::shared_mutex mu;
  Worker worker;
};

class ScenarioService {
 public:
  // Loads every scenario persisted under `data_dir`.
  explicit ScenarioService(std::filesystem::path data_dir);
  ~ScenarioService();

  // Body: {series: csv text, statics: csv text, config: RunConfig json}.
  nlohmann::json Create(const nlohmann::json& body);
  nlohmann::json StartTraining(const std::string& id);
  nlohmann::json Get(const std::string& id) const;
  nlohmann::json Allocation(const std::string& id, int bucket,
                            std::optional<Date> date) const;
  // Overrides: doses, efficacy, bucket_size, date, contexts {region: {feature: value}}.
  nlohmann::json WhatIf(const std::string& id, const nlohmann::json& overrides) const;
  nlohmann::json Feedback(const std::string& id, const nlohmann::json& event);
  nlohmann::json Rewards(const std::string& id, const std::string& run_id) const;

  // Waits for queued jobs of one scenario.
  void Wait(const std::string& id);
  // Hash of everything persisted for a scenario.
  std::string StateDigest(const std::string& id) const;
  std::vector<std::string> Ids() const;
  const bandit::BanditModel& Model(const std::string& id, int version) const;

 private:
  std::shared_ptr<Scenario> Find(const std::string& id) const;
  void Journal(const Scenario& s, const nlohmann::json& entry);
  void Load(const std::filesystem::path& dir);
  void Train(const std::shared_ptr<Scenario>& s);
  void RestoreReady(Scenario& s, const std::string& run_id);

  std::filesystem::path data_dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Scenario>> scenarios_;
  int next_id_ = 1;
};

// HTTP status for an error code.
int HttpStatus(ErrorCode code);
// {code, stage, message, location?}
nlohmann::json ErrorBody(const Error& error);

void RegisterRoutes(httplib::Server& server, ScenarioService& service);
// Blocks serving on host:port.
void Serve(ScenarioService& service, const std::string& host, int port);

}  // namespace vacsim::service

#endif  // VACSIM_SERVICE_H_
