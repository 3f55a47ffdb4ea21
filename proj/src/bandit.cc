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

#include "vacsim/bandit.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vacsim/csv.h"

namespace vacsim::bandit {
namespace {

const std::vector<std::string>& LogHeader() {
  static const std::vector<std::string> header = [] {
    std::vector<std::string> h = {"round",  "date",   "region",     "bucket_size",
                                  "action", "reward", "probability"};
    for (int j = 1; j <= env::kNumFeatures; ++j) h.push_back("f" + std::to_string(j));
    return h;
  }();
  return header;
}

std::string LinkName(Link link) {
  return link == Link::kLog ? "log" : "identity";
}

Link ParseLink(const std::string& text) {
  if (text == "log") return Link::kLog;
  if (text == "identity") return Link::kIdentity;
  throw Error(ErrorCode::kSchema, "unknown link '" + text + "'");
}

int ComponentKey(const BanditConfig& config, int bucket_size) {
  return config.per_bucket ? bucket_size : 0;
}

void Solve(Component& c, double ridge) {
  // Ridge is relative to the mean diagonal so that IPS weights do not change
  // its effective strength.
  double scale = std::max(1.0, c.xtwx.trace() / kBasisDims);
  Eigen::MatrixXd a = c.xtwx;
  a.diagonal().array() += ridge * scale;
  c.theta = a.ldlt().solve(c.xtwy);
  if (!c.theta.allFinite()) {
    throw Error(ErrorCode::kDivergence, "bandit regression produced non-finite weights");
  }
}

void Accumulate(BanditModel& model, std::span<const BanditExample> examples) {
  for (const auto& e : examples) e.Validate();
  std::vector<const BanditExample*> order;
  order.reserve(examples.size());
  for (const auto& e : examples) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto* a, const auto* b) { return a->round < b->round; });
  for (const BanditExample* e : order) {
    model.n_actions = std::max(model.n_actions, e->bucket_size);
    Component& c = model.components[ComponentKey(model.config, e->bucket_size)];
    double y = e->reward;
    if (model.config.link == Link::kLog) {
      y = std::log(e->reward);
      if (y < model.config.min_log_reward) continue;
    }
    double w = 1.0 / e->probability;
    Eigen::VectorXd phi =
        Basis(e->context, e->bucket_size,
              static_cast<double>(e->action) / e->bucket_size);
    c.xtwx.selfadjointView<Eigen::Lower>().rankUpdate(phi, w);
    c.xtwy += w * y * phi;
    ++c.count;
  }
  for (auto& [key, c] : model.components) {
    c.xtwx.triangularView<Eigen::StrictlyUpper>() = c.xtwx.transpose();
    Solve(c, model.config.ridge);
  }
}

const Component& FindComponent(const BanditModel& model, int bucket_size) {
  auto it = model.components.find(ComponentKey(model.config, bucket_size));
  if (it == model.components.end()) {
    throw Error(ErrorCode::kNotFound,
                "no bandit component for bucket " + std::to_string(bucket_size));
  }
  return it->second;
}

}  // namespace

void BanditExample::Validate() const {
  if (bucket_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bucket_size must be >= 1", region);
  }
  if (action < 0 || action >= bucket_size) {
    throw Error(ErrorCode::kInvalidArgument,
                "action " + std::to_string(action) + " outside [0, " +
                    std::to_string(bucket_size) + ")",
                "round " + std::to_string(round));
  }
  if (!std::isfinite(reward) || reward <= 0 || reward > 1) {
    throw Error(ErrorCode::kInvalidArgument, "reward must lie in (0, 1]",
                "round " + std::to_string(round));
  }
  if (!std::isfinite(probability) || probability <= 0 || probability > 1) {
    throw Error(ErrorCode::kInvalidArgument, "probability must lie in (0, 1]",
                "round " + std::to_string(round));
  }
  for (double f : context) RequireFinite(f, "bandit context feature");
}

void BanditConfig::Validate() const {
  if (!(epsilon >= 0 && epsilon <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "bandit epsilon must lie in [0, 1]");
  }
  if (!(ridge > 0) || !std::isfinite(ridge)) {
    throw Error(ErrorCode::kInvalidArgument, "ridge must be positive");
  }
}

Eigen::VectorXd Basis(const env::Observation& context, int bucket_size, double u) {
  std::array<double, kContextDims> ctx{};
  ctx[0] = 1.0;
  for (int j = 0; j < env::kNumFeatures; ++j) ctx[j + 1] = context[j];
  ctx[kContextDims - 1] = bucket_size / kReferenceBucket;
  // Legendre polynomials on [-1, 1] keep the cubic basis well conditioned.
  const double t = 2.0 * u - 1.0;
  const std::array<double, kPolyDegree + 1> p = {
      1.0, t, 0.5 * (3.0 * t * t - 1.0), 0.5 * (5.0 * t * t * t - 3.0 * t)};
  Eigen::VectorXd phi(kBasisDims);
  for (int k = 0; k <= kPolyDegree; ++k) {
    for (int j = 0; j < kContextDims; ++j) phi(k * kContextDims + j) = ctx[j] * p[k];
  }
  return phi;
}

BanditModel Train(std::span<const BanditExample> examples,
                  const BanditConfig& config, std::uint64_t /*seed*/) {
  config.Validate();
  if (examples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "bandit training log is empty");
  }
  BanditModel model;
  model.config = config;
  Accumulate(model, examples);
  model.version = 1;
  return model;
}

void Update(BanditModel& model, std::span<const BanditExample> examples) {
  BanditModel next = model;
  Accumulate(next, examples);
  ++next.version;
  model = std::move(next);
}

Prediction Predict(const BanditModel& model, const env::Observation& context,
                   int bucket_size) {
  if (bucket_size == 0) bucket_size = model.n_actions;
  if (bucket_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "prediction needs >= 1 action");
  }
  for (double f : context) RequireFinite(f, "bandit context feature");
  const Component& c = FindComponent(model, bucket_size);
  Prediction out;
  out.scores.resize(bucket_size);
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < bucket_size; ++a) {
    double z = Basis(context, bucket_size, static_cast<double>(a) / bucket_size).dot(c.theta);
    if (z > best) {
      best = z;
      out.action = a;
    }
    out.scores[a] = model.config.link == Link::kLog ? std::exp(std::min(z, 700.0)) : z;
  }
  return out;
}

double LinkScore(const BanditModel& model, const env::Observation& context, int action,
                 int bucket_size) {
  if (bucket_size == 0) bucket_size = model.n_actions;
  if (action < 0 || action >= bucket_size) {
    throw Error(ErrorCode::kInvalidArgument, "action outside [0, bucket_size)");
  }
  for (double f : context) RequireFinite(f, "bandit context feature");
  const Component& c = FindComponent(model, bucket_size);
  return Basis(context, bucket_size, static_cast<double>(action) / bucket_size).dot(c.theta);
}

Choice Act(const BanditModel& model, const env::Observation& context,
           double epsilon, std::mt19937_64& rng, int bucket_size) {
  if (!(epsilon >= 0 && epsilon <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must lie in [0, 1]");
  }
  if (bucket_size == 0) bucket_size = model.n_actions;
  int greedy = Predict(model, context, bucket_size).action;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int action = greedy;
  if (epsilon > 0 && unit(rng) < epsilon) {
    action = std::uniform_int_distribution<int>(0, bucket_size - 1)(rng);
  }
  double p = epsilon / bucket_size + (action == greedy ? 1.0 - epsilon : 0.0);
  return {action, p};
}

void RegretUpdate(RegretRecord& record, double p_star, double expected) {
  double z = std::max(0.0, p_star - expected);
  record.per_round.push_back(z);
  record.cumulative.push_back(record.total() + z);
}

std::vector<BanditExample> ParseLogCsv(std::string_view text, std::string source) {
  csv::Table t = csv::ReadString(text, std::move(source));
  csv::RequireHeader(t, LogHeader());
  std::vector<BanditExample> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    BanditExample e;
    e.round = csv::ParseInt(t, r, 0);
    try {
      e.date = Date::Parse(t.rows[r][1]);
    } catch (const Error& err) {
      throw Error(ErrorCode::kSchema, err.what(), t.Location(r, "date"));
    }
    e.region = t.rows[r][2];
    e.bucket_size = static_cast<int>(csv::ParseInt(t, r, 3));
    e.action = static_cast<int>(csv::ParseInt(t, r, 4));
    e.reward = csv::ParseDouble(t, r, 5);
    e.probability = csv::ParseDouble(t, r, 6);
    for (int j = 0; j < env::kNumFeatures; ++j) e.context[j] = csv::ParseDouble(t, r, 7 + j);
    try {
      e.Validate();
    } catch (const Error& err) {
      throw Error(ErrorCode::kSchema, err.what(), t.Location(r, "action"));
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<BanditExample> ReadLogCsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseLogCsv(buffer.str(), path.string());
}

std::string FormatLogCsv(std::span<const BanditExample> examples) {
  std::string out = csv::JoinRow(LogHeader());
  for (const auto& e : examples) {
    std::vector<std::string> row = {std::to_string(e.round),
                                    e.date.ToString(),
                                    e.region,
                                    std::to_string(e.bucket_size),
                                    std::to_string(e.action),
                                    csv::FormatDouble(e.reward),
                                    csv::FormatDouble(e.probability)};
    for (double f : e.context) row.push_back(csv::FormatDouble(f));
    out += csv::JoinRow(row);
  }
  return out;
}

void WriteLogCsv(const std::filesystem::path& path,
                 std::span<const BanditExample> examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << FormatLogCsv(examples);
}

nlohmann::json ToJson(const BanditModel& model) {
  nlohmann::json components = nlohmann::json::array();
  for (const auto& [key, c] : model.components) {
    std::vector<double> xtwx;
    xtwx.reserve(c.xtwx.size());
    for (Eigen::Index r = 0; r < c.xtwx.rows(); ++r) {
      for (Eigen::Index col = 0; col < c.xtwx.cols(); ++col) xtwx.push_back(c.xtwx(r, col));
    }
    components.push_back(
        {{"bucket", key},
         {"count", c.count},
         {"xtwx", xtwx},
         {"xtwy", std::vector<double>(c.xtwy.data(), c.xtwy.data() + c.xtwy.size())},
         {"theta", std::vector<double>(c.theta.data(), c.theta.data() + c.theta.size())}});
  }
  const auto& cfg = model.config;
  return {{"format", "vacsim.bandit"},
          {"version", 1},
          {"model_version", model.version},
          {"n_actions", model.n_actions},
          {"config",
           {{"epsilon", cfg.epsilon},
            {"ridge", cfg.ridge},
            {"link", LinkName(cfg.link)},
            {"per_bucket", cfg.per_bucket},
            {"min_log_reward", cfg.min_log_reward}}},
          {"components", components}};
}

BanditModel BanditFromJson(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "vacsim.bandit" || doc.at("version") != 1) {
      throw Error(ErrorCode::kSchema, "unsupported bandit document");
    }
    BanditModel m;
    m.version = doc.at("model_version").get<int>();
    m.n_actions = doc.at("n_actions").get<int>();
    const auto& cfg = doc.at("config");
    m.config.epsilon = cfg.at("epsilon").get<double>();
    m.config.ridge = cfg.at("ridge").get<double>();
    m.config.link = ParseLink(cfg.at("link").get<std::string>());
    m.config.per_bucket = cfg.at("per_bucket").get<bool>();
    m.config.min_log_reward = cfg.at("min_log_reward").get<double>();
    m.config.Validate();
    for (const auto& item : doc.at("components")) {
      Component c;
      auto xtwx = item.at("xtwx").get<std::vector<double>>();
      auto xtwy = item.at("xtwy").get<std::vector<double>>();
      auto theta = item.at("theta").get<std::vector<double>>();
      if (xtwx.size() != static_cast<std::size_t>(kBasisDims * kBasisDims) ||
          xtwy.size() != static_cast<std::size_t>(kBasisDims) ||
          theta.size() != static_cast<std::size_t>(kBasisDims)) {
        throw Error(ErrorCode::kSchema, "bandit component has the wrong size");
      }
      for (int r = 0; r < kBasisDims; ++r) {
        for (int col = 0; col < kBasisDims; ++col) c.xtwx(r, col) = xtwx[r * kBasisDims + col];
        c.xtwy(r) = xtwy[r];
        c.theta(r) = theta[r];
      }
      c.count = item.at("count").get<long long>();
      m.components[item.at("bucket").get<int>()] = std::move(c);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("bandit document: ") + e.what());
  }
}

nlohmann::json ExampleToJson(const BanditExample& e) {
  return {{"round", e.round},
          {"date", e.date.ToString()},
          {"region", e.region},
          {"bucket_size", e.bucket_size},
          {"action", e.action},
          {"reward", e.reward},
          {"probability", e.probability},
          {"context", e.context}};
}

BanditExample ExampleFromJson(const nlohmann::json& doc) {
  try {
    BanditExample e;
    e.round = doc.at("round").get<long long>();
    e.date = Date::Parse(doc.at("date").get<std::string>());
    e.region = doc.at("region").get<std::string>();
    e.bucket_size = doc.at("bucket_size").get<int>();
    e.action = doc.at("action").get<int>();
    e.reward = doc.at("reward").get<double>();
    e.probability = doc.at("probability").get<double>();
    e.context = doc.at("context").get<env::Observation>();
    e.Validate();
    return e;
  } catch (const nlohmann::json::exception& err) {
    throw Error(ErrorCode::kSchema, std::string("bandit example: ") + err.what());
  }
}

}  // namespace vacsim::bandit
