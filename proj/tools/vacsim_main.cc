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

// vacsim command-line entry point: run, bn-audit, serve.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "vacsim/bn_eval.h"
#include "vacsim/data_io.h"
#include "vacsim/pipeline.h"
#include "vacsim/service.h"

namespace {

using nlohmann::json;
using namespace vacsim;

int RunCommand(const std::string& config_path, const std::string& output, bool quiet) {
  auto config = pipeline::LoadRunConfig(config_path);
  if (!output.empty()) config.output_dir = output;
  auto run = pipeline::RunVacsim(config);
  auto dir = pipeline::WriteRun(run);
  std::cout << dir.string() << "\n";
  if (!quiet) {
    std::cout << "run_id " << run.run_id << "\n";
    for (const auto& [bucket, report] : run.comparisons) {
      std::cout << "bucket " << bucket << " cases_averted_day" << config.horizon_days << " "
                << report.cumulative_difference << "\n";
    }
  }
  return 0;
}

struct AuditOptions {
  std::string input;
  std::string criterion = "both";
  int bootstraps = 501;
  std::uint64_t seed = 1;
  double threshold = 0.5;
  int bins = 3;
  std::string output;
  std::string parent = "vaccine_percent";
  std::string child = "susceptible";
  bool no_blacklist = false;
};

int AuditCommand(const AuditOptions& o) {
  const auto& names = bn::AuditVariables();
  auto columns = bn::ReadAuditColumns(data::ReadFileBytes(o.input), o.input, names);
  auto dataset = bn::Discretize(names, columns, std::vector<int>(names.size(), o.bins));
  // The allocated share is a decision, never an effect of the trajectory.
  bn::Blacklist blacklist =
      o.no_blacklist ? bn::Blacklist{} : bn::Blacklist::NoParentsOf(dataset, "vaccine_percent");

  std::vector<bn::Criterion> criteria;
  if (o.criterion == "both") {
    criteria = {bn::Criterion::kAic, bn::Criterion::kBic};
  } else {
    criteria = {bn::ParseCriterion(o.criterion)};
  }
  if (!o.output.empty()) std::filesystem::create_directories(o.output);

  json verdicts = json::array();
  for (auto c : criteria) {
    auto ensemble = bn::BootstrapEnsemble(dataset, blacklist, c, o.bootstraps, o.seed);
    auto verdict = bn::CheckCausalClaim(ensemble, o.parent, o.child, o.threshold);
    auto edges = bn::FormatEdgeCsv(ensemble);
    if (o.output.empty()) {
      std::cout << "# " << bn::ToString(c) << "\n" << edges;
    } else {
      data::WriteFileBytes(std::filesystem::path(o.output) / ("edges_" + bn::ToString(c) + ".csv"),
                           edges);
    }
    verdicts.push_back({{"criterion", bn::ToString(c)},
                        {"parent", o.parent},
                        {"child", o.child},
                        {"frequency", verdict.frequency},
                        {"threshold", o.threshold},
                        {"holds", verdict.holds},
                        {"bootstraps", ensemble.bootstraps},
                        {"capped_runs", ensemble.capped_runs}});
  }
  json doc = {{"input", o.input},
              {"rows", dataset.rows.size()},
              {"bins", o.bins},
              {"seed", o.seed},
              {"blacklist", o.no_blacklist ? "none" : "no parents of vaccine_percent"},
              {"verdicts", verdicts}};
  if (o.output.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    data::WriteFileBytes(std::filesystem::path(o.output) / "verdict.json", doc.dump(2) + "\n");
    std::cout << doc.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VacSIM vaccine distribution toolkit"};
  app.require_subcommand(1);

  std::string config_path, output;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run the full pipeline from a config file");
  run->add_option("--config", config_path, "Run config JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--output", output, "Output directory (overrides output_dir)");
  run->add_flag("--quiet", quiet, "Only print the run directory");

  AuditOptions audit;
  auto* bn_audit = app.add_subcommand("bn-audit", "Bootstrap Bayesian-network audit");
  bn_audit->add_option("--input", audit.input, "Simulation log CSV")
      ->required()
      ->check(CLI::ExistingFile);
  bn_audit->add_option("--criterion", audit.criterion, "aic, bic or both")
      ->check(CLI::IsMember({"aic", "bic", "both"}));
  bn_audit->add_option("--bootstraps", audit.bootstraps)->check(CLI::PositiveNumber);
  bn_audit->add_option("--seed", audit.seed);
  bn_audit->add_option("--threshold", audit.threshold)->check(CLI::Range(0.0, 1.0));
  bn_audit->add_option("--bins", audit.bins)->check(CLI::Range(2, 20));
  bn_audit->add_option("--parent", audit.parent);
  bn_audit->add_option("--child", audit.child);
  bn_audit->add_option("--output", audit.output, "Directory for edge CSVs and verdict.json");
  bn_audit->add_flag("--no-blacklist", audit.no_blacklist);

  int port = 8080;
  std::string host = "127.0.0.1", data_dir = "vacsim-data";
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--port", port)->check(CLI::Range(1, 65535));
  serve->add_option("--host", host);
  serve->add_option("--data-dir", data_dir);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return RunCommand(config_path, output, quiet);
    if (*bn_audit) return AuditCommand(audit);
    if (*serve) {
      service::ScenarioService svc(data_dir);
      std::cerr << "listening on " << host << ":" << port << "\n";
      service::Serve(svc, host, port);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << service::ErrorBody(e).dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
