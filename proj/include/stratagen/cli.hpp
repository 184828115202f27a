#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stratagen/combinator.hpp"
#include "stratagen/decompose.hpp"
#include "stratagen/llm_client.hpp"
#include "stratagen/runner.hpp"
#include "stratagen/spec.hpp"

namespace stratagen::cli {

struct RunConfig {
  std::string specPath;
  std::vector<std::string> apis;  // empty: every api in the spec
  std::size_t k = 2;
  std::size_t maxLen = 3;
  std::size_t maxDepth = 3;
  std::vector<std::string> providers{"random"};
  std::uint64_t seed = 0;
  std::string mode = "full";
  std::size_t cap = 6;
  std::size_t parallelism = 1;  // value providers and suite generation

  std::vector<std::string> mockData;
  std::string staticTable;
  std::string fixtures;
  bool record = false;
  std::string llmEndpoint;
  std::string llmModel;

  std::string outDir = "out";
  std::string suitePath;  // execute/check: reuse a suite.json instead of generating

  std::string baseUrl;
  std::optional<double> budgetSecs;
  bool dryRun = false;
  std::size_t execParallelism = 1;

  /// Throws ConfigError.
  void validate() const;
  /// Resolved settings keyed like the command-line flags; loadable with --config.
  nlohmann::ordered_json toJson() const;
};

struct Generated {
  spec::ApiSpec spec;
  std::vector<runner::ApiSuite> suites;
  std::vector<std::string> warnings;
};

/// Parse, decompose, fill strata and combine. Writes decomposition.txt,
/// strata.json, suite.json, prompts/ and run_config.json into the output
/// directory.
Generated runGenerate(const RunConfig& cfg);

/// Runs a suite (loaded from `suitePath`, or generated) and writes
/// report.json and, for dry runs, requests/.
runner::RunReport runExecute(const RunConfig& cfg);

struct CheckResult {
  struct PerApi {
    std::string api;
    std::size_t tests = 0;
    combinator::CoverageReport coverage;
    std::vector<std::string> violations;
  };
  std::vector<PerApi> apis;

  bool clean() const;
  nlohmann::ordered_json toJson() const;
};

CheckResult runCheck(const RunConfig& cfg);

std::string runDumpComponents(const RunConfig& cfg);

nlohmann::ordered_json suiteToJson(const RunConfig& cfg, const std::vector<runner::ApiSuite>& suites);
nlohmann::ordered_json strataToJson(const std::vector<runner::ApiSuite>& suites);

/// Entry point behind the `stratagen` binary. Returns the process exit code.
int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stratagen::cli
