#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stratagen/combinator.hpp"
#include "stratagen/decompose.hpp"
#include "stratagen/emit.hpp"
#include "stratagen/spec.hpp"

namespace stratagen::runner {

/// Stable sort by verb: AUTH, GET, POST and PUT, DELETE.
std::vector<spec::ApiSig> orderEndpoints(std::span<const spec::ApiSig> apis);

int verbRank(spec::HttpVerb verb);

/// HTTP method used on the wire (AUTH calls are POSTs).
std::string_view httpMethod(spec::HttpVerb verb);

struct PreparedRequest {
  spec::HttpVerb verb = spec::HttpVerb::Post;
  std::string target;          // route with placeholders filled and, for GET/DELETE, the query string
  nlohmann::ordered_json body;  // object keyed by parameter name; null when there is none

  nlohmann::ordered_json toJson() const;
};

/// `{name}` segments of the route take the matching parameter; the other
/// parameters form the body (POST, PUT, AUTH) or the query string (GET,
/// DELETE).
PreparedRequest prepareRequest(const spec::ApiSig& api,
                               const std::vector<std::pair<std::string, emit::TypedValue>>& args);

std::string percentEncode(std::string_view text);

/// Tests generated for one api, with the decomposition they came from.
struct ApiSuite {
  spec::ApiSig api;
  decomp::Decomposition decomposition;
  std::vector<combinator::TestCase> tests;
};

struct ExecutionSettings {
  std::string baseUrl;
  std::optional<double> budgetSecs;  // unlimited when unset
  bool dryRun = false;
  std::filesystem::path requestDir;  // dry-run output
  std::size_t parallelism = 1;
  int connectTimeoutSecs = 2;
  int readTimeoutSecs = 10;
  decomp::DecompositionConfig decomposition;
};

struct RunRecord {
  std::string api;
  spec::HttpVerb verb = spec::HttpVerb::Post;
  std::string target;
  std::string body;
  std::optional<int> status;  // unset for dry-run; 0 for transport errors
  double latencyMs = 0;
  std::string error;
};

struct RunReport {
  std::vector<RunRecord> records;
  std::size_t planned = 0;
  std::size_t requestFiles = 0;
  bool budgetExhausted = false;
  bool authFailed = false;

  /// Counts per class: "2xx".."5xx", "transport", "dry-run".
  std::map<std::string, std::size_t> summary() const;
  nlohmann::ordered_json toJson() const;
  std::string summaryTable() const;
};

/// Runs every test in endpoint order, then generation order within an api.
/// Transport failures are recorded and never abort the run.
RunReport executeSuite(const spec::ApiSpec& spec, std::span<const ApiSuite> suites, const ExecutionSettings& settings);

std::string statusClass(const RunRecord& r);

}  // namespace stratagen::runner
