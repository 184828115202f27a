#include "stratagen/runner.hpp"

#include <algorithm>
#include <cctype>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "stratagen/error.hpp"

namespace stratagen::runner {

using nlohmann::ordered_json;
using spec::HttpVerb;

int verbRank(HttpVerb verb) {
  switch (verb) {
    case HttpVerb::Auth: return 0;
    case HttpVerb::Get: return 1;
    case HttpVerb::Post:
    case HttpVerb::Put: return 2;
    case HttpVerb::Delete: return 3;
  }
  return 2;
}

std::string_view httpMethod(HttpVerb verb) {
  switch (verb) {
    case HttpVerb::Get: return "GET";
    case HttpVerb::Put: return "PUT";
    case HttpVerb::Delete: return "DELETE";
    case HttpVerb::Post:
    case HttpVerb::Auth: return "POST";
  }
  return "POST";
}

std::vector<spec::ApiSig> orderEndpoints(std::span<const spec::ApiSig> apis) {
  std::vector<spec::ApiSig> out(apis.begin(), apis.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const spec::ApiSig& a, const spec::ApiSig& b) { return verbRank(a.verb) < verbRank(b.verb); });
  return out;
}

std::string percentEncode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 15];
    }
  }
  return out;
}

namespace {

std::string plainText(const emit::TypedValue& v) {
  if (v.shape == emit::TypedValue::Shape::Primitive) {
    if (const auto* s = std::get_if<std::string>(&v.primitive)) return *s;
    return renderValue(v.primitive);
  }
  return emit::serializeValue(v);
}

}  // namespace

ordered_json PreparedRequest::toJson() const {
  ordered_json j;
  j["verb"] = std::string(spec::verbName(verb));
  j["route"] = target;
  j["body"] = body;
  return j;
}

PreparedRequest prepareRequest(const spec::ApiSig& api,
                               const std::vector<std::pair<std::string, emit::TypedValue>>& args) {
  PreparedRequest req;
  req.verb = api.verb;
  req.target = api.route;
  std::vector<const std::pair<std::string, emit::TypedValue>*> rest;
  for (const auto& arg : args) {
    std::string placeholder = "{" + arg.first + "}";
    auto pos = req.target.find(placeholder);
    if (pos == std::string::npos) {
      rest.push_back(&arg);
      continue;
    }
    req.target.replace(pos, placeholder.size(), percentEncode(plainText(arg.second)));
  }

  if (api.verb == HttpVerb::Get || api.verb == HttpVerb::Delete) {
    req.body = nullptr;
    char sep = req.target.find('?') == std::string::npos ? '?' : '&';
    for (const auto* arg : rest) {
      req.target += sep;
      req.target += percentEncode(arg->first) + "=" + percentEncode(plainText(arg->second));
      sep = '&';
    }
  } else {
    req.body = ordered_json::object();
    for (const auto* arg : rest) req.body[arg->first] = emit::toJson(arg->second);
  }
  return req;
}

std::string statusClass(const RunRecord& r) {
  if (!r.status) return "dry-run";
  if (*r.status == 0) return "transport";
  int c = *r.status / 100;
  if (c < 1 || c > 5) return "other";
  return std::to_string(c) + "xx";
}

std::map<std::string, std::size_t> RunReport::summary() const {
  std::map<std::string, std::size_t> counts;
  for (const char* cls : {"2xx", "3xx", "4xx", "5xx", "transport"}) counts[cls] = 0;
  for (const auto& r : records) ++counts[statusClass(r)];
  return counts;
}

ordered_json RunReport::toJson() const {
  ordered_json j;
  j["planned"] = planned;
  j["executed"] = records.size();
  j["budgetExhausted"] = budgetExhausted;
  j["authFailed"] = authFailed;
  if (requestFiles) j["requestFiles"] = requestFiles;
  ordered_json counts = ordered_json::object();
  for (const auto& [cls, n] : summary()) counts[cls] = n;
  j["summary"] = counts;
  ordered_json list = ordered_json::array();
  for (const auto& r : records) {
    ordered_json e;
    e["api"] = r.api;
    e["verb"] = std::string(spec::verbName(r.verb));
    e["route"] = r.target;
    e["input"] = r.body.empty() ? ordered_json(nullptr) : ordered_json::parse(r.body);
    e["status"] = r.status ? ordered_json(*r.status) : ordered_json(nullptr);
    e["latencyMs"] = r.latencyMs;
    if (!r.error.empty()) e["error"] = r.error;
    list.push_back(std::move(e));
  }
  j["records"] = std::move(list);
  return j;
}

std::string RunReport::summaryTable() const {
  std::ostringstream out;
  char line[64];
  out << "class        count\n";
  for (const auto& [cls, n] : summary()) {
    std::snprintf(line, sizeof line, "%-12s %zu\n", cls.c_str(), n);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-12s %zu of %zu\n", "executed", records.size(), planned);
  out << line;
  if (budgetExhausted) out << "time budget exhausted\n";
  if (authFailed) out << "authentication failed; later calls ran unauthenticated\n";
  return out.str();
}

namespace {

struct Job {
  const ApiSuite* suite;
  std::string body;
  PreparedRequest request;
};

RunRecord send(httplib::Client& client, const Job& job) {
  RunRecord r;
  r.api = job.suite->api.name;
  r.verb = job.request.verb;
  r.target = job.request.target;
  r.body = job.body;

  httplib::Headers headers{{"Accept", "application/json"}};
  auto start = std::chrono::steady_clock::now();
  httplib::Result res = [&] {
    std::string payload = job.request.body.is_null() ? std::string() : job.request.body.dump();
    switch (job.request.verb) {
      case HttpVerb::Get: return client.Get(r.target, headers);
      case HttpVerb::Delete: return client.Delete(r.target, headers);
      case HttpVerb::Put: return client.Put(r.target, headers, payload, "application/json");
      default: return client.Post(r.target, headers, payload, "application/json");
    }
  }();
  r.latencyMs = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (res) {
    r.status = res->status;
  } else {
    r.status = 0;
    r.error = httplib::to_string(res.error());
  }
  return r;
}

}  // namespace

RunReport executeSuite(const spec::ApiSpec& spec, std::span<const ApiSuite> suites,
                       const ExecutionSettings& settings) {
  std::vector<const ApiSuite*> ordered;
  for (const auto& s : suites) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(), [](const ApiSuite* a, const ApiSuite* b) {
    return verbRank(a->api.verb) < verbRank(b->api.verb);
  });

  RunReport report;
  for (const auto* s : ordered) report.planned += s->tests.size();

  const auto start = std::chrono::steady_clock::now();
  auto outOfTime = [&] {
    if (!settings.budgetSecs) return false;
    std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return elapsed.count() >= *settings.budgetSecs;
  };

  if (settings.dryRun) std::filesystem::create_directories(settings.requestDir);

  const std::size_t workers = std::max<std::size_t>(settings.parallelism, 1);
  std::atomic<bool> stopped{false};

  for (const ApiSuite* suite : ordered) {
    if (stopped) break;
    emit::ReconstructContext ctx{spec, settings.decomposition, &suite->decomposition};
    std::vector<Job> jobs;
    jobs.reserve(suite->tests.size());
    for (const auto& t : suite->tests) {
      auto args = emit::reconstructArgs(t.assignments, suite->api, ctx);
      PreparedRequest req = prepareRequest(suite->api, args);
      ordered_json input = ordered_json::object();
      for (const auto& [name, value] : args) input[name] = emit::toJson(value);
      jobs.push_back(Job{suite, input.dump(), std::move(req)});
    }

    std::vector<std::optional<RunRecord>> slots(jobs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      std::unique_ptr<httplib::Client> client;
      for (std::size_t i = next++; i < jobs.size(); i = next++) {
        if (stopped || outOfTime()) {
          stopped = true;
          return;
        }
        if (settings.dryRun) {
          RunRecord r;
          r.api = suite->api.name;
          r.verb = jobs[i].request.verb;
          r.target = jobs[i].request.target;
          r.body = jobs[i].body;
          slots[i] = std::move(r);
          continue;
        }
        if (!client) {
          client = std::make_unique<httplib::Client>(settings.baseUrl);
          client->set_connection_timeout(settings.connectTimeoutSecs, 0);
          client->set_read_timeout(settings.readTimeoutSecs, 0);
        }
        slots[i] = send(*client, jobs[i]);
      }
    };
    if (workers == 1 || settings.dryRun) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < std::min(workers, jobs.size()); ++w) pool.emplace_back(work);
    }

    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (!slots[i]) continue;
      if (settings.dryRun) {
        char name[32];
        std::snprintf(name, sizeof name, "req-%06zu.json", report.requestFiles);
        std::ofstream f(settings.requestDir / name);
        if (!f) throw Error("IoError", "cannot write " + (settings.requestDir / name).string());
        f << jobs[i].request.toJson().dump(2) << '\n';
        ++report.requestFiles;
      }
      if (suite->api.verb == HttpVerb::Auth && statusClass(*slots[i]) != "2xx" && statusClass(*slots[i]) != "dry-run") {
        report.authFailed = true;
      }
      report.records.push_back(std::move(*slots[i]));
    }
  }
  report.budgetExhausted = stopped;
  return report;
}

}  // namespace stratagen::runner
