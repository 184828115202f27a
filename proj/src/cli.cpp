#include "stratagen/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>

#include "stratagen/emit.hpp"
#include "stratagen/error.hpp"
#include "stratagen/providers.hpp"
#include "stratagen/rng.hpp"

namespace stratagen::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string readText(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw UnreadableFile("cannot read " + file.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void writeText(const fs::path& file, const std::string& text) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write " + file.string());
  out << text;
}

combinator::SuiteMode parseMode(const std::string& mode) {
  if (mode == "full") return combinator::SuiteMode::Full;
  if (mode == "reduced") return combinator::SuiteMode::Reduced;
  throw ConfigError("mode must be 'full' or 'reduced', got '" + mode + "'");
}

decomp::DecompositionConfig decompositionConfig(const RunConfig& cfg) {
  decomp::DecompositionConfig d;
  d.maxLen = cfg.maxLen;
  d.maxDepth = cfg.maxDepth;
  return d;
}

/// Per-api randomness, so apis sharing parameter names draw independent values.
SeededRng apiRng(const RunConfig& cfg, const spec::ApiSig& api) {
  return SeededRng(splitmix64(cfg.seed ^ stableHash("api:" + api.name)));
}

std::vector<const spec::ApiSig*> selectApis(const RunConfig& cfg, const spec::ApiSpec& spec) {
  std::vector<const spec::ApiSig*> out;
  if (cfg.apis.empty()) {
    for (const auto& a : spec.apis()) out.push_back(&a);
    return out;
  }
  for (const auto& name : cfg.apis) {
    const spec::ApiSig* a = spec.findApi(name);
    if (!a) throw ConfigError("spec has no api named '" + name + "'");
    out.push_back(a);
  }
  return out;
}

std::string fileSafe(std::string_view text) {
  std::string out;
  for (char c : text) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_') ? c : '_';
  return out;
}

struct ProviderResources {
  providers::StaticTable table;
  providers::MockDataset mock;
  bool hasMock = false;
  std::unique_ptr<providers::LlmClient> llm;
  providers::ProviderSet set;
};

void prepareProviders(const RunConfig& cfg, ProviderResources& res) {
  for (const auto& name : cfg.providers) {
    auto kind = providers::providerFromName(name);
    if (!kind) throw ConfigError("unknown provider '" + name + "'");
    res.set.order.push_back(*kind);
  }
  auto wants = [&](providers::ProviderKind k) {
    return std::find(res.set.order.begin(), res.set.order.end(), k) != res.set.order.end();
  };

  if (!cfg.staticTable.empty()) {
    res.table = providers::StaticTable::load(cfg.staticTable);
    res.set.table = &res.table;
  } else if (wants(providers::ProviderKind::Static)) {
    throw ConfigError("the static provider needs --static <file>");
  }

  if (!cfg.mockData.empty()) {
    std::vector<fs::path> files(cfg.mockData.begin(), cfg.mockData.end());
    res.mock = providers::ingestMockData(files);
    res.hasMock = true;
    res.set.mock = &res.mock;
  } else if (wants(providers::ProviderKind::Mock)) {
    throw ConfigError("the mock provider needs --mock-data <file>");
  }

  if (wants(providers::ProviderKind::Llm)) {
    providers::LlmSettings settings;
    settings.endpoint = cfg.llmEndpoint;
    settings.model = cfg.llmModel;
    providers::LlmSettings env;
    env.overlayEnvironment();
    if (settings.endpoint.empty()) settings.endpoint = env.endpoint;
    if (settings.model.empty()) settings.model = env.model;
    settings.apiKey = env.apiKey;
    settings.maxInFlight = static_cast<int>(std::max<std::size_t>(cfg.parallelism, 1));

    if (!cfg.fixtures.empty() && !cfg.record) {
      res.llm = std::make_unique<providers::FixtureLlmClient>(cfg.fixtures);
    } else {
      if (settings.endpoint.empty()) {
        throw ConfigError("the llm provider needs --fixtures <dir> or an endpoint (--llm-endpoint or LLM_ENDPOINT)");
      }
      auto http = std::make_unique<providers::HttpLlmClient>(settings);
      if (cfg.record) {
        res.llm = std::make_unique<providers::RecordingLlmClient>(std::move(http), cfg.fixtures);
      } else {
        res.llm = std::move(http);
      }
    }
    res.set.llm = res.llm.get();
  }
  res.set.cap = cfg.cap;
  res.set.parallelism = cfg.parallelism;
}

ordered_json guardsJson(const decomp::Component& c) {
  ordered_json g = ordered_json::array();
  for (const auto& guard : c.guards) g.push_back(guard.render());
  return g;
}

/// Strata saved by a previous generate run, keyed by api then path.
using SavedStrata = std::map<std::string, std::map<std::string, ordered_json>>;

SavedStrata loadStrata(const fs::path& file) {
  SavedStrata out;
  auto doc = ordered_json::parse(readText(file), nullptr, false);
  if (doc.is_discarded() || !doc.contains("apis")) throw ConfigError("malformed strata file " + file.string());
  for (const auto& api : doc["apis"]) {
    auto& byPath = out[api.at("name").get<std::string>()];
    for (const auto& c : api.at("components")) byPath[c.at("path").get<std::string>()] = c.at("values");
  }
  return out;
}

std::vector<runner::ApiSuite> loadSuite(const RunConfig& cfg, const spec::ApiSpec& spec) {
  fs::path suiteFile = cfg.suitePath;
  auto doc = ordered_json::parse(readText(suiteFile), nullptr, false);
  if (doc.is_discarded() || !doc.contains("apis")) throw ConfigError("malformed suite file " + suiteFile.string());

  SavedStrata strata;
  fs::path strataFile = suiteFile.parent_path() / "strata.json";
  if (fs::exists(strataFile)) strata = loadStrata(strataFile);

  auto dcfg = decompositionConfig(cfg);
  std::vector<runner::ApiSuite> out;
  for (const auto& entry : doc["apis"]) {
    std::string name = entry.at("name").get<std::string>();
    const spec::ApiSig* api = spec.findApi(name);
    if (!api) throw ConfigError("suite names api '" + name + "' which the spec lacks");
    runner::ApiSuite s{*api, decomp::decomposeApi(spec, *api, dcfg), {}};
    auto saved = strata.find(name);
    for (auto& c : s.decomposition.components) {
      if (c.isSynthetic() || saved == strata.end()) continue;
      auto it = saved->second.find(c.key);
      if (it == saved->second.end()) continue;
      for (const auto& v : it->second) {
        if (auto value = valueFromJson(v, c.kind)) c.values.push_back(*value);
      }
    }
    for (const auto& t : entry.at("tests")) {
      combinator::TestCase tc;
      tc.subsetId = t.value("subset", std::size_t{0});
      tc.tupleId = t.value("tuple", std::size_t{0});
      for (const auto& [path, value] : t.at("assignments").items()) {
        const decomp::Component* c = s.decomposition.find(path);
        if (!c) throw ConfigError("suite assigns unknown path '" + path + "' in api '" + name + "'");
        auto decoded = valueFromJson(value, c->kind);
        if (!decoded) throw ConfigError("suite value for '" + path + "' does not fit " + std::string(kindName(c->kind)));
        tc.assignments.emplace(path, *decoded);
      }
      s.tests.push_back(std::move(tc));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<runner::ApiSuite> obtainSuites(const RunConfig& cfg, spec::ApiSpec& spec) {
  if (!cfg.suitePath.empty()) {
    spec = spec::parseSpec(readText(cfg.specPath));
    return loadSuite(cfg, spec);
  }
  Generated g = runGenerate(cfg);
  spec = std::move(g.spec);
  return std::move(g.suites);
}

}  // namespace

void RunConfig::validate() const {
  if (specPath.empty()) throw ConfigError("--spec is required");
  if (k == 0) throw ConfigError("-k must be at least 1");
  decompositionConfig(*this).validate();
  parseMode(mode);
  if (providers.empty()) throw ConfigError("at least one provider is required");
  for (const auto& p : providers) {
    if (!providers::providerFromName(p)) throw ConfigError("unknown provider '" + p + "'");
  }
  if (cap == 0) throw ConfigError("--cap must be at least 1");
  if (record && fixtures.empty()) throw ConfigError("--record needs --fixtures <dir>");
  if (budgetSecs && *budgetSecs < 0) throw ConfigError("--budget-secs must not be negative");
}

ordered_json RunConfig::toJson() const {
  ordered_json j;
  j["spec"] = specPath;
  j["api"] = apis;
  j["k"] = k;
  j["max-len"] = maxLen;
  j["max-depth"] = maxDepth;
  j["providers"] = providers;
  j["seed"] = seed;
  j["mode"] = mode;
  j["cap"] = cap;
  j["parallelism"] = parallelism;
  j["mock-data"] = mockData;
  j["static"] = staticTable;
  j["fixtures"] = fixtures;
  j["record"] = record;
  j["llm-endpoint"] = llmEndpoint;
  j["llm-model"] = llmModel;
  j["out"] = outDir;
  j["suite"] = suitePath;
  j["base-url"] = baseUrl;
  if (budgetSecs) j["budget-secs"] = *budgetSecs;
  j["dry-run"] = dryRun;
  j["exec-parallelism"] = execParallelism;
  return j;
}

ordered_json suiteToJson(const RunConfig& cfg, const std::vector<runner::ApiSuite>& suites) {
  ordered_json doc;
  doc["seed"] = cfg.seed;
  doc["k"] = cfg.k;
  doc["mode"] = cfg.mode;
  ordered_json apis = ordered_json::array();
  for (const auto& s : suites) {
    ordered_json a;
    a["name"] = s.api.name;
    a["verb"] = std::string(spec::verbName(s.api.verb));
    a["route"] = s.api.route;
    ordered_json tests = ordered_json::array();
    for (const auto& t : s.tests) {
      ordered_json entry;
      entry["subset"] = t.subsetId;
      entry["tuple"] = t.tupleId;
      ordered_json assignments = ordered_json::object();
      for (const auto& [path, value] : t.assignments) assignments[path] = valueToJson(value);
      entry["assignments"] = std::move(assignments);
      tests.push_back(std::move(entry));
    }
    a["tests"] = std::move(tests);
    apis.push_back(std::move(a));
  }
  doc["apis"] = std::move(apis);
  return doc;
}

ordered_json strataToJson(const std::vector<runner::ApiSuite>& suites) {
  ordered_json doc;
  ordered_json apis = ordered_json::array();
  for (const auto& s : suites) {
    ordered_json a;
    a["name"] = s.api.name;
    ordered_json comps = ordered_json::array();
    for (const auto& c : s.decomposition.components) {
      ordered_json e;
      e["path"] = c.key;
      e["kind"] = c.describeKind();
      e["guards"] = guardsJson(c);
      ordered_json values = ordered_json::array();
      for (const auto& v : c.values) values.push_back(valueToJson(v));
      e["values"] = std::move(values);
      e["sources"] = c.sources;
      if (!c.notes.empty()) e["notes"] = c.notes;
      comps.push_back(std::move(e));
    }
    a["components"] = std::move(comps);
    ordered_json cuts = ordered_json::array();
    for (const auto& cut : s.decomposition.cuts) cuts.push_back(cut.path);
    a["cuts"] = std::move(cuts);
    apis.push_back(std::move(a));
  }
  doc["apis"] = std::move(apis);
  return doc;
}

Generated runGenerate(const RunConfig& cfg) {
  cfg.validate();
  Generated out;
  out.spec = spec::parseSpec(readText(cfg.specPath));

  ProviderResources res;
  prepareProviders(cfg, res);

  std::mutex promptMutex;
  std::map<std::string, std::string> prompts;
  const spec::ApiSig* currentApi = nullptr;
  res.set.onPrompt = [&](const decomp::Component& c, const std::string& prompt) {
    std::lock_guard lock(promptMutex);
    prompts[fileSafe(currentApi->name) + "__" + fileSafe(c.key) + ".txt"] = prompt;
  };

  combinator::SuiteConfig scfg;
  scfg.k = cfg.k;
  scfg.mode = parseMode(cfg.mode);
  scfg.parallelism = cfg.parallelism;

  const auto dcfg = decompositionConfig(cfg);
  std::string dump;
  for (const spec::ApiSig* api : selectApis(cfg, out.spec)) {
    currentApi = api;
    runner::ApiSuite s{*api, decomp::decomposeApi(out.spec, *api, dcfg), {}};
    SeededRng rng = apiRng(cfg, *api);
    providers::fillStrata(s.decomposition, res.set, rng, out.spec, *api);
    s.tests = combinator::genSuite(s.decomposition.components, scfg, rng);
    if (s.decomposition.components.empty()) s.tests.push_back({});
    if (s.tests.size() > 10000) {
      out.warnings.push_back("suite for '" + api->name + "' has " + std::to_string(s.tests.size()) +
                             " tests; consider a smaller k, --max-len or --mode reduced");
    }
    if (cfg.k > s.decomposition.components.size() && !s.decomposition.components.empty()) {
      out.warnings.push_back("api '" + api->name + "' has only " + std::to_string(s.decomposition.components.size()) +
                             " components; k lowered to match");
    }
    dump += "# api " + api->name + "\n" + decomp::dumpComponents(s.decomposition);
    out.suites.push_back(std::move(s));
  }

  if (!cfg.outDir.empty()) {
    fs::path dir = cfg.outDir;
    fs::create_directories(dir);
    writeText(dir / "run_config.json", cfg.toJson().dump(2) + "\n");
    writeText(dir / "decomposition.txt", dump);
    writeText(dir / "strata.json", strataToJson(out.suites).dump(2) + "\n");
    writeText(dir / "suite.json", suiteToJson(cfg, out.suites).dump(2) + "\n");
    if (!prompts.empty()) {
      for (const auto& [name, text] : prompts) writeText(dir / "prompts" / name, text);
    }
  }
  return out;
}

runner::RunReport runExecute(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.baseUrl.empty() && !cfg.dryRun) throw ConfigError("execute needs --base-url or --dry-run");
  spec::ApiSpec spec;
  auto suites = obtainSuites(cfg, spec);

  runner::ExecutionSettings settings;
  settings.baseUrl = cfg.baseUrl;
  settings.budgetSecs = cfg.budgetSecs;
  settings.dryRun = cfg.dryRun;
  settings.parallelism = cfg.execParallelism;
  settings.decomposition = decompositionConfig(cfg);
  fs::path dir = cfg.outDir.empty() ? fs::path(".") : fs::path(cfg.outDir);
  settings.requestDir = dir / "requests";

  runner::RunReport report = runner::executeSuite(spec, suites, settings);
  fs::create_directories(dir);
  writeText(dir / "run_config.json", cfg.toJson().dump(2) + "\n");
  writeText(dir / "report.json", report.toJson().dump(2) + "\n");
  return report;
}

bool CheckResult::clean() const {
  for (const auto& a : apis) {
    if (!a.coverage.uncovered.empty() || !a.violations.empty()) return false;
  }
  return true;
}

ordered_json CheckResult::toJson() const {
  ordered_json doc;
  doc["clean"] = clean();
  ordered_json list = ordered_json::array();
  for (const auto& a : apis) {
    ordered_json e;
    e["api"] = a.api;
    e["tests"] = a.tests;
    e["feasibleTuples"] = a.coverage.feasibleTuples;
    ordered_json uncovered = ordered_json::array();
    for (const auto& t : a.coverage.uncovered) uncovered.push_back(t.render());
    e["uncovered"] = std::move(uncovered);
    e["violations"] = a.violations;
    list.push_back(std::move(e));
  }
  doc["apis"] = std::move(list);
  return doc;
}

CheckResult runCheck(const RunConfig& cfg) {
  cfg.validate();
  spec::ApiSpec spec;
  auto suites = obtainSuites(cfg, spec);
  CheckResult result;
  for (const auto& s : suites) {
    CheckResult::PerApi entry;
    entry.api = s.api.name;
    entry.tests = s.tests.size();
    const auto& comps = s.decomposition.components;
    entry.coverage = combinator::coverageCheck(s.tests, comps, std::min(cfg.k, comps.size()));
    entry.violations = combinator::feasibilityViolations(s.tests, comps);
    result.apis.push_back(std::move(entry));
  }
  if (!cfg.outDir.empty()) writeText(fs::path(cfg.outDir) / "coverage.json", result.toJson().dump(2) + "\n");
  return result;
}

std::string runDumpComponents(const RunConfig& cfg) {
  if (cfg.specPath.empty()) throw ConfigError("--spec is required");
  auto dcfg = decompositionConfig(cfg);
  dcfg.validate();
  spec::ApiSpec spec = spec::parseSpec(readText(cfg.specPath));
  std::string out;
  for (const spec::ApiSig* api : selectApis(cfg, spec)) {
    out += "# api " + api->name + "\n" + decomp::dumpComponents(decomp::decomposeApi(spec, *api, dcfg));
  }
  return out;
}

namespace {

/// Reads --config files as JSON objects whose keys are long flag names.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool defaultAlso, bool, std::string) const override {
    ordered_json j;
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      std::string name = opt->get_lnames()[0];
      if (opt->count() > 0) {
        auto results = opt->results();
        j[name] = results.size() == 1 ? ordered_json(results[0]) : ordered_json(results);
      } else if (defaultAlso && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    ordered_json j = ordered_json::parse(input, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalarText(key, v));
        if (item.inputs.empty()) continue;
      } else {
        item.inputs.push_back(scalarText(key, value));
      }
      if (value.is_string() && value.get<std::string>().empty()) continue;
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  static std::string scalarText(const std::string& key, const ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) return v.dump();
    throw CLI::ConversionError("config key '" + key + "' must be a scalar or an array of scalars");
  }
};

void writeError(std::ostream& err, const std::string& code, const std::string& message,
                ordered_json extra = ordered_json::object()) {
  ordered_json rec;
  rec["error"] = code;
  rec["message"] = message;
  for (auto& [k, v] : extra.items()) rec[k] = v;
  err << rec.dump() << '\n';
}

}  // namespace

int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structured REST API test generator"};
  app.name("stratagen");
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file mirroring the command-line flags");

  RunConfig cfg;
  double budget = -1;
  app.add_option("--spec", cfg.specPath, "API specification file");
  app.add_option("--api", cfg.apis, "Restrict to these apis")->delimiter(',');
  app.add_option("-k,--k", cfg.k, "Interaction strength")->capture_default_str();
  app.add_option("--max-len", cfg.maxLen, "Largest collection length")->capture_default_str();
  app.add_option("--max-depth", cfg.maxDepth, "Recursion bound per declaration")->capture_default_str();
  app.add_option("--providers", cfg.providers, "Ordered value providers: random, static, mock, llm")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for all randomness")->capture_default_str();
  app.add_option("--mode", cfg.mode, "full or reduced")->capture_default_str();
  app.add_option("--cap", cfg.cap, "Values kept per component")->capture_default_str();
  app.add_option("--parallelism", cfg.parallelism, "Worker threads for value providers and suite generation")
      ->capture_default_str();
  app.add_option("--mock-data", cfg.mockData, "JSON mock data dumps")->delimiter(',');
  app.add_option("--static", cfg.staticTable, "Static value table");
  app.add_option("--fixtures", cfg.fixtures, "Directory of recorded model responses");
  app.add_flag("--record", cfg.record, "Record model responses into --fixtures");
  app.add_option("--llm-endpoint", cfg.llmEndpoint, "Chat-completions URL (defaults to LLM_ENDPOINT)");
  app.add_option("--llm-model", cfg.llmModel, "Model name (defaults to LLM_MODEL)");
  app.add_option("--out", cfg.outDir, "Output directory")->capture_default_str();
  app.add_option("--suite", cfg.suitePath, "Existing suite.json for execute or check");
  app.add_option("--base-url", cfg.baseUrl, "Target service root, e.g. http://127.0.0.1:8080");
  app.add_option("--budget-secs", budget, "Wall-clock budget for execution");
  app.add_flag("--dry-run", cfg.dryRun, "Write requests to files instead of sending them");
  app.add_option("--exec-parallelism", cfg.execParallelism, "Concurrent requests per api")->capture_default_str();

  auto* generate = app.add_subcommand("generate", "Build strata and the test suite");
  auto* execute = app.add_subcommand("execute", "Run a suite against a service");
  auto* check = app.add_subcommand("check", "Verify k-way coverage and feasibility of a suite");
  auto* dump = app.add_subcommand("dump-components", "Print the decomposition of each api");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    writeError(err, "ConfigError", e.what());
    return 2;
  }
  if (budget >= 0) cfg.budgetSecs = budget;

  try {
    if (*generate) {
      Generated g = runGenerate(cfg);
      for (const auto& w : g.warnings) err << "warning: " << w << '\n';
      std::size_t total = 0;
      for (const auto& s : g.suites) {
        out << s.api.name << ": " << s.decomposition.components.size() << " components, " << s.tests.size()
            << " tests\n";
        total += s.tests.size();
      }
      out << "wrote " << total << " tests to " << (fs::path(cfg.outDir) / "suite.json").string() << '\n';
    } else if (*execute) {
      runner::RunReport report = runExecute(cfg);
      out << report.summaryTable();
    } else if (*check) {
      CheckResult result = runCheck(cfg);
      out << result.toJson().dump(2) << '\n';
      return result.clean() ? 0 : 1;
    } else if (*dump) {
      out << runDumpComponents(cfg);
    }
  } catch (const SyntaxError& e) {
    writeError(err, e.code(), e.what(), {{"line", e.line()}, {"col", e.col()}, {"expected", e.expected()}});
    return 2;
  } catch (const MissingAssignment& e) {
    writeError(err, e.code(), e.what(), {{"path", e.path()}});
    return 2;
  } catch (const RefinementViolation& e) {
    writeError(err, e.code(), e.what(), {{"path", e.path()}});
    return 2;
  } catch (const Error& e) {
    writeError(err, e.code(), e.what());
    return 2;
  } catch (const std::exception& e) {
    writeError(err, "InternalError", e.what());
    return 3;
  }
  return 0;
}

}  // namespace stratagen::cli
