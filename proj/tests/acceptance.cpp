// Acceptance checks for the whole pipeline. Prints one PASS/FAIL line per
// check and exits non-zero if any fails.

#include <chrono>
#include <functional>
#include <iostream>
#include <set>
#include <thread>

#include <httplib.h>
#include <toy_service.hpp>

#include "stratagen/cli.hpp"
#include "stratagen/combinator.hpp"
#include "stratagen/emit.hpp"
#include "stratagen/providers.hpp"
#include "support.hpp"

using namespace stratagen;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct Failure {
  std::string why;
};

void require(bool ok, const std::string& why) {
  if (!ok) throw Failure{why};
}

std::string specFile(const std::string& name) { return (fs::path(STRATAGEN_SOURCE_DIR) / "specs" / name).string(); }

ordered_json readJson(const fs::path& p) { return ordered_json::parse(testing::readFile(p)); }

struct CliOutcome {
  int code = 0;
  std::string out;
  std::string err;
};

CliOutcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "stratagen");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliOutcome o;
  o.code = cli::runCli(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

void requireCli(const CliOutcome& o, const std::string& what) {
  require(o.code == 0, what + " exited " + std::to_string(o.code) + ": " + o.err);
}

double secondsSince(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

const ordered_json& strataFor(const ordered_json& strata, const std::string& path) {
  for (const auto& api : strata["apis"]) {
    for (const auto& c : api["components"]) {
      if (c["path"] == path) return c;
    }
  }
  throw Failure{"no strata for " + path};
}

/// Two integer parameters, pairwise.
void pairwiseTable() {
  auto start = std::chrono::steady_clock::now();
  auto s = spec::parseSpec(testing::readFile(specFile("pressure.bsqapi")));
  auto d = decomp::decomposeApi(s, s.apis()[0], {});
  testing::setStrata(d, {{"pressure.value", {std::int64_t{0}, std::int64_t{42}}},
                         {"temperature.value", {std::int64_t{0}, std::int64_t{200}, std::int64_t{400}}}});
  auto suite = combinator::genSuite(d.components, {}, SeededRng(0));
  auto report = combinator::coverageCheck(suite, d.components, 2);
  double elapsed = secondsSince(start);

  std::set<std::pair<std::int64_t, std::int64_t>> pairs;
  for (const auto& t : suite) {
    require(t.assignments.size() == 2, "test does not assign exactly both parameters");
    pairs.emplace(std::get<std::int64_t>(t.assignments.at("pressure.value")),
                  std::get<std::int64_t>(t.assignments.at("temperature.value")));
  }
  std::set<std::pair<std::int64_t, std::int64_t>> expected = {{0, 0}, {0, 200}, {0, 400}, {42, 0}, {42, 200}, {42, 400}};
  require(suite.size() == 6, "expected 6 tests, got " + std::to_string(suite.size()));
  require(pairs == expected, "pairs differ from the expected six");
  require(report.uncovered.empty(), std::to_string(report.uncovered.size()) + " uncovered pairs");
  require(elapsed < 1.0, "took " + std::to_string(elapsed) + " s");
}

/// Static strata for TempRange and the nine reconstructed values.
void tempRangeTables() {
  auto s = spec::parseSpec(testing::readFile(specFile("forecast.bsqapi")));
  spec::ApiSig api;
  api.name = "checkTempRange";
  api.params = {{"v", spec::TypeRef::named("TempRange")}};
  auto d = decomp::decomposeApi(s, api, {});
  auto table = providers::StaticTable::load(specFile("temp_range_static.json"));
  providers::ProviderSet p;
  p.order = {providers::ProviderKind::Static};
  p.table = &table;
  providers::fillStrata(d, p, SeededRng(0), s, api);
  require(testing::component(d, "v.low.value").values ==
              std::vector<Value>{std::int64_t{-10}, std::int64_t{0}, std::int64_t{42}},
          "low strata differ");
  require(testing::component(d, "v.high.value").values ==
              std::vector<Value>{std::int64_t{32}, std::int64_t{60}, std::int64_t{80}},
          "high strata differ");

  auto suite = combinator::genSuite(d.components, {}, SeededRng(0));
  require(suite.size() == 9, "expected 9 tests, got " + std::to_string(suite.size()));
  emit::ReconstructContext ctx{s, {}, &d};
  std::set<std::string> got;
  for (const auto& t : suite) {
    auto v = emit::reconstructValue(t.assignments, api.params[0].type, "v", ctx);
    require(v.shape == emit::TypedValue::Shape::Entity && v.typeName == "TempRange", "value is not a TempRange");
    got.insert(emit::serializeValue(v));
  }
  std::set<std::string> expected;
  for (int low : {-10, 0, 42}) {
    for (int high : {32, 60, 80}) {
      expected.insert(R"({"low":)" + std::to_string(low) + R"(,"high":)" + std::to_string(high) + "}");
    }
  }
  require(got == expected, "reconstructed TempRange values differ");
}

/// Component dump of the forecast api.
void goldenDecomposition() {
  auto o = cli({"dump-components", "--spec", specFile("forecast.bsqapi")});
  requireCli(o, "dump-components");
  const std::string expected =
      "# api recommendedActivities\n"
      "v.temp.low.value  Int  {}\n"
      "v.temp.high.value  Int  {}\n"
      "v.windSpeed.min.value  Nat  {}\n"
      "v.windSpeed.max.value  Nat  {}\n"
      "v.info@type  Selector{Sunny,Cloudy,Precip}  {}\n"
      "v.info@Precip.stormWatch  Bool{false,true}  {v.info@type = Precip}\n"
      "v.hourlyPrecip@length  Nat{0,1,2,3}  {}\n"
      "v.hourlyPrecip[0].value  Nat($value <= 100n)  {v.hourlyPrecip@length > 0}\n"
      "v.hourlyPrecip[1].value  Nat($value <= 100n)  {v.hourlyPrecip@length > 1}\n"
      "v.hourlyPrecip[2].value  Nat($value <= 100n)  {v.hourlyPrecip@length > 2}\n";
  require(o.out == expected, "dump differs:\n" + o.out);
}

struct SweepSuites {
  std::vector<std::pair<std::vector<decomp::Component>, std::vector<combinator::TestCase>>> all;
};

SweepSuites& sweep() {
  static SweepSuites s;
  return s;
}

/// Random small apis: every feasible pair covered in Full and Reduced suites.
void pairwiseProperty() {
  auto start = std::chrono::steady_clock::now();
  std::mt19937_64 gen(20240611);
  std::size_t guarded = 0;
  for (int i = 0; i < 200; ++i) {
    auto api = testing::randomApi(gen, 6);
    const auto& comps = api.decomposition.components;
    for (const auto& c : comps) {
      require(c.values.size() <= 4, "component with more than four values");
      if (!c.guards.empty()) ++guarded;
    }
    std::size_t k = std::min<std::size_t>(2, comps.size());
    auto expected = testing::reachableTuples(comps, k);

    combinator::SuiteConfig full;
    full.k = k;
    combinator::SuiteConfig reduced = full;
    reduced.mode = combinator::SuiteMode::Reduced;
    auto f = combinator::genSuite(comps, full, SeededRng(i));
    auto r = combinator::genSuite(comps, reduced, SeededRng(i));

    for (const auto* suite : {&f, &r}) {
      auto covered = testing::coveredTuples(*suite, comps, k);
      std::size_t missing = 0;
      for (const auto& t : expected) missing += covered.count(t) == 0;
      require(missing == 0, std::to_string(missing) + " uncovered feasible pairs in\n" + api.text);
      require(combinator::coverageCheck(*suite, comps, k).uncovered.empty(), "coverage check disagrees on\n" + api.text);
    }
    std::set<std::string> fullSet;
    for (const auto& t : f) fullSet.insert(t.canonical());
    for (const auto& t : r) require(fullSet.count(t.canonical()) == 1, "reduced test missing from full suite");
    sweep().all.emplace_back(comps, f);
    sweep().all.emplace_back(comps, std::move(r));
  }
  require(guarded > 0, "no guarded components were generated");
  double elapsed = secondsSince(start);
  require(elapsed < 60.0, "took " + std::to_string(elapsed) + " s");
}

std::vector<std::pair<spec::ApiSpec, std::vector<runner::ApiSuite>>> forecastSuites() {
  std::vector<std::pair<spec::ApiSpec, std::vector<runner::ApiSuite>>> out;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    for (std::size_t k : {1u, 2u, 3u}) {
      cli::RunConfig cfg;
      cfg.specPath = specFile("forecast.bsqapi");
      cfg.seed = seed;
      cfg.k = k;
      cfg.mode = seed % 2 ? "reduced" : "full";
      testing::TempDir dir("sweep");
      cfg.outDir = dir.path().string();
      auto g = cli::runGenerate(cfg);
      out.emplace_back(std::move(g.spec), std::move(g.suites));
    }
  }
  return out;
}

/// No test assigns an element without a long enough list or a variant field
/// without its selector.
void feasibilitySoundness() {
  std::size_t tests = 0;
  for (const auto& [comps, suite] : sweep().all) {
    auto v = combinator::feasibilityViolations(suite, comps);
    require(v.empty(), v.empty() ? "" : v.front());
    tests += suite.size();
  }
  for (const auto& [spec, suites] : forecastSuites()) {
    for (const auto& s : suites) {
      auto v = combinator::feasibilityViolations(s.tests, s.decomposition.components);
      require(v.empty(), v.empty() ? "" : v.front());
      for (const auto& t : s.tests) {
        for (const auto& c : s.decomposition.components) {
          for (const auto& g : c.guards) {
            if (!t.assignments.count(c.key)) continue;
            require(t.assignments.count(g.subject) && g.holds(t.assignments.at(g.subject)),
                    c.key + " assigned without " + g.render());
          }
        }
      }
      tests += s.tests.size();
    }
  }
  require(tests > 0, "no tests were checked");
}

/// Every reconstructed leaf passes its refinement; percentages stay within 0..100.
void refinementSoundness() {
  std::size_t precip = 0;
  for (auto& [spec, suites] : forecastSuites()) {
    for (const auto& s : suites) {
      emit::ReconstructContext ctx{spec, {}, &s.decomposition};
      for (const auto& t : s.tests) {
        auto args = emit::reconstructArgs(t.assignments, s.api, ctx);
        for (std::size_t i = 0; i < args.size(); ++i) {
          const auto& value = args[i].second;
          require(emit::refinementsHold(spec, value, s.api.params[i].type),
                  "refinement fails in " + emit::serializeValue(value));
          auto wire = emit::toJson(value);
          for (const auto& pct : wire["hourlyPrecip"]) {
            require(pct.is_number_integer() && pct.get<std::int64_t>() >= 0 && pct.get<std::int64_t>() <= 100,
                    "percentage out of range: " + pct.dump());
            ++precip;
          }
        }
      }
    }
  }
  require(precip > 0, "no percentages were generated");

  auto s = spec::parseSpec(testing::readFile(specFile("forecast.bsqapi")));
  auto d = decomp::decomposeApi(s, s.apis()[0], {});
  struct Wild : providers::LlmClient {
    std::string complete(const providers::LlmRequest&) override { return "[250, 101, 100, -4, 7]"; }
  } wild;
  providers::ProviderSet p;
  p.order = {providers::ProviderKind::Llm};
  p.llm = &wild;
  providers::fillStrata(d, p, SeededRng(0), s, s.apis()[0]);
  for (const char* key : {"v.hourlyPrecip[0].value", "v.hourlyPrecip[1].value", "v.hourlyPrecip[2].value"}) {
    require(testing::component(d, key).values == std::vector<Value>{std::int64_t{100}, std::int64_t{7}},
            std::string("model values not filtered for ") + key);
  }
}

/// Same inputs give byte-identical outputs; provider parallelism changes nothing.
void determinism() {
  testing::TempDir fixtures("det-fixtures");
  auto s = spec::parseSpec(testing::readFile(specFile("forecast.bsqapi")));
  auto d = decomp::decomposeApi(s, s.apis()[0], {});
  std::size_t n = 0;
  for (const auto& c : d.components) {
    if (c.isSynthetic()) continue;
    auto prompt = providers::buildPrompt(c, s, s.apis()[0], nullptr).render();
    std::string reply = c.kind == PrimitiveKind::Bool ? "[true]" : "[" + std::to_string(++n) + ", 3, 50]";
    testing::writeFile(fixtures / (providers::promptHash(prompt) + ".txt"), reply);
  }

  std::vector<std::unique_ptr<testing::TempDir>> outs;
  auto gen = [&](std::vector<std::string> extra) {
    outs.push_back(std::make_unique<testing::TempDir>("det"));
    std::vector<std::string> args = {"generate", "--spec", specFile("forecast.bsqapi"), "--seed", "7",
                                     "--providers", "llm,random", "--fixtures", fixtures.path().string(),
                                     "--out", outs.back()->path().string()};
    args.insert(args.end(), extra.begin(), extra.end());
    requireCli(cli(args), "generate");
    return outs.back()->path();
  };
  fs::path a = gen({});
  fs::path b = gen({});
  fs::path c = gen({"--parallelism", "4"});
  for (const char* f : {"suite.json", "strata.json", "decomposition.txt"}) {
    require(testing::readFile(a / f) == testing::readFile(b / f), std::string(f) + " differs between runs");
    require(testing::readFile(a / f) == testing::readFile(c / f), std::string(f) + " differs with parallelism 4");
  }
  require(strataFor(readJson(a / "strata.json"), "v.temp.low.value")["sources"][0] == "llm", "fixtures not used");
}

/// The pairwise pressure suite hits the service's error branch exactly once.
void endToEnd() {
  testing::TempDir dir("e2e");
  requireCli(cli({"generate", "--spec", specFile("pressure.bsqapi"), "--providers", "static", "--static",
                  specFile("pressure_static.json"), "--out", dir.path().string()}),
             "generate");
  toy::ToyService service;
  int port = service.start();
  require(port > 0, "toy service did not start");
  auto o = cli({"execute", "--spec", specFile("pressure.bsqapi"), "--suite", (dir / "suite.json").string(),
                "--base-url", "http://127.0.0.1:" + std::to_string(port), "--out", dir.path().string()});
  service.stop();
  requireCli(o, "execute");
  auto report = readJson(dir / "report.json");
  require(report["records"].size() == 6, "expected 6 requests");
  require(service.errorHits() == 1, "error branch hit " + std::to_string(service.errorHits()) + " times");
  require(report["summary"]["5xx"] == 1, "report shows " + report["summary"].dump());
  std::size_t fiveHundreds = 0;
  for (const auto& r : report["records"]) {
    if (r["status"] == 500) {
      ++fiveHundreds;
      const auto& body = r["input"];
      require(body["pressure"].get<std::int64_t>() < 10 && body["temperature"].get<std::int64_t>() > 300,
              "500 for " + body.dump());
    }
  }
  require(fiveHundreds == 1, "report lists " + std::to_string(fiveHundreds) + " errors");
}

/// Mock data reaches every prompt and feeds identifier strata.
void mockPrompts() {
  httplib::Server model;
  model.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
    ordered_json reply = {{"choices", ordered_json::array({{{"message", {{"content", R"(["x"])"}}}}})}};
    res.set_content(reply.dump(), "application/json");
  });
  int port = model.bind_to_any_port("127.0.0.1");
  std::thread serving([&] { model.listen_after_bind(); });
  model.wait_until_ready();

  testing::TempDir dir("mock-prompts");
  auto o = cli({"generate", "--spec", specFile("people.bsqapi"), "--providers", "llm", "--mock-data",
                specFile("people_mock.json"), "--llm-endpoint",
                "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions", "--out", dir.path().string()});
  model.stop();
  serving.join();
  requireCli(o, "generate with llm");

  std::size_t prompts = 0;
  for (const auto& e : fs::directory_iterator(dir / "prompts")) {
    std::string text = testing::readFile(e.path());
    auto at = text.find("uses mocked data sources");
    require(at != std::string::npos, "no mock block in " + e.path().filename().string());
    for (const auto& id : testing::kPeopleIds) {
      require(text.find(id, at) != std::string::npos, id + " missing from " + e.path().filename().string());
    }
    ++prompts;
  }
  require(prompts >= 8, "only " + std::to_string(prompts) + " prompts written");

  testing::TempDir mockOnly("mock-only");
  requireCli(cli({"generate", "--spec", specFile("people.bsqapi"), "--providers", "mock", "--mock-data",
                  specFile("people_mock.json"), "--out", mockOnly.path().string()}),
             "generate with mock");
  auto strata = readJson(mockOnly / "strata.json");
  std::size_t idComponents = 0;
  for (const auto& api : strata["apis"]) {
    for (const auto& c : api["components"]) {
      if (c["path"] != "id.value" && c["path"] != "person.id") continue;
      std::vector<std::string> values;
      for (const auto& v : c["values"]) values.push_back(v.get<std::string>());
      require(values == testing::kPeopleIds, "id strata for " + api["name"].get<std::string>() + ": " + c["values"].dump());
      ++idComponents;
    }
  }
  require(idComponents == 3, "expected three id components, saw " + std::to_string(idComponents));
}

/// Recorded model responses are replayed; malformed ones fall back.
void fixtureReplay() {
  auto s = spec::parseSpec(testing::readFile(specFile("temp_range.bsqapi")));
  const auto& api = s.apis()[0];
  auto d = decomp::decomposeApi(s, api, {});
  auto promptFor = [&](const char* key) {
    return providers::promptHash(providers::buildPrompt(testing::component(d, key), s, api, nullptr).render());
  };

  testing::TempDir good("fixtures-good");
  testing::writeFile(good / (promptFor("v.low.value") + ".txt"), "[-10, 0, 32, 60]");
  testing::writeFile(good / (promptFor("v.high.value") + ".txt"), "[0, 32, 70, 95, 110]");
  testing::TempDir out("replay");
  requireCli(cli({"generate", "--spec", specFile("temp_range.bsqapi"), "--providers", "llm", "--fixtures",
                  good.path().string(), "--out", out.path().string()}),
             "replay");
  auto strata = readJson(out / "strata.json");
  require(strataFor(strata, "v.low.value")["values"] == ordered_json::parse("[-10, 0, 32, 60]"),
          "low strata " + strataFor(strata, "v.low.value")["values"].dump());
  require(strataFor(strata, "v.high.value")["values"] == ordered_json::parse("[0, 32, 70, 95, 110]"),
          "high strata " + strataFor(strata, "v.high.value")["values"].dump());

  testing::TempDir bad("fixtures-bad");
  testing::writeFile(bad / (promptFor("v.low.value") + ".txt"), "Here you go: -10, 0, 32");
  testing::writeFile(bad / (promptFor("v.high.value") + ".txt"), "{\"values\": [1, 2]}");
  testing::TempDir out2("fallback");
  requireCli(cli({"generate", "--spec", specFile("temp_range.bsqapi"), "--providers", "llm", "--fixtures",
                  bad.path().string(), "--out", out2.path().string()}),
             "malformed replay");
  strata = readJson(out2 / "strata.json");
  for (const char* key : {"v.low.value", "v.high.value"}) {
    const auto& c = strataFor(strata, key);
    require(!c["values"].empty(), std::string("empty strata for ") + key);
    for (const auto& v : c["values"]) require(v.is_number_integer(), std::string("non-integer value for ") + key);
    require(c["sources"][0].get<std::string>().rfind("fallback:", 0) == 0, std::string("no fallback for ") + key);
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void()>>> checks = {
      {"pairwise-table-exact", pairwiseTable},
      {"temp-range-tables-exact", tempRangeTables},
      {"golden-decomposition", goldenDecomposition},
      {"pairwise-coverage-property", pairwiseProperty},
      {"feasibility-soundness", feasibilitySoundness},
      {"refinement-soundness", refinementSoundness},
      {"determinism", determinism},
      {"end-to-end-error-branch", endToEnd},
      {"mock-prompt-property", mockPrompts},
      {"llm-fixture-replay", fixtureReplay},
  };
  int failed = 0;
  for (const auto& [name, check] : checks) {
    try {
      check();
      std::cout << "PASS " << name << '\n';
    } catch (const Failure& f) {
      ++failed;
      std::cout << "FAIL " << name << ": " << f.why << '\n';
    } catch (const std::exception& e) {
      ++failed;
      std::cout << "FAIL " << name << ": unexpected " << e.what() << '\n';
    }
    std::cout.flush();
  }
  return failed == 0 ? 0 : 1;
}
