#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "stratagen/combinator.hpp"
#include "stratagen/error.hpp"
#include "support.hpp"

using namespace stratagen;
using namespace stratagen::combinator;
using decomp::Assignment;
using decomp::Component;
using testing::coveredTuples;
using testing::leaf;
using testing::reachableTuples;

namespace {

Value I(std::int64_t v) { return Value{v}; }

std::set<std::vector<Value>> projections(const std::vector<TestCase>& suite, const std::vector<std::string>& paths) {
  std::set<std::vector<Value>> out;
  for (const auto& t : suite) {
    std::vector<Value> row;
    for (const auto& p : paths) {
      auto it = t.assignments.find(p);
      if (it == t.assignments.end()) break;
      row.push_back(it->second);
    }
    if (row.size() == paths.size()) out.insert(row);
  }
  return out;
}

Component lengthOf(std::string key, std::int64_t maxLen) {
  Component c = leaf(std::move(key), {});
  c.role = decomp::ComponentRole::Length;
  c.kind = PrimitiveKind::Nat;
  for (std::int64_t i = 0; i <= maxLen; ++i) c.values.push_back(I(i));
  return c;
}

Component selector(std::string key, std::vector<std::string> variants) {
  Component c = leaf(std::move(key), {});
  c.role = decomp::ComponentRole::Selector;
  c.kind = PrimitiveKind::String;
  c.variants = variants;
  for (auto& v : variants) c.values.emplace_back(std::move(v));
  return c;
}

std::set<std::string> canonicals(const std::vector<TestCase>& suite) {
  std::set<std::string> out;
  for (const auto& t : suite) out.insert(t.canonical());
  return out;
}

}  // namespace

TEST_CASE("pairwise suite over two parameters") {
  std::vector<Component> comps = {leaf("pressure.value", {I(0), I(42)}),
                                  leaf("temperature.value", {I(0), I(200), I(400)})};
  auto suite = genSuite(comps, {}, SeededRng(1));
  REQUIRE(suite.size() == 6);
  std::set<std::vector<Value>> expected = {{I(0), I(0)},  {I(0), I(200)},  {I(0), I(400)},
                                           {I(42), I(0)}, {I(42), I(200)}, {I(42), I(400)}};
  CHECK(projections(suite, {"pressure.value", "temperature.value"}) == expected);
  for (const auto& t : suite) CHECK(t.assignments.size() == 2);
}

TEST_CASE("temperature range strata give nine tests") {
  auto s = spec::parseSpec(testing::kTempRangeSpec);
  auto d = decomp::decomposeApi(s, s.apis()[0], {});
  testing::setStrata(d, {{"v.low.value", {I(-10), I(0), I(42)}}, {"v.high.value", {I(32), I(60), I(80)}}});
  auto suite = genSuite(d.components, {}, SeededRng(0));
  CHECK(suite.size() == 9);
  CHECK(projections(suite, {"v.low.value", "v.high.value"}).size() == 9);
  CHECK(coverageCheck(suite, d.components, 2).uncovered.empty());
}

TEST_CASE("test-case generation enumerates the product in order") {
  std::vector<Component> comps = {leaf("a", {I(1), I(2)}), leaf("b", {I(3), I(4)})};
  std::vector<std::size_t> sel = {0, 1};
  auto rng = SeededRng(0).streamFor("x");
  auto tests = genKTests(sel, comps, rng);
  REQUIRE(tests.size() == 4);
  CHECK(tests[0].assignments.at("a") == I(1));
  CHECK(tests[0].assignments.at("b") == I(3));
  CHECK(tests[1].assignments.at("b") == I(4));
  CHECK(tests[2].assignments.at("a") == I(2));
  for (std::size_t i = 0; i < tests.size(); ++i) CHECK(tests[i].tupleId == i);
}

TEST_CASE("guard subjects are forced to satisfy selected elements") {
  std::vector<Component> comps = {lengthOf("xs@length", 3), leaf("xs[0]", {I(50)}, {testing::sizeAbove("xs@length", 0)}),
                                  leaf("xs[1]", {I(7)}, {testing::sizeAbove("xs@length", 1)})};
  std::vector<std::size_t> first = {1};
  auto rng = SeededRng(0).streamFor("x");
  auto tests = genKTests(first, comps, rng);
  REQUIRE(tests.size() == 1);
  CHECK(tests[0].assignments.at("xs@length") == I(1));
  CHECK(tests[0].assignments.at("xs[0]") == I(50));
  CHECK_FALSE(tests[0].assignments.count("xs[1]"));

  std::vector<std::size_t> both = {1, 2};
  tests = genKTests(both, comps, rng);
  REQUIRE(tests.size() == 1);
  CHECK(tests[0].assignments.at("xs@length") == I(2));

  for (std::size_t k : {1u, 2u, 3u}) {
    SuiteConfig cfg;
    cfg.k = k;
    for (const auto& t : genSuite(comps, cfg, SeededRng(k))) {
      if (t.assignments.count("xs[0]")) CHECK(t.assignments.at("xs@length") != I(0));
      if (t.assignments.count("xs[1]")) CHECK(std::get<std::int64_t>(t.assignments.at("xs@length")) > 1);
    }
  }
}

TEST_CASE("selected length and element values combine only when consistent") {
  std::vector<Component> comps = {lengthOf("xs@length", 2), leaf("xs[0]", {I(5)}, {testing::sizeAbove("xs@length", 0)})};
  std::vector<std::size_t> sel = {0, 1};
  auto rng = SeededRng(0).streamFor("x");
  auto tests = genKTests(sel, comps, rng);
  std::set<std::vector<Value>> rows = projections(tests, {"xs@length", "xs[0]"});
  CHECK(rows == std::set<std::vector<Value>>{{I(1), I(5)}, {I(2), I(5)}});
}

TEST_CASE("conflicting selectors make a selection infeasible") {
  std::vector<Component> comps = {selector("s@type", {"A", "B"}), leaf("s@A.x", {I(1)}, {testing::selectorIs("s@type", "A")}),
                                  leaf("s@B.y", {I(2)}, {testing::selectorIs("s@type", "B")})};
  std::vector<std::size_t> sel = {1, 2};
  auto rng = SeededRng(0).streamFor("x");
  CHECK_THROWS_AS(genKTests(sel, comps, rng), InfeasibleSelection);

  auto suite = genSuite(comps, {}, SeededRng(0));
  CHECK_FALSE(suite.empty());
  CHECK(feasibilityViolations(suite, comps).empty());
  auto report = coverageCheck(suite, comps, 2);
  CHECK(report.uncovered.empty());
  CHECK(report.feasibleTuples == 2);
}

TEST_CASE("forced values outside the strata are infeasible") {
  std::vector<Component> comps = {leaf("n", {I(0), I(1)}), leaf("xs[2]", {I(9)}, {testing::sizeAbove("n", 2)})};
  std::vector<std::size_t> sel = {1};
  auto rng = SeededRng(0).streamFor("x");
  CHECK_THROWS_AS(genKTests(sel, comps, rng), InfeasibleSelection);
}

TEST_CASE("k = 1 on a single component") {
  std::vector<Component> comps = {leaf("a", {I(1), I(2), I(3)})};
  SuiteConfig cfg;
  cfg.k = 1;
  CHECK(genSuite(comps, cfg, SeededRng(0)).size() == 3);
}

TEST_CASE("k is clamped to the component count") {
  std::vector<Component> comps = {leaf("a", {I(1), I(2)}), leaf("b", {I(3)})};
  SuiteConfig big;
  big.k = 5;
  SuiteConfig two;
  two.k = 2;
  CHECK(canonicals(genSuite(comps, big, SeededRng(3))) == canonicals(genSuite(comps, two, SeededRng(3))));
  SuiteConfig zero;
  zero.k = 0;
  CHECK_THROWS_AS(genSuite(comps, zero, SeededRng(0)), ConfigError);
  CHECK(genSuite(std::vector<Component>{}, two, SeededRng(0)).empty());
}

TEST_CASE("reduced suite covers every pair of a three by three space") {
  std::vector<Component> comps = {leaf("a", {I(1), I(2), I(3)}), leaf("b", {I(4), I(5), I(6)}),
                                  leaf("c", {I(7), I(8), I(9)})};
  SuiteConfig full;
  SuiteConfig reduced;
  reduced.mode = SuiteMode::Reduced;
  auto f = genSuite(comps, full, SeededRng(2));
  auto r = genSuite(comps, reduced, SeededRng(2));
  CHECK(coveredTuples(r, comps, 2).size() == 27);
  CHECK(coverageCheck(r, comps, 2).uncovered.empty());
  CHECK(r.size() >= 9);
  CHECK(r.size() <= f.size());
  auto fc = canonicals(f);
  for (const auto& t : r) CHECK(fc.count(t.canonical()) == 1);
}

TEST_CASE("coverage check reports pairs a removed test was alone in covering") {
  std::vector<Component> comps = {leaf("a", {I(1), I(2)}), leaf("b", {I(3), I(4)}), leaf("c", {I(5), I(6)})};
  SuiteConfig reduced;
  reduced.mode = SuiteMode::Reduced;
  auto suite = genSuite(comps, reduced, SeededRng(8));
  REQUIRE(coverageCheck(suite, comps, 2).uncovered.empty());

  TestCase removed = suite.back();
  suite.pop_back();
  std::set<std::string> expected = coveredTuples({removed}, comps, 2);
  for (const auto& key : coveredTuples(suite, comps, 2)) expected.erase(key);
  REQUIRE_FALSE(expected.empty());

  std::set<std::string> reported;
  for (const auto& t : coverageCheck(suite, comps, 2).uncovered) {
    std::string key;
    for (std::size_t i = 0; i < t.paths.size(); ++i) key += t.paths[i] + "=" + renderValue(t.values[i]) + "|";
    reported.insert(key);
  }
  CHECK(reported == expected);
}

TEST_CASE("coverage of k above the component count is empty") {
  std::vector<Component> comps = {leaf("a", {I(1)})};
  auto report = coverageCheck({}, comps, 3);
  CHECK(report.feasibleTuples == 0);
  CHECK(report.uncovered.empty());
}

TEST_CASE("feasibility violations are detected") {
  std::vector<Component> comps = {lengthOf("xs@length", 1), leaf("xs[0]", {I(5)}, {testing::sizeAbove("xs@length", 0)})};
  TestCase bad;
  bad.assignments = {{"xs@length", I(0)}, {"xs[0]", I(5)}};
  TestCase missing;
  missing.assignments = {{"xs@length", I(1)}};
  TestCase stray;
  stray.assignments = {{"xs@length", I(1)}, {"xs[0]", I(6)}};
  TestCase good;
  good.assignments = {{"xs@length", I(1)}, {"xs[0]", I(5)}};
  CHECK(feasibilityViolations(std::vector<TestCase>{bad}, comps).size() == 1);
  CHECK(feasibilityViolations(std::vector<TestCase>{missing}, comps).size() == 1);
  CHECK(feasibilityViolations(std::vector<TestCase>{stray}, comps).size() == 1);
  CHECK(feasibilityViolations(std::vector<TestCase>{good}, comps).empty());
}

TEST_CASE("k-subsets are lexicographic") {
  auto s = kSubsets(4, 2);
  CHECK(s == std::vector<std::vector<std::size_t>>{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  CHECK(kSubsets(3, 3).size() == 1);
  CHECK(kSubsets(2, 3).empty());
}

TEST_CASE("suites are deterministic and independent of parallelism") {
  std::mt19937_64 gen(17);
  for (int i = 0; i < 20; ++i) {
    auto api = testing::randomApi(gen);
    SuiteConfig serial;
    SuiteConfig parallel;
    parallel.parallelism = 4;
    auto a = genSuite(api.decomposition.components, serial, SeededRng(i));
    auto b = genSuite(api.decomposition.components, parallel, SeededRng(i));
    REQUIRE(a.size() == b.size());
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j].canonical() == b[j].canonical());
  }
}

TEST_CASE("random apis are fully covered and sound") {
  std::mt19937_64 gen(2024);
  for (int i = 0; i < 60; ++i) {
    auto api = testing::randomApi(gen);
    const auto& comps = api.decomposition.components;
    CAPTURE(api.text);
    for (std::size_t k : {1u, 2u, 3u}) {
      if (k > comps.size()) continue;
      auto expected = reachableTuples(comps, k);
      for (SuiteMode mode : {SuiteMode::Full, SuiteMode::Reduced}) {
        SuiteConfig cfg;
        cfg.k = k;
        cfg.mode = mode;
        auto suite = genSuite(comps, cfg, SeededRng(i));
        auto covered = coveredTuples(suite, comps, k);
        CHECK(covered == expected);
        auto report = coverageCheck(suite, comps, k);
        CHECK(report.uncovered.empty());
        CHECK(report.feasibleTuples == expected.size());
        CHECK(feasibilityViolations(suite, comps).empty());
      }
    }
  }
}
