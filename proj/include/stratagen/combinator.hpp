#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stratagen/decompose.hpp"
#include "stratagen/rng.hpp"

namespace stratagen::combinator {

struct TestCase {
  decomp::Assignment assignments;
  std::size_t subsetId = 0;  // index of the k-subset in lexicographic order
  std::size_t tupleId = 0;   // index of the value tuple within that subset's product

  /// `path=value` lines sorted by path; the deduplication key.
  std::string canonical() const;
};

enum class SuiteMode { Full, Reduced };

struct SuiteConfig {
  std::size_t k = 2;
  SuiteMode mode = SuiteMode::Full;
  std::size_t parallelism = 1;
};

/// All value combinations of the selected components (indices into `all`),
/// completed into whole tests. Guard subjects of selected components are
/// forced to their smallest satisfying value; every other component whose
/// guards hold is sampled uniformly from its strata, the rest are omitted.
/// Jointly infeasible tuples are skipped; throws InfeasibleSelection when
/// none is feasible.
std::vector<TestCase> genKTests(std::span<const std::size_t> selected, std::span<const decomp::Component> all,
                                RandomStream& rng);

/// Union of genKTests over every k-subset (k clamped to the component
/// count), deduplicated by canonical form. Reduced mode then keeps, in
/// generation order, only tests that add an uncovered k-tuple. Subsets with
/// no feasible tuple contribute nothing.
std::vector<TestCase> genSuite(std::span<const decomp::Component> components, const SuiteConfig& cfg,
                               const SeededRng& rng);

struct KTuple {
  std::vector<std::string> paths;
  std::vector<Value> values;

  std::string render() const;
};

struct CoverageReport {
  std::size_t feasibleTuples = 0;
  std::vector<KTuple> uncovered;
};

/// Enumerates every feasible k-tuple by brute force and reports those that
/// no test contains.
CoverageReport coverageCheck(std::span<const TestCase> suite, std::span<const decomp::Component> components,
                             std::size_t k);

/// Checks that each test assigns exactly the components whose guards hold,
/// with values drawn from their strata. Returns one message per violation.
std::vector<std::string> feasibilityViolations(std::span<const TestCase> suite,
                                               std::span<const decomp::Component> components);

/// Lexicographic k-subsets of {0..n-1}.
std::vector<std::vector<std::size_t>> kSubsets(std::size_t n, std::size_t k);

}  // namespace stratagen::combinator
