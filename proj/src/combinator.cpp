#include "stratagen/combinator.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <set>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "stratagen/error.hpp"

namespace stratagen::combinator {

using decomp::Assignment;
using decomp::Component;
using decomp::GuardConstraint;

std::string TestCase::canonical() const {
  std::string out;
  for (const auto& [path, value] : assignments) {
    out += path;
    out += '=';
    out += renderValue(value);
    out += '\n';
  }
  return out;
}

std::string KTuple::render() const {
  std::string out = "(";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (i) out += ", ";
    out += paths[i] + "=" + renderValue(values[i]);
  }
  return out + ")";
}

std::vector<std::vector<std::size_t>> kSubsets(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  if (k == 0 || k > n) return out;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

namespace {

/// Odometer over the cartesian product of several value lists.
class Product {
 public:
  explicit Product(std::vector<const std::vector<Value>*> lists) : lists_(std::move(lists)), pos_(lists_.size(), 0) {
    for (const auto* l : lists_) {
      if (l->empty()) done_ = true;
    }
  }

  bool done() const { return done_; }

  std::vector<Value> current() const {
    std::vector<Value> out;
    out.reserve(lists_.size());
    for (std::size_t i = 0; i < lists_.size(); ++i) out.push_back((*lists_[i])[pos_[i]]);
    return out;
  }

  void advance() {
    // Last position varies fastest, matching the row order of a nested loop.
    for (std::size_t i = lists_.size(); i-- > 0;) {
      if (++pos_[i] < lists_[i]->size()) return;
      pos_[i] = 0;
    }
    done_ = true;
  }

 private:
  std::vector<const std::vector<Value>*> lists_;
  std::vector<std::size_t> pos_;
  bool done_ = false;
};

bool guardsHold(const Assignment& a, const Component& c) {
  for (const auto& g : c.guards) {
    auto it = a.find(g.subject);
    if (it == a.end() || !g.holds(it->second)) return false;
  }
  return true;
}

bool inStrata(const Component& c, const Value& v) {
  return std::find(c.values.begin(), c.values.end(), v) != c.values.end();
}

/// Applies guard forcing for one value tuple. Returns false when the tuple
/// cannot be completed.
bool forceGuards(std::span<const std::size_t> selected, std::span<const Component> all,
                 const std::unordered_map<std::string_view, std::size_t>& index, Assignment& a,
                 std::vector<std::size_t>& forced) {
  std::set<std::string, std::less<>> selectedKeys;
  for (std::size_t s : selected) selectedKeys.insert(all[s].key);

  for (std::size_t s : selected) {
    for (const GuardConstraint& g : all[s].guards) {
      auto it = a.find(g.subject);
      if (it == a.end()) {
        a.emplace(g.subject, g.minimalWitness());
        forced.push_back(index.at(g.subject));
        continue;
      }
      if (g.holds(it->second)) continue;
      if (selectedKeys.count(g.subject)) return false;
      // Previously forced: sizes can grow to the larger bound; selectors cannot change.
      if (g.relation != GuardConstraint::Relation::SizeGreaterThan) return false;
      it->second = g.minimalWitness();
    }
  }

  for (std::size_t f : forced) {
    if (!inStrata(all[f], a.at(all[f].key))) return false;
  }
  for (std::size_t s : selected) {
    if (!guardsHold(a, all[s])) return false;
  }
  for (std::size_t f : forced) {
    if (!guardsHold(a, all[f])) return false;
  }
  return true;
}

}  // namespace

std::vector<TestCase> genKTests(std::span<const std::size_t> selected, std::span<const Component> all,
                                RandomStream& rng) {
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < all.size(); ++i) index.emplace(all[i].key, i);

  std::vector<const std::vector<Value>*> lists;
  for (std::size_t s : selected) lists.push_back(&all[s].values);

  std::vector<TestCase> out;
  bool anyTuple = false;
  std::size_t tupleId = 0;
  for (Product product(lists); !product.done(); product.advance(), ++tupleId) {
    anyTuple = true;
    std::vector<Value> tuple = product.current();
    Assignment a;
    for (std::size_t i = 0; i < selected.size(); ++i) a.emplace(all[selected[i]].key, tuple[i]);

    std::vector<std::size_t> forced;
    if (!forceGuards(selected, all, index, a, forced)) continue;

    for (const auto& c : all) {
      if (a.count(c.key)) continue;
      if (!guardsHold(a, c) || c.values.empty()) continue;
      a.emplace(c.key, c.values[rng.below(c.values.size())]);
    }
    out.push_back(TestCase{std::move(a), 0, tupleId});
  }

  if (anyTuple && out.empty()) {
    std::string names;
    for (std::size_t s : selected) names += (names.empty() ? "" : ", ") + all[s].key;
    throw InfeasibleSelection("no feasible value combination for {" + names + "}");
  }
  return out;
}

namespace {

std::vector<std::string> tupleKeys(const TestCase& t, std::size_t k) {
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& [path, value] : t.assignments) entries.emplace_back(path, renderValue(value));
  std::vector<std::string> keys;
  for (const auto& subset : kSubsets(entries.size(), k)) {
    std::string key;
    for (std::size_t i : subset) {
      key += entries[i].first;
      key += '=';
      key += entries[i].second;
      key += '\x1f';
    }
    keys.push_back(std::move(key));
  }
  return keys;
}

}  // namespace

std::vector<TestCase> genSuite(std::span<const Component> components, const SuiteConfig& cfg,
                               const SeededRng& rng) {
  if (cfg.k == 0) throw ConfigError("k must be at least 1");
  if (components.empty()) return {};
  const std::size_t k = std::min(cfg.k, components.size());
  const auto subsets = kSubsets(components.size(), k);

  std::vector<std::vector<TestCase>> perSubset(subsets.size());
  std::vector<std::exception_ptr> errors(subsets.size());
  auto work = [&](std::size_t s) {
    try {
      std::string label = "subset:";
      for (std::size_t i : subsets[s]) label += components[i].key + "|";
      RandomStream stream = rng.streamFor(label);
      auto tests = genKTests(subsets[s], components, stream);
      for (auto& t : tests) t.subsetId = s;
      perSubset[s] = std::move(tests);
    } catch (const InfeasibleSelection&) {
      // mutually exclusive components (e.g. fields of two different variants)
    } catch (...) {
      errors[s] = std::current_exception();
    }
  };

  const std::size_t threads = std::min(std::max<std::size_t>(cfg.parallelism, 1), subsets.size());
  if (threads <= 1) {
    for (std::size_t s = 0; s < subsets.size(); ++s) work(s);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t s = next++; s < subsets.size(); s = next++) work(s);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<TestCase> suite;
  std::unordered_set<std::string> seen;
  for (auto& tests : perSubset) {
    for (auto& t : tests) {
      if (seen.insert(t.canonical()).second) suite.push_back(std::move(t));
    }
  }
  if (cfg.mode == SuiteMode::Full) return suite;

  std::vector<TestCase> reduced;
  std::unordered_set<std::string> covered;
  for (auto& t : suite) {
    bool adds = false;
    for (auto& key : tupleKeys(t, k)) {
      if (covered.insert(std::move(key)).second) adds = true;
    }
    if (adds) reduced.push_back(std::move(t));
  }
  return reduced;
}

namespace {

/// Guard subjects reachable from `start`, closed under the subjects' own guards.
std::vector<std::size_t> guardClosure(std::span<const std::size_t> start, std::span<const Component> all,
                                      const std::unordered_map<std::string_view, std::size_t>& index) {
  std::vector<std::size_t> out;
  std::vector<std::size_t> work(start.begin(), start.end());
  std::set<std::size_t> seen(start.begin(), start.end());
  while (!work.empty()) {
    std::size_t c = work.back();
    work.pop_back();
    for (const auto& g : all[c].guards) {
      std::size_t s = index.at(g.subject);
      if (seen.insert(s).second) {
        out.push_back(s);
        work.push_back(s);
      }
    }
  }
  return out;
}

/// A tuple is feasible iff some assignment of the relevant synthetic
/// components, drawn from their strata, satisfies every guard involved.
bool bruteFeasible(std::span<const std::size_t> subset, const std::vector<Value>& tuple,
                   std::span<const Component> all,
                   const std::unordered_map<std::string_view, std::size_t>& index) {
  std::vector<std::size_t> free = guardClosure(subset, all, index);
  std::vector<const std::vector<Value>*> lists;
  for (std::size_t f : free) lists.push_back(&all[f].values);

  auto check = [&](const std::vector<Value>& freeValues) {
    std::map<std::string, Value, std::less<>> a;
    for (std::size_t i = 0; i < subset.size(); ++i) a[all[subset[i]].key] = tuple[i];
    for (std::size_t i = 0; i < free.size(); ++i) a[all[free[i]].key] = freeValues[i];
    auto holds = [&](std::size_t c) {
      for (const auto& g : all[c].guards) {
        auto it = a.find(g.subject);
        if (it == a.end() || !g.holds(it->second)) return false;
      }
      return true;
    };
    for (std::size_t s : subset) {
      if (!holds(s)) return false;
    }
    for (std::size_t f : free) {
      if (!holds(f)) return false;
    }
    return true;
  };

  if (free.empty()) return check({});
  for (Product p(lists); !p.done(); p.advance()) {
    if (check(p.current())) return true;
  }
  return false;
}

}  // namespace

CoverageReport coverageCheck(std::span<const TestCase> suite, std::span<const Component> components,
                             std::size_t k) {
  CoverageReport report;
  if (k == 0 || k > components.size()) return report;
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < components.size(); ++i) index.emplace(components[i].key, i);

  for (const auto& subset : kSubsets(components.size(), k)) {
    std::vector<const std::vector<Value>*> lists;
    for (std::size_t s : subset) lists.push_back(&components[s].values);
    for (Product p(lists); !p.done(); p.advance()) {
      std::vector<Value> tuple = p.current();
      if (!bruteFeasible(subset, tuple, components, index)) continue;
      ++report.feasibleTuples;
      bool found = std::any_of(suite.begin(), suite.end(), [&](const TestCase& t) {
        for (std::size_t i = 0; i < subset.size(); ++i) {
          auto it = t.assignments.find(components[subset[i]].key);
          if (it == t.assignments.end() || it->second != tuple[i]) return false;
        }
        return true;
      });
      if (!found) {
        KTuple missing;
        for (std::size_t s : subset) missing.paths.push_back(components[s].key);
        missing.values = std::move(tuple);
        report.uncovered.push_back(std::move(missing));
      }
    }
  }
  return report;
}

std::vector<std::string> feasibilityViolations(std::span<const TestCase> suite,
                                               std::span<const Component> components) {
  std::vector<std::string> out;
  for (std::size_t t = 0; t < suite.size(); ++t) {
    const auto& a = suite[t].assignments;
    std::size_t known = 0;
    for (const auto& c : components) {
      bool holds = false;
      try {
        holds = decomp::feasible(a, c);
      } catch (const UnassignedGuardSubject& e) {
        out.push_back("test " + std::to_string(t) + ": " + e.what());
        continue;
      }
      auto it = a.find(c.key);
      bool assigned = it != a.end();
      if (assigned) ++known;
      if (holds && !assigned) out.push_back("test " + std::to_string(t) + ": feasible '" + c.key + "' unassigned");
      if (!holds && assigned) out.push_back("test " + std::to_string(t) + ": infeasible '" + c.key + "' assigned");
      if (assigned && !inStrata(c, it->second)) {
        out.push_back("test " + std::to_string(t) + ": '" + c.key + "' value " + renderValue(it->second) +
                      " outside its strata");
      }
    }
    if (known != a.size()) out.push_back("test " + std::to_string(t) + ": assigns unknown paths");
  }
  return out;
}

}  // namespace stratagen::combinator
