#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stratagen/combinator.hpp"
#include "stratagen/decompose.hpp"
#include "stratagen/emit.hpp"
#include "stratagen/spec.hpp"

namespace testing {

inline const char* const kForecastSpec = R"(type Fahrenheit = Int;
type Mph = Nat;
type Percentage = Nat & { invariant $value <= 100n };

entity TempRange { field low: Fahrenheit; field high: Fahrenheit; }
entity WindSpeedRange { field min: Mph; field max: Mph; }

datatype ForecastInfo
of
Sunny { }
| Cloudy { }
| Precip { stormWatch: Bool }
;

entity Forecast {
    field temp: TempRange;
    field windSpeed: WindSpeedRange;
    field info: ForecastInfo;
    field hourlyPrecip: List<Percentage>;
}

api recommendedActivities(v: Forecast): List<String> {

}
)";

inline const char* const kTempRangeSpec = R"(type Fahrenheit = Int;
entity TempRange { field low: Fahrenheit; field high: Fahrenheit; }
api checkTempRange(v: TempRange): Bool;
)";

inline const char* const kPressureSpec = R"(@route POST /check
api check(pressure: Int, temperature: Int): Int;
)";

inline const char* const kPeopleMock = R"([
  {"id": "696f0b92-7477-4ced-a7ef-9e63038b9fc0", "name": "Steve", "age": 27, "createdAt": "2024-01-31T19:34:17:00Z"},
  {"id": "bb4d6e69-5be2-488c-aef0-fc0627d40cf4", "name": "Alice", "age": 25, "createdAt": "2021-09-16T21:39:06:00Z"},
  {"id": "55a62005-0c72-4dd2-a9a6-239d9008c828", "name": "Bob", "age": 22, "createdAt": "2025-02-26T02:50:49:00Z"},
  {"id": "37f8a128-4a0b-423c-8be3-eb13bae56554", "name": "John", "age": 30, "createdAt": "2025-06-16T01:19:32:00Z"}
])";

inline const std::vector<std::string> kPeopleIds = {
    "696f0b92-7477-4ced-a7ef-9e63038b9fc0",
    "bb4d6e69-5be2-488c-aef0-fc0627d40cf4",
    "55a62005-0c72-4dd2-a9a6-239d9008c828",
    "37f8a128-4a0b-423c-8be3-eb13bae56554",
};

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("stratagen-" + tag + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void writeFile(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

inline std::string readFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline stratagen::decomp::Component& component(stratagen::decomp::Decomposition& d, std::string_view key) {
  auto* c = d.find(key);
  if (!c) throw std::runtime_error("no component " + std::string(key));
  return *c;
}

/// Sets strata by hand, leaving synthetic components with their domains.
inline void setStrata(stratagen::decomp::Decomposition& d,
                      const std::map<std::string, std::vector<stratagen::Value>>& strata) {
  for (const auto& [key, values] : strata) {
    auto& c = component(d, key);
    c.values = values;
    c.sources.assign(values.size(), "test");
  }
}

/// Builds components directly for combinator tests: leaves named by key,
/// optional guards.
inline stratagen::decomp::Component leaf(std::string key, std::vector<stratagen::Value> values,
                                         std::vector<stratagen::decomp::GuardConstraint> guards = {}) {
  stratagen::decomp::Component c;
  c.path = stratagen::decomp::ComponentPath(key);
  c.key = std::move(key);
  c.kind = stratagen::PrimitiveKind::Int;
  c.values = std::move(values);
  c.guards = std::move(guards);
  return c;
}

inline stratagen::decomp::GuardConstraint sizeAbove(std::string subject, std::int64_t n) {
  return {std::move(subject), stratagen::decomp::GuardConstraint::Relation::SizeGreaterThan, n, {}};
}

inline stratagen::decomp::GuardConstraint selectorIs(std::string subject, std::string variant) {
  return {std::move(subject), stratagen::decomp::GuardConstraint::Relation::SelectorEquals, 0, std::move(variant)};
}

/// Random small api: one or two parameters mixing primitives, lists and a
/// datatype, decomposed with short lists and strata of at most four values.
/// Retries until there are between one and `maxComponents` components.
struct RandomApi {
  stratagen::spec::ApiSpec spec;
  stratagen::decomp::Decomposition decomposition;
  std::string text;
};

inline RandomApi randomApi(std::mt19937_64& gen, std::size_t maxComponents = 6) {
  using namespace stratagen;
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(gen() % n); };
  const std::vector<std::string> fieldTypes = {"Int", "Bool", "Nat", "List<Int>", "Shape", "Code"};
  for (;;) {
    std::string text =
        "type Code = Int;\n"
        "datatype Shape of Round { r: Int; } | Flag { on: Bool; } | Empty { };\n"
        "entity Rec {";
    std::size_t fields = 1 + pick(3);
    for (std::size_t i = 0; i < fields; ++i) {
      text += " field f" + std::to_string(i) + ": " + fieldTypes[pick(fieldTypes.size())] + ";";
    }
    text += " }\napi probe(";
    std::size_t params = 1 + pick(2);
    for (std::size_t i = 0; i < params; ++i) {
      if (i) text += ", ";
      const std::vector<std::string> paramTypes = {"Rec", "Int", "List<Bool>", "Shape"};
      text += "p" + std::to_string(i) + ": " + paramTypes[pick(paramTypes.size())];
    }
    text += "): Bool;\n";

    RandomApi out;
    out.spec = spec::parseSpec(text);
    decomp::DecompositionConfig cfg;
    cfg.maxLen = 1 + pick(2);
    out.decomposition = decomp::decomposeApi(out.spec, out.spec.apis()[0], cfg);
    auto& comps = out.decomposition.components;
    if (comps.empty() || comps.size() > maxComponents) continue;
    for (auto& c : comps) {
      if (c.isSynthetic()) continue;
      if (c.kind == PrimitiveKind::Bool) {
        c.values = pick(2) ? std::vector<Value>{false, true} : std::vector<Value>{pick(2) == 1};
      } else {
        std::size_t n = 1 + pick(4);
        for (std::size_t i = 0; i < n; ++i) c.values.emplace_back(static_cast<std::int64_t>(i * 7 + pick(5)));
      }
      c.sources.assign(c.values.size(), "test");
    }
    out.text = std::move(text);
    return out;
  }
}

/// Every k-tuple (`path=value|...`) that occurs in some valid whole
/// assignment, found by walking the full product of all strata.
inline std::set<std::string> reachableTuples(const std::vector<stratagen::decomp::Component>& comps, std::size_t k) {
  std::set<std::string> out;
  std::vector<std::size_t> idx(comps.size(), 0);
  for (;;) {
    stratagen::decomp::Assignment a;
    std::vector<std::size_t> present;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      bool ok = true;
      for (const auto& g : comps[i].guards) {
        auto it = a.find(g.subject);
        if (it == a.end() || !g.holds(it->second)) ok = false;
      }
      if (!ok) continue;
      a[comps[i].key] = comps[i].values[idx[i]];
      present.push_back(i);
    }
    for (const auto& subset : stratagen::combinator::kSubsets(comps.size(), k)) {
      std::string key;
      bool all = true;
      for (std::size_t i : subset) {
        auto it = a.find(comps[i].key);
        if (it == a.end()) {
          all = false;
          break;
        }
        key += comps[i].key + "=" + stratagen::renderValue(it->second) + "|";
      }
      if (all) out.insert(key);
    }
    std::size_t pos = comps.size();
    while (pos > 0) {
      --pos;
      if (++idx[pos] < comps[pos].values.size()) break;
      idx[pos] = 0;
      if (pos == 0) return out;
    }
    if (comps.empty()) return out;
  }
}

inline std::set<std::string> coveredTuples(const std::vector<stratagen::combinator::TestCase>& suite,
                                           const std::vector<stratagen::decomp::Component>& comps,
                                    std::size_t k) {
  std::set<std::string> out;
  for (const auto& t : suite) {
    for (const auto& subset : stratagen::combinator::kSubsets(comps.size(), k)) {
      std::string key;
      bool all = true;
      for (std::size_t i : subset) {
        auto it = t.assignments.find(comps[i].key);
        if (it == t.assignments.end()) {
          all = false;
          break;
        }
        key += comps[i].key + "=" + stratagen::renderValue(it->second) + "|";
      }
      if (all) out.insert(key);
    }
  }
  return out;
}

/// Independent wire decoder: rebuilds a TypedValue from serialized JSON
/// using only the declared type.
inline stratagen::emit::TypedValue decodeWire(const stratagen::spec::ApiSpec& spec, const nlohmann::ordered_json& j,
                                              const stratagen::spec::TypeRef& type) {
  using stratagen::emit::TypedValue;
  using stratagen::spec::TypeRef;
  TypedValue t;
  switch (type.form) {
    case TypeRef::Form::Primitive: {
      auto v = stratagen::valueFromJson(j, type.primitive);
      if (!v) throw std::runtime_error("bad primitive " + j.dump());
      return TypedValue::leaf(*v);
    }
    case TypeRef::Form::List:
      t.shape = TypedValue::Shape::Sequence;
      for (const auto& e : j) t.elements.push_back(decodeWire(spec, e, type.args[0]));
      return t;
    case TypeRef::Form::Map:
      t.shape = TypedValue::Shape::Map;
      for (const auto& e : j) {
        t.entries.emplace_back(decodeWire(spec, e.at("key"), type.args[0]),
                               decodeWire(spec, e.at("value"), type.args[1]));
      }
      return t;
    default:
      break;
  }
  const auto& decl = spec.get(type.name);
  if (const auto* a = std::get_if<stratagen::spec::AliasBody>(&decl.body)) {
    t = decodeWire(spec, j, a->target);
  } else if (const auto* e = std::get_if<stratagen::spec::EntityBody>(&decl.body)) {
    t.shape = TypedValue::Shape::Entity;
    for (const auto& f : e->fields) t.fields.emplace_back(f.name, decodeWire(spec, j.at(f.name), f.type));
  } else if (const auto* d = std::get_if<stratagen::spec::DatatypeBody>(&decl.body)) {
    t.shape = TypedValue::Shape::Variant;
    t.variant = j.at("type").get<std::string>();
    for (const auto& v : d->variants) {
      if (v.name != t.variant) continue;
      for (const auto& f : v.fields) t.fields.emplace_back(f.name, decodeWire(spec, j.at(f.name), f.type));
    }
  } else if (const auto* l = std::get_if<stratagen::spec::ListBody>(&decl.body)) {
    t = decodeWire(spec, j, TypeRef::list(l->element));
  } else {
    const auto& m = std::get<stratagen::spec::MapBody>(decl.body);
    t = decodeWire(spec, j, TypeRef::map(m.key, m.value));
  }
  t.typeName = decl.name;
  return t;
}

}  // namespace testing
