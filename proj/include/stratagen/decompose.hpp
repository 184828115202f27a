#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stratagen/spec.hpp"
#include "stratagen/value.hpp"

namespace stratagen::decomp {

struct PathSegment {
  enum class Kind {
    Field,       // .name
    Index,       // [i]
    Length,      // @length
    TypeTag,     // @type
    Variant,     // @Name
    AliasValue,  // .value, the payload of a declared alias
  };

  Kind kind = Kind::Field;
  std::string name;
  std::size_t index = 0;

  bool operator==(const PathSegment&) const = default;
};

/// Path from a parameter root to a component, e.g. `v.hourlyPrecip[1].value`.
class ComponentPath {
 public:
  ComponentPath() = default;
  explicit ComponentPath(std::string root) : root_(std::move(root)) {}

  const std::string& root() const { return root_; }
  const std::vector<PathSegment>& segments() const { return segments_; }
  bool isRoot() const { return segments_.empty(); }

  ComponentPath field(std::string name) const { return with({PathSegment::Kind::Field, std::move(name), 0}); }
  ComponentPath index(std::size_t i) const { return with({PathSegment::Kind::Index, {}, i}); }
  ComponentPath length() const { return with({PathSegment::Kind::Length, {}, 0}); }
  ComponentPath typeTag() const { return with({PathSegment::Kind::TypeTag, {}, 0}); }
  ComponentPath variant(std::string name) const { return with({PathSegment::Kind::Variant, std::move(name), 0}); }
  ComponentPath aliasValue() const { return with({PathSegment::Kind::AliasValue, {}, 0}); }

  std::string render() const;

  /// Name of the last `.field` segment once trailing `.value` and `[i]`
  /// segments are stripped; nullopt when the path ends in a synthetic
  /// segment or has no field at all.
  std::optional<std::string> trailingFieldName() const;

  bool operator==(const ComponentPath&) const = default;

 private:
  ComponentPath with(PathSegment seg) const {
    ComponentPath out = *this;
    out.segments_.push_back(std::move(seg));
    return out;
  }

  std::string root_;
  std::vector<PathSegment> segments_;
};

/// Flat test assignment keyed by rendered component path.
using Assignment = std::map<std::string, Value, std::less<>>;

struct GuardConstraint {
  enum class Relation { SizeGreaterThan, SelectorEquals };

  std::string subject;  // rendered path of an @length or @type component
  Relation relation = Relation::SizeGreaterThan;
  std::int64_t size = 0;
  std::string variant;

  bool holds(const Value& subjectValue) const;
  /// Smallest subject value that satisfies the guard.
  Value minimalWitness() const;
  std::string render() const;

  bool operator==(const GuardConstraint&) const = default;
};

enum class ComponentRole { Leaf, Length, Selector };

struct Component {
  ComponentPath path;
  std::string key;  // path.render()
  ComponentRole role = ComponentRole::Leaf;
  PrimitiveKind kind = PrimitiveKind::Int;  // Nat for @length, String for selectors
  std::vector<std::string> variants;        // selectors only
  std::optional<spec::Refinement> refinement;
  std::vector<GuardConstraint> guards;  // outermost first

  // Filled by the value providers (pre-filled for @length and selectors).
  std::vector<Value> values;
  std::vector<std::string> sources;  // provider that produced each value
  std::vector<std::string> notes;    // dropped values, fallbacks

  // Context used to build prompts.
  std::string fieldName;      // nearest field (or parameter) name
  std::string enclosingType;  // entity/variant holding the field; empty at a parameter root
  std::optional<std::string> aliasName;
  std::vector<std::string> traversed;  // declarations entered from the root, in order

  bool isSynthetic() const { return role != ComponentRole::Leaf; }
  /// Kind name with refinement, e.g. `Nat($value <= 100n)`, or the enumerated
  /// domain of synthetic and Bool components.
  std::string describeKind() const;
};

/// Marks a recursive reference that was cut by the depth bound.
struct DepthCut {
  std::string path;
  spec::TypeRef type;
};

struct DecompositionConfig {
  std::size_t maxLen = 3;
  std::size_t maxDepth = 3;

  void validate() const;  // throws ConfigError
};

struct Decomposition {
  std::vector<Component> components;
  std::vector<DepthCut> cuts;

  const Component* find(std::string_view key) const;
  Component* find(std::string_view key);
  const DepthCut* findCut(std::string_view key) const;
};

/// Decomposes `type` rooted at `root` into primitive components.
Decomposition getComponents(const spec::ApiSpec& spec, const spec::TypeRef& type,
                            const ComponentPath& root, const DecompositionConfig& cfg);

/// Pools the decompositions of every parameter of `api`.
Decomposition decomposeApi(const spec::ApiSpec& spec, const spec::ApiSig& api,
                           const DecompositionConfig& cfg);

/// True iff every guard of `c` holds under `assignment`. Guards are checked
/// outermost first; reaching a guard whose subject is unassigned throws
/// UnassignedGuardSubject.
bool feasible(const Assignment& assignment, const Component& c);

/// One line per component: `PATH  KIND  {guards}`.
std::string dumpComponents(const Decomposition& d);

}  // namespace stratagen::decomp
