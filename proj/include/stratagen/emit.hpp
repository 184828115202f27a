#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stratagen/decompose.hpp"
#include "stratagen/spec.hpp"
#include "stratagen/value.hpp"

namespace stratagen::emit {

/// A concrete input value shaped like its declared type.
struct TypedValue {
  enum class Shape { Primitive, Entity, Variant, Sequence, Map };

  Shape shape = Shape::Primitive;
  std::string typeName;  // declaration name (entity, datatype, alias); empty for inline forms
  std::string variant;   // Variant only
  Value primitive;
  std::vector<std::pair<std::string, TypedValue>> fields;  // Entity and Variant, in declaration order
  std::vector<TypedValue> elements;                        // Sequence
  std::vector<std::pair<TypedValue, TypedValue>> entries;  // Map

  static TypedValue leaf(Value v, std::string typeName = {});

  bool operator==(const TypedValue&) const = default;
};

struct ReconstructContext {
  const spec::ApiSpec& spec;
  decomp::DecompositionConfig cfg;
  /// Strata used to fill elements past the last per-index component.
  const decomp::Decomposition* strata = nullptr;
};

/// Rebuilds the value of parameter `root` of type `type` from a flat test
/// assignment. Throws MissingAssignment or RefinementViolation.
TypedValue reconstructValue(const decomp::Assignment& test, const spec::TypeRef& type, const std::string& root,
                            const ReconstructContext& ctx);

/// One reconstructed value per parameter of `api`, in parameter order.
std::vector<std::pair<std::string, TypedValue>> reconstructArgs(const decomp::Assignment& test,
                                                                const spec::ApiSig& api,
                                                                const ReconstructContext& ctx);

/// Smallest terminating value of `type`: empty sequences, the cheapest
/// variant, and the least primitive that passes any refinement. Throws
/// RefinementViolation when no candidate satisfies a refinement and
/// UnsupportedType when the type has no finite inhabitant.
TypedValue minimalValue(const spec::ApiSpec& spec, const spec::TypeRef& type, const std::string& path = "");

/// Wire form: entities as objects in field order, variants as objects with a
/// leading "type" member, sequences as arrays, maps as arrays of
/// {"key", "value"} objects, aliases transparent.
nlohmann::ordered_json toJson(const TypedValue& v);
std::string serializeValue(const TypedValue& v);

/// Every refined leaf in `v` satisfies its refinement.
bool refinementsHold(const spec::ApiSpec& spec, const TypedValue& v, const spec::TypeRef& type);

}  // namespace stratagen::emit
