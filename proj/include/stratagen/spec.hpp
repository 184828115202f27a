#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stratagen/value.hpp"

namespace stratagen::spec {

/// Reference to a type: a primitive, a named declaration, an inline
/// `List<T>` / `Map<K, V>`, or a function type (parsed only so that
/// decomposition can reject it).
struct TypeRef {
  enum class Form { Primitive, Named, List, Map, Function };

  Form form = Form::Primitive;
  PrimitiveKind primitive = PrimitiveKind::Int;
  std::string name;           // Named
  std::vector<TypeRef> args;  // List: [elem]; Map: [key, value]; Function: [params..., result]

  static TypeRef prim(PrimitiveKind kind) { return TypeRef{Form::Primitive, kind, {}, {}}; }
  static TypeRef named(std::string name) {
    return TypeRef{Form::Named, PrimitiveKind::Int, std::move(name), {}};
  }
  static TypeRef list(TypeRef elem) {
    return TypeRef{Form::List, PrimitiveKind::Int, {}, {std::move(elem)}};
  }
  static TypeRef map(TypeRef key, TypeRef value) {
    return TypeRef{Form::Map, PrimitiveKind::Int, {}, {std::move(key), std::move(value)}};
  }

  bool operator==(const TypeRef&) const = default;
};

std::string renderTypeRef(const TypeRef& ref);

enum class CompareOp { Less, LessEq, Equal, GreaterEq, Greater };

std::string_view compareOpText(CompareOp op);

/// Numeric literal as written: `n` suffix is Nat, a bare integer is Int, a
/// literal with a fraction or exponent is Float.
struct NumericLiteral {
  std::variant<std::int64_t, double> number;
  PrimitiveKind literalKind = PrimitiveKind::Int;

  double asDouble() const;
  bool operator==(const NumericLiteral&) const = default;
};

struct NumericCompare {
  CompareOp op;
  NumericLiteral bound;
  bool operator==(const NumericCompare&) const = default;
};

struct RegexMatch {
  std::string pattern;
  bool operator==(const RegexMatch&) const = default;
};

struct Refinement {
  std::variant<NumericCompare, RegexMatch> predicate;
  bool operator==(const Refinement&) const = default;
};

std::string renderRefinement(const Refinement& r);

struct Field {
  std::string name;
  TypeRef type;
  bool operator==(const Field&) const = default;
};

struct AliasBody {
  TypeRef target;
  std::optional<Refinement> refinement;
  bool operator==(const AliasBody&) const = default;
};

struct EntityBody {
  std::vector<Field> fields;
  bool operator==(const EntityBody&) const = default;
};

struct Variant {
  std::string name;
  std::vector<Field> fields;
  bool operator==(const Variant&) const = default;
};

struct DatatypeBody {
  std::vector<Variant> variants;
  bool operator==(const DatatypeBody&) const = default;
};

struct ListBody {
  TypeRef element;
  bool operator==(const ListBody&) const = default;
};

struct MapBody {
  TypeRef key;
  TypeRef value;
  bool operator==(const MapBody&) const = default;
};

struct TypeDecl {
  std::string name;
  std::variant<AliasBody, EntityBody, DatatypeBody, ListBody, MapBody> body;
  bool operator==(const TypeDecl&) const = default;
};

enum class HttpVerb { Get, Post, Put, Delete, Auth };

std::string_view verbName(HttpVerb verb);
std::optional<HttpVerb> verbFromName(std::string_view name);

struct ApiSig {
  std::string name;
  std::vector<Field> params;
  TypeRef result;
  HttpVerb verb = HttpVerb::Post;
  std::string route;  // "/<name>" unless annotated
  bool operator==(const ApiSig&) const = default;
};

/// `api name(p: T, ...): R` without verb/route.
std::string renderApiSignature(const ApiSig& api);

class ApiSpec {
 public:
  ApiSpec() = default;
  ApiSpec(std::vector<TypeDecl> decls, std::vector<ApiSig> apis);

  const std::vector<TypeDecl>& decls() const { return decls_; }
  const std::vector<ApiSig>& apis() const { return apis_; }

  const TypeDecl* find(std::string_view name) const;
  const TypeDecl& get(std::string_view name) const;  // throws UnresolvedTypeError
  const ApiSig* findApi(std::string_view name) const;

  /// Follows alias declarations until the target is not an alias. Returns
  /// the final reference and fills `chain` (when given) with alias names.
  TypeRef unalias(const TypeRef& ref, std::vector<std::string>* chain = nullptr) const;

  /// Primitive kind beneath an alias chain, if any.
  std::optional<PrimitiveKind> underlyingPrimitive(const TypeRef& ref) const;

  bool operator==(const ApiSpec& other) const {
    return decls_ == other.decls_ && apis_ == other.apis_;
  }

 private:
  void validate() const;

  std::vector<TypeDecl> decls_;
  std::vector<ApiSig> apis_;
};

/// Parses the `.bsqapi` subset. Throws SyntaxError, UnresolvedTypeError,
/// DuplicateDeclError, UnsupportedInvariant or KindMismatch.
ApiSpec parseSpec(std::string_view text);

/// Canonical text: declarations separated by blank lines, two-space indent,
/// every api preceded by its `@route` annotation.
std::string prettyPrint(const ApiSpec& spec);

/// Single-line rendering of one declaration, used in prompts.
std::string renderDeclInline(const TypeDecl& decl);

/// Evaluates `r` on `v`. Throws KindMismatch when a numeric comparison meets
/// a non-number or a regex meets a non-string.
bool evalRefinement(const Refinement& r, const Value& v);

}  // namespace stratagen::spec
