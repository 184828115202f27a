#include "stratagen/emit.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "regex_sampler.hpp"
#include "stratagen/error.hpp"
#include "stratagen/rng.hpp"

namespace stratagen::emit {

using decomp::Assignment;
using decomp::ComponentPath;
using spec::TypeRef;

TypedValue TypedValue::leaf(Value v, std::string typeName) {
  TypedValue t;
  t.shape = Shape::Primitive;
  t.primitive = std::move(v);
  t.typeName = std::move(typeName);
  return t;
}

namespace {

constexpr double kInfinite = std::numeric_limits<double>::infinity();

std::optional<spec::Refinement> aliasRefinement(const spec::ApiSpec& spec, const spec::AliasBody& body,
                                                const std::vector<std::string>& chain) {
  std::optional<spec::Refinement> r = body.refinement;
  for (const auto& name : chain) {
    const auto& a = std::get<spec::AliasBody>(spec.get(name).body);
    if (a.refinement) r = a.refinement;
  }
  return r;
}

/// Cost of the cheapest finite inhabitant of each declaration, by fixpoint.
class CostTable {
 public:
  explicit CostTable(const spec::ApiSpec& spec) : spec_(spec) {
    for (const auto& d : spec.decls()) cost_[d.name] = kInfinite;
    for (std::size_t round = 0; round <= spec.decls().size(); ++round) {
      bool changed = false;
      for (const auto& d : spec.decls()) {
        double c = declCost(d);
        if (c < cost_[d.name]) {
          cost_[d.name] = c;
          changed = true;
        }
      }
      if (!changed) break;
    }
  }

  double of(const TypeRef& t) const {
    switch (t.form) {
      case TypeRef::Form::Primitive:
      case TypeRef::Form::List:
      case TypeRef::Form::Map:
        return 1;
      case TypeRef::Form::Function:
        return kInfinite;
      case TypeRef::Form::Named:
        break;
    }
    auto it = cost_.find(t.name);
    return it == cost_.end() ? kInfinite : it->second;
  }

  double fieldsCost(const std::vector<spec::Field>& fields) const {
    double sum = 1;
    for (const auto& f : fields) sum += of(f.type);
    return sum;
  }

 private:
  double declCost(const spec::TypeDecl& d) const {
    return std::visit(
        [&](const auto& body) -> double {
          using B = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<B, spec::AliasBody>) {
            return of(body.target);
          } else if constexpr (std::is_same_v<B, spec::EntityBody>) {
            return fieldsCost(body.fields);
          } else if constexpr (std::is_same_v<B, spec::DatatypeBody>) {
            double best = kInfinite;
            for (const auto& v : body.variants) best = std::min(best, fieldsCost(v.fields));
            return best;
          } else {
            return 1;
          }
        },
        d.body);
  }

  const spec::ApiSpec& spec_;
  std::unordered_map<std::string, double> cost_;
};

bool accepts(const Value& v, PrimitiveKind kind, const std::optional<spec::Refinement>& r) {
  if (!valueMatchesKind(v, kind)) return false;
  return !r || spec::evalRefinement(*r, v);
}

Value minimalPrimitive(PrimitiveKind kind, const std::optional<spec::Refinement>& r, const std::string& path) {
  std::vector<Value> candidates;
  std::optional<double> bound;
  if (r) {
    if (const auto* cmp = std::get_if<spec::NumericCompare>(&r->predicate)) bound = cmp->bound.asDouble();
  }
  switch (kind) {
    case PrimitiveKind::Bool:
      candidates = {Value{false}, Value{true}};
      break;
    case PrimitiveKind::Float:
      candidates.push_back(Value{0.0});
      if (bound) {
        for (double d : {*bound, *bound + 1, *bound - 1}) candidates.push_back(Value{d});
      }
      break;
    case PrimitiveKind::String:
      candidates.push_back(Value{std::string()});
      break;
    case PrimitiveKind::UUID:
      candidates.push_back(Value{std::string("00000000-0000-0000-0000-000000000000")});
      break;
    case PrimitiveKind::DateTime:
      candidates.push_back(Value{std::string("1970-01-01T00:00:00Z")});
      break;
    default:
      candidates.push_back(Value{std::int64_t{0}});
      if (bound) {
        auto b = static_cast<std::int64_t>(std::llround(*bound));
        for (std::int64_t d : {b, b + 1, b - 1}) candidates.push_back(Value{d});
      }
      break;
  }
  for (const auto& c : candidates) {
    if (accepts(c, kind, r)) return c;
  }
  if (r && kind == PrimitiveKind::String) {
    if (const auto* re = std::get_if<spec::RegexMatch>(&r->predicate)) {
      try {
        detail::RegexSampler sampler(re->pattern);
        RandomStream rng(stableHash(path));
        for (int i = 0; i < 200; ++i) {
          Value v{sampler.sample(rng)};
          if (accepts(v, kind, r)) return v;
        }
      } catch (const std::invalid_argument&) {
      }
    }
  }
  throw RefinementViolation(path);
}

TypedValue buildMinimal(const spec::ApiSpec& spec, const CostTable& costs, const TypeRef& type,
                        const std::string& path) {
  switch (type.form) {
    case TypeRef::Form::Primitive:
      return TypedValue::leaf(minimalPrimitive(type.primitive, std::nullopt, path));
    case TypeRef::Form::List: {
      TypedValue t;
      t.shape = TypedValue::Shape::Sequence;
      return t;
    }
    case TypeRef::Form::Map: {
      TypedValue t;
      t.shape = TypedValue::Shape::Map;
      return t;
    }
    case TypeRef::Form::Function:
      throw UnsupportedType("no value for function type at '" + path + "'");
    case TypeRef::Form::Named:
      break;
  }
  if (costs.of(type) == kInfinite) throw UnsupportedType("type '" + type.name + "' has no finite value");
  const spec::TypeDecl& decl = spec.get(type.name);
  return std::visit(
      [&](const auto& body) -> TypedValue {
        using B = std::decay_t<decltype(body)>;
        TypedValue t;
        t.typeName = decl.name;
        if constexpr (std::is_same_v<B, spec::AliasBody>) {
          std::vector<std::string> chain;
          TypeRef target = spec.unalias(body.target, &chain);
          if (target.form == TypeRef::Form::Primitive) {
            return TypedValue::leaf(minimalPrimitive(target.primitive, aliasRefinement(spec, body, chain), path),
                                    decl.name);
          }
          t = buildMinimal(spec, costs, target, path);
          t.typeName = decl.name;
        } else if constexpr (std::is_same_v<B, spec::EntityBody>) {
          t.shape = TypedValue::Shape::Entity;
          for (const auto& f : body.fields) {
            t.fields.emplace_back(f.name, buildMinimal(spec, costs, f.type, path + "." + f.name));
          }
        } else if constexpr (std::is_same_v<B, spec::DatatypeBody>) {
          const spec::Variant* best = nullptr;
          double bestCost = kInfinite;
          for (const auto& v : body.variants) {
            double c = costs.fieldsCost(v.fields);
            if (c < bestCost) {
              bestCost = c;
              best = &v;
            }
          }
          t.shape = TypedValue::Shape::Variant;
          t.variant = best->name;
          for (const auto& f : best->fields) {
            t.fields.emplace_back(f.name, buildMinimal(spec, costs, f.type, path + "@" + best->name + "." + f.name));
          }
        } else if constexpr (std::is_same_v<B, spec::ListBody>) {
          t.shape = TypedValue::Shape::Sequence;
        } else {
          t.shape = TypedValue::Shape::Map;
        }
        return t;
      },
      decl.body);
}

class Rebuilder {
 public:
  Rebuilder(const Assignment& test, const ReconstructContext& ctx) : test_(test), ctx_(ctx), costs_(ctx.spec) {}

  TypedValue walk(const TypeRef& type, const ComponentPath& path, std::map<std::string, std::size_t> seen,
                  bool fromStrata) {
    switch (type.form) {
      case TypeRef::Form::Primitive: {
        ComponentPath leafPath = path.isRoot() ? path.aliasValue() : path;
        return TypedValue::leaf(lookup(leafPath.render(), fromStrata));
      }
      case TypeRef::Form::List:
        return sequence(nullptr, type.args.at(0), path, seen, fromStrata, {});
      case TypeRef::Form::Map:
        return sequence(&type.args.at(0), type.args.at(1), path, seen, fromStrata, {});
      case TypeRef::Form::Function:
        throw UnsupportedType("function-typed value at '" + path.render() + "'");
      case TypeRef::Form::Named:
        break;
    }

    const spec::TypeDecl& decl = ctx_.spec.get(type.name);
    std::size_t& count = seen[decl.name];
    if (count >= ctx_.cfg.maxDepth) return buildMinimal(ctx_.spec, costs_, type, path.render());
    ++count;

    return std::visit(
        [&](const auto& body) -> TypedValue {
          using B = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<B, spec::AliasBody>) {
            std::vector<std::string> chain;
            TypeRef target = ctx_.spec.unalias(body.target, &chain);
            if (target.form == TypeRef::Form::Primitive) {
              std::string key = path.aliasValue().render();
              Value v = lookup(key, fromStrata);
              auto r = aliasRefinement(ctx_.spec, body, chain);
              if (r && !spec::evalRefinement(*r, v)) throw RefinementViolation(key);
              return TypedValue::leaf(std::move(v), decl.name);
            }
            TypedValue t = walk(target, path, seen, fromStrata);
            t.typeName = decl.name;
            return t;
          } else if constexpr (std::is_same_v<B, spec::EntityBody>) {
            TypedValue t;
            t.shape = TypedValue::Shape::Entity;
            t.typeName = decl.name;
            for (const auto& f : body.fields) {
              t.fields.emplace_back(f.name, walk(f.type, path.field(f.name), seen, fromStrata));
            }
            return t;
          } else if constexpr (std::is_same_v<B, spec::DatatypeBody>) {
            std::string selKey = path.typeTag().render();
            Value sel = lookup(selKey, fromStrata);
            const auto* name = std::get_if<std::string>(&sel);
            const spec::Variant* chosen = nullptr;
            for (const auto& v : body.variants) {
              if (name && v.name == *name) chosen = &v;
            }
            if (!chosen) throw RefinementViolation(selKey);
            TypedValue t;
            t.shape = TypedValue::Shape::Variant;
            t.typeName = decl.name;
            t.variant = chosen->name;
            ComponentPath base = path.variant(chosen->name);
            for (const auto& f : chosen->fields) {
              t.fields.emplace_back(f.name, walk(f.type, base.field(f.name), seen, fromStrata));
            }
            return t;
          } else if constexpr (std::is_same_v<B, spec::ListBody>) {
            return sequence(nullptr, body.element, path, seen, fromStrata, decl.name);
          } else {
            return sequence(&body.key, body.value, path, seen, fromStrata, decl.name);
          }
        },
        decl.body);
  }

 private:
  Value lookup(const std::string& key, bool fromStrata) const {
    if (!fromStrata) {
      auto it = test_.find(key);
      if (it == test_.end()) throw MissingAssignment(key);
      return it->second;
    }
    const decomp::Component* c = ctx_.strata ? ctx_.strata->find(key) : nullptr;
    if (!c || c->values.empty()) throw MissingAssignment(key);
    return c->values.front();
  }

  TypedValue sequence(const TypeRef* key, const TypeRef& element, const ComponentPath& path,
                      const std::map<std::string, std::size_t>& seen, bool fromStrata, std::string typeName) {
    std::string lenKey = path.length().render();
    Value lenValue = lookup(lenKey, fromStrata);
    const auto* len = std::get_if<std::int64_t>(&lenValue);
    if (!len || *len < 0) throw RefinementViolation(lenKey);

    TypedValue t;
    t.shape = key ? TypedValue::Shape::Map : TypedValue::Shape::Sequence;
    t.typeName = std::move(typeName);
    for (std::int64_t i = 0; i < *len; ++i) {
      auto idx = static_cast<std::size_t>(i);
      bool tail = idx >= ctx_.cfg.maxLen;
      ComponentPath at = path.index(tail ? 0 : idx);
      if (tail && !ctx_.strata) throw MissingAssignment(path.index(idx).render());
      bool strataMode = fromStrata || tail;
      if (key) {
        t.entries.emplace_back(walk(*key, at.field("key"), seen, strataMode),
                               walk(element, at.field("value"), seen, strataMode));
      } else {
        t.elements.push_back(walk(element, at, seen, strataMode));
      }
    }
    return t;
  }

  const Assignment& test_;
  const ReconstructContext& ctx_;
  CostTable costs_;
};

bool holds(const spec::ApiSpec& spec, const TypedValue& v, const TypeRef& type) {
  switch (type.form) {
    case TypeRef::Form::Primitive:
      return v.shape == TypedValue::Shape::Primitive && valueMatchesKind(v.primitive, type.primitive);
    case TypeRef::Form::List:
      if (v.shape != TypedValue::Shape::Sequence) return false;
      for (const auto& e : v.elements) {
        if (!holds(spec, e, type.args.at(0))) return false;
      }
      return true;
    case TypeRef::Form::Map:
      if (v.shape != TypedValue::Shape::Map) return false;
      for (const auto& [k, val] : v.entries) {
        if (!holds(spec, k, type.args.at(0)) || !holds(spec, val, type.args.at(1))) return false;
      }
      return true;
    case TypeRef::Form::Function:
      return false;
    case TypeRef::Form::Named:
      break;
  }
  const spec::TypeDecl& decl = spec.get(type.name);
  auto fieldsHold = [&](const std::vector<spec::Field>& fields) {
    if (v.fields.size() != fields.size()) return false;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (v.fields[i].first != fields[i].name || !holds(spec, v.fields[i].second, fields[i].type)) return false;
    }
    return true;
  };
  return std::visit(
      [&](const auto& body) -> bool {
        using B = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<B, spec::AliasBody>) {
          std::vector<std::string> chain;
          TypeRef target = spec.unalias(body.target, &chain);
          if (target.form != TypeRef::Form::Primitive) return holds(spec, v, target);
          if (!holds(spec, v, target)) return false;
          auto r = aliasRefinement(spec, body, chain);
          return !r || spec::evalRefinement(*r, v.primitive);
        } else if constexpr (std::is_same_v<B, spec::EntityBody>) {
          return v.shape == TypedValue::Shape::Entity && fieldsHold(body.fields);
        } else if constexpr (std::is_same_v<B, spec::DatatypeBody>) {
          if (v.shape != TypedValue::Shape::Variant) return false;
          for (const auto& var : body.variants) {
            if (var.name == v.variant) return fieldsHold(var.fields);
          }
          return false;
        } else if constexpr (std::is_same_v<B, spec::ListBody>) {
          return holds(spec, v, TypeRef::list(body.element));
        } else {
          return holds(spec, v, TypeRef::map(body.key, body.value));
        }
      },
      decl.body);
}

}  // namespace

TypedValue reconstructValue(const Assignment& test, const TypeRef& type, const std::string& root,
                            const ReconstructContext& ctx) {
  return Rebuilder(test, ctx).walk(type, ComponentPath(root), {}, false);
}

std::vector<std::pair<std::string, TypedValue>> reconstructArgs(const Assignment& test, const spec::ApiSig& api,
                                                                const ReconstructContext& ctx) {
  std::vector<std::pair<std::string, TypedValue>> out;
  Rebuilder rebuilder(test, ctx);
  for (const auto& p : api.params) {
    out.emplace_back(p.name, rebuilder.walk(p.type, ComponentPath(p.name), {}, false));
  }
  return out;
}

TypedValue minimalValue(const spec::ApiSpec& spec, const TypeRef& type, const std::string& path) {
  CostTable costs(spec);
  return buildMinimal(spec, costs, type, path);
}

nlohmann::ordered_json toJson(const TypedValue& v) {
  using nlohmann::ordered_json;
  switch (v.shape) {
    case TypedValue::Shape::Primitive:
      return valueToJson(v.primitive);
    case TypedValue::Shape::Entity: {
      ordered_json o = ordered_json::object();
      for (const auto& [name, field] : v.fields) o[name] = toJson(field);
      return o;
    }
    case TypedValue::Shape::Variant: {
      ordered_json o = ordered_json::object();
      o["type"] = v.variant;
      for (const auto& [name, field] : v.fields) o[name] = toJson(field);
      return o;
    }
    case TypedValue::Shape::Sequence: {
      ordered_json a = ordered_json::array();
      for (const auto& e : v.elements) a.push_back(toJson(e));
      return a;
    }
    case TypedValue::Shape::Map: {
      ordered_json a = ordered_json::array();
      for (const auto& [k, val] : v.entries) {
        ordered_json entry = ordered_json::object();
        entry["key"] = toJson(k);
        entry["value"] = toJson(val);
        a.push_back(std::move(entry));
      }
      return a;
    }
  }
  return nullptr;
}

std::string serializeValue(const TypedValue& v) { return toJson(v).dump(); }

bool refinementsHold(const spec::ApiSpec& spec, const TypedValue& v, const TypeRef& type) {
  return holds(spec, v, type);
}

}  // namespace stratagen::emit
