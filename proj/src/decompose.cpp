#include "stratagen/decompose.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "stratagen/error.hpp"

namespace stratagen::decomp {

using spec::TypeRef;

std::string ComponentPath::render() const {
  std::string out = root_;
  for (const auto& seg : segments_) {
    switch (seg.kind) {
      case PathSegment::Kind::Field: out += "." + seg.name; break;
      case PathSegment::Kind::Index: out += "[" + std::to_string(seg.index) + "]"; break;
      case PathSegment::Kind::Length: out += "@length"; break;
      case PathSegment::Kind::TypeTag: out += "@type"; break;
      case PathSegment::Kind::Variant: out += "@" + seg.name; break;
      case PathSegment::Kind::AliasValue: out += ".value"; break;
    }
  }
  return out;
}

std::optional<std::string> ComponentPath::trailingFieldName() const {
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
    switch (it->kind) {
      case PathSegment::Kind::AliasValue:
      case PathSegment::Kind::Index:
        continue;
      case PathSegment::Kind::Field:
        return it->name;
      default:
        return std::nullopt;
    }
  }
  return std::nullopt;
}

bool GuardConstraint::holds(const Value& subjectValue) const {
  if (relation == Relation::SizeGreaterThan) {
    const auto* n = std::get_if<std::int64_t>(&subjectValue);
    return n && *n > size;
  }
  const auto* s = std::get_if<std::string>(&subjectValue);
  return s && *s == variant;
}

Value GuardConstraint::minimalWitness() const {
  if (relation == Relation::SizeGreaterThan) return Value{size + 1};
  return Value{variant};
}

std::string GuardConstraint::render() const {
  if (relation == Relation::SizeGreaterThan) return subject + " > " + std::to_string(size);
  return subject + " = " + variant;
}

std::string Component::describeKind() const {
  auto joinValues = [&] {
    std::string out = "{";
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out += ",";
      const auto* s = std::get_if<std::string>(&values[i]);
      out += s ? *s : renderValue(values[i]);
    }
    return out + "}";
  };
  switch (role) {
    case ComponentRole::Length: return "Nat" + joinValues();
    case ComponentRole::Selector: return "Selector" + joinValues();
    case ComponentRole::Leaf: break;
  }
  std::string out(kindName(kind));
  if (kind == PrimitiveKind::Bool) out += "{false,true}";
  if (refinement) {
    std::string r = spec::renderRefinement(*refinement);
    if (r.rfind("invariant ", 0) == 0) r = r.substr(10);
    out += "(" + r + ")";
  }
  return out;
}

void DecompositionConfig::validate() const {
  if (maxDepth < 1) throw ConfigError("max-depth must be at least 1");
}

const Component* Decomposition::find(std::string_view key) const {
  auto it = std::find_if(components.begin(), components.end(), [&](const Component& c) { return c.key == key; });
  return it == components.end() ? nullptr : &*it;
}

Component* Decomposition::find(std::string_view key) {
  return const_cast<Component*>(std::as_const(*this).find(key));
}

const DepthCut* Decomposition::findCut(std::string_view key) const {
  auto it = std::find_if(cuts.begin(), cuts.end(), [&](const DepthCut& c) { return c.path == key; });
  return it == cuts.end() ? nullptr : &*it;
}

namespace {

struct WalkContext {
  std::vector<GuardConstraint> guards;
  std::string fieldName;
  std::string enclosingType;
  std::vector<std::string> traversed;
  std::unordered_map<std::string, std::size_t> occurrences;
};

class Decomposer {
 public:
  Decomposer(const spec::ApiSpec& spec, const DecompositionConfig& cfg) : spec_(spec), cfg_(cfg) {}

  Decomposition run(const TypeRef& type, const ComponentPath& root) {
    WalkContext ctx;
    ctx.fieldName = root.root();
    walk(type, root, ctx);
    return std::move(out_);
  }

 private:
  void emitLeaf(PrimitiveKind kind, const ComponentPath& path, const WalkContext& ctx,
                std::optional<spec::Refinement> refinement, std::optional<std::string> alias) {
    Component c;
    c.path = path;
    c.key = path.render();
    c.role = ComponentRole::Leaf;
    c.kind = kind;
    c.refinement = std::move(refinement);
    c.guards = ctx.guards;
    c.fieldName = ctx.fieldName;
    c.enclosingType = ctx.enclosingType;
    c.aliasName = std::move(alias);
    c.traversed = ctx.traversed;
    out_.components.push_back(std::move(c));
  }

  Component& emitSynthetic(ComponentRole role, const ComponentPath& path, const WalkContext& ctx) {
    Component c;
    c.path = path;
    c.key = path.render();
    c.role = role;
    c.kind = role == ComponentRole::Length ? PrimitiveKind::Nat : PrimitiveKind::String;
    c.guards = ctx.guards;
    c.fieldName = ctx.fieldName;
    c.enclosingType = ctx.enclosingType;
    c.traversed = ctx.traversed;
    out_.components.push_back(std::move(c));
    return out_.components.back();
  }

  void walkSequence(const TypeRef* key, const TypeRef& element, const ComponentPath& path,
                    const WalkContext& ctx) {
    ComponentPath lengthPath = path.length();
    Component& len = emitSynthetic(ComponentRole::Length, lengthPath, ctx);
    for (std::size_t n = 0; n <= cfg_.maxLen; ++n) {
      len.values.push_back(Value{static_cast<std::int64_t>(n)});
      len.sources.push_back("domain");
    }
    std::string lengthKey = len.key;
    for (std::size_t i = 0; i < cfg_.maxLen; ++i) {
      WalkContext inner = ctx;
      inner.guards.push_back({lengthKey, GuardConstraint::Relation::SizeGreaterThan,
                              static_cast<std::int64_t>(i), {}});
      if (key) {
        WalkContext k = inner;
        k.fieldName = ctx.fieldName + ".key";
        walk(*key, path.index(i).field("key"), k);
        inner.fieldName = ctx.fieldName + ".value";
        walk(element, path.index(i).field("value"), inner);
      } else {
        walk(element, path.index(i), inner);
      }
    }
  }

  void walkFields(const std::vector<spec::Field>& fields, const std::string& owner,
                  const ComponentPath& base, const WalkContext& ctx) {
    for (const auto& f : fields) {
      WalkContext inner = ctx;
      inner.fieldName = f.name;
      inner.enclosingType = owner;
      walk(f.type, base.field(f.name), inner);
    }
  }

  void walk(const TypeRef& type, const ComponentPath& path, const WalkContext& ctx) {
    switch (type.form) {
      case TypeRef::Form::Primitive:
        emitLeaf(type.primitive, path.isRoot() ? path.aliasValue() : path, ctx, std::nullopt, std::nullopt);
        return;
      case TypeRef::Form::List:
        walkSequence(nullptr, type.args.at(0), path, ctx);
        return;
      case TypeRef::Form::Map:
        walkSequence(&type.args.at(0), type.args.at(1), path, ctx);
        return;
      case TypeRef::Form::Function:
        throw UnsupportedType("function-typed component at '" + path.render() + "': " +
                              spec::renderTypeRef(type));
      case TypeRef::Form::Named:
        break;
    }

    const spec::TypeDecl& decl = spec_.get(type.name);
    WalkContext inner = ctx;
    std::size_t& seen = inner.occurrences[decl.name];
    if (seen >= cfg_.maxDepth) {
      out_.cuts.push_back({path.render(), type});
      return;
    }
    ++seen;
    inner.traversed.push_back(decl.name);

    std::visit(
        [&](const auto& body) {
          using B = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<B, spec::AliasBody>) {
            std::vector<std::string> chain;
            TypeRef target = spec_.unalias(body.target, &chain);
            for (const auto& name : chain) inner.traversed.push_back(name);
            if (target.form == TypeRef::Form::Primitive) {
              std::optional<spec::Refinement> refinement = body.refinement;
              for (const auto& name : chain) {
                const auto& a = std::get<spec::AliasBody>(spec_.get(name).body);
                if (a.refinement) refinement = a.refinement;
              }
              emitLeaf(target.primitive, path.aliasValue(), inner, refinement, decl.name);
            } else {
              walk(target, path, inner);
            }
          } else if constexpr (std::is_same_v<B, spec::EntityBody>) {
            walkFields(body.fields, decl.name, path, inner);
          } else if constexpr (std::is_same_v<B, spec::DatatypeBody>) {
            Component& sel = emitSynthetic(ComponentRole::Selector, path.typeTag(), inner);
            for (const auto& v : body.variants) {
              sel.variants.push_back(v.name);
              sel.values.push_back(Value{v.name});
              sel.sources.push_back("domain");
            }
            std::string selectorKey = sel.key;
            for (const auto& v : body.variants) {
              WalkContext vctx = inner;
              vctx.guards.push_back({selectorKey, GuardConstraint::Relation::SelectorEquals, 0, v.name});
              walkFields(v.fields, v.name, path.variant(v.name), vctx);
            }
          } else if constexpr (std::is_same_v<B, spec::ListBody>) {
            walkSequence(nullptr, body.element, path, inner);
          } else {
            walkSequence(&body.key, body.value, path, inner);
          }
        },
        decl.body);
  }

  const spec::ApiSpec& spec_;
  const DecompositionConfig& cfg_;
  Decomposition out_;
};

}  // namespace

Decomposition getComponents(const spec::ApiSpec& spec, const TypeRef& type, const ComponentPath& root,
                            const DecompositionConfig& cfg) {
  cfg.validate();
  return Decomposer(spec, cfg).run(type, root);
}

Decomposition decomposeApi(const spec::ApiSpec& spec, const spec::ApiSig& api, const DecompositionConfig& cfg) {
  Decomposition pooled;
  for (const auto& p : api.params) {
    Decomposition d = getComponents(spec, p.type, ComponentPath(p.name), cfg);
    for (auto& c : d.components) pooled.components.push_back(std::move(c));
    for (auto& cut : d.cuts) pooled.cuts.push_back(std::move(cut));
  }
  return pooled;
}

bool feasible(const Assignment& assignment, const Component& c) {
  for (const auto& g : c.guards) {
    auto it = assignment.find(g.subject);
    if (it == assignment.end()) {
      throw UnassignedGuardSubject("guard subject '" + g.subject + "' of '" + c.key + "' is unassigned");
    }
    if (!g.holds(it->second)) return false;
  }
  return true;
}

std::string dumpComponents(const Decomposition& d) {
  std::ostringstream out;
  for (const auto& c : d.components) {
    out << c.key << "  " << c.describeKind() << "  {";
    for (std::size_t i = 0; i < c.guards.size(); ++i) {
      if (i) out << ", ";
      out << c.guards[i].render();
    }
    out << "}\n";
  }
  for (const auto& cut : d.cuts) {
    out << "# depth cut at " << cut.path << " (" << spec::renderTypeRef(cut.type) << ")\n";
  }
  return out.str();
}

}  // namespace stratagen::decomp
