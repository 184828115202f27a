#include "stratagen/spec.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>

#include "stratagen/error.hpp"

namespace stratagen::spec {

std::string renderTypeRef(const TypeRef& ref) {
  switch (ref.form) {
    case TypeRef::Form::Primitive:
      return std::string(kindName(ref.primitive));
    case TypeRef::Form::Named:
      return ref.name;
    case TypeRef::Form::List:
      return "List<" + renderTypeRef(ref.args.at(0)) + ">";
    case TypeRef::Form::Map:
      return "Map<" + renderTypeRef(ref.args.at(0)) + ", " + renderTypeRef(ref.args.at(1)) + ">";
    case TypeRef::Form::Function: {
      std::string out = "fn(";
      for (std::size_t i = 0; i + 1 < ref.args.size(); ++i) {
        if (i) out += ", ";
        out += renderTypeRef(ref.args[i]);
      }
      return out + ") -> " + renderTypeRef(ref.args.back());
    }
  }
  return "?";
}

std::string_view compareOpText(CompareOp op) {
  switch (op) {
    case CompareOp::Less: return "<";
    case CompareOp::LessEq: return "<=";
    case CompareOp::Equal: return "==";
    case CompareOp::GreaterEq: return ">=";
    case CompareOp::Greater: return ">";
  }
  return "?";
}

double NumericLiteral::asDouble() const {
  return std::visit([](auto n) { return static_cast<double>(n); }, number);
}

namespace {

std::string renderLiteral(const NumericLiteral& lit) {
  if (std::holds_alternative<double>(lit.number)) return renderValue(Value{std::get<double>(lit.number)});
  std::string out = std::to_string(std::get<std::int64_t>(lit.number));
  if (lit.literalKind == PrimitiveKind::Nat) out += "n";
  return out;
}

std::string escapeRegexLiteral(const std::string& pattern) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] == '\\' && i + 1 < pattern.size()) {
      out += pattern[i];
      out += pattern[++i];
    } else if (pattern[i] == '/') {
      out += "\\/";
    } else {
      out += pattern[i];
    }
  }
  return out;
}

}  // namespace

std::string renderRefinement(const Refinement& r) {
  if (const auto* cmp = std::get_if<NumericCompare>(&r.predicate)) {
    return "invariant $value " + std::string(compareOpText(cmp->op)) + " " + renderLiteral(cmp->bound);
  }
  return "/" + escapeRegexLiteral(std::get<RegexMatch>(r.predicate).pattern) + "/";
}

std::string_view verbName(HttpVerb verb) {
  switch (verb) {
    case HttpVerb::Get: return "GET";
    case HttpVerb::Post: return "POST";
    case HttpVerb::Put: return "PUT";
    case HttpVerb::Delete: return "DELETE";
    case HttpVerb::Auth: return "AUTH";
  }
  return "?";
}

std::optional<HttpVerb> verbFromName(std::string_view name) {
  for (HttpVerb v : {HttpVerb::Get, HttpVerb::Post, HttpVerb::Put, HttpVerb::Delete, HttpVerb::Auth}) {
    if (verbName(v) == name) return v;
  }
  return std::nullopt;
}

std::string renderApiSignature(const ApiSig& api) {
  std::string out = "api " + api.name + "(";
  for (std::size_t i = 0; i < api.params.size(); ++i) {
    if (i) out += ", ";
    out += api.params[i].name + ": " + renderTypeRef(api.params[i].type);
  }
  return out + "): " + renderTypeRef(api.result);
}

// ---------------------------------------------------------------------------
// ApiSpec

ApiSpec::ApiSpec(std::vector<TypeDecl> decls, std::vector<ApiSig> apis)
    : decls_(std::move(decls)), apis_(std::move(apis)) {
  validate();
}

const TypeDecl* ApiSpec::find(std::string_view name) const {
  auto it = std::find_if(decls_.begin(), decls_.end(), [&](const TypeDecl& d) { return d.name == name; });
  return it == decls_.end() ? nullptr : &*it;
}

const TypeDecl& ApiSpec::get(std::string_view name) const {
  if (const auto* d = find(name)) return *d;
  throw UnresolvedTypeError(std::string(name));
}

const ApiSig* ApiSpec::findApi(std::string_view name) const {
  auto it = std::find_if(apis_.begin(), apis_.end(), [&](const ApiSig& a) { return a.name == name; });
  return it == apis_.end() ? nullptr : &*it;
}

TypeRef ApiSpec::unalias(const TypeRef& ref, std::vector<std::string>* chain) const {
  TypeRef cur = ref;
  std::size_t hops = 0;
  while (cur.form == TypeRef::Form::Named) {
    const TypeDecl& decl = get(cur.name);
    const auto* alias = std::get_if<AliasBody>(&decl.body);
    if (!alias) break;
    if (chain) chain->push_back(decl.name);
    cur = alias->target;
    if (++hops > decls_.size()) throw UnresolvedTypeError(ref.name);
  }
  return cur;
}

std::optional<PrimitiveKind> ApiSpec::underlyingPrimitive(const TypeRef& ref) const {
  TypeRef t = unalias(ref);
  if (t.form == TypeRef::Form::Primitive) return t.primitive;
  return std::nullopt;
}

void ApiSpec::validate() const {
  std::set<std::string> names;
  for (const auto& d : decls_) {
    if (!names.insert(d.name).second) throw DuplicateDeclError(d.name);
  }

  auto checkRef = [&](const TypeRef& ref, auto&& self) -> void {
    if (ref.form == TypeRef::Form::Named && !find(ref.name)) throw UnresolvedTypeError(ref.name);
    for (const auto& a : ref.args) self(a, self);
  };
  auto checkFields = [&](const std::vector<Field>& fields, const std::string& owner) {
    std::set<std::string> seen;
    for (const auto& f : fields) {
      if (!seen.insert(f.name).second) throw DuplicateDeclError(owner + "." + f.name);
      checkRef(f.type, checkRef);
    }
  };

  for (const auto& d : decls_) {
    std::visit(
        [&](const auto& body) {
          using B = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<B, AliasBody>) {
            checkRef(body.target, checkRef);
          } else if constexpr (std::is_same_v<B, EntityBody>) {
            checkFields(body.fields, d.name);
          } else if constexpr (std::is_same_v<B, DatatypeBody>) {
            std::set<std::string> seen;
            for (const auto& v : body.variants) {
              if (!seen.insert(v.name).second) throw DuplicateDeclError(d.name + "::" + v.name);
              checkFields(v.fields, d.name + "::" + v.name);
            }
          } else if constexpr (std::is_same_v<B, ListBody>) {
            checkRef(body.element, checkRef);
          } else {
            checkRef(body.key, checkRef);
            checkRef(body.value, checkRef);
          }
        },
        d.body);
  }

  // Alias chains must terminate; refined aliases must sit on a primitive of
  // the right family.
  for (const auto& d : decls_) {
    const auto* alias = std::get_if<AliasBody>(&d.body);
    if (!alias) continue;
    unalias(TypeRef::named(d.name));
    if (!alias->refinement) continue;
    PrimitiveKind kind = alias->target.primitive;
    if (std::holds_alternative<NumericCompare>(alias->refinement->predicate)) {
      if (!isNumeric(kind)) {
        throw KindMismatch("numeric invariant on non-numeric type '" + d.name + "'");
      }
    } else if (kind != PrimitiveKind::String) {
      throw KindMismatch("regex refinement on non-String type '" + d.name + "'");
    }
  }

  std::set<std::string> apiNames;
  for (const auto& api : apis_) {
    if (!apiNames.insert(api.name).second) throw DuplicateDeclError(api.name);
    checkFields(api.params, api.name);
    checkRef(api.result, checkRef);
  }
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : src_(text) {}

  ApiSpec parse() {
    std::vector<TypeDecl> decls;
    std::vector<ApiSig> apis;
    std::optional<std::pair<HttpVerb, std::string>> pendingRoute;

    skipTrivia();
    while (!atEnd()) {
      if (peek() == '@') {
        pendingRoute = parseRouteAnnotation();
      } else {
        std::string kw = peekIdent();
        if (kw == "type") {
          decls.push_back(parseTypeDecl());
        } else if (kw == "entity") {
          decls.push_back(parseEntity());
        } else if (kw == "datatype") {
          decls.push_back(parseDatatype());
        } else if (kw == "api") {
          ApiSig api = parseApi();
          if (pendingRoute) {
            api.verb = pendingRoute->first;
            api.route = pendingRoute->second;
            pendingRoute.reset();
          }
          apis.push_back(std::move(api));
        } else {
          fail("declaration ('type', 'entity', 'datatype', 'api' or '@route')");
        }
        if (pendingRoute && kw != "api") fail("'api' after @route annotation");
      }
      skipTrivia();
    }
    if (pendingRoute) fail("'api' after @route annotation");
    return ApiSpec(std::move(decls), std::move(apis));
  }

 private:
  // --- cursor -------------------------------------------------------------

  bool atEnd() const { return pos_ >= src_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (atEnd()) return;
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skipTrivia() {
    while (!atEnd()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (!atEnd() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        advance();
        advance();
        while (!atEnd() && !(peek() == '*' && peek(1) == '/')) advance();
        if (atEnd()) fail("'*/'");
        advance();
        advance();
      } else {
        break;
      }
    }
  }

  std::string describeCurrent() const {
    if (atEnd()) return "end of input";
    std::size_t end = pos_;
    while (end < src_.size() && end - pos_ < 16 && !std::isspace(static_cast<unsigned char>(src_[end]))) ++end;
    if (end == pos_) end = pos_ + 1;
    return "'" + std::string(src_.substr(pos_, end - pos_)) + "'";
  }

  [[noreturn]] void fail(const std::string& expected) const {
    throw SyntaxError(line_, col_, expected, describeCurrent());
  }

  static bool identStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool identChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  std::string peekIdent() const {
    std::size_t p = pos_;
    if (p >= src_.size() || !identStart(src_[p])) return {};
    while (p < src_.size() && identChar(src_[p])) ++p;
    return std::string(src_.substr(pos_, p - pos_));
  }

  std::string ident(const char* what = "identifier") {
    skipTrivia();
    std::string id = peekIdent();
    if (id.empty()) fail(what);
    for (std::size_t i = 0; i < id.size(); ++i) advance();
    return id;
  }

  /// A user-chosen name: not a keyword, primitive, or builtin collection.
  std::string declName(const char* what) {
    skipTrivia();
    std::string id = peekIdent();
    static const std::set<std::string> reserved{"type", "entity", "datatype", "api", "field",
                                                 "of", "invariant", "List", "Map", "fn"};
    if (id.empty() || reserved.count(id) || kindFromName(id)) fail(what);
    return ident(what);
  }

  void keyword(const char* kw) {
    skipTrivia();
    if (peekIdent() != kw) fail(std::string("'") + kw + "'");
    ident();
  }

  bool tryKeyword(const char* kw) {
    skipTrivia();
    if (peekIdent() != kw) return false;
    ident();
    return true;
  }

  void expect(char c) {
    skipTrivia();
    if (peek() != c) fail(std::string("'") + c + "'");
    advance();
  }

  bool tryChar(char c) {
    skipTrivia();
    if (peek() != c) return false;
    advance();
    return true;
  }

  // --- grammar ------------------------------------------------------------

  std::pair<HttpVerb, std::string> parseRouteAnnotation() {
    expect('@');
    if (peekIdent() != "route") fail("'route'");
    ident();
    // The rest of the line: VERB /path
    while (peek() == ' ' || peek() == '\t') advance();
    std::string verbText = peekIdent();
    auto verb = verbFromName(verbText);
    if (!verb) fail("HTTP verb (GET, POST, PUT, DELETE, AUTH)");
    ident();
    while (peek() == ' ' || peek() == '\t') advance();
    if (peek() != '/') fail("route path starting with '/'");
    std::string route;
    while (!atEnd() && !std::isspace(static_cast<unsigned char>(peek()))) {
      route += peek();
      advance();
    }
    return {*verb, route};
  }

  TypeRef parseTypeRef() {
    skipTrivia();
    std::string id = peekIdent();
    if (id.empty()) fail("type");
    ident();
    if (auto k = kindFromName(id)) return TypeRef::prim(*k);
    if (id == "List") {
      expect('<');
      TypeRef elem = parseTypeRef();
      expect('>');
      return TypeRef::list(std::move(elem));
    }
    if (id == "Map") {
      expect('<');
      TypeRef key = parseTypeRef();
      expect(',');
      TypeRef value = parseTypeRef();
      expect('>');
      return TypeRef::map(std::move(key), std::move(value));
    }
    if (id == "fn") {
      TypeRef fn{TypeRef::Form::Function, PrimitiveKind::Int, {}, {}};
      expect('(');
      if (!tryChar(')')) {
        do {
          fn.args.push_back(parseTypeRef());
        } while (tryChar(','));
        expect(')');
      }
      expect('-');
      if (peek() != '>') fail("'->'");
      advance();
      fn.args.push_back(parseTypeRef());
      return fn;
    }
    return TypeRef::named(id);
  }

  NumericLiteral parseNumber() {
    skipTrivia();
    std::size_t start = pos_;
    if (peek() == '-' || peek() == '+') advance();
    bool isFloat = false;
    if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("numeric literal");
    while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      isFloat = true;
      advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (std::isdigit(static_cast<unsigned char>(peek(1))) ||
         ((peek(1) == '-' || peek(1) == '+') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
      isFloat = true;
      advance();
      advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    std::string digits(src_.substr(start, pos_ - start));
    if (!digits.empty() && digits[0] == '+') digits.erase(0, 1);

    NumericLiteral lit;
    if (isFloat) {
      if (peek() == 'f') advance();
      lit.number = std::stod(digits);
      lit.literalKind = PrimitiveKind::Float;
      return lit;
    }
    std::int64_t n = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec != std::errc{}) fail("integer literal within 64 bits");
    lit.number = n;
    lit.literalKind = PrimitiveKind::Int;
    if (peek() == 'n') {
      if (n < 0) fail("non-negative Nat literal");
      lit.literalKind = PrimitiveKind::Nat;
      advance();
    } else if (peek() == 'i') {
      advance();
    } else if (peek() == 'f') {
      advance();
      lit.number = static_cast<double>(n);
      lit.literalKind = PrimitiveKind::Float;
    }
    if (identChar(peek())) fail("end of numeric literal");
    return lit;
  }

  Refinement parseInvariantBlock() {
    expect('{');
    keyword("invariant");
    skipTrivia();
    std::size_t exprLine = line_, exprCol = col_;
    std::size_t exprStart = pos_;
    auto unsupported = [&]() -> Refinement {
      std::size_t end = src_.find('}', exprStart);
      std::string expr(src_.substr(exprStart, end == std::string_view::npos ? std::string_view::npos : end - exprStart));
      while (!expr.empty() && (std::isspace(static_cast<unsigned char>(expr.back())) || expr.back() == ';')) expr.pop_back();
      throw UnsupportedInvariant(std::to_string(exprLine) + ":" + std::to_string(exprCol) +
                                 ": only '$value <op> literal' invariants are supported, got '" + expr + "'");
    };

    if (peek() != '$') return unsupported();
    advance();
    if (peekIdent() != "value") return unsupported();
    ident();
    if (identChar(peek()) || peek() == '.' || peek() == '(') return unsupported();
    skipTrivia();

    std::optional<CompareOp> op;
    char c0 = peek(), c1 = peek(1);
    if (c0 == '<' && c1 == '=') op = CompareOp::LessEq;
    else if (c0 == '>' && c1 == '=') op = CompareOp::GreaterEq;
    else if (c0 == '=' && c1 == '=') op = CompareOp::Equal;
    else if (c0 == '<') op = CompareOp::Less;
    else if (c0 == '>') op = CompareOp::Greater;
    if (!op) return unsupported();
    advance();
    if (*op == CompareOp::LessEq || *op == CompareOp::GreaterEq || *op == CompareOp::Equal) advance();

    skipTrivia();
    char n0 = peek();
    if (!(std::isdigit(static_cast<unsigned char>(n0)) ||
          ((n0 == '-' || n0 == '+') && std::isdigit(static_cast<unsigned char>(peek(1)))))) {
      return unsupported();
    }
    NumericLiteral bound = parseNumber();
    tryChar(';');
    skipTrivia();
    if (peek() != '}') return unsupported();
    advance();
    return Refinement{NumericCompare{*op, bound}};
  }

  Refinement parseRegexLiteral() {
    skipTrivia();
    if (peek() != '/') fail("regex literal '/.../'");
    advance();
    std::string pattern;
    while (true) {
      if (atEnd() || peek() == '\n') fail("closing '/' of regex literal");
      char c = peek();
      if (c == '\\' && peek(1) == '/') {
        pattern += '/';
        advance();
        advance();
        continue;
      }
      if (c == '\\') {
        pattern += c;
        advance();
        pattern += peek();
        advance();
        continue;
      }
      if (c == '/') {
        advance();
        break;
      }
      pattern += c;
      advance();
    }
    try {
      std::regex check(pattern);
    } catch (const std::regex_error&) {
      fail("valid regular expression");
    }
    return Refinement{RegexMatch{pattern}};
  }

  TypeDecl parseTypeDecl() {
    keyword("type");
    std::string name = declName("type name");
    expect('=');
    TypeRef target = parseTypeRef();
    TypeDecl decl{name, AliasBody{target, std::nullopt}};
    skipTrivia();
    if (peek() == '&') {
      if (target.form != TypeRef::Form::Primitive) fail("primitive type before '&'");
      advance();
      std::get<AliasBody>(decl.body).refinement = parseInvariantBlock();
    } else if (peekIdent() == "of") {
      if (target.form != TypeRef::Form::Primitive || target.primitive != PrimitiveKind::String) {
        fail("'String' before 'of'");
      }
      ident();
      std::get<AliasBody>(decl.body).refinement = parseRegexLiteral();
    } else if (target.form == TypeRef::Form::List) {
      decl.body = ListBody{target.args[0]};
    } else if (target.form == TypeRef::Form::Map) {
      decl.body = MapBody{target.args[0], target.args[1]};
    }
    expect(';');
    return decl;
  }

  std::vector<Field> parseFieldBlock() {
    expect('{');
    std::vector<Field> fields;
    while (!tryChar('}')) {
      tryKeyword("field");
      std::string fname = ident("field name");
      expect(':');
      TypeRef t = parseTypeRef();
      fields.push_back({fname, t});
      skipTrivia();
      if (peek() == ';' || peek() == ',') {
        advance();
      } else if (peek() != '}') {
        fail("';' or '}'");
      }
    }
    return fields;
  }

  TypeDecl parseEntity() {
    keyword("entity");
    std::string name = declName("entity name");
    TypeDecl decl{name, EntityBody{parseFieldBlock()}};
    tryChar(';');
    return decl;
  }

  TypeDecl parseDatatype() {
    keyword("datatype");
    std::string name = declName("datatype name");
    keyword("of");
    DatatypeBody body;
    do {
      std::string vname = declName("variant name");
      body.variants.push_back({vname, parseFieldBlock()});
    } while (tryChar('|'));
    expect(';');
    return TypeDecl{name, std::move(body)};
  }

  void skipBody() {
    expect('{');
    int depth = 1;
    while (depth > 0) {
      if (atEnd()) fail("'}' closing api body");
      char c = peek();
      if (c == '"' || c == '\'') {
        advance();
        while (!atEnd() && peek() != c) {
          if (peek() == '\\') advance();
          advance();
        }
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        --depth;
      }
      advance();
    }
  }

  ApiSig parseApi() {
    keyword("api");
    ApiSig api;
    api.name = declName("api name");
    expect('(');
    if (!tryChar(')')) {
      do {
        std::string pname = ident("parameter name");
        expect(':');
        api.params.push_back({pname, parseTypeRef()});
      } while (tryChar(','));
      expect(')');
    }
    expect(':');
    api.result = parseTypeRef();
    skipTrivia();
    if (peek() == '{') {
      skipBody();
      tryChar(';');
    } else {
      expect(';');
    }
    api.verb = HttpVerb::Post;
    api.route = "/" + api.name;
    return api;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

void printFieldsMultiline(std::ostringstream& out, const std::vector<Field>& fields, const std::string& indent) {
  for (const auto& f : fields) {
    out << indent << "field " << f.name << ": " << renderTypeRef(f.type) << ";\n";
  }
}

std::string inlineFields(const std::vector<Field>& fields) {
  std::string out = "{ ";
  for (const auto& f : fields) out += "field " + f.name + ": " + renderTypeRef(f.type) + "; ";
  return out + "}";
}

}  // namespace

ApiSpec parseSpec(std::string_view text) { return Parser(text).parse(); }

std::string renderDeclInline(const TypeDecl& decl) {
  return std::visit(
      [&](const auto& body) -> std::string {
        using B = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<B, AliasBody>) {
          std::string out = "type " + decl.name + " = " + renderTypeRef(body.target);
          if (body.refinement) {
            if (std::holds_alternative<RegexMatch>(body.refinement->predicate)) {
              out += " of " + renderRefinement(*body.refinement);
            } else {
              out += " & { " + renderRefinement(*body.refinement) + " }";
            }
          }
          return out + ";";
        } else if constexpr (std::is_same_v<B, EntityBody>) {
          return "entity " + decl.name + " " + inlineFields(body.fields);
        } else if constexpr (std::is_same_v<B, DatatypeBody>) {
          std::string out = "datatype " + decl.name + " of ";
          for (std::size_t i = 0; i < body.variants.size(); ++i) {
            if (i) out += " | ";
            out += body.variants[i].name + " " + inlineFields(body.variants[i].fields);
          }
          return out + ";";
        } else if constexpr (std::is_same_v<B, ListBody>) {
          return "type " + decl.name + " = List<" + renderTypeRef(body.element) + ">;";
        } else {
          return "type " + decl.name + " = Map<" + renderTypeRef(body.key) + ", " +
                 renderTypeRef(body.value) + ">;";
        }
      },
      decl.body);
}

std::string prettyPrint(const ApiSpec& spec) {
  std::ostringstream out;
  bool first = true;
  auto separator = [&] {
    if (!first) out << "\n";
    first = false;
  };

  for (const auto& decl : spec.decls()) {
    separator();
    if (const auto* entity = std::get_if<EntityBody>(&decl.body)) {
      if (entity->fields.empty()) {
        out << "entity " << decl.name << " { }\n";
      } else {
        out << "entity " << decl.name << " {\n";
        printFieldsMultiline(out, entity->fields, "  ");
        out << "}\n";
      }
    } else if (const auto* dt = std::get_if<DatatypeBody>(&decl.body)) {
      out << "datatype " << decl.name << " of\n";
      for (std::size_t i = 0; i < dt->variants.size(); ++i) {
        const auto& v = dt->variants[i];
        out << "  " << (i ? "| " : "") << v.name;
        if (v.fields.empty()) {
          out << " { }\n";
        } else {
          out << " {\n";
          printFieldsMultiline(out, v.fields, "    ");
          out << "  }\n";
        }
      }
      out << ";\n";
    } else {
      out << renderDeclInline(decl) << "\n";
    }
  }
  for (const auto& api : spec.apis()) {
    separator();
    out << "@route " << verbName(api.verb) << " " << api.route << "\n";
    out << renderApiSignature(api) << ";\n";
  }
  return out.str();
}

bool evalRefinement(const Refinement& r, const Value& v) {
  if (const auto* cmp = std::get_if<NumericCompare>(&r.predicate)) {
    int order = 0;
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
      if (const auto* bi = std::get_if<std::int64_t>(&cmp->bound.number)) {
        order = (*i > *bi) - (*i < *bi);
      } else {
        double b = std::get<double>(cmp->bound.number);
        double d = static_cast<double>(*i);
        order = (d > b) - (d < b);
      }
    } else if (const auto* d = std::get_if<double>(&v)) {
      double b = cmp->bound.asDouble();
      if (std::isnan(*d)) return false;
      order = (*d > b) - (*d < b);
    } else {
      throw KindMismatch("numeric invariant applied to " + renderValue(v));
    }
    switch (cmp->op) {
      case CompareOp::Less: return order < 0;
      case CompareOp::LessEq: return order <= 0;
      case CompareOp::Equal: return order == 0;
      case CompareOp::GreaterEq: return order >= 0;
      case CompareOp::Greater: return order > 0;
    }
    return false;
  }
  const auto* s = std::get_if<std::string>(&v);
  if (!s) throw KindMismatch("regex refinement applied to " + renderValue(v));
  // Compiled patterns are cached per thread; std::regex is not cheap to build.
  thread_local std::string lastPattern;
  thread_local std::optional<std::regex> lastRegex;
  const auto& pattern = std::get<RegexMatch>(r.predicate).pattern;
  if (!lastRegex || lastPattern != pattern) {
    lastRegex.emplace(pattern);
    lastPattern = pattern;
  }
  return std::regex_match(*s, *lastRegex);
}

}  // namespace stratagen::spec
