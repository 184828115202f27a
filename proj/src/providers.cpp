#include "stratagen/providers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "regex_sampler.hpp"
#include "stratagen/error.hpp"

namespace stratagen::providers {

using decomp::Component;
using nlohmann::ordered_json;

std::string_view providerName(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::Random: return "random";
    case ProviderKind::Static: return "static";
    case ProviderKind::Mock: return "mock";
    case ProviderKind::Llm: return "llm";
  }
  return "?";
}

std::optional<ProviderKind> providerFromName(std::string_view name) {
  for (auto k : {ProviderKind::Random, ProviderKind::Static, ProviderKind::Mock, ProviderKind::Llm}) {
    if (providerName(k) == name) return k;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Static tables

bool globMatch(std::string_view pattern, std::string_view text) {
  // Iterative wildcard match with single-star backtracking.
  std::size_t p = 0, t = 0, starP = std::string_view::npos, starT = 0;
  while (t < text.size()) {
    if (p < pattern.size() && pattern[p] == '*') {
      starP = p++;
      starT = t;
    } else if (p < pattern.size() && pattern[p] == text[t]) {
      ++p;
      ++t;
    } else if (starP != std::string_view::npos) {
      p = starP + 1;
      t = ++starT;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

StaticTable StaticTable::fromJson(const ordered_json& doc) {
  if (!doc.is_array()) throw NonRecordEntry("static table must be an array of {path, values} records");
  std::vector<Entry> entries;
  for (const auto& rec : doc) {
    if (!rec.is_object() || !rec.contains("path") || !rec["path"].is_string() || !rec.contains("values") ||
        !rec["values"].is_array()) {
      throw NonRecordEntry("static table entry must be {\"path\": string, \"values\": array}: " + rec.dump());
    }
    Entry e{rec["path"].get<std::string>(), {}};
    for (const auto& v : rec["values"]) e.values.push_back(v);
    entries.push_back(std::move(e));
  }
  return StaticTable(std::move(entries));
}

namespace {

ordered_json readJsonFile(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw UnreadableFile("cannot open " + file.string());
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UnreadableFile(file.string() + ": " + e.what());
  }
}

}  // namespace

StaticTable StaticTable::load(const std::filesystem::path& file) { return fromJson(readJsonFile(file)); }

std::vector<ordered_json> StaticTable::lookup(std::string_view path) const {
  std::vector<ordered_json> out;
  for (const auto& e : entries_) {
    if (globMatch(e.pattern, path)) out.insert(out.end(), e.values.begin(), e.values.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mock data

std::string MockDataset::render() const {
  ordered_json arr = ordered_json::array();
  for (const auto& r : records) arr.push_back(r.fields);
  return arr.dump(2);
}

MockDataset ingestMockData(const std::vector<std::filesystem::path>& files) {
  MockDataset out;
  for (const auto& file : files) {
    ordered_json doc = readJsonFile(file);
    if (!doc.is_array()) throw NonRecordEntry(file.string() + ": expected an array of records");
    for (const auto& rec : doc) {
      if (!rec.is_object()) throw NonRecordEntry(file.string() + ": not a record: " + rec.dump());
      for (const auto& [name, value] : rec.items()) {
        if (name.empty()) throw NonRecordEntry(file.string() + ": empty field name");
        if (value.is_structured()) {
          throw NonRecordEntry(file.string() + ": field '" + name + "' is not a primitive");
        }
      }
      out.records.push_back({file.filename().string(), rec});
    }
    if (!out.sourceLabel.empty()) out.sourceLabel += ",";
    out.sourceLabel += file.filename().string();
  }
  return out;
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

bool acceptable(const Component& c, const Value& v) {
  if (!valueMatchesKind(v, c.kind)) return false;
  return !c.refinement || spec::evalRefinement(*c.refinement, v);
}

}  // namespace

std::vector<Value> mockValues(const Component& c, const MockDataset& mock) {
  std::vector<Value> out;
  if (c.isSynthetic()) return out;
  auto name = c.path.trailingFieldName();
  if (!name && !c.fieldName.empty()) name = c.fieldName;  // bare parameter such as `id.value`
  if (!name) return out;
  for (const auto& rec : mock.records) {
    for (const auto& [field, json] : rec.fields.items()) {
      if (!iequals(field, *name)) continue;
      if (auto v = valueFromJson(json, c.kind); v && acceptable(c, *v)) out.push_back(*v);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random values

namespace {

constexpr int kAttemptsPerValue = 1000;
constexpr std::int64_t kDefaultSpan = 1000;

std::vector<Value> boundaryValues(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Bool: return {Value{false}, Value{true}};
    case PrimitiveKind::Float: return {Value{0.0}};
    case PrimitiveKind::String: return {Value{std::string()}};
    case PrimitiveKind::UUID: return {Value{std::string("00000000-0000-0000-0000-000000000000")}};
    case PrimitiveKind::DateTime: return {Value{std::string("1970-01-01T00:00:00Z")}};
    default: return {Value{std::int64_t{0}}};
  }
}

/// Sampling interval implied by the kind and an optional numeric bound.
std::pair<double, double> numericRange(const Component& c) {
  double lo = isUnsigned(c.kind) ? 0.0 : -static_cast<double>(kDefaultSpan);
  double hi = static_cast<double>(kDefaultSpan);
  if (!c.refinement) return {lo, hi};
  const auto* cmp = std::get_if<spec::NumericCompare>(&c.refinement->predicate);
  if (!cmp) return {lo, hi};
  const double b = cmp->bound.asDouble();
  const double step = isIntegral(c.kind) ? 1.0 : 0.01;
  switch (cmp->op) {
    case spec::CompareOp::Less:
    case spec::CompareOp::LessEq:
      hi = std::min(hi, cmp->op == spec::CompareOp::Less ? b - step : b);
      if (lo > hi) lo = hi - static_cast<double>(kDefaultSpan);
      break;
    case spec::CompareOp::Greater:
    case spec::CompareOp::GreaterEq:
      lo = std::max(lo, cmp->op == spec::CompareOp::Greater ? b + step : b);
      if (hi < lo) hi = lo + static_cast<double>(kDefaultSpan);
      break;
    case spec::CompareOp::Equal:
      lo = hi = b;
      break;
  }
  if (isUnsigned(c.kind)) lo = std::max(lo, 0.0);
  return {lo, hi};
}

std::string randomUuid(RandomStream& rng) {
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  for (int i = 0; i < 32; ++i) {
    int nibble = static_cast<int>(rng.below(16));
    if (i == 12) nibble = 4;
    if (i == 16) nibble = 8 + (nibble & 3);
    if (i == 8 || i == 12 || i == 16 || i == 20) s += '-';
    s += hex[nibble];
  }
  return s;
}

std::string randomDateTime(RandomStream& rng) {
  std::time_t t = static_cast<std::time_t>(rng.between(0, 2147483647));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string randomText(RandomStream& rng) {
  static constexpr std::string_view alphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 -_";
  std::string s;
  auto len = rng.between(1, 12);
  for (std::int64_t i = 0; i < len; ++i) s += alphabet[rng.below(alphabet.size())];
  return s;
}

class Drawer {
 public:
  explicit Drawer(const Component& c) : c_(c) {
    if (c.kind == PrimitiveKind::String && c.refinement) {
      if (const auto* re = std::get_if<spec::RegexMatch>(&c.refinement->predicate)) {
        try {
          sampler_.emplace(re->pattern);
        } catch (const std::invalid_argument&) {
          // unsupported construct; plain rejection sampling below
        }
      }
    }
    if (isNumeric(c.kind)) range_ = numericRange(c);
  }

  Value draw(RandomStream& rng) const {
    switch (c_.kind) {
      case PrimitiveKind::Bool:
        return Value{rng.below(2) == 1};
      case PrimitiveKind::Nat:
      case PrimitiveKind::Int:
      case PrimitiveKind::BigNat:
      case PrimitiveKind::BigInt: {
        auto lo = static_cast<std::int64_t>(std::ceil(range_.first));
        auto hi = static_cast<std::int64_t>(std::floor(range_.second));
        return Value{rng.between(lo, std::max(lo, hi))};
      }
      case PrimitiveKind::Float: {
        double x = range_.first + rng.unit() * (range_.second - range_.first);
        return Value{std::round(x * 100.0) / 100.0};
      }
      case PrimitiveKind::String:
        return Value{sampler_ ? sampler_->sample(rng) : randomText(rng)};
      case PrimitiveKind::UUID:
        return Value{randomUuid(rng)};
      case PrimitiveKind::DateTime:
        return Value{randomDateTime(rng)};
    }
    return Value{false};
  }

 private:
  const Component& c_;
  std::optional<detail::RegexSampler> sampler_;
  std::pair<double, double> range_{0.0, 0.0};
};

}  // namespace

std::vector<Value> randomValues(const Component& c, const SeededRng& rng, std::size_t n) {
  std::vector<Value> out;
  if (n == 0) return out;
  for (const auto& b : boundaryValues(c.kind)) {
    if (out.size() == n) return out;
    if (acceptable(c, b)) out.push_back(b);
  }
  RandomStream stream = rng.streamFor("random:" + c.key);
  Drawer drawer(c);
  while (out.size() < n) {
    bool found = false;
    for (int attempt = 0; attempt < kAttemptsPerValue; ++attempt) {
      Value v = drawer.draw(stream);
      if (acceptable(c, v)) {
        out.push_back(std::move(v));
        found = true;
        break;
      }
    }
    if (!found) {
      throw RefinementUnsatisfiable("no value of " + c.describeKind() + " found for '" + c.key + "' after " +
                                    std::to_string(kAttemptsPerValue) + " attempts");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prompts

namespace {

constexpr std::string_view kInstructionTail =
    "Work in two steps. First, partition the space of valid values for this field into the distinct "
    "classes that a tester should exercise: typical values, boundaries, special or sentinel values, and "
    "values that are well-typed but likely to stress the API. Second, pick one representative value from "
    "each class. Respond with the JSON array of the picked values only: no prose, no code fences, no "
    "nested arrays or objects.";

}  // namespace

std::string PromptContext::render() const {
  std::string out = localBlock + "\n\n" + globalBlock;
  if (mockBlock) out += "\n\n" + *mockBlock;
  out += "\n\n";
  out += kInstructionTail;
  out += "\n";
  return out;
}

PromptContext buildPrompt(const Component& c, const spec::ApiSpec& spec, const spec::ApiSig& api,
                          const MockDataset* mock) {
  bool ownsRoot = std::any_of(api.params.begin(), api.params.end(),
                              [&](const spec::Field& p) { return p.name == c.path.root(); });
  if (!ownsRoot) {
    throw std::invalid_argument("component '" + c.key + "' is not rooted at a parameter of api " + api.name);
  }

  PromptContext ctx;
  const std::string kind(kindName(c.kind));
  std::ostringstream local;
  if (c.enclosingType.empty()) {
    local << "Given a parameter, named " << c.fieldName << " of the api " << api.name << ", with data type "
          << kind;
  } else {
    local << "Given a field, named " << c.fieldName << " in a type named " << c.enclosingType
          << ", with data type " << kind;
  }
  local << ", generate a JSON array containing ONLY test values strictly matching the specified data type "
           "and format, and within acceptable ranges.";
  if (c.aliasName) local << "\nThe value is declared with the named type " << *c.aliasName << ".";
  if (c.refinement) {
    if (const auto* re = std::get_if<spec::RegexMatch>(&c.refinement->predicate)) {
      local << "\nEvery value must fully match the regular expression /" << re->pattern << "/.";
    } else {
      local << "\nEvery value must satisfy the invariant " << spec::renderRefinement(*c.refinement).substr(10)
            << ".";
    }
  }
  ctx.localBlock = local.str();

  std::ostringstream global;
  global << "The API that this value is being generated for has the following signature:\n"
         << spec::renderApiSignature(api) << "\n\n"
         << "The value is on the path:\n"
         << c.key << "\n\n"
         << "The traversed type definitions are:\n";
  for (const auto& name : c.traversed) global << spec::renderDeclInline(spec.get(name)) << "\n";
  ctx.globalBlock = global.str();
  while (!ctx.globalBlock.empty() && ctx.globalBlock.back() == '\n') ctx.globalBlock.pop_back();

  if (mock) {
    ctx.mockBlock =
        "Additionally, the codebase uses mocked data sources, sample mock data is given below. You may use "
        "these values as appropriate to construct test inputs.\n" +
        mock->render();
  }
  return ctx;
}

// ---------------------------------------------------------------------------
// LLM values

std::vector<ordered_json> parseValueArray(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    throw MalformedResponse("response is not JSON");
  }
  if (!doc.is_array()) throw MalformedResponse("response is not a JSON array");
  std::vector<ordered_json> out;
  for (const auto& e : doc) {
    if (e.is_structured()) throw MalformedResponse("response array contains a nested " + std::string(e.type_name()));
    out.push_back(e);
  }
  return out;
}

namespace {

constexpr int kMalformedRetries = 2;

void appendUnique(std::vector<Value>& out, const Value& v) {
  if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
}

}  // namespace

std::vector<Value> llmValues(const Component& c, const PromptContext& ctx, LlmClient& client,
                             std::vector<std::string>* notes) {
  const std::string prompt = ctx.render();
  std::vector<ordered_json> raw;
  for (int attempt = 0;; ++attempt) {
    std::string text = client.complete({prompt, 0.2 + 0.3 * attempt});
    try {
      raw = parseValueArray(text);
      break;
    } catch (const MalformedResponse& e) {
      if (notes) notes->push_back("llm attempt " + std::to_string(attempt + 1) + ": " + e.what());
      if (attempt >= kMalformedRetries) throw;
    }
  }

  std::vector<Value> out;
  for (const auto& e : raw) {
    auto v = valueFromJson(e, c.kind);
    if (!v) {
      if (notes) notes->push_back("llm value " + e.dump() + " dropped: not a " + std::string(kindName(c.kind)));
      continue;
    }
    if (c.refinement && !spec::evalRefinement(*c.refinement, *v)) {
      if (notes) notes->push_back("llm value " + e.dump() + " dropped: fails refinement");
      continue;
    }
    appendUnique(out, *v);
  }
  if (out.empty()) throw EmptyAfterValidation("no usable llm values for '" + c.key + "'");
  return out;
}

// ---------------------------------------------------------------------------
// Strata

namespace {

constexpr ProviderKind kFallbackChain[] = {ProviderKind::Llm, ProviderKind::Mock, ProviderKind::Static,
                                           ProviderKind::Random};

class StrataFiller {
 public:
  StrataFiller(const ProviderSet& providers, const SeededRng& rng, const spec::ApiSpec& spec,
               const spec::ApiSig& api)
      : p_(providers), rng_(rng), spec_(spec), api_(api) {}

  void fill(Component& c) const {
    if (c.isSynthetic()) return;
    c.values.clear();
    c.sources.clear();
    for (ProviderKind kind : p_.order) {
      std::vector<Value> got = run(kind, c);
      std::string source(providerName(kind));
      if (got.empty()) {
        std::tie(got, source) = fallbackAfter(kind, c);
      }
      for (const auto& v : got) {
        if (std::find(c.values.begin(), c.values.end(), v) != c.values.end()) continue;
        c.values.push_back(v);
        c.sources.push_back(source);
      }
    }
    if (c.values.size() > p_.cap) {
      c.values.resize(p_.cap);
      c.sources.resize(p_.cap);
    }
    if (c.values.empty()) {
      for (const auto& v : randomValues(c, rng_, p_.cap)) {
        if (std::find(c.values.begin(), c.values.end(), v) != c.values.end()) continue;
        c.values.push_back(v);
        c.sources.push_back("fallback:random");
      }
    }
  }

 private:
  bool available(ProviderKind kind) const {
    switch (kind) {
      case ProviderKind::Llm: return p_.llm != nullptr;
      case ProviderKind::Mock: return p_.mock != nullptr;
      case ProviderKind::Static: return p_.table != nullptr;
      case ProviderKind::Random: return true;
    }
    return false;
  }

  std::pair<std::vector<Value>, std::string> fallbackAfter(ProviderKind failed, Component& c) const {
    auto it = std::find(std::begin(kFallbackChain), std::end(kFallbackChain), failed);
    for (++it; it != std::end(kFallbackChain); ++it) {
      if (!available(*it)) continue;
      std::vector<Value> got = run(*it, c);
      if (!got.empty()) {
        c.notes.push_back(std::string(providerName(failed)) + " produced no values; fell back to " +
                          std::string(providerName(*it)));
        return {std::move(got), "fallback:" + std::string(providerName(*it))};
      }
    }
    return {};
  }

  std::vector<Value> run(ProviderKind kind, Component& c) const {
    switch (kind) {
      case ProviderKind::Random:
        return randomValues(c, rng_, p_.cap);
      case ProviderKind::Mock:
        return p_.mock ? mockValues(c, *p_.mock) : std::vector<Value>{};
      case ProviderKind::Static: {
        std::vector<Value> out;
        if (!p_.table) return out;
        for (const auto& json : p_.table->lookup(c.key)) {
          auto v = valueFromJson(json, c.kind);
          if (v && acceptable(c, *v)) {
            out.push_back(*v);
          } else {
            c.notes.push_back("static value " + json.dump() + " dropped for " + c.describeKind());
          }
        }
        return out;
      }
      case ProviderKind::Llm: {
        if (!p_.llm) return {};
        PromptContext ctx = buildPrompt(c, spec_, api_, p_.mock);
        if (p_.onPrompt) p_.onPrompt(c, ctx.render());
        try {
          return llmValues(c, ctx, *p_.llm, &c.notes);
        } catch (const LlmTransportError& e) {
          c.notes.push_back(std::string("llm transport: ") + e.what());
        } catch (const MalformedResponse& e) {
          c.notes.push_back(std::string("llm malformed after retries: ") + e.what());
        } catch (const EmptyAfterValidation& e) {
          c.notes.push_back(e.what());
        }
        return {};
      }
    }
    return {};
  }

  const ProviderSet& p_;
  const SeededRng& rng_;
  const spec::ApiSpec& spec_;
  const spec::ApiSig& api_;
};

}  // namespace

void fillStrata(decomp::Decomposition& d, const ProviderSet& providers, const SeededRng& rng,
                const spec::ApiSpec& spec, const spec::ApiSig& api) {
  if (providers.order.empty()) throw ConfigError("at least one value provider is required");
  StrataFiller filler(providers, rng, spec, api);
  auto& comps = d.components;
  std::vector<std::exception_ptr> errors(comps.size());

  auto work = [&](std::size_t i) {
    try {
      filler.fill(comps[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const std::size_t threads = std::min(std::max<std::size_t>(providers.parallelism, 1), comps.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < comps.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < comps.size(); i = next++) work(i);
      });
    }
  }
  // Report the first failure in component order so errors are deterministic.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace stratagen::providers
