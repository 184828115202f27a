#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stratagen/decompose.hpp"
#include "stratagen/llm_client.hpp"
#include "stratagen/rng.hpp"
#include "stratagen/spec.hpp"

namespace stratagen::providers {

enum class ProviderKind { Random, Static, Mock, Llm };

std::string_view providerName(ProviderKind kind);
std::optional<ProviderKind> providerFromName(std::string_view name);

/// Expert-supplied values keyed by path pattern (`*` matches any run of
/// characters). File form: `[{"path": "v.low.value", "values": [-10, 0, 42]}]`.
class StaticTable {
 public:
  struct Entry {
    std::string pattern;
    std::vector<nlohmann::ordered_json> values;
  };

  StaticTable() = default;
  explicit StaticTable(std::vector<Entry> entries) : entries_(std::move(entries)) {}

  static StaticTable fromJson(const nlohmann::ordered_json& doc);
  static StaticTable load(const std::filesystem::path& file);

  /// Values of every entry whose pattern matches `path`, in table order.
  std::vector<nlohmann::ordered_json> lookup(std::string_view path) const;
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<Entry> entries_;
};

bool globMatch(std::string_view pattern, std::string_view text);

struct MockRecord {
  std::string source;
  nlohmann::ordered_json fields;  // flat object of primitives, field order preserved
};

struct MockDataset {
  std::vector<MockRecord> records;
  std::string sourceLabel;

  /// All records as one pretty-printed JSON array.
  std::string render() const;
};

/// Reads each file as a JSON array of flat records. Throws UnreadableFile or
/// NonRecordEntry.
MockDataset ingestMockData(const std::vector<std::filesystem::path>& files);

/// Values of record fields named like the component's trailing field
/// (case-insensitive) that fit the component's kind and refinement.
std::vector<Value> mockValues(const decomp::Component& c, const MockDataset& mock);

/// `n` values of the component's kind: boundary values first, then uniform
/// draws, all satisfying the refinement. Throws RefinementUnsatisfiable.
std::vector<Value> randomValues(const decomp::Component& c, const SeededRng& rng, std::size_t n);

struct PromptContext {
  std::string localBlock;
  std::string globalBlock;
  std::optional<std::string> mockBlock;

  /// local, global, mock, then the fixed instruction tail.
  std::string render() const;
};

PromptContext buildPrompt(const decomp::Component& c, const spec::ApiSpec& spec, const spec::ApiSig& api,
                          const MockDataset* mock);

/// Queries the model (two extra attempts on malformed output), keeps values
/// of the right kind that pass the refinement, deduplicated in response
/// order. Dropped entries are described in `notes`.
std::vector<Value> llmValues(const decomp::Component& c, const PromptContext& ctx, LlmClient& client,
                             std::vector<std::string>* notes = nullptr);

/// Parses a response that must be one flat JSON array of primitives.
std::vector<nlohmann::ordered_json> parseValueArray(std::string_view text);

struct ProviderSet {
  std::vector<ProviderKind> order;
  const StaticTable* table = nullptr;
  const MockDataset* mock = nullptr;
  LlmClient* llm = nullptr;
  std::size_t cap = 6;
  std::size_t parallelism = 1;
  /// Receives every prompt sent to the model (may be called concurrently).
  std::function<void(const decomp::Component&, const std::string&)> onPrompt;
};

/// Fills every leaf component's strata. Synthetic components keep their
/// enumerated domains. Never leaves a component empty.
void fillStrata(decomp::Decomposition& d, const ProviderSet& providers, const SeededRng& rng,
                const spec::ApiSpec& spec, const spec::ApiSig& api);

}  // namespace stratagen::providers
