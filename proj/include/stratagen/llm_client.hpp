#pragma once

#include <filesystem>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>

namespace stratagen::providers {

struct LlmRequest {
  std::string prompt;
  double temperature = 0.2;
};

/// Anything that turns a prompt into raw response text. Implementations must
/// be safe to call from several threads.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  /// Throws LlmTransportError when the backend cannot be reached.
  virtual std::string complete(const LlmRequest& request) = 0;
};

struct LlmSettings {
  std::string endpoint;  // full chat-completions URL
  std::string model;
  std::string apiKey;
  int maxInFlight = 4;
  int timeoutSecs = 60;

  /// Reads LLM_ENDPOINT, LLM_MODEL and LLM_API_KEY; unset variables leave
  /// the corresponding field untouched.
  void overlayEnvironment();
};

/// Chat-completion style HTTP backend: posts `{model, messages, temperature}`
/// and returns `choices[0].message.content`.
class HttpLlmClient final : public LlmClient {
 public:
  explicit HttpLlmClient(LlmSettings settings);
  std::string complete(const LlmRequest& request) override;

 private:
  LlmSettings settings_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
  std::counting_semaphore<256> inFlight_;
};

/// Hex digest naming the fixture file for a prompt.
std::string promptHash(std::string_view prompt);

/// Replays recorded responses: `<dir>/<promptHash>.txt`. A missing file is a
/// FixtureMiss, never a silent fallback.
class FixtureLlmClient final : public LlmClient {
 public:
  explicit FixtureLlmClient(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::string complete(const LlmRequest& request) override;

 private:
  std::filesystem::path dir_;
};

/// Forwards to another client and stores each response as a fixture.
class RecordingLlmClient final : public LlmClient {
 public:
  RecordingLlmClient(std::unique_ptr<LlmClient> inner, std::filesystem::path dir);
  std::string complete(const LlmRequest& request) override;

 private:
  std::unique_ptr<LlmClient> inner_;
  std::filesystem::path dir_;
};

}  // namespace stratagen::providers
