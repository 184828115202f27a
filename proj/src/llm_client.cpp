#include "stratagen/llm_client.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "stratagen/error.hpp"
#include "stratagen/rng.hpp"

namespace stratagen::providers {

void LlmSettings::overlayEnvironment() {
  if (const char* v = std::getenv("LLM_ENDPOINT")) endpoint = v;
  if (const char* v = std::getenv("LLM_MODEL")) model = v;
  if (const char* v = std::getenv("LLM_API_KEY")) apiKey = v;
}

HttpLlmClient::HttpLlmClient(LlmSettings settings)
    : settings_(std::move(settings)), inFlight_(std::clamp(settings_.maxInFlight, 1, 256)) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(settings_.endpoint, m, url)) {
    throw ConfigError("LLM endpoint must be an http(s) URL, got '" + settings_.endpoint + "'");
  }
  origin_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/v1/chat/completions";
}

std::string HttpLlmClient::complete(const LlmRequest& request) {
  nlohmann::json body = {
      {"model", settings_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature},
  };

  inFlight_.acquire();
  struct Release {
    std::counting_semaphore<256>& s;
    ~Release() { s.release(); }
  } release{inFlight_};

  httplib::Client client(origin_);
  client.set_connection_timeout(settings_.timeoutSecs);
  client.set_read_timeout(settings_.timeoutSecs);
  httplib::Headers headers;
  if (!settings_.apiKey.empty()) headers.emplace("Authorization", "Bearer " + settings_.apiKey);

  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw LlmTransportError("LLM request to " + origin_ + path_ + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status / 100 != 2) {
    throw LlmTransportError("LLM endpoint returned HTTP " + std::to_string(res->status));
  }
  try {
    auto parsed = nlohmann::json::parse(res->body);
    return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw LlmTransportError(std::string("unexpected chat-completion payload: ") + e.what());
  }
}

std::string promptHash(std::string_view prompt) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(stableHash(prompt)));
  return buf;
}

std::string FixtureLlmClient::complete(const LlmRequest& request) {
  auto file = dir_ / (promptHash(request.prompt) + ".txt");
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FixtureMiss("no recorded response " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RecordingLlmClient::RecordingLlmClient(std::unique_ptr<LlmClient> inner, std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string RecordingLlmClient::complete(const LlmRequest& request) {
  std::string text = inner_->complete(request);
  std::ofstream(dir_ / (promptHash(request.prompt) + ".txt"), std::ios::binary) << text;
  return text;
}

}  // namespace stratagen::providers
