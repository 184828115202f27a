#include "toy_service.hpp"

#include <map>
#include <mutex>
#include <optional>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace toy {

using nlohmann::ordered_json;

namespace {

const char* const kSeed = R"([
  {"id": "696f0b92-7477-4ced-a7ef-9e63038b9fc0", "name": "Steve", "age": 27, "createdAt": "2024-01-31T19:34:17:00Z"},
  {"id": "bb4d6e69-5be2-488c-aef0-fc0627d40cf4", "name": "Alice", "age": 25, "createdAt": "2021-09-16T21:39:06:00Z"},
  {"id": "55a62005-0c72-4dd2-a9a6-239d9008c828", "name": "Bob", "age": 22, "createdAt": "2025-02-26T02:50:49:00Z"},
  {"id": "37f8a128-4a0b-423c-8be3-eb13bae56554", "name": "John", "age": 30, "createdAt": "2025-06-16T01:19:32:00Z"}
])";

void reply(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

std::optional<ordered_json> parseBody(const httplib::Request& req) {
  auto doc = ordered_json::parse(req.body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  return doc;
}

}  // namespace

struct ToyService::Impl {
  httplib::Server server;
  std::mutex mutex;
  std::map<std::string, ordered_json> people;
};

ToyService::ToyService() : impl_(std::make_unique<Impl>()) {
  for (const auto& p : ordered_json::parse(kSeed)) impl_->people[p["id"].get<std::string>()] = p;

  auto& srv = impl_->server;
  srv.set_pre_routing_handler([this](const httplib::Request&, httplib::Response&) {
    ++requests_;
    return httplib::Server::HandlerResponse::Unhandled;
  });

  srv.Post("/check", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = parseBody(req);
    if (!body || !(*body)["pressure"].is_number() || !(*body)["temperature"].is_number()) {
      return reply(res, 400, {{"error", "expected numeric pressure and temperature"}});
    }
    double pressure = (*body)["pressure"].get<double>();
    double temperature = (*body)["temperature"].get<double>();
    if (pressure < 10 && temperature > 300) {
      ++errorHits_;
      return reply(res, 500, {{"error", "unsafe operating point"}});
    }
    reply(res, 200, {{"result", pressure + temperature}});
  });

  srv.Post("/login", [](const httplib::Request& req, httplib::Response& res) {
    auto body = parseBody(req);
    if (!body || !(*body)["user"].is_string() || (*body)["user"].get<std::string>().empty()) {
      return reply(res, 401, {{"error", "unknown user"}});
    }
    reply(res, 200, {{"token", "t-" + (*body)["user"].get<std::string>()}});
  });

  srv.Get("/people", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(impl_->mutex);
    ordered_json all = ordered_json::array();
    for (const auto& [id, p] : impl_->people) all.push_back(p);
    reply(res, 200, all);
  });

  srv.Get(R"(/people/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(impl_->mutex);
    auto it = impl_->people.find(req.matches[1]);
    if (it == impl_->people.end()) return reply(res, 404, {{"error", "no such person"}});
    reply(res, 200, it->second);
  });

  srv.Post("/people", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = parseBody(req);
    if (!body || !(*body)["person"].is_object() || !(*body)["person"]["id"].is_string()) {
      return reply(res, 400, {{"error", "expected a person with an id"}});
    }
    std::lock_guard lock(impl_->mutex);
    const auto& person = (*body)["person"];
    impl_->people[person["id"].get<std::string>()] = person;
    reply(res, 201, person);
  });

  srv.Delete(R"(/people/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(impl_->mutex);
    if (impl_->people.erase(req.matches[1]) == 0) return reply(res, 404, {{"error", "no such person"}});
    res.status = 204;
  });
}

ToyService::~ToyService() { stop(); }

int ToyService::start(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) return -1;
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

bool ToyService::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

void ToyService::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace toy
