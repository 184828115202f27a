#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>

namespace toy {

/// Small HTTP target used by the end-to-end tests.
///
///   POST   /check         {"pressure": n, "temperature": n}; 500 when
///                         pressure < 10 and temperature > 300, else 200
///   POST   /login         {"user": s, "password": s}; 200 for a non-empty user
///   GET    /people        all records
///   GET    /people/{id}   one record or 404
///   POST   /people        {"person": {...}}; 201
///   DELETE /people/{id}   204 or 404
///
/// The people store starts with four seeded records.
class ToyService {
 public:
  ToyService();
  ~ToyService();
  ToyService(const ToyService&) = delete;
  ToyService& operator=(const ToyService&) = delete;

  /// Binds (port 0 picks a free port), starts serving on a background
  /// thread and returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();
  /// Blocks serving on the calling thread.
  bool listen(const std::string& host, int port);

  std::size_t errorHits() const { return errorHits_; }
  std::size_t requests() const { return requests_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  std::atomic<std::size_t> errorHits_{0};
  std::atomic<std::size_t> requests_{0};
};

}  // namespace toy
