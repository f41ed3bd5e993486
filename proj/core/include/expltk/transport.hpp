#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace expltk {

struct HttpRequest {
  std::string method = "GET";
  std::string url;  // absolute, without query string
  std::vector<std::pair<std::string, std::string>> query;
  std::string body;
  std::string content_type;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Every outbound request of the library goes through a Transport, so tests
// can script responses and count calls.
class Transport {
 public:
  virtual ~Transport() = default;
  // Throws Error(network) when no response could be obtained.
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

// cpp-httplib backed transport. https requires the OpenSSL build.
std::shared_ptr<Transport> make_http_transport(
    std::chrono::seconds timeout = std::chrono::seconds(30),
    std::string user_agent = "expltk/0.1");

class CountingTransport final : public Transport {
 public:
  // `inner` may be null, in which case every send() fails with a network
  // error after being counted.
  explicit CountingTransport(std::shared_ptr<Transport> inner = nullptr)
      : inner_(std::move(inner)) {}

  HttpResponse send(const HttpRequest& request) override;

  std::size_t calls() const { return calls_.load(); }

 private:
  std::shared_ptr<Transport> inner_;
  std::atomic<std::size_t> calls_{0};
};

std::string url_encode(std::string_view s);

}  // namespace expltk
