#include "expltk/transport.hpp"

#include <httplib.h>

#include "expltk/error.hpp"

namespace expltk {

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (const char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
        c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(ch);
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0x0F]);
    }
  }
  return out;
}

HttpResponse CountingTransport::send(const HttpRequest& request) {
  ++calls_;
  if (!inner_) throw Error(ErrorKind::network, "no transport configured for " + request.url);
  return inner_->send(request);
}

namespace {

class HttplibTransport final : public Transport {
 public:
  HttplibTransport(std::chrono::seconds timeout, std::string user_agent)
      : timeout_(timeout), user_agent_(std::move(user_agent)) {}

  HttpResponse send(const HttpRequest& request) override {
    // Split "scheme://host[:port]" from the path.
    const auto scheme_end = request.url.find("://");
    if (scheme_end == std::string::npos) {
      throw Error(ErrorKind::invalid_argument, "not an absolute URL: " + request.url);
    }
    const auto path_start = request.url.find('/', scheme_end + 3);
    const std::string origin = request.url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : request.url.substr(path_start);
    if (!request.query.empty()) {
      path.push_back(path.find('?') == std::string::npos ? '?' : '&');
      bool first = true;
      for (const auto& [key, value] : request.query) {
        if (!first) path.push_back('&');
        first = false;
        path += url_encode(key) + "=" + url_encode(value);
      }
    }

    httplib::Client client(origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_follow_location(true);
    const httplib::Headers headers = {{"User-Agent", user_agent_}};

    httplib::Result result = request.method == "POST"
                                 ? client.Post(path, headers, request.body,
                                               request.content_type.empty()
                                                   ? "application/json"
                                                   : request.content_type)
                                 : client.Get(path, headers);
    if (!result) {
      throw Error(ErrorKind::network,
                  request.url + ": " + httplib::to_string(result.error()));
    }
    return {result->status, result->body};
  }

 private:
  std::chrono::seconds timeout_;
  std::string user_agent_;
};

}  // namespace

std::shared_ptr<Transport> make_http_transport(std::chrono::seconds timeout,
                                               std::string user_agent) {
  return std::make_shared<HttplibTransport>(timeout, std::move(user_agent));
}

}  // namespace expltk
