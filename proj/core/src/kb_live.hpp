#pragma once

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "expltk/kb.hpp"

namespace expltk::detail {

// Wikidata / Wikipedia / link-count client with rate limiting, bounded
// in-flight requests and exponential backoff.
class LiveClient {
 public:
  LiveClient(std::shared_ptr<Transport> transport, LiveOptions options);

  EntityProfile fetch_profile(const std::string& kb_id,
                              std::span<const std::string> langs);
  // nullopt when the page does not exist.
  std::optional<PageInfo> fetch_page(const std::string& title,
                                     const std::string& lang);

 private:
  nlohmann::json get_json(const HttpRequest& request, const std::string& what);
  void pace();
  std::string wikipedia_api(const std::string& lang) const;

  std::shared_ptr<Transport> transport_;
  LiveOptions options_;

  std::mutex pace_mutex_;
  std::chrono::steady_clock::time_point next_slot_{};

  std::mutex slots_mutex_;
  std::condition_variable slots_cv_;
  std::size_t in_flight_ = 0;
};

}  // namespace expltk::detail
