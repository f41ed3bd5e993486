#include "expltk/guesser.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "expltk/error.hpp"
#include "expltk/serialization.hpp"

namespace expltk {

GuesserClient::GuesserClient(std::shared_ptr<Transport> transport, std::string url,
                             std::size_t max_concurrency)
    : transport_(std::move(transport)),
      url_(std::move(url)),
      max_concurrency_(std::max<std::size_t>(1, max_concurrency)) {
  if (!transport_) throw Error(ErrorKind::invalid_argument, "guesser client needs a transport");
}

GuessEntry GuesserClient::guess(const std::string& question_id, std::size_t step,
                                const std::string& partial_text) {
  HttpRequest request;
  request.method = "POST";
  request.url = url_;
  request.content_type = "application/json";
  request.body =
      json{{"question_id", question_id}, {"step", step}, {"partial_text", partial_text}}.dump();
  const HttpResponse response = transport_->send(request);
  const std::string where = "guesser " + question_id + " step " + std::to_string(step);
  if (response.status < 200 || response.status >= 300) {
    throw Error(ErrorKind::network, where + ": HTTP " + std::to_string(response.status));
  }
  try {
    const auto j = json::parse(response.body);
    GuessEntry entry{j.at("guess").get<std::string>(), j.at("confidence").get<double>()};
    if (!(entry.confidence >= 0.0 && entry.confidence <= 1.0)) {
      throw Error(ErrorKind::parse, where + ": confidence outside [0,1]");
    }
    return entry;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, where + ": " + e.what());
  }
}

std::vector<GuessLog> GuesserClient::collect(std::span<const GuesserRequest> requests) {
  std::vector<GuessLog> logs(requests.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) {
      try {
        const auto& req = requests[i];
        if (req.question == nullptr) throw Error(ErrorKind::invalid_argument, "null question");
        GuessLog log{req.question->question_id, {}};
        for (std::size_t step = 0; step < req.split.step_count(); ++step) {
          log.entries.push_back(guess(log.question_id, step,
                                      req.question->text.substr(0, req.split.boundaries[step])));
        }
        logs[i] = std::move(log);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = requests.size();
      }
    }
  };

  const std::size_t n_threads = std::min(max_concurrency_, requests.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return logs;
}

}  // namespace expltk
