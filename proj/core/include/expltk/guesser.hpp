#pragma once

// Client for an external incremental guesser:
//   POST {url}  {question_id, step, partial_text}  ->  {guess, confidence}

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "expltk/qa.hpp"
#include "expltk/transport.hpp"

namespace expltk {

struct GuesserRequest {
  const Question* question = nullptr;
  StepSplit split;  // split of question->text
};

class GuesserClient {
 public:
  GuesserClient(std::shared_ptr<Transport> transport, std::string url,
                std::size_t max_concurrency = 4);

  GuessEntry guess(const std::string& question_id, std::size_t step,
                   const std::string& partial_text);

  // Questions are processed concurrently (bounded); steps of one question
  // are requested strictly in order. Output order follows the input.
  std::vector<GuessLog> collect(std::span<const GuesserRequest> requests);

 private:
  std::shared_ptr<Transport> transport_;
  std::string url_;
  std::size_t max_concurrency_;
};

}  // namespace expltk
