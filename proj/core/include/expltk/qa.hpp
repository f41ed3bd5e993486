#pragma once

// Incremental QA evaluation: questions are revealed in 30-50 character steps,
// a guesser emits (guess, confidence) per step, a buzzer decides when to
// answer, and Expected Wins rewards early correct answers.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "expltk/bitext.hpp"
#include "expltk/generator.hpp"

namespace expltk {

struct QuestionEntity {
  CharSpan span;
  std::string kb_id;

  bool operator==(const QuestionEntity&) const = default;
};

struct Question {
  std::string question_id;
  std::string lang;
  std::string text;
  std::vector<QuestionEntity> entities;
  std::vector<std::string> answer_aliases;
  // Insertions applied to an explicitated copy (empty for original text).
  std::vector<CharSpan> insertions;

  bool operator==(const Question&) const = default;
};

void validate_question(const Question& q);

struct StepSplit {
  // Exclusive end offsets of each step; the last one equals text length.
  std::vector<std::size_t> boundaries;
  std::set<std::size_t> forced;  // indices into boundaries

  std::size_t step_count() const { return boundaries.size(); }
  std::size_t total_chars() const {
    return boundaries.empty() ? 0 : boundaries.back();
  }
  std::size_t step_start(std::size_t step) const {
    return step == 0 ? 0 : boundaries[step - 1];
  }
  bool operator==(const StepSplit&) const = default;
};

struct SplitOptions {
  std::size_t min_chars = 30;
  std::size_t max_chars = 50;
  // Step count the splitter steers towards while staying inside
  // [min_chars, max_chars]; 0 means plain greedy (largest step <= max).
  std::size_t target_steps = 31;
};

StepSplit split_steps(const Question& question, const SplitOptions& options = {});

// The question as it read before explicitation: insertions removed, entity
// spans mapped back.
Question original_question(const Question& q);

// Split of q.text whose boundaries are those of the original text with every
// insertion merged into the step it follows.
StepSplit explicitated_split(const Question& q, const SplitOptions& options = {});

// Extends the step ending at the insertion point by the inserted text and
// shifts later boundaries. Throws Error(invalid_argument) when the insertion
// does not start at a step boundary.
StepSplit merge_explicitation(const StepSplit& split,
                              const IntegrationResult& integration);

struct GuessEntry {
  std::string guess;
  double confidence = 0.0;

  bool operator==(const GuessEntry&) const = default;
};

struct GuessLog {
  std::string question_id;
  std::vector<GuessEntry> entries;

  bool operator==(const GuessLog&) const = default;
};

// Guess-log JSONL: {question_id, step, guess, confidence}, one line per step.
std::vector<GuessLog> read_guess_logs(std::istream& in);
void write_guess_logs(std::ostream& out, std::span<const GuessLog> logs);

std::optional<std::size_t> threshold_buzz(const GuessLog& log, double threshold);
bool match_answer(std::string_view guess,
                  std::span<const std::string> aliases);
std::optional<std::size_t> oracle_buzz(const GuessLog& log,
                                       std::span<const std::string> aliases);
bool full_input_accuracy(const GuessLog& log,
                         std::span<const std::string> aliases);

class WinCurve {
 public:
  enum class Kind { linear, table };

  // w(t) = 1 - t
  static WinCurve linear();
  // Piecewise-linear through (position_fraction, win_probability) points,
  // which must be sorted by position and non-increasing in probability.
  static WinCurve from_table(std::vector<std::pair<double, double>> points);
  // Two whitespace-separated columns per line; '#' starts a comment.
  static WinCurve load(std::istream& in);

  double operator()(double t) const;
  Kind kind() const { return kind_; }
  const std::vector<std::pair<double, double>>& table() const { return table_; }

 private:
  Kind kind_ = Kind::linear;
  std::vector<std::pair<double, double>> table_;
};

double expected_wins(const StepSplit& split, std::optional<std::size_t> buzz_step,
                     bool correct, const WinCurve& curve);

enum class Condition { original, explicitation };
std::string_view to_string(Condition c);

struct QuestionResult {
  std::string question_id;
  std::optional<std::size_t> buzz_step;
  bool correct_at_buzz = false;
  std::optional<std::size_t> oracle_step;
  double ew = 0.0;
  double ewo = 0.0;
  bool full_correct = false;
};

struct EvalResult {
  Condition condition = Condition::original;
  std::vector<QuestionResult> questions;  // in input question order
  double ew = 0.0;
  double ewo = 0.0;
  double full_input_accuracy = 0.0;
};

// Positions are measured on each question's own (original) text split, so
// an explicitated log must have the same step count as the original split.
// Throws Error(invalid_argument) for an empty set or a missing/misaligned log.
EvalResult evaluate_set(std::span<const Question> questions,
                        std::span<const GuessLog> logs, double threshold,
                        const WinCurve& curve,
                        Condition condition = Condition::original,
                        const SplitOptions& split = {});

struct IncreaseRate {
  double value = 0.0;
  bool absolute = false;  // original was 0: value is the plain difference

  bool operator==(const IncreaseRate&) const = default;
};

IncreaseRate increase_rate(double original, double explicitated);

// Threshold maximizing mean EW; ties go to the smallest grid value.
double fit_buzzer_threshold(std::span<const Question> questions,
                            std::span<const GuessLog> logs,
                            const WinCurve& curve,
                            std::span<const double> grid,
                            const SplitOptions& split = {});

}  // namespace expltk
