#include "expltk/qa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "expltk/error.hpp"
#include "expltk/serialization.hpp"
#include "expltk/text.hpp"

namespace expltk {

void validate_question(const Question& q) {
  if (q.question_id.empty()) throw Error(ErrorKind::schema, "question without question_id");
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorKind::schema, "question " + q.question_id + ": " + msg);
  };
  if (text::trim(q.text).empty()) fail("empty text");
  if (q.answer_aliases.empty()) fail("no answer aliases");
  for (const auto& e : q.entities) {
    if (e.span.start >= e.span.end || e.span.end > q.text.size()) {
      fail("entity span out of range");
    }
  }
  std::size_t prev_end = 0;
  for (const auto& s : q.insertions) {
    if (s.start > s.end || s.end > q.text.size() || s.start < prev_end) {
      fail("insertions out of range or overlapping");
    }
    prev_end = s.end;
  }
}

namespace {

// Codepoint view of a text: byte offset of every codepoint start, plus the
// text length as a sentinel.
struct CodepointIndex {
  std::vector<std::size_t> offsets;
  std::vector<bool> space;

  explicit CodepointIndex(std::string_view s) {
    std::size_t pos = 0;
    while (pos < s.size()) {
      offsets.push_back(pos);
      space.push_back(text::is_space(text::decode_next(s, pos)));
    }
    offsets.push_back(s.size());
  }

  std::size_t size() const { return space.size(); }
  // Codepoint index of the first codepoint starting at or after `byte`.
  std::size_t index_of(std::size_t byte) const {
    return static_cast<std::size_t>(
        std::lower_bound(offsets.begin(), offsets.end(), byte) - offsets.begin());
  }
};

}  // namespace

StepSplit split_steps(const Question& question, const SplitOptions& options) {
  if (options.min_chars < 1 || options.max_chars < options.min_chars) {
    throw Error(ErrorKind::invalid_argument, "split window needs 1 <= min <= max");
  }
  StepSplit split;
  const CodepointIndex cps(question.text);
  const std::size_t n = cps.size();
  if (n == 0) return split;

  std::vector<std::pair<std::size_t, std::size_t>> entities;  // codepoint spans
  for (const auto& e : question.entities) {
    entities.emplace_back(cps.index_of(e.span.start), cps.index_of(e.span.end));
  }
  auto inside_entity = [&](std::size_t b) {
    return std::any_of(entities.begin(), entities.end(),
                       [&](const auto& e) { return e.first < b && b < e.second; });
  };
  auto word_start = [&](std::size_t b) { return cps.space[b - 1] && !cps.space[b]; };

  const std::size_t lo = options.min_chars;
  const std::size_t hi = options.max_chars;

  // The loop below offers, from a boundary p: a forced cut at the first entity
  // end in (p, p + hi], else the text end when it is within hi, else a word
  // start in [p + lo, p + hi] outside entities, else a hard cut at p + hi.
  auto forced_after = [&](std::size_t p) {
    std::size_t forced = n;
    for (const auto& e : entities) {
      if (e.second > p && e.second < n && e.second <= p + hi) forced = std::min(forced, e.second);
    }
    return forced;
  };
  auto successors = [&](std::size_t p) {
    std::vector<std::size_t> out;
    if (const std::size_t f = forced_after(p); f < n) {
      out.push_back(f);
    } else if (n - p <= hi) {
      out.push_back(n);
    } else {
      for (std::size_t b = p + lo; b <= p + hi && b < n; ++b) {
        if (word_start(b) && !inside_entity(b)) out.push_back(b);
      }
      if (out.empty()) out.push_back(p + hi);
    }
    return out;
  };

  // Backward pass: the step counts possible from each position to the end,
  // over all paths and over clean ones (no forced step shorter than lo).
  struct Range {
    std::size_t min = SIZE_MAX, max = 0;
    bool empty() const { return min > max; }
    void add(std::size_t lo_k, std::size_t hi_k) {
      min = std::min(min, lo_k);
      max = std::max(max, hi_k);
    }
  };
  struct Reach {
    Range all, clean;
  };
  std::vector<Reach> reach(n + 1);
  reach[n].all = {0, 0};
  reach[n].clean = {0, 0};
  for (std::size_t p = n; p-- > 0;) {
    Reach& r = reach[p];
    for (const std::size_t b : successors(p)) {
      const bool short_forced = b < n && b - p < lo && forced_after(p) == b;
      r.all.add(reach[b].all.min + 1, reach[b].all.max + 1);
      if (!short_forced && !reach[b].clean.empty()) {
        r.clean.add(reach[b].clean.min + 1, reach[b].clean.max + 1);
      }
    }
  }

  std::vector<std::size_t> cuts;
  std::size_t p = 0;
  while (p < n) {
    const auto next = successors(p);
    if (next.size() == 1) {
      if (next[0] < n && forced_after(p) == next[0]) split.forced.insert(cuts.size());
      cuts.push_back(next[0]);
      p = next[0];
      continue;
    }
    const std::size_t k = cuts.size();
    std::size_t want = hi;
    if (options.target_steps > k) {
      const double per_step =
          static_cast<double>(n - p) / static_cast<double>(options.target_steps - k);
      want = std::clamp(static_cast<std::size_t>(std::llround(per_step)), lo, hi);
    }
    // Rank: how far the remaining target falls outside the reachable step
    // counts, preferring clean paths at equal distance, then distance from the
    // steered width.
    const std::size_t need = options.target_steps > k + 1 ? options.target_steps - k - 1 : 0;
    auto miss = [&](const Range& r) {
      return need < r.min ? r.min - need : need > r.max ? need - r.max : 0;
    };
    auto key = [&](std::size_t b) {
      auto best_path = std::make_pair(miss(reach[b].all), 1);
      if (!reach[b].clean.empty()) best_path = std::min(best_path, {miss(reach[b].clean), 0});
      const std::size_t dist = b > p + want ? b - p - want : p + want - b;
      if (options.target_steps == 0) return std::make_tuple(std::size_t{0}, 0, dist);
      return std::make_tuple(best_path.first, best_path.second, dist);
    };
    std::size_t best = next[0];
    for (const std::size_t b : next) {
      if (key(b) <= key(best)) best = b;  // ties go to the longer step
    }
    cuts.push_back(best);
    p = best;
  }
  split.boundaries.reserve(cuts.size());
  for (const std::size_t c : cuts) split.boundaries.push_back(cps.offsets[c]);
  return split;
}

StepSplit merge_explicitation(const StepSplit& split, const IntegrationResult& integration) {
  const CharSpan ins = integration.inserted_span;
  if (ins.size() == 0) return split;
  const auto it = std::find(split.boundaries.begin(), split.boundaries.end(), ins.start);
  if (it == split.boundaries.end()) {
    throw Error(ErrorKind::invalid_argument,
                "insertion at byte " + std::to_string(ins.start) + " is not at a step boundary");
  }
  StepSplit merged = split;
  for (auto& b : merged.boundaries) {
    if (b >= ins.start) b += ins.size();
  }
  return merged;
}

std::vector<GuessLog> read_guess_logs(std::istream& in) {
  struct Pending {
    std::size_t first_line;
    std::map<std::size_t, GuessEntry> steps;
  };
  std::vector<std::string> order;
  std::map<std::string, Pending> by_id;
  std::string line;
  for (std::size_t line_no = 0; std::getline(in, line); ++line_no) {
    if (text::trim(line).empty()) continue;
    const std::string where = "guess log line " + std::to_string(line_no + 1);
    try {
      const auto j = json::parse(line);
      const auto id = j.at("question_id").get<std::string>();
      const auto step = j.at("step").get<std::size_t>();
      GuessEntry entry{j.at("guess").is_null() ? std::string() : j.at("guess").get<std::string>(),
                       j.at("confidence").get<double>()};
      if (!(entry.confidence >= 0.0 && entry.confidence <= 1.0)) {
        throw Error(ErrorKind::parse, where + ": confidence outside [0,1]");
      }
      auto [it, fresh] = by_id.try_emplace(id, Pending{line_no, {}});
      if (fresh) order.push_back(id);
      if (!it->second.steps.emplace(step, std::move(entry)).second) {
        throw Error(ErrorKind::parse, where + ": duplicate step " + std::to_string(step) +
                                          " for " + id);
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::parse, where + ": " + e.what());
    }
  }
  std::vector<GuessLog> logs;
  for (const auto& id : order) {
    GuessLog log{id, {}};
    std::size_t expected = 0;
    for (auto& [step, entry] : by_id.at(id).steps) {
      if (step != expected++) {
        throw Error(ErrorKind::parse, "guess log for " + id + " is missing step " +
                                          std::to_string(expected - 1));
      }
      log.entries.push_back(std::move(entry));
    }
    logs.push_back(std::move(log));
  }
  return logs;
}

void write_guess_logs(std::ostream& out, std::span<const GuessLog> logs) {
  for (const auto& log : logs) {
    for (std::size_t i = 0; i < log.entries.size(); ++i) {
      out << jsonl_line({{"question_id", log.question_id},
                         {"step", i},
                         {"guess", log.entries[i].guess},
                         {"confidence", log.entries[i].confidence}});
    }
  }
}

std::optional<std::size_t> threshold_buzz(const GuessLog& log, double threshold) {
  for (std::size_t i = 0; i < log.entries.size(); ++i) {
    if (log.entries[i].confidence >= threshold) return i;
  }
  return std::nullopt;
}

bool match_answer(std::string_view guess, std::span<const std::string> aliases) {
  const std::string g = text::normalize_loose(guess);
  if (g.empty()) return false;
  return std::any_of(aliases.begin(), aliases.end(),
                     [&](const std::string& a) { return text::normalize_loose(a) == g; });
}

std::optional<std::size_t> oracle_buzz(const GuessLog& log,
                                       std::span<const std::string> aliases) {
  for (std::size_t i = 0; i < log.entries.size(); ++i) {
    if (match_answer(log.entries[i].guess, aliases)) return i;
  }
  return std::nullopt;
}

bool full_input_accuracy(const GuessLog& log, std::span<const std::string> aliases) {
  return !log.entries.empty() && match_answer(log.entries.back().guess, aliases);
}

WinCurve WinCurve::linear() { return WinCurve(); }

WinCurve WinCurve::from_table(std::vector<std::pair<double, double>> points) {
  if (points.empty()) throw Error(ErrorKind::invalid_argument, "empty win curve table");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [t, w] = points[i];
    if (!(t >= 0.0 && t <= 1.0) || !(w >= 0.0 && w <= 1.0)) {
      throw Error(ErrorKind::invalid_argument, "win curve point outside [0,1]");
    }
    if (i > 0 && !(t > points[i - 1].first)) {
      throw Error(ErrorKind::invalid_argument, "win curve positions must increase");
    }
    if (i > 0 && w > points[i - 1].second) {
      throw Error(ErrorKind::invalid_argument, "win curve must be non-increasing");
    }
  }
  WinCurve curve;
  curve.kind_ = Kind::table;
  curve.table_ = std::move(points);
  return curve;
}

WinCurve WinCurve::load(std::istream& in) {
  std::vector<std::pair<double, double>> points;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (text::trim(line).empty()) continue;
    std::istringstream fields(line);
    double t = 0, w = 0;
    std::string extra;
    if (!(fields >> t >> w) || (fields >> extra)) {
      throw Error(ErrorKind::parse, "win curve line " + std::to_string(line_no) +
                                        ": expected two numbers");
    }
    points.emplace_back(t, w);
  }
  return from_table(std::move(points));
}

double WinCurve::operator()(double t) const {
  t = std::clamp(t, 0.0, 1.0);
  if (kind_ == Kind::linear) return 1.0 - t;
  if (t <= table_.front().first) return table_.front().second;
  if (t >= table_.back().first) return table_.back().second;
  const auto hi = std::upper_bound(table_.begin(), table_.end(), t,
                                   [](double x, const auto& p) { return x < p.first; });
  const auto lo = hi - 1;
  const double f = (t - lo->first) / (hi->first - lo->first);
  return lo->second + f * (hi->second - lo->second);
}

double expected_wins(const StepSplit& split, std::optional<std::size_t> buzz_step, bool correct,
                     const WinCurve& curve) {
  if (!buzz_step || !correct) return 0.0;
  if (*buzz_step >= split.step_count()) {
    throw Error(ErrorKind::invalid_argument, "buzz step " + std::to_string(*buzz_step) +
                                                 " beyond " + std::to_string(split.step_count()) +
                                                 " steps");
  }
  const double t = static_cast<double>(split.boundaries[*buzz_step]) /
                   static_cast<double>(split.total_chars());
  return std::clamp(curve(t), 0.0, 1.0);
}

std::string_view to_string(Condition c) {
  return c == Condition::original ? "original" : "explicitation";
}

Question original_question(const Question& q) {
  if (q.insertions.empty()) return q;
  Question out = q;
  out.insertions.clear();
  out.text.clear();
  std::size_t pos = 0;
  for (const auto& s : q.insertions) {
    out.text.append(q.text, pos, s.start - pos);
    pos = s.end;
  }
  out.text.append(q.text, pos);
  auto shift = [&](std::size_t x) {
    std::size_t removed = 0;
    for (const auto& s : q.insertions) {
      if (s.end <= x) removed += s.size();
      else if (s.start < x) removed += x - s.start;
    }
    return x - removed;
  };
  for (auto& e : out.entities) e.span = {shift(e.span.start), shift(e.span.end)};
  return out;
}

StepSplit explicitated_split(const Question& q, const SplitOptions& options) {
  StepSplit split = split_steps(original_question(q), options);
  // Insertions are in final coordinates; merging them in order keeps each
  // start aligned with the already shifted boundaries.
  for (const auto& ins : q.insertions) {
    IntegrationResult r;
    r.inserted_span = ins;
    split = merge_explicitation(split, r);
  }
  return split;
}

namespace {

struct Prepared {
  const Question* question;
  const GuessLog* log;
  StepSplit split;
};

std::vector<Prepared> prepare(std::span<const Question> questions,
                              std::span<const GuessLog> logs, const SplitOptions& options) {
  if (questions.empty()) throw Error(ErrorKind::invalid_argument, "empty question set");
  std::map<std::string, const GuessLog*> by_id;
  for (const auto& log : logs) by_id[log.question_id] = &log;
  std::vector<Prepared> out;
  out.reserve(questions.size());
  for (const auto& q : questions) {
    const auto it = by_id.find(q.question_id);
    if (it == by_id.end()) {
      throw Error(ErrorKind::invalid_argument, "no guess log for question " + q.question_id);
    }
    StepSplit split = split_steps(original_question(q), options);
    if (it->second->entries.size() != split.step_count()) {
      throw Error(ErrorKind::invalid_argument,
                  "guess log for question " + q.question_id + " has " +
                      std::to_string(it->second->entries.size()) + " steps, expected " +
                      std::to_string(split.step_count()));
    }
    out.push_back({&q, it->second, std::move(split)});
  }
  return out;
}

EvalResult evaluate_prepared(const std::vector<Prepared>& items, double threshold,
                             const WinCurve& curve, Condition condition) {
  EvalResult result;
  result.condition = condition;
  for (const auto& item : items) {
    const auto& aliases = item.question->answer_aliases;
    QuestionResult r;
    r.question_id = item.question->question_id;
    r.buzz_step = threshold_buzz(*item.log, threshold);
    r.correct_at_buzz =
        r.buzz_step && match_answer(item.log->entries[*r.buzz_step].guess, aliases);
    r.oracle_step = oracle_buzz(*item.log, aliases);
    r.ew = expected_wins(item.split, r.buzz_step, r.correct_at_buzz, curve);
    r.ewo = expected_wins(item.split, r.oracle_step, r.oracle_step.has_value(), curve);
    r.full_correct = full_input_accuracy(*item.log, aliases);
    result.ew += r.ew;
    result.ewo += r.ewo;
    result.full_input_accuracy += r.full_correct ? 1.0 : 0.0;
    result.questions.push_back(std::move(r));
  }
  const double n = static_cast<double>(items.size());
  result.ew /= n;
  result.ewo /= n;
  result.full_input_accuracy /= n;
  return result;
}

}  // namespace

EvalResult evaluate_set(std::span<const Question> questions, std::span<const GuessLog> logs,
                        double threshold, const WinCurve& curve, Condition condition,
                        const SplitOptions& split) {
  return evaluate_prepared(prepare(questions, logs, split), threshold, curve, condition);
}

IncreaseRate increase_rate(double original, double explicitated) {
  if (original > 0.0) return {(explicitated - original) / original, false};
  if (explicitated == original) return {0.0, false};
  return {explicitated - original, true};
}

double fit_buzzer_threshold(std::span<const Question> questions, std::span<const GuessLog> logs,
                            const WinCurve& curve, std::span<const double> grid,
                            const SplitOptions& split) {
  if (grid.empty()) throw Error(ErrorKind::invalid_argument, "empty threshold grid");
  std::vector<double> sorted(grid.begin(), grid.end());
  for (const double t : sorted) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::invalid_argument, "threshold outside [0,1]");
  }
  std::sort(sorted.begin(), sorted.end());
  const auto items = prepare(questions, logs, split);
  double best_t = sorted.front();
  double best_ew = -1.0;
  for (const double t : sorted) {
    const double ew = evaluate_prepared(items, t, curve, Condition::original).ew;
    if (ew > best_ew) {
      best_ew = ew;
      best_t = t;
    }
  }
  return best_t;
}

}  // namespace expltk
