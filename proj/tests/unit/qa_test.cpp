#include "expltk/qa.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "expltk/error.hpp"
#include "expltk/text.hpp"
#include "test_support.hpp"

namespace expltk {
namespace {

using testing::Gen;

Question question(std::string text, std::vector<QuestionEntity> entities = {},
                  std::vector<std::string> aliases = {"x"}) {
  return {"q", "en", std::move(text), std::move(entities), std::move(aliases), {}};
}

std::size_t codepoints(std::string_view s) {
  std::size_t n = 0;
  for (const char c : s) n += (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  return n;
}

std::string random_text(Gen& gen, std::size_t min_bytes) {
  static const char* accents[] = {"é", "ł", "ö"};
  std::string t;
  while (t.size() < min_bytes) {
    if (!t.empty()) t += gen.coin(0.05) ? "  " : " ";
    t += gen.word(1, 12);
    if (gen.coin(0.1)) t += accents[gen.index(3)];
    if (gen.coin(0.1)) t += ",";
  }
  return t;
}

TEST(Split, ShortTextIsOneStep) {
  const auto s = split_steps(question("Who wrote it?"));
  EXPECT_EQ(s.boundaries, (std::vector<std::size_t>{13}));
  EXPECT_TRUE(s.forced.empty());
  EXPECT_EQ(split_steps(question("")).step_count(), 0u);
}

TEST(Split, EntityEndForcesBoundary) {
  std::string t = "aaaa bbbb cccc dddd eeee fffff Sambre";
  ASSERT_EQ(t.size(), 37u);
  t += " flows north through many towns and villages of the region before it joins the Meuse.";
  const auto s = split_steps(question(t, {{{31, 37}, "Q217148"}}));
  ASSERT_GE(s.step_count(), 2u);
  EXPECT_EQ(s.boundaries[0], 37u);
  EXPECT_TRUE(s.forced.contains(0));
}

TEST(Split, HardCutWithoutWhitespace) {
  const std::string t(120, 'a');
  const auto s = split_steps(question(t));
  EXPECT_EQ(s.boundaries, (std::vector<std::size_t>{50, 100, 120}));
}

TEST(Split, PlainGreedyTakesTheLargestStep) {
  std::string t;
  for (int i = 0; i < 40; ++i) t += "aaaa ";  // 200 chars
  SplitOptions greedy;
  greedy.target_steps = 0;
  EXPECT_EQ(split_steps(question(t), greedy).boundaries,
            (std::vector<std::size_t>{50, 100, 150, 200}));
}

TEST(Split, RejectsBadWindow) {
  EXPECT_THROW(split_steps(question("abc"), {0, 50, 31}), Error);
  EXPECT_THROW(split_steps(question("abc"), {40, 30, 31}), Error);
}

TEST(Split, InvariantsHoldProperty) {
  Gen gen(2024);
  for (int i = 0; i < 400; ++i) {
    const std::string t = random_text(gen, static_cast<std::size_t>(gen.integer(1, 1600)));
    // Entities on word boundaries, possibly dense.
    std::vector<QuestionEntity> ents;
    const auto tokens = text::words(t);
    for (int e = gen.integer(0, 6); e > 0 && !tokens.empty(); --e) {
      const auto& w = tokens[gen.index(tokens.size())];
      const std::size_t start = static_cast<std::size_t>(w.data() - t.data());
      const CharSpan span{start, start + w.size()};
      bool clash = false;
      for (const auto& x : ents) clash = clash || (x.span.start < span.end && span.start < x.span.end);
      if (!clash) ents.push_back({span, "Q1"});
    }
    const auto q = question(t, ents);
    const auto s = split_steps(q);
    ASSERT_FALSE(s.boundaries.empty());
    EXPECT_EQ(s.boundaries.back(), t.size());
    for (std::size_t k = 0; k < s.step_count(); ++k) {
      const std::size_t b = s.boundaries[k];
      ASSERT_GT(b, s.step_start(k));
      EXPECT_NE(static_cast<unsigned char>(t[b == t.size() ? 0 : b]) & 0xC0, 0x80);
      const std::size_t len = codepoints(std::string_view(t).substr(s.step_start(k), b - s.step_start(k)));
      if (k + 1 < s.step_count() && !s.forced.contains(k)) {
        EXPECT_GE(len, 30u) << t;
      }
      EXPECT_LE(len, 50u);
      for (const auto& e : ents) {
        EXPECT_FALSE(e.span.start < b && b < e.span.end) << "boundary inside an entity";
      }
    }
    for (const auto& e : ents) {
      if (e.span.end < t.size()) {
        EXPECT_NE(std::find(s.boundaries.begin(), s.boundaries.end(), e.span.end), s.boundaries.end())
            << "entity end is not a boundary";
      }
    }
    EXPECT_EQ(split_steps(q), s);  // deterministic
  }
}

TEST(Merge, ExtendsTheEntityStep) {
  std::string t = "aaaa bbbb cccc dddd eeee fffff Sambre";
  t += " flows north through many towns and villages of the region.";
  const Question q = question(t, {{{31, 37}, "Q217148"}});
  const auto split = split_steps(q);
  GeneratedExplicitation mid;
  mid.type = GenType::Mid;
  mid.text = "river in France and Belgium";
  const auto r = integrate(t, {31, 37}, mid);
  ASSERT_EQ(r.inserted_span.size(), 30u);
  const auto merged = merge_explicitation(split, r);
  EXPECT_EQ(merged.step_count(), split.step_count());
  EXPECT_EQ(merged.boundaries[0], 67u);
  for (std::size_t k = 1; k < split.step_count(); ++k) {
    EXPECT_EQ(merged.boundaries[k], split.boundaries[k] + 30);
  }
  EXPECT_EQ(merge_explicitation(split, IntegrationResult{}), split);
  IntegrationResult off;
  off.inserted_span = {5, 9};
  EXPECT_THROW(merge_explicitation(split, off), Error);
}

TEST(Original, RemovesInsertionsAndMapsSpans) {
  Question q = question("the Sambre river, a stream flows", {{{4, 10}, "Q1"}, {{27, 32}, "Q2"}});
  q.insertions = {{10, 16}, {16, 26}};
  const auto o = original_question(q);
  EXPECT_EQ(o.text, "the Sambre flows");
  EXPECT_TRUE(o.insertions.empty());
  EXPECT_EQ(o.entities[0].span, (CharSpan{4, 10}));
  EXPECT_EQ(o.entities[1].span, (CharSpan{11, 16}));
  EXPECT_EQ(original_question(o), o);
}

TEST(Validate, QuestionInvariants) {
  EXPECT_NO_THROW(validate_question(question("Who?", {{{0, 3}, "Q1"}})));
  EXPECT_THROW(validate_question(question("Who?", {}, {})), Error);
  EXPECT_THROW(validate_question(question("Who?", {{{2, 9}, "Q1"}})), Error);
  EXPECT_THROW(validate_question(question("   ")), Error);
}

TEST(GuessLogs, RoundTripAndOrdering) {
  const std::vector<GuessLog> logs{{"b", {{"Paris", 0.2}, {"Lyon", 0.9}}}, {"a", {{"", 0.0}}}};
  std::stringstream buf;
  write_guess_logs(buf, logs);
  EXPECT_EQ(read_guess_logs(buf), logs);
  // Steps may arrive out of order.
  std::istringstream shuffled(
      R"({"question_id":"q","step":1,"guess":"b","confidence":0.5})"
      "\n"
      R"({"question_id":"q","step":0,"guess":null,"confidence":0.1})"
      "\n");
  const auto read = read_guess_logs(shuffled);
  ASSERT_EQ(read.size(), 1u);
  EXPECT_EQ(read[0].entries[0].guess, "");
  EXPECT_EQ(read[0].entries[1].guess, "b");
}

TEST(GuessLogs, Errors) {
  auto fails = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_guess_logs(in);
    } catch (const Error& e) {
      return e.kind() == ErrorKind::parse;
    }
    return false;
  };
  EXPECT_TRUE(fails(R"({"question_id":"q","step":0,"guess":"a","confidence":1.5})"));
  EXPECT_TRUE(fails(R"({"question_id":"q","step":1,"guess":"a","confidence":0.5})"));
  EXPECT_TRUE(fails("{\"question_id\":\"q\",\"step\":0,\"guess\":\"a\",\"confidence\":0.5}\n"
                    "{\"question_id\":\"q\",\"step\":0,\"guess\":\"b\",\"confidence\":0.5}"));
  EXPECT_TRUE(fails("nope"));
  EXPECT_TRUE(fails(R"({"question_id":"q","guess":"a","confidence":0.5})"));
}

TEST(Buzz, ThresholdOracleAndMatching) {
  const std::vector<std::string> aliases{"Miguel de Cervantes", "Cervantes"};
  const GuessLog log{"q", {{"Lope", 0.3}, {"cervantes.", 0.5}, {"Cervantes", 0.9}}};
  EXPECT_EQ(threshold_buzz(log, 0.5), 1u);
  EXPECT_EQ(threshold_buzz(log, 0.95), std::nullopt);
  EXPECT_EQ(oracle_buzz(log, aliases), 1u);
  EXPECT_TRUE(full_input_accuracy(log, aliases));
  EXPECT_TRUE(match_answer("  MIGUEL de  cervantes ", aliases));
  EXPECT_FALSE(match_answer("Cervantes Saavedra", aliases));
  EXPECT_FALSE(match_answer("", aliases));
  EXPECT_FALSE(full_input_accuracy({"q", {}}, aliases));
}

TEST(WinCurves, LinearTableAndValidation) {
  const auto lin = WinCurve::linear();
  EXPECT_DOUBLE_EQ(lin(0.25), 0.75);
  EXPECT_DOUBLE_EQ(lin(2.0), 0.0);
  const auto table = WinCurve::from_table({{0.0, 1.0}, {0.5, 0.6}, {1.0, 0.0}});
  EXPECT_EQ(table.kind(), WinCurve::Kind::table);
  EXPECT_DOUBLE_EQ(table(0.25), 0.8);
  EXPECT_DOUBLE_EQ(table(0.75), 0.3);
  EXPECT_DOUBLE_EQ(table(1.0), 0.0);
  const auto inner = WinCurve::from_table({{0.2, 0.9}, {0.8, 0.1}});
  EXPECT_DOUBLE_EQ(inner(0.0), 0.9);
  EXPECT_DOUBLE_EQ(inner(1.0), 0.1);
  EXPECT_THROW(WinCurve::from_table({}), Error);
  EXPECT_THROW(WinCurve::from_table({{0.0, 0.5}, {0.5, 0.6}}), Error);
  EXPECT_THROW(WinCurve::from_table({{0.5, 0.5}, {0.5, 0.4}}), Error);
  EXPECT_THROW(WinCurve::from_table({{0.0, 1.5}}), Error);
}

TEST(WinCurves, LoadFromText) {
  std::istringstream in("# position win\n0 1\n0.5 0.5  # midpoint\n\n1 0\n");
  const auto c = WinCurve::load(in);
  EXPECT_EQ(c.table().size(), 3u);
  EXPECT_DOUBLE_EQ(c(0.25), 0.75);
  std::istringstream bad("0 1 2\n");
  EXPECT_THROW(WinCurve::load(bad), Error);
  std::ifstream fixture(testing::fixture("win_curve.tsv"));
  const auto f = WinCurve::load(fixture);
  EXPECT_DOUBLE_EQ(f(0.25), 0.9);
}

TEST(WinCurves, NonIncreasingProperty) {
  Gen gen(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::pair<double, double>> pts;
    double w = 1.0;
    double t = 0.0;
    for (int k = gen.integer(1, 6); k > 0; --k) {
      t += gen.real(0.01, 0.2);
      w -= gen.real(0.0, 0.2);
      pts.emplace_back(std::min(t, 1.0), std::max(w, 0.0));
      if (t >= 1.0) break;
    }
    const auto c = WinCurve::from_table(pts);
    double prev = 2.0;
    for (double x = 0; x <= 1.0; x += 0.01) {
      EXPECT_LE(c(x), prev + 1e-12);
      prev = c(x);
    }
  }
}

TEST(ExpectedWins, PositionFromBoundaries) {
  StepSplit s;
  s.boundaries = {30, 60, 100};
  EXPECT_DOUBLE_EQ(expected_wins(s, 0, true, WinCurve::linear()), 0.7);
  EXPECT_DOUBLE_EQ(expected_wins(s, 2, true, WinCurve::linear()), 0.0);
  EXPECT_DOUBLE_EQ(expected_wins(s, 1, false, WinCurve::linear()), 0.0);
  EXPECT_DOUBLE_EQ(expected_wins(s, std::nullopt, true, WinCurve::linear()), 0.0);
}

TEST(Evaluate, ErrorsForMissingOrMisalignedLogs) {
  const std::vector<Question> qs{question("Who wrote Don Quixote?", {}, {"Cervantes"})};
  EXPECT_THROW(evaluate_set({}, {}, 0.5, WinCurve::linear()), Error);
  EXPECT_THROW(evaluate_set(qs, {}, 0.5, WinCurve::linear()), Error);
  const std::vector<GuessLog> two_steps{{"q", {{"a", 0.1}, {"b", 0.2}}}};
  EXPECT_THROW(evaluate_set(qs, two_steps, 0.5, WinCurve::linear()), Error);
  const std::vector<GuessLog> ok{{"q", {{"Cervantes", 0.8}}}};
  const auto r = evaluate_set(qs, ok, 0.5, WinCurve::linear(), Condition::explicitation);
  EXPECT_EQ(r.condition, Condition::explicitation);
  EXPECT_DOUBLE_EQ(r.ew, 0.0);  // buzz on the last step: t = 1
  EXPECT_DOUBLE_EQ(r.full_input_accuracy, 1.0);
  EXPECT_EQ(to_string(Condition::original), "original");
}

TEST(Evaluate, ExplicitatedQuestionUsesOriginalPositions) {
  std::string t = "aaaa bbbb cccc dddd eeee fffff Sambre";
  t += " flows north through many towns and villages of the region.";
  Question original = question(t, {{{31, 37}, "Q1"}}, {"Meuse"});
  Question expl = original;
  expl.text.insert(37, " river");
  expl.insertions = {{37, 43}};
  const auto split = split_steps(original);
  GuessLog log{"q", {}};
  for (std::size_t k = 0; k < split.step_count(); ++k) log.entries.push_back({"Meuse", 0.9});
  const auto a = evaluate_set(std::span(&original, 1), std::span(&log, 1), 0.5, WinCurve::linear());
  const auto b = evaluate_set(std::span(&expl, 1), std::span(&log, 1), 0.5, WinCurve::linear());
  EXPECT_DOUBLE_EQ(a.ew, b.ew);
  EXPECT_DOUBLE_EQ(a.ew, 1.0 - 37.0 / static_cast<double>(t.size()));
  EXPECT_EQ(explicitated_split(expl), merge_explicitation(split, IntegrationResult{expl.text, {37, 43}, {31, 37}, ""}));
}

TEST(IncreaseRate, RelativeAndAbsolute) {
  EXPECT_EQ(increase_rate(0.5, 0.75), (IncreaseRate{0.5, false}));
  EXPECT_EQ(increase_rate(0.0, 0.4), (IncreaseRate{0.4, true}));
  EXPECT_EQ(increase_rate(0.0, 0.0), (IncreaseRate{0.0, false}));
  EXPECT_EQ(increase_rate(0.4, 0.2), (IncreaseRate{-0.5, false}));
}

TEST(Threshold, FitMatchesBruteForceProperty) {
  Gen gen(55);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Question> qs;
    std::vector<GuessLog> logs;
    for (int i = 0; i < 6; ++i) {
      Question q = question(random_text(gen, static_cast<std::size_t>(gen.integer(40, 400))), {}, {"ans"});
      q.question_id = "q" + std::to_string(i);
      GuessLog log{q.question_id, {}};
      for (std::size_t k = 0; k < split_steps(q).step_count(); ++k) {
        log.entries.push_back({gen.coin(0.4) ? "ans" : "no", gen.real(0, 1)});
      }
      qs.push_back(std::move(q));
      logs.push_back(std::move(log));
    }
    std::vector<double> grid;
    for (int k = 0; k <= 20; ++k) grid.push_back(k / 20.0);
    const double fitted = fit_buzzer_threshold(qs, logs, WinCurve::linear(), grid);
    double best = -1, best_t = -1;
    for (const double t : grid) {
      const double ew = evaluate_set(qs, logs, t, WinCurve::linear()).ew;
      if (ew > best + 1e-15) {
        best = ew;
        best_t = t;
      }
    }
    EXPECT_DOUBLE_EQ(fitted, best_t);
  }
  const std::vector<double> bad{1.5};
  const std::vector<Question> qs{question("short")};
  const std::vector<GuessLog> logs{{"q", {{"x", 0.5}}}};
  EXPECT_THROW(fit_buzzer_threshold(qs, logs, WinCurve::linear(), bad), Error);
  EXPECT_THROW(fit_buzzer_threshold(qs, logs, WinCurve::linear(), {}), Error);
}

}  // namespace
}  // namespace expltk
