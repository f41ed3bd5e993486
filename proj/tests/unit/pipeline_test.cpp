#include "expltk/pipeline.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <nlohmann/json.hpp>

#include "expltk/error.hpp"
#include "expltk/serialization.hpp"
#include "test_support.hpp"

namespace expltk::pipeline {
namespace {

using nlohmann::json;
using testing::fixture;
using testing::fixture_snapshot;
using testing::slurp;
using testing::spit;
using testing::TempDir;

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::io;
}

MineOptions mine_options(const fs::path& out, std::size_t jobs = 1) {
  MineOptions m;
  m.bitext.path = fixture("bitext.tsv");
  m.alignments = {fixture("align.awesome.txt"), fixture("align.simalign.txt")};
  m.entities = fixture("entities.jsonl");
  m.jobs = jobs;
  m.out_dir = out;
  return m;
}

TEST(AtomicWrite, ReplacesWithoutLeftovers) {
  TempDir dir("atomic");
  const auto path = dir / "nested" / "out.txt";
  write_file_atomic(path, "one");
  write_file_atomic(path, "two");
  EXPECT_EQ(slurp(path), "two");
  EXPECT_FALSE(fs::exists(fs::path(path.string() + ".tmp")));
  fs::create_directories(dir / "blocker");
  EXPECT_EQ(kind_of([&] { write_file_atomic(dir / "blocker", "x"); }), ErrorKind::io);
}

TEST(Readers, ErrorsCarryPathAndLine) {
  TempDir dir("readers");
  spit(dir / "q.jsonl",
       R"({"question_id":"a","lang":"en","text":"x","answer_aliases":["y"]})"
       "\n"
       R"({"question_id":"a","lang":"en","text":"x","answer_aliases":["y"]})"
       "\n");
  EXPECT_EQ(kind_of([&] { read_questions(dir / "q.jsonl"); }), ErrorKind::schema);
  spit(dir / "c.jsonl", "\n{\"pair_id\":1}\n");
  try {
    read_candidates(dir / "c.jsonl");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("c.jsonl:2"), std::string::npos) << e.what();
  }
  EXPECT_EQ(kind_of([&] { read_text_file(dir / "missing"); }), ErrorKind::io);
  spit(dir / "cfg.json", "{");
  EXPECT_EQ(kind_of([&] { read_decision_config(dir / "cfg.json"); }), ErrorKind::parse);
  spit(dir / "tasks.json", "{}");
  EXPECT_EQ(kind_of([&] { read_tasks(dir / "tasks.json"); }), ErrorKind::schema);
}

TEST(Mine, IdempotentAndIndependentOfJobs) {
  TempDir dir("mine");
  KbGateway kb = KbGateway::offline(fixture_snapshot());
  const auto a = run_mine(mine_options(dir / "a"), kb);
  const auto b = run_mine(mine_options(dir / "b", 8), kb);
  run_mine(mine_options(dir / "a"), kb);
  EXPECT_GT(a.candidates, 0u);
  EXPECT_EQ(a.candidates, b.candidates);
  EXPECT_EQ(a.pairs_in, b.pairs_in);
  EXPECT_EQ(slurp(dir / "a" / kCandidatesFile), slurp(dir / "b" / kCandidatesFile));
  EXPECT_NEAR(a.rate(), static_cast<double>(a.candidates) / a.pairs_in, 1e-15);
  for (const auto& c : read_candidates(dir / "a" / kCandidatesFile)) EXPECT_FALSE(c.decision);

  auto none = mine_options(dir / "c");
  none.alignments.clear();
  EXPECT_EQ(kind_of([&] { run_mine(none, kb); }), ErrorKind::invalid_argument);
  auto missing = mine_options(dir / "c");
  missing.entities = dir / "nope.jsonl";
  EXPECT_EQ(kind_of([&] { run_mine(missing, kb); }), ErrorKind::io);
}

TEST(Decide, UnknownEntitiesAreFlaggedUndecided) {
  TempDir dir("decide");
  KbGateway kb = KbGateway::offline(fixture_snapshot());
  run_mine(mine_options(dir / "mine"), kb);
  auto candidates = read_candidates(dir / "mine" / kCandidatesFile);
  ASSERT_FALSE(candidates.empty());
  auto ghost = candidates.front();
  ghost.entity.kb_id = "Q999999999";
  std::string content = slurp(dir / "mine" / kCandidatesFile) + jsonl_line(to_json(ghost));
  spit(dir / "cands.jsonl", content);

  DecideOptions d;
  d.candidates = dir / "cands.jsonl";
  d.config = read_decision_config(fixture("decision_config.json"));
  d.out_dir = dir / "decide";
  const auto s = run_decide(d, kb);
  EXPECT_EQ(s.candidates, candidates.size() + 1);
  EXPECT_EQ(s.undecided, 1u);
  const auto decided = read_candidates(d.out_dir / kDecisionsFile);
  ASSERT_EQ(decided.size(), s.candidates);
  std::size_t positive = 0;
  for (std::size_t i = 0; i + 1 < decided.size(); ++i) {
    ASSERT_TRUE(decided[i].decision);
    EXPECT_TRUE(decided[i].decision->consistent());
    positive += decided[i].decision->needs_explicitation;
  }
  EXPECT_EQ(positive, s.positive);
  EXPECT_FALSE(decided.back().decision);
  EXPECT_EQ(decided.back().flags.back(), kFlagKbLookupFailed);

  const std::string first = slurp(d.out_dir / kDecisionsFile);
  d.jobs = 4;
  run_decide(d, kb);
  EXPECT_EQ(slurp(d.out_dir / kDecisionsFile), first);
}

TEST(Generate, QuestionModeKeepsOriginalsRecoverable) {
  TempDir dir("generate");
  KbGateway kb = KbGateway::offline(fixture_snapshot());
  GenerateOptions g;
  g.questions = fixture("questions.jsonl");
  g.config = read_decision_config(fixture("decision_config.pl.json"));
  g.out_dir = dir.path();
  const auto s = run_generate(g, kb);
  EXPECT_GT(s.generated, 0u);
  const auto originals = read_questions(fixture("questions.jsonl"));
  for (const GenType type : {GenType::Short, GenType::Mid, GenType::Long}) {
    const auto expl = read_questions(dir / explicitated_questions_file(type));
    ASSERT_EQ(expl.size(), originals.size());
    for (std::size_t i = 0; i < expl.size(); ++i) {
      validate_question(expl[i]);
      EXPECT_EQ(original_question(expl[i]), originals[i]) << to_string(type);
      for (std::size_t k = 0; k < expl[i].entities.size(); ++k) {
        const auto& e = expl[i].entities[k];
        const auto& o = originals[i].entities[k];
        EXPECT_EQ(expl[i].text.substr(e.span.start, e.span.size()),
                  originals[i].text.substr(o.span.start, o.span.size()));
      }
    }
  }
  std::size_t rows = 0;
  std::ifstream in(dir / kGeneratedFile);
  for (std::string line; std::getline(in, line); ++rows) {
    const auto row = json::parse(line);
    EXPECT_TRUE(row.contains("answer_included"));
    EXPECT_TRUE(row.contains("gen_type"));
  }
  EXPECT_EQ(rows, s.generated);

  GenerateOptions empty;
  empty.out_dir = dir.path();
  EXPECT_EQ(kind_of([&] { run_generate(empty, kb); }), ErrorKind::invalid_argument);
  GenerateOptions no_config;
  no_config.questions = fixture("questions.jsonl");
  no_config.out_dir = dir.path();
  EXPECT_EQ(kind_of([&] { run_generate(no_config, kb); }), ErrorKind::invalid_argument);
  GenerateOptions no_bitext;
  no_bitext.decisions = fixture("questions.jsonl");
  no_bitext.out_dir = dir.path();
  EXPECT_EQ(kind_of([&] { run_generate(no_bitext, kb); }), ErrorKind::invalid_argument);
}

TEST(Generate, PairModeMarkerFootnotes) {
  TempDir dir("generate-pairs");
  KbGateway kb = KbGateway::offline(fixture_snapshot());
  auto m = mine_options(dir / "mine");
  run_mine(m, kb);
  DecideOptions d;
  d.candidates = dir / "mine" / kCandidatesFile;
  d.config = read_decision_config(fixture("decision_config.json"));
  d.out_dir = dir / "decide";
  const auto decided = run_decide(d, kb);
  ASSERT_GT(decided.positive, 0u);
  GenerateOptions g;
  g.decisions = d.out_dir / kDecisionsFile;
  g.bitext = m.bitext;
  g.gen_types = {GenType::Long};
  g.footnote_style = FootnoteStyle::marker;
  g.out_dir = dir / "gen";
  const auto s = run_generate(g, kb);
  std::ifstream in(g.out_dir / kGeneratedFile);
  int note = 0;
  for (std::string line; std::getline(in, line);) {
    const auto row = json::parse(line);
    EXPECT_EQ(row.at("gen_type"), "long");
    ASSERT_TRUE(row.contains("footnote"));
    EXPECT_EQ(row.at("footnote").get<std::string>().rfind("[^" + std::to_string(++note) + "]: ", 0), 0u);
  }
  EXPECT_EQ(static_cast<std::size_t>(note), s.generated);
}

TEST(Evaluate, FixedThresholdGuesserFallbackAndErrors) {
  TempDir dir("evaluate");
  const auto questions = read_questions(fixture("questions.jsonl"));
  // Explicitated file identical to the original: increase rates must be zero.
  EvaluateOptions e;
  e.questions = fixture("questions.jsonl");
  e.questions_explicitation = fixture("questions.jsonl");
  e.guesses_original = fixture("guesses.original.jsonl");
  e.guesses_explicitation = fixture("guesses.original.jsonl");
  e.threshold = 0.4;
  e.curve_file = fixture("win_curve.tsv");
  e.out_dir = dir.path();
  const auto report = run_evaluate(e);
  EXPECT_DOUBLE_EQ(report.threshold, 0.4);
  EXPECT_EQ(report.curve, "win_curve.tsv");
  for (const auto& [lang, r] : report.languages) {
    EXPECT_DOUBLE_EQ(r.ew_increase.value, 0.0) << lang;
    EXPECT_DOUBLE_EQ(r.original.ewo, r.explicitation.ewo);
  }
  EXPECT_TRUE(fs::exists(dir / kReportJson));
  EXPECT_TRUE(fs::exists(dir / kReportCsv));
  EXPECT_FALSE(fs::exists(dir / kReportSvg));
  EXPECT_EQ(report_json(report_from_json(slurp(dir / kReportJson))), slurp(dir / kReportJson));

  // Without guess files the guesser is asked once per step.
  const auto logs = read_guess_file(fixture("guesses.original.jsonl"));
  std::map<std::string, const GuessLog*> by_id;
  for (const auto& l : logs) by_id[l.question_id] = &l;
  auto t = std::make_shared<testing::ScriptedTransport>([&](const HttpRequest& r) {
    const auto j = json::parse(r.body);
    const auto& entry = by_id.at(j.at("question_id"))->entries.at(j.at("step").get<std::size_t>());
    return HttpResponse{200, json{{"guess", entry.guess}, {"confidence", entry.confidence}}.dump()};
  });
  EvaluateOptions live = e;
  live.guesses_original.reset();
  live.guesses_explicitation.reset();
  live.guesser_url = "http://guesser/guess";
  live.out_dir = dir / "live";
  const auto via_guesser = run_evaluate(live, t);
  EXPECT_EQ(report_json(via_guesser), report_json(report));
  std::size_t steps = 0;
  for (const auto& l : logs) steps += l.entries.size();
  EXPECT_EQ(t->requests().size(), 2 * steps);

  EvaluateOptions bad = e;
  bad.questions_explicitation.reset();
  EXPECT_EQ(kind_of([&] { run_evaluate(bad); }), ErrorKind::invalid_argument);
  bad = e;
  bad.guesses_original.reset();
  EXPECT_EQ(kind_of([&] { run_evaluate(bad); }), ErrorKind::invalid_argument);
  std::string fewer;
  std::ifstream in(fixture("questions.jsonl"));
  std::getline(in, fewer);
  spit(dir / "one.jsonl", fewer + "\n");
  bad = e;
  bad.questions_explicitation = dir / "one.jsonl";
  EXPECT_EQ(kind_of([&] { run_evaluate(bad); }), ErrorKind::schema);
  EXPECT_EQ(default_threshold_grid().size(), 21u);
}

TEST(AnnotateExport, PositiveOnlyAndCountryFilter) {
  TempDir dir("export");
  KbGateway kb = KbGateway::offline(fixture_snapshot());
  auto m = mine_options(dir / "mine");
  run_mine(m, kb);
  DecideOptions d;
  d.candidates = dir / "mine" / kCandidatesFile;
  d.config = read_decision_config(fixture("decision_config.json"));
  d.out_dir = dir / "decide";
  const auto decided = run_decide(d, kb);

  AnnotateExportOptions a;
  a.candidates = d.out_dir / kDecisionsFile;
  a.bitext = m.bitext;
  a.entities = fixture("entities.jsonl");
  a.out = dir / "tasks.json";
  EXPECT_EQ(run_annotate_export(a, &kb), decided.candidates);
  const auto tasks = read_tasks(a.out);
  ASSERT_EQ(tasks.size(), decided.candidates);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    EXPECT_EQ(tasks[i].candidate_index, i);
    ASSERT_EQ(tasks[i].tgt_entity_spans.size(), 1u);
  }
  a.positive_only = true;
  EXPECT_EQ(run_annotate_export(a, &kb), decided.positive);
  a.positive_only = false;
  a.country = "Q142";
  const std::size_t french = run_annotate_export(a, &kb);
  for (const auto& t : read_tasks(a.out)) EXPECT_EQ(t.country, "Q142");
  EXPECT_LE(french, decided.candidates);
  // No KB: nothing carries a country, so a filter drops everything.
  EXPECT_EQ(run_annotate_export(a), 0u);
}

TEST(AnnotationReport, VotesKappaAndLikert) {
  const auto labels = read_labels(fixture("labels.jsonl"));
  const auto ratings = read_ratings(fixture("ratings.jsonl"));
  const std::string text = annotation_report(labels, ratings);
  EXPECT_NE(text.find("annotated tasks: "), std::string::npos);
  EXPECT_NE(text.find("average pairwise kappa: "), std::string::npos);
  EXPECT_NE(text.find("likert\n  decision: 0.71\n  generation: short=0.63 mid=0.82 long=0.95\n"
                      "  integration: short=0.79 mid=0.92 long=-\n"),
            std::string::npos)
      << text;
  const std::string no_ratings = annotation_report(labels, {});
  EXPECT_EQ(no_ratings.find("likert"), std::string::npos);
  const std::vector<AnnotationRecord> lonely{labels.front()};
  EXPECT_NE(annotation_report(lonely, {}).find("n/a"), std::string::npos);
}

}  // namespace
}  // namespace expltk::pipeline
