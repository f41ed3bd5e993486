#include <benchmark/benchmark.h>

#include <fstream>
#include <random>
#include <sstream>

#include "expltk/bitext.hpp"
#include "expltk/kb.hpp"
#include "expltk/miner.hpp"
#include "expltk/pipeline.hpp"
#include "expltk/qa.hpp"

namespace {

using namespace expltk;

std::string fixture(const char* name) { return std::string(EXPLTK_FIXTURE_DIR) + "/" + name; }

std::string random_sentence(std::mt19937& rng, std::size_t words) {
  static const char* vocab[] = {"the", "minister", "Villepin", ",", "spoke", "in", "Paris",
                                "about", "Kraków", "and", "the", "Vistula", "river", "."};
  std::string s;
  for (std::size_t i = 0; i < words; ++i) {
    if (!s.empty()) s += ' ';
    s += vocab[rng() % std::size(vocab)];
  }
  return s;
}

void BM_Tokenize(benchmark::State& state) {
  std::mt19937 rng(1);
  const std::string s = random_sentence(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(s));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * s.size()));
}
BENCHMARK(BM_Tokenize)->Arg(16)->Arg(128)->Arg(1024);

void BM_DetectFixtureCorpus(benchmark::State& state) {
  KbGateway kb = KbGateway::offline(snapshot_load_file(fixture("kb_snapshot.json")));
  pipeline::BitextInput input;
  input.path = fixture("bitext.tsv");
  const auto pairs = pipeline::read_bitext(input);
  std::vector<std::map<std::string, AlignmentSet>> aligners;
  for (const char* f : {"align.awesome.txt", "align.simalign.txt"}) {
    std::ifstream in(fixture(f));
    aligners.push_back(parse_alignment_file(in, pairs, f));
  }
  std::ifstream ent_in(fixture("entities.jsonl"));
  const auto entities = parse_entities(ent_in, pairs);
  const MinerConfig config;
  for (auto _ : state) {
    std::size_t n = 0;
    for (const auto& pair : pairs) {
      const auto it = entities.by_pair.find(pair.pair_id);
      if (it == entities.by_pair.end()) continue;
      std::vector<AlignmentSet> sets;
      for (const auto& a : aligners) sets.push_back(a.at(pair.pair_id));
      n += detect_candidates(pair, sets, it->second, kb, config).size();
    }
    benchmark::DoNotOptimize(n);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * pairs.size()));
}
BENCHMARK(BM_DetectFixtureCorpus);

Question random_question(std::mt19937& rng, std::size_t min_bytes) {
  Question q{"q", "en", "", {}, {"Kraków"}, {}};
  while (q.text.size() < min_bytes) {
    if (!q.text.empty()) q.text += ' ';
    if (rng() % 10 == 0) {
      const std::size_t start = q.text.size();
      q.text += "Vistula";
      q.entities.push_back({{start, q.text.size()}, "Q548"});
    } else {
      q.text += random_sentence(rng, 1);
    }
  }
  return q;
}

void BM_SplitSteps(benchmark::State& state) {
  std::mt19937 rng(2);
  const Question q = random_question(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(split_steps(q));
}
BENCHMARK(BM_SplitSteps)->Arg(300)->Arg(1300)->Arg(5000);

void BM_EvaluateSet(benchmark::State& state) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  std::vector<Question> questions;
  std::vector<GuessLog> logs;
  for (int i = 0; i < state.range(0); ++i) {
    Question q = random_question(rng, 1300);
    q.question_id = "q" + std::to_string(i);
    GuessLog log{q.question_id, {}};
    for (std::size_t k = 0; k < split_steps(q).step_count(); ++k) {
      log.entries.push_back({rng() % 3 == 0 ? "Kraków" : "Warsaw", conf(rng)});
    }
    questions.push_back(std::move(q));
    logs.push_back(std::move(log));
  }
  const WinCurve curve = WinCurve::linear();
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_set(questions, logs, 0.5, curve));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EvaluateSet)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
