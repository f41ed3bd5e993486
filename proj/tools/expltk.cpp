// expltk: file-based pipeline driver.
//
//   expltk mine      --bitext B --align A1 [--align A2] --entities E --out DIR
//   expltk decide    --candidates DIR/candidates.jsonl [--config C] --out DIR
//   expltk generate  (--decisions F --bitext B | --questions Q --config C) --out DIR
//   expltk annotate  export|serve|import|report ...
//   expltk evaluate  --questions Q --questions-expl QX --guesses G --guesses-expl GX --out DIR
//   expltk report    --report DIR/report.json

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>

#include "expltk/annotation_service.hpp"
#include "expltk/error.hpp"
#include "expltk/pipeline.hpp"
#include "expltk/serialization.hpp"
#include "expltk/transport.hpp"

namespace fs = std::filesystem;
using namespace expltk;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitRuntime = 1;

struct GlobalOptions {
  bool offline = false;
  std::string snapshot;
  std::string save_snapshot;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;  // accepted for script compatibility; nothing is random
  std::string src_lang = "fr";
  std::string tgt_lang = "en";
  double requests_per_second = 5.0;
};

// Offline when asked to or when a snapshot is given; live otherwise.
class KbSession {
 public:
  explicit KbSession(const GlobalOptions& g) : save_path_(g.save_snapshot) {
    if (g.offline || !g.snapshot.empty()) {
      if (g.snapshot.empty()) {
        throw Error(ErrorKind::invalid_argument, "--offline needs --snapshot PATH");
      }
      gateway_.emplace(KbGateway::offline(snapshot_load_file(g.snapshot)));
    } else {
      LiveOptions live;
      live.requests_per_second = g.requests_per_second;
      gateway_.emplace(KbGateway::live(make_http_transport(), live));
    }
  }

  KbGateway& gateway() { return *gateway_; }

  void finish() {
    if (save_path_.empty()) return;
    pipeline::write_file_atomic(save_path_, snapshot_dump(gateway_->to_snapshot()));
  }

 private:
  std::optional<KbGateway> gateway_;
  std::string save_path_;
};

pipeline::BitextInput bitext_input(const std::string& path, const GlobalOptions& g,
                                   std::optional<double> lo, std::optional<double> hi) {
  pipeline::BitextInput in;
  in.path = path;
  in.src_lang = g.src_lang;
  in.tgt_lang = g.tgt_lang;
  if (lo) in.range.lo = *lo;
  if (hi) in.range.hi = *hi;
  return in;
}

std::vector<GenType> gen_types(const std::vector<std::string>& names) {
  std::vector<GenType> out;
  for (const auto& n : names) out.push_back(gen_type_from_string(n));
  if (out.empty()) out = {GenType::Short, GenType::Mid, GenType::Long};
  return out;
}

AnnotationServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicitation toolkit: mine, decide, generate, annotate, evaluate"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "expltk 0.1.0");

  GlobalOptions g;
  app.add_flag("--offline", g.offline, "Serve KB lookups from --snapshot only");
  app.add_option("--snapshot", g.snapshot, "KB snapshot JSON");
  app.add_option("--save-snapshot", g.save_snapshot, "Write fetched KB profiles here");
  app.add_option("--jobs", g.jobs, "Worker threads inside a stage")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Accepted and ignored; every stage is deterministic");
  app.add_option("--src-lang", g.src_lang, "Source language code");
  app.add_option("--tgt-lang", g.tgt_lang, "Target language code");
  app.add_option("--rate", g.requests_per_second, "Live KB requests per second");

  // mine
  auto* mine = app.add_subcommand("mine", "Detect explicitation candidates in bitext");
  std::string m_bitext, m_entities, m_out, m_ensemble = "union";
  std::vector<std::string> m_align;
  std::optional<double> m_lo, m_hi;
  std::size_t m_proximity = 3;
  bool m_keep_unknown = false;
  mine->add_option("--bitext", m_bitext, "Score-tagged TSV")->required();
  mine->add_option("--align", m_align, "Pharaoh alignment file (repeatable)")->required();
  mine->add_option("--entities", m_entities, "Entity mentions JSONL")->required();
  mine->add_option("--score-min", m_lo, "Keep pairs with score >= this");
  mine->add_option("--score-max", m_hi, "Keep pairs with score <= this");
  mine->add_option("--ensemble", m_ensemble, "union|intersection")
      ->check(CLI::IsMember({"union", "intersection"}));
  mine->add_option("--proximity", m_proximity, "Max token gap between entity and segment");
  mine->add_flag("--keep-unknown", m_keep_unknown,
                 "Keep candidates whose relatedness could not be checked");
  mine->add_option("--out", m_out, "Output directory")->required();

  // decide
  auto* decide = app.add_subcommand("decide", "Apply the explicitation decision rule");
  std::string d_candidates, d_config, d_out;
  decide->add_option("--candidates", d_candidates, "candidates.jsonl")->required();
  decide->add_option("--config", d_config, "Decision config JSON");
  decide->add_option("--out", d_out, "Output directory")->required();

  // generate
  auto* generate = app.add_subcommand("generate", "Generate and integrate explanations");
  std::string gen_decisions, gen_bitext, gen_questions, gen_config, gen_out;
  std::string gen_footnote = "inline";
  std::vector<std::string> gen_type_names;
  int gen_max_sentences = 3;
  generate->add_option("--decisions", gen_decisions, "decisions.jsonl");
  generate->add_option("--bitext", gen_bitext, "Bitext the decisions came from");
  generate->add_option("--questions", gen_questions, "Questions JSONL to explicitate");
  generate->add_option("--config", gen_config, "Decision config JSON (question mode)");
  generate->add_option("--gen-type", gen_type_names, "short|mid|long (repeatable)")
      ->check(CLI::IsMember({"short", "mid", "long"}));
  generate->add_option("--footnote-style", gen_footnote, "inline|marker")
      ->check(CLI::IsMember({"inline", "marker"}));
  generate->add_option("--max-sentences", gen_max_sentences, "Long explanation length")
      ->check(CLI::PositiveNumber);
  generate->add_option("--out", gen_out, "Output directory")->required();

  // annotate
  auto* annotate = app.add_subcommand("annotate", "Annotation workflow");
  annotate->require_subcommand(1);
  auto* a_export = annotate->add_subcommand("export", "Write annotation tasks");
  std::string ax_candidates, ax_bitext, ax_entities, ax_country, ax_out;
  bool ax_positive = false;
  a_export->add_option("--candidates", ax_candidates, "candidates or decisions JSONL")->required();
  a_export->add_option("--bitext", ax_bitext, "Bitext TSV")->required();
  a_export->add_option("--entities", ax_entities, "Entity JSONL (source spans)");
  a_export->add_option("--country", ax_country, "Only tasks for entities of this country");
  a_export->add_flag("--positive-only", ax_positive, "Only decision-positive candidates");
  a_export->add_option("--out", ax_out, "tasks.json")->required();

  auto* a_serve = annotate->add_subcommand("serve", "Serve tasks to the annotation UI");
  std::string as_tasks, as_log, as_static, as_host = "127.0.0.1";
  int as_port = 8080;
  std::size_t as_per_task = 3;
  a_serve->add_option("--tasks", as_tasks, "tasks.json")->required();
  a_serve->add_option("--labels-log", as_log, "Append-only labels JSONL")->required();
  a_serve->add_option("--static", as_static, "Directory with the UI build");
  a_serve->add_option("--host", as_host, "Bind address");
  a_serve->add_option("--port", as_port, "Port (0 picks a free one)");
  a_serve->add_option("--annotators-per-task", as_per_task, "Labels needed per task");

  auto* a_import = annotate->add_subcommand("import", "Validate label files");
  std::vector<std::string> ai_labels;
  std::string ai_out;
  a_import->add_option("--labels", ai_labels, "Labels JSONL (repeatable)")->required();
  a_import->add_option("--out", ai_out, "Merged, validated labels JSONL");

  auto* a_report = annotate->add_subcommand("report", "Votes, kappa and Likert table");
  std::string ar_labels, ar_ratings;
  a_report->add_option("--labels", ar_labels, "Labels JSONL")->required();
  a_report->add_option("--ratings", ar_ratings, "Intrinsic ratings JSONL");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Incremental QA evaluation");
  std::string e_questions, e_questions_x, e_guesses, e_guesses_x, e_url, e_curve = "linear", e_out;
  std::optional<double> e_threshold;
  bool e_svg = false;
  evaluate->add_option("--questions", e_questions, "Original questions JSONL")->required();
  evaluate->add_option("--questions-expl", e_questions_x, "Explicitated questions JSONL")
      ->required();
  evaluate->add_option("--guesses", e_guesses, "Guess log for the originals");
  evaluate->add_option("--guesses-expl", e_guesses_x, "Guess log for the explicitated copies");
  evaluate->add_option("--guesser-url", e_url, "Live guesser endpoint for missing logs");
  evaluate->add_option("--buzzer-threshold", e_threshold, "Fixed threshold; fitted otherwise")
      ->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--curve", e_curve, "linear or a two-column win curve file");
  evaluate->add_flag("--svg", e_svg, "Also write report.svg");
  evaluate->add_option("--out", e_out, "Output directory")->required();

  // report
  auto* report = app.add_subcommand("report", "Print or re-render an evaluation report");
  std::string r_report, r_csv, r_svg;
  report->add_option("--report", r_report, "report.json")->required();
  report->add_option("--csv", r_csv, "Write CSV here");
  report->add_option("--svg", r_svg, "Write SVG here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*mine) {
      KbSession kb(g);
      pipeline::MineOptions o;
      o.bitext = bitext_input(m_bitext, g, m_lo, m_hi);
      for (const auto& a : m_align) o.alignments.emplace_back(a);
      o.entities = m_entities;
      o.miner.ensemble = ensemble_mode_from_string(m_ensemble);
      o.miner.proximity = m_proximity;
      o.miner.keep_unknown = m_keep_unknown;
      o.jobs = g.jobs;
      o.out_dir = m_out;
      const auto s = pipeline::run_mine(o, kb.gateway());
      kb.finish();
      std::printf("pairs in: %zu\ncandidates: %zu\ncandidate rate: %.1f%%\n", s.pairs_in,
                  s.candidates, s.rate() * 100.0);
      if (s.parse_warnings > 0) std::printf("warnings: %zu\n", s.parse_warnings);
    } else if (*decide) {
      KbSession kb(g);
      pipeline::DecideOptions o;
      o.candidates = d_candidates;
      o.config = d_config.empty() ? default_decision_config(g.src_lang, g.tgt_lang)
                                  : pipeline::read_decision_config(d_config);
      o.jobs = g.jobs;
      o.out_dir = d_out;
      const auto s = pipeline::run_decide(o, kb.gateway());
      kb.finish();
      std::printf("candidates: %zu\nneeds explicitation: %zu\nundecided: %zu\n", s.candidates,
                  s.positive, s.undecided);
    } else if (*generate) {
      KbSession kb(g);
      pipeline::GenerateOptions o;
      if (!gen_decisions.empty()) {
        o.decisions = gen_decisions;
        if (gen_bitext.empty()) {
          throw Error(ErrorKind::invalid_argument, "--decisions needs --bitext");
        }
        o.bitext = bitext_input(gen_bitext, g, std::nullopt, std::nullopt);
      }
      if (!gen_questions.empty()) {
        o.questions = gen_questions;
        o.config = gen_config.empty() ? default_decision_config(g.src_lang, g.tgt_lang)
                                      : pipeline::read_decision_config(gen_config);
      }
      o.gen_types = gen_types(gen_type_names);
      o.footnote_style = gen_footnote == "marker" ? pipeline::FootnoteStyle::marker
                                                  : pipeline::FootnoteStyle::inline_parens;
      o.max_sentences = gen_max_sentences;
      o.out_dir = gen_out;
      const auto s = pipeline::run_generate(o, kb.gateway());
      kb.finish();
      std::printf("generated: %zu\nunavailable: %zu\nskipped (redundant): %zu\n", s.generated,
                  s.unavailable, s.skipped_redundant);
      if (o.questions) std::printf("questions explicitated: %zu\n", s.questions_written);
    } else if (*a_export) {
      pipeline::AnnotateExportOptions o;
      o.candidates = ax_candidates;
      o.bitext = bitext_input(ax_bitext, g, std::nullopt, std::nullopt);
      if (!ax_entities.empty()) o.entities = ax_entities;
      if (!ax_country.empty()) o.country = ax_country;
      o.positive_only = ax_positive;
      o.out = ax_out;
      std::optional<KbSession> kb;
      if (!g.snapshot.empty()) kb.emplace(g);
      const auto n = pipeline::run_annotate_export(o, kb ? &kb->gateway() : nullptr);
      std::printf("tasks: %zu\n", n);
    } else if (*a_serve) {
      ServiceOptions so;
      so.annotators_per_task = as_per_task;
      so.label_log = as_log;
      AnnotationService service(pipeline::read_tasks(as_tasks), so);
      std::optional<fs::path> static_dir;
      if (!as_static.empty()) static_dir = as_static;
      AnnotationServer server(service, static_dir);
      const int port = server.bind(as_host, as_port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::printf("serving on http://%s:%d\n", as_host.c_str(), port);
      std::fflush(stdout);
      server.listen();
      g_server = nullptr;
    } else if (*a_import) {
      std::vector<AnnotationRecord> all;
      for (const auto& path : ai_labels) {
        auto records = pipeline::read_labels(path);
        all.insert(all.end(), records.begin(), records.end());
      }
      if (!ai_out.empty()) {
        std::string out;
        for (const auto& r : all) out += jsonl_line(to_json(r));
        pipeline::write_file_atomic(ai_out, out);
      }
      std::printf("labels: %zu\n", all.size());
    } else if (*a_report) {
      const auto labels = pipeline::read_labels(ar_labels);
      std::vector<IntrinsicRating> ratings;
      if (!ar_ratings.empty()) ratings = pipeline::read_ratings(ar_ratings);
      std::fputs(pipeline::annotation_report(labels, ratings).c_str(), stdout);
    } else if (*evaluate) {
      pipeline::EvaluateOptions o;
      o.questions = e_questions;
      o.questions_explicitation = e_questions_x;
      if (!e_guesses.empty()) o.guesses_original = e_guesses;
      if (!e_guesses_x.empty()) o.guesses_explicitation = e_guesses_x;
      if (!e_url.empty()) o.guesser_url = e_url;
      o.jobs = g.jobs;
      o.threshold = e_threshold;
      if (e_curve != "linear") o.curve_file = e_curve;
      o.emit_svg = e_svg;
      o.out_dir = e_out;
      const auto r = pipeline::run_evaluate(o);
      std::fputs(report_text(r).c_str(), stdout);
    } else if (*report) {
      const auto r = report_from_json(pipeline::read_text_file(r_report));
      if (!r_csv.empty()) pipeline::write_file_atomic(r_csv, report_csv(r));
      if (!r_svg.empty()) pipeline::write_file_atomic(r_svg, report_svg(r));
      std::fputs(report_text(r).c_str(), stdout);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "expltk: %s\n", e.what());
    switch (e.kind()) {
      case ErrorKind::network:
      case ErrorKind::generation_unavailable: return kExitRuntime;
      default: return kExitInput;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "expltk: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
