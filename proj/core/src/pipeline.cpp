#include "expltk/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "expltk/error.hpp"
#include "expltk/guesser.hpp"
#include "expltk/serialization.hpp"
#include "expltk/text.hpp"

namespace expltk::pipeline {

namespace {

// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first
// failure after all workers stop.
template <typename F>
void parallel_for(std::size_t n, std::size_t jobs, F&& fn) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return in;
}

Error at(const fs::path& path, const Error& e) {
  return Error(e.kind(), path.string() + ": " + e.what());
}

Error at_line(const fs::path& path, std::size_t line0, const std::string& message,
              ErrorKind kind = ErrorKind::parse) {
  return Error(kind, path.string() + ":" + std::to_string(line0 + 1) + ": " + message);
}

// Parses each non-blank line of a JSONL file with `parse`.
template <typename T, typename Parse>
std::vector<T> read_jsonl(const fs::path& path, Parse&& parse) {
  auto in = open_input(path);
  std::vector<T> out;
  std::string line;
  for (std::size_t line_no = 0; std::getline(in, line); ++line_no) {
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(parse(json::parse(line)));
    } catch (const json::exception& e) {
      throw at_line(path, line_no, e.what(), ErrorKind::schema);
    } catch (const Error& e) {
      throw at_line(path, line_no, e.what(), e.kind());
    }
  }
  return out;
}

std::string jsonl(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) out += jsonl_line(r);
  return out;
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  auto in = open_input(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw Error(ErrorKind::io, "cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::io, "cannot move output into place: " + path.string());
  }
}

std::vector<SentencePair> read_bitext(const BitextInput& input, std::vector<LineIssue>* warnings) {
  auto in = open_input(input.path);
  auto result = parse_bitext(in, input.src_lang, input.tgt_lang, input.range);
  if (!result.errors.empty()) {
    throw at_line(input.path, result.errors.front().line, result.errors.front().message);
  }
  if (warnings != nullptr) *warnings = std::move(result.warnings);
  return std::move(result.pairs);
}

std::vector<ExplicitationCandidate> read_candidates(const fs::path& path) {
  return read_jsonl<ExplicitationCandidate>(path, [](const json& j) { return candidate_from_json(j); });
}

std::vector<Question> read_questions(const fs::path& path) {
  std::set<std::string> seen;
  return read_jsonl<Question>(path, [&](const json& j) {
    Question q = question_from_json(j);
    validate_question(q);
    if (!seen.insert(q.question_id).second) {
      throw Error(ErrorKind::schema, "duplicate question_id " + q.question_id);
    }
    return q;
  });
}

std::vector<GuessLog> read_guess_file(const fs::path& path) {
  auto in = open_input(path);
  try {
    return read_guess_logs(in);
  } catch (const Error& e) {
    throw at(path, e);
  }
}

std::vector<AnnotationTask> read_tasks(const fs::path& path) {
  try {
    const auto j = json::parse(read_text_file(path));
    if (!j.is_array()) throw Error(ErrorKind::schema, "expected a JSON array of tasks");
    std::vector<AnnotationTask> tasks;
    for (const auto& t : j) tasks.push_back(task_from_json(t));
    return tasks;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::schema, path.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    throw at(path, e);
  }
}

std::vector<AnnotationRecord> read_labels(const fs::path& path) {
  auto in = open_input(path);
  auto result = import_labels(in);
  if (!result.errors.empty()) {
    throw at_line(path, result.errors.front().line, result.errors.front().message,
                  ErrorKind::schema);
  }
  return std::move(result.records);
}

std::vector<IntrinsicRating> read_ratings(const fs::path& path) {
  return read_jsonl<IntrinsicRating>(path, [](const json& j) {
    IntrinsicRating r = rating_from_json(j);
    validate_rating(r);
    return r;
  });
}

DecisionConfig read_decision_config(const fs::path& path) {
  try {
    return decision_config_from_json(json::parse(read_text_file(path)));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    throw at(path, e);
  }
}

// --- mine --------------------------------------------------------------------

MineSummary run_mine(const MineOptions& options, ProfileProvider& kb) {
  if (options.alignments.empty()) {
    throw Error(ErrorKind::invalid_argument, "mine needs at least one alignment file");
  }
  std::vector<LineIssue> warnings;
  const auto pairs = read_bitext(options.bitext, &warnings);

  std::vector<std::map<std::string, AlignmentSet>> aligners;
  for (const auto& path : options.alignments) {
    auto in = open_input(path);
    try {
      aligners.push_back(parse_alignment_file(in, pairs, path.stem().string()));
    } catch (const Error& e) {
      throw at(path, e);
    }
  }

  auto entity_in = open_input(options.entities);
  const auto entities = parse_entities(entity_in, pairs);
  if (!entities.errors.empty()) {
    throw at_line(options.entities, entities.errors.front().line,
                  entities.errors.front().message);
  }

  std::vector<std::vector<ExplicitationCandidate>> per_pair(pairs.size());
  parallel_for(pairs.size(), options.jobs, [&](std::size_t i) {
    const auto& pair = pairs[i];
    std::vector<AlignmentSet> sets;
    for (const auto& a : aligners) sets.push_back(a.at(pair.pair_id));
    const auto it = entities.by_pair.find(pair.pair_id);
    if (it == entities.by_pair.end()) return;
    per_pair[i] = detect_candidates(pair, sets, it->second, kb, options.miner);
  });

  std::string out;
  MineSummary summary;
  summary.pairs_in = pairs.size();
  summary.parse_warnings = warnings.size();
  for (const auto& cands : per_pair) {
    for (const auto& c : cands) {
      out += jsonl_line(to_json(c));
      ++summary.candidates;
    }
  }
  write_file_atomic(options.out_dir / kCandidatesFile, out);
  return summary;
}

// --- decide ------------------------------------------------------------------

DecideSummary run_decide(const DecideOptions& options, ProfileProvider& kb) {
  options.config.validate();
  auto candidates = read_candidates(options.candidates);
  const std::vector<std::string> langs{options.config.src_lang, options.config.tgt_lang};

  std::vector<std::optional<EntityProfile>> profiles(candidates.size());
  parallel_for(candidates.size(), options.jobs, [&](std::size_t i) {
    const auto& kb_id = candidates[i].entity.kb_id;
    if (!kb_id) return;
    try {
      profiles[i] = kb.fetch_entity_profile(*kb_id, langs);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::not_found) throw;
    }
  });

  std::vector<EntityProfile> pool;
  std::set<std::string> seen;
  for (const auto& p : profiles) {
    if (p && seen.insert(p->kb_id).second) pool.push_back(*p);
  }
  const PoolStats stats = PoolStats::from_profiles(pool, langs);

  DecideSummary summary;
  summary.candidates = candidates.size();
  std::string out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto& c = candidates[i];
    if (profiles[i]) {
      c.decision = decide_explicitation(*profiles[i], options.config, stats);
      if (c.decision->needs_explicitation) ++summary.positive;
    } else {
      c.decision.reset();
      ++summary.undecided;
      if (std::find(c.flags.begin(), c.flags.end(), kFlagKbLookupFailed) == c.flags.end()) {
        c.flags.emplace_back(kFlagKbLookupFailed);
      }
    }
    out += jsonl_line(to_json(c));
  }
  write_file_atomic(options.out_dir / kDecisionsFile, out);
  return summary;
}

// --- generate ----------------------------------------------------------------

std::string explicitated_questions_file(GenType type) {
  return "questions." + std::string(to_string(type)) + ".jsonl";
}

namespace {

bool needs_explicitation(const ExplicitationCandidate& c) {
  return c.decision && c.decision->needs_explicitation;
}

json generated_row(const GeneratedExplicitation& gen, const IntegrationResult& r) {
  json row = to_json(gen);
  row["gen_type"] = row["type"];
  row.erase("type");
  row["new_sentence"] = r.new_sentence;
  row["inserted_span"] = to_json(r.inserted_span);
  row["entity_span_after"] = to_json(r.entity_span_after);
  if (!r.footnote.empty()) row["footnote"] = r.footnote;
  return row;
}

std::optional<GeneratedExplicitation> try_generate(GenType type, const EntityProfile& profile,
                                                   const std::string& lang,
                                                   const LabelFrequency& freq, int max_sentences,
                                                   GenerateSummary& summary) {
  try {
    if (type == GenType::Long) return generate_long(profile, lang, max_sentences);
    return generate(type, profile, lang, &freq);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::generation_unavailable) throw;
    ++summary.unavailable;
    return std::nullopt;
  }
}

void generate_for_pairs(const GenerateOptions& options, ProfileProvider& kb,
                        GenerateSummary& summary, std::vector<json>& rows) {
  if (!options.bitext) {
    throw Error(ErrorKind::invalid_argument, "generate with decisions needs the bitext");
  }
  const auto candidates = read_candidates(*options.decisions);
  const auto pairs = read_bitext(*options.bitext);
  std::map<std::string, const SentencePair*> by_id;
  for (const auto& p : pairs) by_id.emplace(p.pair_id, &p);
  const std::string& lang = options.bitext->tgt_lang;
  const std::vector<std::string> langs{lang};

  std::vector<std::pair<const ExplicitationCandidate*, EntityProfile>> positives;
  for (const auto& c : candidates) {
    if (!needs_explicitation(c) || !c.entity.kb_id) continue;
    positives.emplace_back(&c, kb.fetch_entity_profile(*c.entity.kb_id, langs));
  }
  std::vector<EntityProfile> pool;
  for (const auto& [c, p] : positives) pool.push_back(p);
  const LabelFrequency freq = hypernym_frequencies(pool, lang);

  int note = 0;
  for (const auto& [c, profile] : positives) {
    const auto it = by_id.find(c->pair_id);
    if (it == by_id.end()) {
      throw Error(ErrorKind::schema, options.decisions->string() + ": candidate " +
                                         task_id_for(*c) + " references unknown pair");
    }
    const SentencePair& pair = *it->second;
    const CharSpan entity = token_span_to_char_span(pair, Side::target, c->entity.span);
    for (const GenType type : options.gen_types) {
      const auto gen = try_generate(type, profile, lang, freq, options.max_sentences, summary);
      if (!gen) continue;
      if (is_redundant_short(pair.tgt_raw, entity, *gen)) {
        ++summary.skipped_redundant;
        continue;
      }
      const IntegrationResult r =
          type == GenType::Long && options.footnote_style == FootnoteStyle::marker
              ? integrate_footnote_marker(pair.tgt_raw, entity, *gen, ++note)
              : integrate(pair.tgt_raw, entity, *gen);
      json row = {{"pair_id", c->pair_id},
                  {"entity", c->entity.surface},
                  {"kb_id", *c->entity.kb_id}};
      row.update(generated_row(*gen, r));
      rows.push_back(std::move(row));
      ++summary.generated;
    }
  }
}

void generate_for_questions(const GenerateOptions& options, ProfileProvider& kb,
                            GenerateSummary& summary, std::vector<json>& rows) {
  if (!options.config) {
    throw Error(ErrorKind::invalid_argument, "generate with questions needs a decision config");
  }
  const DecisionConfig& config = *options.config;
  config.validate();
  const auto questions = read_questions(*options.questions);

  // One profile per distinct entity, all languages the decision and the
  // question texts need.
  std::set<std::string> lang_set{config.src_lang, config.tgt_lang};
  for (const auto& q : questions) lang_set.insert(q.lang);
  const std::vector<std::string> langs(lang_set.begin(), lang_set.end());
  std::map<std::string, std::optional<EntityProfile>> profiles;
  for (const auto& q : questions) {
    for (const auto& e : q.entities) {
      if (profiles.contains(e.kb_id)) continue;
      try {
        profiles[e.kb_id] = kb.fetch_entity_profile(e.kb_id, langs);
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::not_found) throw;
        profiles[e.kb_id] = std::nullopt;
      }
    }
  }
  std::vector<EntityProfile> pool;
  for (const auto& [id, p] : profiles) {
    if (p) pool.push_back(*p);
  }
  const PoolStats stats = PoolStats::from_profiles(pool, langs);
  std::map<std::string, bool> positive;
  for (const auto& [id, p] : profiles) {
    positive[id] = p && decide_explicitation(*p, config, stats).needs_explicitation;
  }
  std::map<std::string, LabelFrequency> freq_by_lang;
  for (const auto& lang : langs) freq_by_lang[lang] = hypernym_frequencies(pool, lang);

  for (const GenType type : options.gen_types) {
    std::string out;
    for (const auto& original : questions) {
      Question q = original;
      std::vector<std::size_t> order(q.entities.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return original.entities[a].span < original.entities[b].span;
      });
      std::size_t offset = 0;
      for (const std::size_t idx : order) {
        const auto& e = original.entities[idx];
        if (!positive[e.kb_id]) continue;
        const auto gen = try_generate(type, *profiles[e.kb_id], q.lang, freq_by_lang[q.lang],
                                      options.max_sentences, summary);
        if (!gen) continue;
        const CharSpan span{e.span.start + offset, e.span.end + offset};
        if (is_redundant_short(q.text, span, *gen)) {
          ++summary.skipped_redundant;
          continue;
        }
        const IntegrationResult r = integrate(q.text, span, *gen);
        for (auto& other : q.entities) {
          if (other.span.start >= r.inserted_span.start) {
            other.span.start += r.inserted_span.size();
            other.span.end += r.inserted_span.size();
          }
        }
        q.entities[idx].span = r.entity_span_after;
        q.text = r.new_sentence;
        q.insertions.push_back(r.inserted_span);
        offset += r.inserted_span.size();

        const std::set<std::string> aliases(q.answer_aliases.begin(), q.answer_aliases.end());
        json row = {{"question_id", q.question_id}, {"entity", e.kb_id}};
        row.update(generated_row(*gen, r));
        row["answer_included"] = answer_inclusion(*gen, aliases);
        rows.push_back(std::move(row));
        ++summary.generated;
      }
      if (!q.insertions.empty()) ++summary.questions_written;
      out += jsonl_line(to_json(q));
    }
    write_file_atomic(options.out_dir / explicitated_questions_file(type), out);
  }
}

}  // namespace

GenerateSummary run_generate(const GenerateOptions& options, ProfileProvider& kb) {
  if (!options.decisions && !options.questions) {
    throw Error(ErrorKind::invalid_argument, "generate needs decisions or questions");
  }
  if (options.gen_types.empty()) throw Error(ErrorKind::invalid_argument, "no generation types");
  GenerateSummary summary;
  std::vector<json> rows;
  if (options.decisions) generate_for_pairs(options, kb, summary, rows);
  if (options.questions) generate_for_questions(options, kb, summary, rows);
  write_file_atomic(options.out_dir / kGeneratedFile, jsonl(rows));
  return summary;
}

// --- evaluate ----------------------------------------------------------------

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
  return grid;
}

namespace {

std::vector<GuessLog> obtain_logs(const std::vector<Question>& questions,
                                  const std::optional<fs::path>& file,
                                  const EvaluateOptions& options,
                                  std::shared_ptr<Transport>& transport) {
  if (file) return read_guess_file(*file);
  if (!options.guesser_url) {
    throw Error(ErrorKind::invalid_argument, "need a guess log file or a guesser URL");
  }
  if (!transport) transport = make_http_transport();
  GuesserClient client(transport, *options.guesser_url, options.jobs);
  std::vector<GuesserRequest> requests;
  for (const auto& q : questions) requests.push_back({&q, explicitated_split(q, options.split)});
  return client.collect(requests);
}

}  // namespace

EvalReport run_evaluate(const EvaluateOptions& options, std::shared_ptr<Transport> transport) {
  const auto original = read_questions(options.questions);
  if (!options.questions_explicitation) {
    throw Error(ErrorKind::invalid_argument, "evaluate needs the explicitated questions");
  }
  const auto explicitated = read_questions(*options.questions_explicitation);

  EvalReport report;
  WinCurve curve = WinCurve::linear();
  report.curve = "linear";
  if (options.curve_file) {
    auto in = open_input(*options.curve_file);
    try {
      curve = WinCurve::load(in);
    } catch (const Error& e) {
      throw at(*options.curve_file, e);
    }
    report.curve = options.curve_file->filename().string();
  }

  const auto logs_original = obtain_logs(original, options.guesses_original, options, transport);
  const auto logs_explicit =
      obtain_logs(explicitated, options.guesses_explicitation, options, transport);

  if (options.threshold) {
    report.threshold = *options.threshold;
  } else {
    const auto grid = options.threshold_grid.empty() ? default_threshold_grid()
                                                     : options.threshold_grid;
    report.threshold = fit_buzzer_threshold(original, logs_original, curve, grid, options.split);
  }

  std::map<std::string, std::vector<Question>> orig_by_lang;
  std::map<std::string, std::vector<Question>> expl_by_lang;
  for (const auto& q : original) orig_by_lang[q.lang].push_back(q);
  for (const auto& q : explicitated) expl_by_lang[q.lang].push_back(q);
  for (const auto& [lang, qs] : orig_by_lang) {
    const auto it = expl_by_lang.find(lang);
    if (it == expl_by_lang.end() || it->second.size() != qs.size()) {
      throw Error(ErrorKind::schema, "explicitated questions do not match the originals for " + lang);
    }
    EvalResult o = evaluate_set(qs, logs_original, report.threshold, curve, Condition::original,
                                options.split);
    EvalResult e = evaluate_set(it->second, logs_explicit, report.threshold, curve,
                                Condition::explicitation, options.split);
    report.languages.emplace(lang, make_language_report(lang, std::move(o), std::move(e)));
  }

  write_file_atomic(options.out_dir / kReportJson, report_json(report));
  write_file_atomic(options.out_dir / kReportCsv, report_csv(report));
  if (options.emit_svg) write_file_atomic(options.out_dir / kReportSvg, report_svg(report));
  return report;
}

// --- annotate ----------------------------------------------------------------

std::size_t run_annotate_export(const AnnotateExportOptions& options, ProfileProvider* kb) {
  auto candidates = read_candidates(options.candidates);
  if (options.positive_only) {
    std::erase_if(candidates, [](const auto& c) { return !needs_explicitation(c); });
  }
  const auto pairs = read_bitext(options.bitext);

  std::map<std::string, std::vector<EntityMention>> source_entities;
  if (options.entities) {
    auto in = open_input(*options.entities);
    auto parsed = parse_entities(in, pairs);
    if (!parsed.errors.empty()) {
      throw at_line(*options.entities, parsed.errors.front().line, parsed.errors.front().message);
    }
    source_entities = std::move(parsed.by_pair);
  }
  std::map<std::string, std::string> entity_country;
  if (kb != nullptr) {
    const std::vector<std::string> langs{options.bitext.tgt_lang};
    for (const auto& c : candidates) {
      if (!c.entity.kb_id || entity_country.contains(*c.entity.kb_id)) continue;
      try {
        const auto p = kb->fetch_entity_profile(*c.entity.kb_id, langs);
        if (!p.country_of.empty()) entity_country[*c.entity.kb_id] = p.country_of.front().kb_id;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::not_found) throw;
      }
    }
  }
  ExportOptions export_options;
  export_options.source_entities = &source_entities;
  export_options.entity_country = &entity_country;
  export_options.country_filter = options.country;
  const auto tasks = export_tasks(candidates, pairs, export_options);

  json out = json::array();
  for (const auto& t : tasks) out.push_back(to_json(t));
  write_file_atomic(options.out, out.dump(2) + "\n");
  return tasks.size();
}

std::string annotation_report(std::span<const AnnotationRecord> labels,
                              std::span<const IntrinsicRating> ratings) {
  std::ostringstream out;
  const VoteSummary votes = summarize_votes(labels);
  out << "annotated tasks: " << votes.annotated_tasks << "\n"
      << "tasks with at least one vote: " << votes.at_least_one_vote << "\n"
      << "explicitation (majority): " << votes.explicitation << "\n";
  try {
    out << "average pairwise kappa: " << format_number(average_pairwise_kappa(labels)) << "\n";
  } catch (const Error& e) {
    out << "average pairwise kappa: n/a (" << e.what() << ")\n";
  }
  if (ratings.empty()) return out.str();

  out << "likert\n";
  auto cell = [&](RatingAspect aspect, std::optional<GenType> type) -> std::string {
    try {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", likert_aggregate(ratings, aspect, type));
      return buf;
    } catch (const Error&) {
      return "-";
    }
  };
  out << "  decision: " << cell(RatingAspect::decision, std::nullopt) << "\n";
  for (const auto aspect : {RatingAspect::generation, RatingAspect::integration}) {
    out << "  " << to_string(aspect) << ":";
    for (const auto type : {GenType::Short, GenType::Mid, GenType::Long}) {
      out << " " << to_string(type) << "=" << cell(aspect, type);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace expltk::pipeline
