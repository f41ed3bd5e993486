#pragma once

// File-based pipeline stages. Each stage reads documented files, writes its
// outputs atomically and is idempotent for unchanged inputs.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "expltk/annotation.hpp"
#include "expltk/bitext.hpp"
#include "expltk/decision.hpp"
#include "expltk/generator.hpp"
#include "expltk/kb.hpp"
#include "expltk/miner.hpp"
#include "expltk/qa.hpp"
#include "expltk/report.hpp"

namespace expltk::pipeline {

namespace fs = std::filesystem;

struct BitextInput {
  fs::path path;
  std::string src_lang = "fr";
  std::string tgt_lang = "en";
  ScoreRange range{-1e300, 1e300};
};

struct MineOptions {
  BitextInput bitext;
  std::vector<fs::path> alignments;
  fs::path entities;
  MinerConfig miner;
  std::size_t jobs = 1;
  fs::path out_dir;
};

struct MineSummary {
  std::size_t pairs_in = 0;
  std::size_t candidates = 0;
  std::size_t parse_warnings = 0;
  double rate() const {
    return pairs_in == 0 ? 0.0 : static_cast<double>(candidates) / pairs_in;
  }
};

inline constexpr const char* kCandidatesFile = "candidates.jsonl";
inline constexpr const char* kDecisionsFile = "decisions.jsonl";
inline constexpr const char* kGeneratedFile = "generated.jsonl";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kReportCsv = "report.csv";
inline constexpr const char* kReportSvg = "report.svg";

MineSummary run_mine(const MineOptions& options, ProfileProvider& kb);

struct DecideOptions {
  fs::path candidates;
  DecisionConfig config;
  std::size_t jobs = 1;
  fs::path out_dir;
};

struct DecideSummary {
  std::size_t candidates = 0;
  std::size_t positive = 0;
  std::size_t undecided = 0;  // no KB profile available
};

DecideSummary run_decide(const DecideOptions& options, ProfileProvider& kb);

enum class FootnoteStyle { inline_parens, marker };

struct GenerateOptions {
  std::optional<fs::path> decisions;
  std::optional<BitextInput> bitext;  // required with `decisions`
  std::optional<fs::path> questions;
  std::optional<DecisionConfig> config;  // required with `questions`
  std::vector<GenType> gen_types{GenType::Short, GenType::Mid, GenType::Long};
  FootnoteStyle footnote_style = FootnoteStyle::inline_parens;
  int max_sentences = 3;
  fs::path out_dir;
};

struct GenerateSummary {
  std::size_t generated = 0;
  std::size_t unavailable = 0;
  std::size_t skipped_redundant = 0;
  std::size_t questions_written = 0;
};

// Writes generated.jsonl and, in question mode, questions.<type>.jsonl with
// the explicitated question texts.
GenerateSummary run_generate(const GenerateOptions& options,
                             ProfileProvider& kb);

std::string explicitated_questions_file(GenType type);

struct EvaluateOptions {
  fs::path questions;
  std::optional<fs::path> guesses_original;
  std::optional<fs::path> guesses_explicitation;
  std::optional<fs::path> questions_explicitation;
  std::optional<std::string> guesser_url;  // used when a guess file is absent
  std::size_t jobs = 1;
  std::optional<double> threshold;  // fitted on the original when absent
  std::vector<double> threshold_grid;
  std::optional<fs::path> curve_file;  // linear when absent
  SplitOptions split;
  bool emit_svg = false;
  fs::path out_dir;
};

EvalReport run_evaluate(const EvaluateOptions& options,
                        std::shared_ptr<Transport> transport = nullptr);

std::vector<double> default_threshold_grid();

struct AnnotateExportOptions {
  fs::path candidates;
  BitextInput bitext;
  std::optional<fs::path> entities;  // source-side mentions to underline
  std::optional<std::string> country;
  // Only candidates the decision stage marked positive.
  bool positive_only = false;
  fs::path out;  // tasks JSON array
};

std::size_t run_annotate_export(const AnnotateExportOptions& options,
                                ProfileProvider* kb = nullptr);

// Vote counts, average pairwise kappa and the Likert table.
std::string annotation_report(std::span<const AnnotationRecord> labels,
                              std::span<const IntrinsicRating> ratings);

// Readers shared by the stages and the CLI.
std::vector<SentencePair> read_bitext(const BitextInput& input,
                                      std::vector<LineIssue>* warnings = nullptr);
std::vector<ExplicitationCandidate> read_candidates(const fs::path& path);
std::vector<Question> read_questions(const fs::path& path);
std::vector<GuessLog> read_guess_file(const fs::path& path);
std::vector<AnnotationTask> read_tasks(const fs::path& path);
std::vector<AnnotationRecord> read_labels(const fs::path& path);
std::vector<IntrinsicRating> read_ratings(const fs::path& path);
DecisionConfig read_decision_config(const fs::path& path);
std::string read_text_file(const fs::path& path);

// Writes via a temporary file and rename, so readers never see a partial file.
void write_file_atomic(const fs::path& path, const std::string& content);

}  // namespace expltk::pipeline
