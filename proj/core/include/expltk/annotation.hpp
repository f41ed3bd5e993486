#pragma once

// Engine side of the annotation workflow: exporting candidates as tasks,
// importing labels, majority vote, Cohen's kappa and Likert aggregation.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expltk/bitext.hpp"
#include "expltk/generator.hpp"
#include "expltk/miner.hpp"

namespace expltk {

struct AnnotationTask {
  std::string task_id;
  std::string pair_id;
  std::string src_raw;
  std::string tgt_raw;
  std::vector<CharSpan> unaligned_spans;  // target side, rendered red
  std::vector<CharSpan> src_entity_spans;
  std::vector<CharSpan> tgt_entity_spans;  // rendered underlined
  std::optional<std::string> gloss;
  std::optional<std::string> country;  // routing metadata only
  std::size_t candidate_index = 0;

  bool operator==(const AnnotationTask&) const = default;
};

struct ExportOptions {
  // Source-side mentions to underline, keyed by pair id.
  const std::map<std::string, std::vector<EntityMention>>* source_entities =
      nullptr;
  // Country tag per candidate entity kb_id, copied onto the task.
  const std::map<std::string, std::string>* entity_country = nullptr;
  std::optional<std::string> country_filter;
};

std::string task_id_for(const ExplicitationCandidate& candidate);

// One task per candidate, in candidate order. Throws Error(invalid_argument)
// when a candidate references an unknown pair.
std::vector<AnnotationTask> export_tasks(
    std::span<const ExplicitationCandidate> candidates,
    std::span<const SentencePair> pairs, const ExportOptions& options = {});

enum class LabelCategory { additional_information, paraphrase, noise };

std::string_view to_string(LabelCategory c);
LabelCategory label_category_from_string(std::string_view s);

struct AnnotationRecord {
  std::string task_id;
  std::string annotator_id;
  LabelCategory category = LabelCategory::additional_information;
  std::optional<bool> is_explicitation;
  std::optional<CharSpan> src_span;
  std::optional<CharSpan> tgt_span;
  std::optional<std::string> note;

  bool explicitation() const { return is_explicitation.value_or(false); }
  bool operator==(const AnnotationRecord&) const = default;
};

// Throws Error(schema) describing the first violated invariant.
void validate_record(const AnnotationRecord& record);

struct LabelImportResult {
  std::vector<AnnotationRecord> records;
  std::vector<LineIssue> errors;
};

LabelImportResult import_labels(std::istream& in);

// True iff at least two records say is_explicitation == true.
bool majority_vote(std::span<const AnnotationRecord> records);

// Binary Cohen's kappa. Throws Error(invalid_argument) on length mismatch or
// empty input.
double cohen_kappa(std::span<const int> a, std::span<const int> b);

// Mean kappa over annotator pairs, each pair restricted to its co-annotated
// tasks. Pairs without overlap are skipped; Error(invalid_argument) when no
// pair overlaps.
double average_pairwise_kappa(std::span<const AnnotationRecord> records);

enum class RatingAspect { decision, generation, integration };
enum class Rating { low, mid, high };

std::string_view to_string(RatingAspect a);
RatingAspect rating_aspect_from_string(std::string_view s);
std::string_view to_string(Rating r);
Rating rating_from_string(std::string_view s);
double rating_value(Rating r);

struct IntrinsicRating {
  std::string item_id;
  RatingAspect aspect = RatingAspect::decision;
  std::optional<GenType> gen_type;
  Rating rating = Rating::mid;

  bool operator==(const IntrinsicRating&) const = default;
};

// Rejects integration ratings for Long explanations.
void validate_rating(const IntrinsicRating& rating);

// Mean of high=1, mid=0.5, low=0 over the slice. Throws Error(invalid_argument)
// on an empty slice.
double likert_aggregate(std::span<const IntrinsicRating> ratings,
                        RatingAspect aspect,
                        std::optional<GenType> gen_type = std::nullopt);

struct VoteSummary {
  std::size_t annotated_tasks = 0;
  std::size_t at_least_one_vote = 0;
  std::size_t explicitation = 0;  // majority positive
};

VoteSummary summarize_votes(std::span<const AnnotationRecord> records);

}  // namespace expltk
