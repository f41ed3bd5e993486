#include "expltk/annotation.hpp"

#include <algorithm>
#include <istream>
#include <set>

#include "expltk/error.hpp"
#include "expltk/serialization.hpp"
#include "expltk/text.hpp"

namespace expltk {

std::string task_id_for(const ExplicitationCandidate& c) {
  return c.pair_id + ":e" + std::to_string(c.entity.span.start) + "-" +
         std::to_string(c.entity.span.end) + ":s" + std::to_string(c.segment.span.start) +
         "-" + std::to_string(c.segment.span.end);
}

std::vector<AnnotationTask> export_tasks(std::span<const ExplicitationCandidate> candidates,
                                         std::span<const SentencePair> pairs,
                                         const ExportOptions& options) {
  std::map<std::string, const SentencePair*> by_id;
  for (const auto& p : pairs) by_id.emplace(p.pair_id, &p);

  std::vector<AnnotationTask> tasks;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const auto it = by_id.find(c.pair_id);
    if (it == by_id.end()) {
      throw Error(ErrorKind::invalid_argument,
                  "candidate " + task_id_for(c) + " references unknown pair " + c.pair_id);
    }
    const SentencePair& pair = *it->second;
    AnnotationTask t;
    t.task_id = task_id_for(c);
    t.pair_id = c.pair_id;
    t.src_raw = pair.src_raw;
    t.tgt_raw = pair.tgt_raw;
    t.unaligned_spans.push_back(token_span_to_char_span(pair, Side::target, c.segment.span));
    t.tgt_entity_spans.push_back(token_span_to_char_span(pair, Side::target, c.entity.span));
    if (options.source_entities != nullptr) {
      if (auto s = options.source_entities->find(c.pair_id);
          s != options.source_entities->end()) {
        for (const auto& m : s->second) {
          if (m.side == Side::source) {
            t.src_entity_spans.push_back(token_span_to_char_span(pair, Side::source, m.span));
          }
        }
      }
    }
    if (options.entity_country != nullptr && c.entity.kb_id) {
      if (auto cc = options.entity_country->find(*c.entity.kb_id);
          cc != options.entity_country->end()) {
        t.country = cc->second;
      }
    }
    t.candidate_index = i;
    if (options.country_filter && t.country != options.country_filter) continue;
    tasks.push_back(std::move(t));
  }
  return tasks;
}

std::string_view to_string(LabelCategory c) {
  switch (c) {
    case LabelCategory::additional_information: return "AdditionalInformation";
    case LabelCategory::paraphrase: return "Paraphrase";
    case LabelCategory::noise: return "TranslationErrorNoise";
  }
  return "unknown";
}

LabelCategory label_category_from_string(std::string_view s) {
  if (s == "AdditionalInformation" || s == "additional_information") {
    return LabelCategory::additional_information;
  }
  if (s == "Paraphrase" || s == "paraphrase") return LabelCategory::paraphrase;
  if (s == "TranslationErrorNoise" || s == "noise") return LabelCategory::noise;
  throw Error(ErrorKind::schema, "unknown label category '" + std::string(s) + "'");
}

void validate_record(const AnnotationRecord& r) {
  if (r.task_id.empty()) throw Error(ErrorKind::schema, "label without task_id");
  if (r.annotator_id.empty()) throw Error(ErrorKind::schema, "label without annotator_id");
  const bool needs_flag = r.category == LabelCategory::additional_information;
  if (needs_flag && !r.is_explicitation) {
    throw Error(ErrorKind::schema, r.task_id + ": AdditionalInformation needs is_explicitation");
  }
  if (!needs_flag && r.is_explicitation) {
    throw Error(ErrorKind::schema,
                r.task_id + ": is_explicitation only applies to AdditionalInformation");
  }
  if (r.explicitation() && (!r.src_span || !r.tgt_span)) {
    throw Error(ErrorKind::schema, r.task_id + ": explicitation label needs both spans");
  }
  for (const auto& span : {r.src_span, r.tgt_span}) {
    if (span && span->start >= span->end) {
      throw Error(ErrorKind::schema, r.task_id + ": empty or inverted span");
    }
  }
}

LabelImportResult import_labels(std::istream& in) {
  LabelImportResult result;
  std::string line;
  for (std::size_t line_no = 0; std::getline(in, line); ++line_no) {
    if (text::trim(line).empty()) continue;
    try {
      auto record = record_from_json(json::parse(line));
      validate_record(record);
      result.records.push_back(std::move(record));
    } catch (const json::exception& e) {
      result.errors.push_back({line_no, e.what()});
    } catch (const Error& e) {
      result.errors.push_back({line_no, e.what()});
    }
  }
  return result;
}

bool majority_vote(std::span<const AnnotationRecord> records) {
  return std::count_if(records.begin(), records.end(),
                       [](const AnnotationRecord& r) { return r.explicitation(); }) >= 2;
}

double cohen_kappa(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::invalid_argument, "kappa label vectors differ in length");
  }
  if (a.empty()) throw Error(ErrorKind::invalid_argument, "kappa on empty labels");
  const double n = static_cast<double>(a.size());
  double agree = 0, a_pos = 0, b_pos = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] != 0;
    const bool y = b[i] != 0;
    agree += x == y;
    a_pos += x;
    b_pos += y;
  }
  const double p_o = agree / n;
  const double p_e = (a_pos / n) * (b_pos / n) + (1 - a_pos / n) * (1 - b_pos / n);
  if (p_e >= 1.0) return p_o >= 1.0 ? 1.0 : 0.0;
  return (p_o - p_e) / (1 - p_e);
}

double average_pairwise_kappa(std::span<const AnnotationRecord> records) {
  std::map<std::string, std::map<std::string, int>> by_annotator;
  for (const auto& r : records) by_annotator[r.annotator_id][r.task_id] = r.explicitation();
  if (by_annotator.size() < 2) {
    throw Error(ErrorKind::invalid_argument, "kappa needs at least two annotators");
  }
  double sum = 0;
  int n_pairs = 0;
  for (auto i = by_annotator.begin(); i != by_annotator.end(); ++i) {
    for (auto j = std::next(i); j != by_annotator.end(); ++j) {
      std::vector<int> a, b;
      for (const auto& [task, label] : i->second) {
        if (auto k = j->second.find(task); k != j->second.end()) {
          a.push_back(label);
          b.push_back(k->second);
        }
      }
      if (a.empty()) continue;
      sum += cohen_kappa(a, b);
      ++n_pairs;
    }
  }
  if (n_pairs == 0) throw Error(ErrorKind::invalid_argument, "no annotator pair overlaps");
  return sum / n_pairs;
}

std::string_view to_string(RatingAspect a) {
  switch (a) {
    case RatingAspect::decision: return "decision";
    case RatingAspect::generation: return "generation";
    case RatingAspect::integration: return "integration";
  }
  return "unknown";
}

RatingAspect rating_aspect_from_string(std::string_view s) {
  if (s == "decision") return RatingAspect::decision;
  if (s == "generation") return RatingAspect::generation;
  if (s == "integration") return RatingAspect::integration;
  throw Error(ErrorKind::schema, "unknown rating aspect '" + std::string(s) + "'");
}

std::string_view to_string(Rating r) {
  switch (r) {
    case Rating::low: return "low";
    case Rating::mid: return "mid";
    case Rating::high: return "high";
  }
  return "unknown";
}

Rating rating_from_string(std::string_view s) {
  if (s == "low") return Rating::low;
  if (s == "mid") return Rating::mid;
  if (s == "high") return Rating::high;
  throw Error(ErrorKind::schema, "unknown rating '" + std::string(s) + "'");
}

double rating_value(Rating r) {
  switch (r) {
    case Rating::low: return 0.0;
    case Rating::mid: return 0.5;
    case Rating::high: return 1.0;
  }
  return 0.0;
}

void validate_rating(const IntrinsicRating& r) {
  if (r.item_id.empty()) throw Error(ErrorKind::schema, "rating without item_id");
  if (r.aspect == RatingAspect::integration && r.gen_type == GenType::Long) {
    throw Error(ErrorKind::schema, r.item_id + ": Long explanations have no integration rating");
  }
  if (r.aspect != RatingAspect::decision && !r.gen_type) {
    throw Error(ErrorKind::schema, r.item_id + ": " + std::string(to_string(r.aspect)) +
                                       " rating needs a gen_type");
  }
}

double likert_aggregate(std::span<const IntrinsicRating> ratings, RatingAspect aspect,
                        std::optional<GenType> gen_type) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& r : ratings) {
    if (r.aspect != aspect) continue;
    if (gen_type && r.gen_type != gen_type) continue;
    sum += rating_value(r.rating);
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::invalid_argument, "no ratings in the requested slice");
  return sum / static_cast<double>(n);
}

VoteSummary summarize_votes(std::span<const AnnotationRecord> records) {
  std::map<std::string, std::vector<AnnotationRecord>> by_task;
  for (const auto& r : records) by_task[r.task_id].push_back(r);
  VoteSummary s;
  s.annotated_tasks = by_task.size();
  for (const auto& [task, votes] : by_task) {
    if (std::any_of(votes.begin(), votes.end(),
                    [](const AnnotationRecord& r) { return r.explicitation(); })) {
      ++s.at_least_one_vote;
    }
    if (majority_vote(votes)) ++s.explicitation;
  }
  return s;
}

}  // namespace expltk
