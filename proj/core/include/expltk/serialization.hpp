#pragma once

// JSON mappings for the file formats exchanged between pipeline stages.

#include <nlohmann/json.hpp>

#include "expltk/annotation.hpp"
#include "expltk/bitext.hpp"
#include "expltk/decision.hpp"
#include "expltk/generator.hpp"
#include "expltk/kb.hpp"
#include "expltk/miner.hpp"
#include "expltk/qa.hpp"

namespace expltk {

using nlohmann::json;

// Deterministic double rendering used by every writer.
std::string format_number(double value);

json to_json(const EntityMention& m);
EntityMention mention_from_json(const json& j);

json to_json(const ExplicitationCandidate& c);
ExplicitationCandidate candidate_from_json(const json& j);

json to_json(const DecisionOutcome& d);
DecisionOutcome decision_from_json(const json& j);

json to_json(const DecisionConfig& c);
DecisionConfig decision_config_from_json(const json& j);

json to_json(const EntityProfile& p);
EntityProfile profile_from_json(const json& j);

json to_json(const GeneratedExplicitation& g);
GeneratedExplicitation generated_from_json(const json& j);

json to_json(const AnnotationTask& t);
AnnotationTask task_from_json(const json& j);

json to_json(const AnnotationRecord& r);
AnnotationRecord record_from_json(const json& j);

json to_json(const IntrinsicRating& r);
IntrinsicRating rating_from_json(const json& j);

json to_json(const Question& q);
Question question_from_json(const json& j);

json to_json(const CharSpan& s);
CharSpan char_span_from_json(const json& j);

// Compact single-line dump with a trailing newline.
std::string jsonl_line(const json& j);

}  // namespace expltk
