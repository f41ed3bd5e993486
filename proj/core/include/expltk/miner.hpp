#pragma once

// Mining explicitation candidates from bitext: ensemble the aligners, find
// maximal unaligned target runs, pair them with nearby target-side entities
// and keep the pairs whose segment text occurs in the entity's page.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expltk/bitext.hpp"
#include "expltk/decision.hpp"
#include "expltk/kb.hpp"

namespace expltk {

enum class EnsembleMode { unite, intersect };

std::string_view to_string(EnsembleMode mode);
EnsembleMode ensemble_mode_from_string(std::string_view s);

AlignmentSet ensemble_alignments(std::span<const AlignmentSet> sets,
                                 EnsembleMode mode);

std::vector<UnalignedSegment> unaligned_target_segments(
    const SentencePair& pair, const AlignmentSet& alignment);

// Token gap between two spans: 0 when adjacent or overlapping, otherwise the
// index difference between the nearest boundaries.
std::size_t span_gap(TokenSpan a, TokenSpan b);

bool spans_overlap(TokenSpan a, TokenSpan b);

struct EntitySegmentPair {
  EntityMention entity;
  UnalignedSegment segment;
  std::size_t distance = 0;

  bool operator==(const EntitySegmentPair&) const = default;
};

std::vector<EntitySegmentPair> pair_segments_with_entities(
    const SentencePair& pair, std::span<const UnalignedSegment> segments,
    std::span<const EntityMention> entities, std::size_t proximity);

enum class Relatedness { related, unrelated, unknown };

struct RelatednessResult {
  Relatedness outcome = Relatedness::unknown;
  std::optional<std::string> evidence;
};

// Case-folded, whitespace-normalized substring test of the segment inside
// the entity's page text, preferring `primary_lang`. Evidence is the match
// with up to 20 bytes of context on each side.
RelatednessResult relatedness_check(std::string_view segment_text,
                                    const EntityProfile& profile,
                                    std::string_view primary_lang,
                                    std::string_view fallback_lang);

// True for segments made only of punctuation and function words of `lang`.
bool is_function_only(std::span<const Token> tokens, std::string_view lang);

inline constexpr std::string_view kFlagRelatednessUnknown = "relatedness_unknown";
inline constexpr std::string_view kFlagKbLookupFailed = "kb_lookup_failed";

struct ExplicitationCandidate {
  std::string pair_id;
  EntityMention entity;
  UnalignedSegment segment;
  std::size_t distance = 0;
  std::string segment_text;
  std::optional<std::string> evidence;
  std::vector<std::string> flags;
  std::optional<DecisionOutcome> decision;

  bool operator==(const ExplicitationCandidate&) const = default;
};

struct MinerConfig {
  EnsembleMode ensemble = EnsembleMode::unite;
  std::size_t proximity = 3;
  // Keep (and flag) candidates whose relatedness could not be established.
  bool keep_unknown = false;
};

std::vector<ExplicitationCandidate> detect_candidates(
    const SentencePair& pair, std::span<const AlignmentSet> alignments,
    std::span<const EntityMention> entities, ProfileProvider& kb,
    const MinerConfig& config);

}  // namespace expltk
