#include "expltk/miner.hpp"

#include <algorithm>
#include <array>
#include <iterator>
#include <tuple>

#include "expltk/error.hpp"
#include "expltk/text.hpp"

namespace expltk {

std::string_view to_string(EnsembleMode mode) {
  return mode == EnsembleMode::unite ? "union" : "intersection";
}

EnsembleMode ensemble_mode_from_string(std::string_view s) {
  if (s == "union") return EnsembleMode::unite;
  if (s == "intersection") return EnsembleMode::intersect;
  throw Error(ErrorKind::invalid_argument, "unknown ensemble mode '" + std::string(s) + "'");
}

AlignmentSet ensemble_alignments(std::span<const AlignmentSet> sets,
                                 EnsembleMode mode) {
  if (sets.empty()) {
    throw Error(ErrorKind::invalid_argument, "ensemble of zero alignment sets");
  }
  AlignmentSet out;
  out.tool_tag = "ensemble";
  out.edges = sets.front().edges;
  for (const auto& set : sets.subspan(1)) {
    if (mode == EnsembleMode::unite) {
      out.edges.insert(set.edges.begin(), set.edges.end());
    } else {
      std::set<AlignmentEdge> kept;
      std::set_intersection(out.edges.begin(), out.edges.end(), set.edges.begin(),
                            set.edges.end(), std::inserter(kept, kept.end()));
      out.edges = std::move(kept);
    }
  }
  return out;
}

std::vector<UnalignedSegment> unaligned_target_segments(
    const SentencePair& pair, const AlignmentSet& alignment) {
  const std::size_t n = pair.tgt_tokens.size();
  std::vector<bool> aligned(n, false);
  for (const auto& edge : alignment.edges) {
    if (edge.tgt >= n || edge.src >= pair.src_tokens.size()) {
      throw Error(ErrorKind::invalid_argument,
                  "pair " + pair.pair_id + ": alignment edge out of range");
    }
    aligned[edge.tgt] = true;
  }
  std::vector<UnalignedSegment> segments;
  std::size_t i = 0;
  while (i < n) {
    if (aligned[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && !aligned[j]) ++j;
    segments.push_back({{i, j}});
    i = j;
  }
  return segments;
}

std::size_t span_gap(TokenSpan a, TokenSpan b) {
  if (b.start >= a.end) return b.start - a.end;
  if (a.start >= b.end) return a.start - b.end;
  return 0;
}

bool spans_overlap(TokenSpan a, TokenSpan b) {
  return a.start < b.end && b.start < a.end;
}

std::vector<EntitySegmentPair> pair_segments_with_entities(
    const SentencePair& /*pair*/, std::span<const UnalignedSegment> segments,
    std::span<const EntityMention> entities, std::size_t proximity) {
  std::vector<EntitySegmentPair> out;
  for (const auto& entity : entities) {
    if (entity.side != Side::target) continue;
    for (const auto& segment : segments) {
      const std::size_t gap = span_gap(entity.span, segment.span);
      if (gap <= proximity) out.push_back({entity, segment, gap});
    }
  }
  return out;
}

namespace {

std::optional<std::string> find_evidence(const std::string& needle,
                                         const std::string& content) {
  constexpr std::size_t kContext = 20;
  const std::string hay = text::normalize(content);
  const auto pos = hay.find(needle);
  if (pos == std::string::npos) return std::nullopt;
  const std::size_t begin = text::floor_codepoint(hay, pos > kContext ? pos - kContext : 0);
  std::size_t end = std::min(hay.size(), pos + needle.size() + kContext);
  while (end < hay.size() && (static_cast<unsigned char>(hay[end]) & 0xC0) == 0x80) ++end;
  return hay.substr(begin, end - begin);
}

}  // namespace

RelatednessResult relatedness_check(std::string_view segment_text,
                                    const EntityProfile& profile,
                                    std::string_view primary_lang,
                                    std::string_view fallback_lang) {
  const std::string needle = text::normalize(segment_text);
  bool any_content = false;
  for (const auto lang : {primary_lang, fallback_lang}) {
    const PageInfo* page = profile.page(lang);
    if (page == nullptr || page->content().empty()) continue;
    any_content = true;
    if (needle.empty()) continue;
    if (auto evidence = find_evidence(needle, page->content())) {
      return {Relatedness::related, std::move(evidence)};
    }
  }
  if (!any_content) return {Relatedness::unknown, std::nullopt};
  return {Relatedness::unrelated, std::nullopt};
}

namespace {

using WordList = std::vector<std::string_view>;

const WordList& function_words(std::string_view lang) {
  static const WordList en = {
      "a", "an", "the", "of", "in", "on", "at", "to", "for", "by", "with",
      "from", "and", "or", "but", "as", "is", "was", "are", "were", "be",
      "been", "it", "its", "this", "that", "these", "those", "which", "who",
      "also", "there", "their", "his", "her", "he", "she", "they", "not", "s"};
  static const WordList fr = {
      "le", "la", "les", "l", "un", "une", "des", "de", "du", "d", "et", "ou",
      "à", "au", "aux", "en", "dans", "par", "pour", "sur", "avec", "est",
      "a", "il", "elle", "qui", "que", "ce", "se", "son", "sa", "ses"};
  static const WordList es = {
      "el", "la", "los", "las", "un", "una", "unos", "unas", "de", "del", "y",
      "o", "a", "al", "en", "por", "para", "con", "es", "fue", "que", "se",
      "su", "sus", "lo"};
  static const WordList pl = {
      "i", "w", "we", "z", "ze", "na", "do", "o", "od", "po", "za", "to",
      "jest", "był", "była", "się", "że", "a", "oraz", "jak", "ten", "ta"};
  static const WordList de = {
      "der", "die", "das", "den", "dem", "des", "ein", "eine", "und", "oder",
      "in", "im", "an", "am", "zu", "von", "mit", "ist", "war", "auf"};
  static const WordList none;
  if (lang == "en") return en;
  if (lang == "fr") return fr;
  if (lang == "es") return es;
  if (lang == "pl") return pl;
  if (lang == "de") return de;
  return none;
}

}  // namespace

bool is_function_only(std::span<const Token> tokens, std::string_view lang) {
  const WordList& list = function_words(lang);
  for (const auto& token : tokens) {
    if (text::is_all_punct(token.surface)) continue;
    const std::string folded = text::fold_case(token.surface);
    if (std::find(list.begin(), list.end(), folded) == list.end()) return false;
  }
  return true;
}

std::vector<ExplicitationCandidate> detect_candidates(
    const SentencePair& pair, std::span<const AlignmentSet> alignments,
    std::span<const EntityMention> entities, ProfileProvider& kb,
    const MinerConfig& config) {
  const AlignmentSet merged = ensemble_alignments(alignments, config.ensemble);

  std::vector<UnalignedSegment> segments;
  for (const auto& segment : unaligned_target_segments(pair, merged)) {
    const std::span<const Token> covered(pair.tgt_tokens.data() + segment.span.start,
                                         segment.span.size());
    if (!is_function_only(covered, pair.tgt_lang)) segments.push_back(segment);
  }

  std::vector<EntityMention> targets;
  for (const auto& e : entities) {
    if (e.side == Side::target &&
        std::find(targets.begin(), targets.end(), e) == targets.end()) {
      targets.push_back(e);
    }
  }

  const std::array<std::string, 2> langs{pair.tgt_lang, pair.src_lang};
  std::vector<ExplicitationCandidate> out;
  for (auto& [entity, segment, distance] :
       pair_segments_with_entities(pair, segments, targets, config.proximity)) {
    if (spans_overlap(entity.span, segment.span)) continue;

    ExplicitationCandidate c;
    c.pair_id = pair.pair_id;
    c.distance = distance;
    const CharSpan chars = token_span_to_char_span(pair, Side::target, segment.span);
    c.segment_text = pair.tgt_raw.substr(chars.start, chars.size());

    RelatednessResult related;
    if (entity.kb_id) {
      try {
        const EntityProfile profile = kb.fetch_entity_profile(*entity.kb_id, langs);
        related = relatedness_check(c.segment_text, profile, pair.tgt_lang, pair.src_lang);
      } catch (const Error&) {
        c.flags.emplace_back(kFlagKbLookupFailed);
      }
    }
    if (related.outcome == Relatedness::unrelated) continue;
    if (related.outcome == Relatedness::unknown) {
      if (!config.keep_unknown) continue;
      c.flags.emplace_back(kFlagRelatednessUnknown);
    }
    c.evidence = std::move(related.evidence);
    c.entity = std::move(entity);
    c.segment = segment;
    out.push_back(std::move(c));
  }

  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.entity.span.start, a.segment.span.start, a.entity.span.end,
                    a.segment.span.end, a.entity.kb_id, a.entity.surface) <
           std::tie(b.entity.span.start, b.segment.span.start, b.entity.span.end,
                    b.segment.span.end, b.entity.kb_id, b.entity.surface);
  });
  return out;
}

}  // namespace expltk
