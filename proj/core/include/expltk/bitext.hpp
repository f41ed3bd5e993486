#pragma once

// Bitext corpus types: sentence pairs, word alignments and entity mentions,
// plus the parsers for the on-disk formats (score-tagged TSV, Pharaoh
// alignments, entity JSONL).

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace expltk {

enum class Side { source, target };

std::string_view to_string(Side side);
Side side_from_string(std::string_view s);

// Half-open [start, end) ranges. Char spans are byte offsets into UTF-8 text.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool operator==(const CharSpan&) const = default;
  auto operator<=>(const CharSpan&) const = default;
};

struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool empty() const { return start >= end; }
  bool operator==(const TokenSpan&) const = default;
  auto operator<=>(const TokenSpan&) const = default;
};

struct Token {
  std::string surface;
  CharSpan chars;

  bool operator==(const Token&) const = default;
};

// Splits on Unicode whitespace and detaches every punctuation character as a
// token of its own. Offsets index into `raw`.
std::vector<Token> tokenize(std::string_view raw);

struct SentencePair {
  std::string pair_id;
  std::size_t line_no = 0;  // 0-based line in the bitext file
  std::string src_lang;
  std::string tgt_lang;
  std::string src_raw;
  std::string tgt_raw;
  std::vector<Token> src_tokens;
  std::vector<Token> tgt_tokens;
  double margin_score = 0.0;

  const std::vector<Token>& tokens(Side side) const {
    return side == Side::source ? src_tokens : tgt_tokens;
  }
  const std::string& raw(Side side) const {
    return side == Side::source ? src_raw : tgt_raw;
  }
  const std::string& lang(Side side) const {
    return side == Side::source ? src_lang : tgt_lang;
  }

  bool operator==(const SentencePair&) const = default;
};

SentencePair make_sentence_pair(std::string pair_id, std::string src_lang,
                                std::string tgt_lang, std::string src_raw,
                                std::string tgt_raw, double margin_score = 0.0);

struct ScoreRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct LineIssue {
  std::size_t line = 0;  // 0-based
  std::string message;

  bool operator==(const LineIssue&) const = default;
};

struct BitextParseResult {
  std::vector<SentencePair> pairs;
  std::vector<LineIssue> errors;
  std::vector<LineIssue> warnings;
  std::size_t lines_read = 0;
};

// Lines are `score \t src \t tgt`, or `id \t score \t src \t tgt` when the
// file carries its own pair ids. Both ends of the score range are inclusive.
BitextParseResult parse_bitext(std::istream& in, std::string_view src_lang,
                               std::string_view tgt_lang, ScoreRange range);

struct AlignmentEdge {
  std::size_t src = 0;
  std::size_t tgt = 0;

  bool operator==(const AlignmentEdge&) const = default;
  auto operator<=>(const AlignmentEdge&) const = default;
};

struct AlignmentSet {
  std::set<AlignmentEdge> edges;
  std::string tool_tag;

  bool operator==(const AlignmentSet&) const = default;
};

// One Pharaoh line (`i-j i-j ...`) validated against the pair's token counts.
AlignmentSet parse_alignment(std::string_view line, const SentencePair& pair,
                             std::string tool_tag = {});

// A whole Pharaoh file. Line k belongs to the bitext line k, so alignments
// can be joined to a score-filtered pair list. Keyed by pair_id.
std::map<std::string, AlignmentSet> parse_alignment_file(
    std::istream& in, const std::vector<SentencePair>& pairs,
    const std::string& tool_tag);

// Canonical Pharaoh writer: edges in (src, tgt) order, single spaces.
std::string emit_alignment(const AlignmentSet& alignment);

CharSpan token_span_to_char_span(const SentencePair& pair, Side side,
                                 TokenSpan span);

struct EntityMention {
  Side side = Side::target;
  TokenSpan span;
  std::string surface;
  std::optional<std::string> kb_id;
  std::string ner_label;

  bool operator==(const EntityMention&) const = default;
};

struct UnalignedSegment {
  TokenSpan span;  // always on the target side

  bool operator==(const UnalignedSegment&) const = default;
};

// Checks span bounds and that `surface` matches the covered tokens modulo
// whitespace. Throws Error(invalid_argument).
void validate_mention(const SentencePair& pair, const EntityMention& mention);

struct EntityParseResult {
  std::map<std::string, std::vector<EntityMention>> by_pair;
  std::vector<LineIssue> errors;
};

// Entity JSONL: {pair_id, side, start_token, end_token, surface, kb_id?,
// ner_label}. Mentions referring to pairs absent from `pairs` are ignored
// (they were filtered out by score); the rest are validated.
EntityParseResult parse_entities(std::istream& in,
                                 const std::vector<SentencePair>& pairs);

}  // namespace expltk
