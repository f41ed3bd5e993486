#include "expltk/bitext.hpp"

#include <charconv>
#include <istream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "expltk/error.hpp"
#include "expltk/text.hpp"

namespace expltk {

std::string_view to_string(Side side) {
  return side == Side::source ? "source" : "target";
}

Side side_from_string(std::string_view s) {
  if (s == "source" || s == "src") return Side::source;
  if (s == "target" || s == "tgt") return Side::target;
  throw Error(ErrorKind::parse, "unknown side '" + std::string(s) + "'");
}

std::vector<Token> tokenize(std::string_view raw) {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  std::size_t word_start = std::string_view::npos;
  auto flush = [&](std::size_t end) {
    if (word_start == std::string_view::npos) return;
    tokens.push_back({std::string(raw.substr(word_start, end - word_start)),
                      {word_start, end}});
    word_start = std::string_view::npos;
  };
  while (pos < raw.size()) {
    const std::size_t begin = pos;
    const char32_t cp = text::decode_next(raw, pos);
    if (text::is_space(cp)) {
      flush(begin);
    } else if (text::is_punct(cp)) {
      flush(begin);
      tokens.push_back({std::string(raw.substr(begin, pos - begin)), {begin, pos}});
    } else if (word_start == std::string_view::npos) {
      word_start = begin;
    }
  }
  flush(raw.size());
  return tokens;
}

SentencePair make_sentence_pair(std::string pair_id, std::string src_lang,
                                std::string tgt_lang, std::string src_raw,
                                std::string tgt_raw, double margin_score) {
  SentencePair pair;
  pair.pair_id = std::move(pair_id);
  pair.src_lang = std::move(src_lang);
  pair.tgt_lang = std::move(tgt_lang);
  pair.src_raw = std::move(src_raw);
  pair.tgt_raw = std::move(tgt_raw);
  pair.src_tokens = tokenize(pair.src_raw);
  pair.tgt_tokens = tokenize(pair.tgt_raw);
  pair.margin_score = margin_score;
  return pair;
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::optional<double> parse_double(std::string_view s) {
  s = text::trim(s);
  double value = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return value;
}

std::optional<std::size_t> parse_index(std::string_view s) {
  std::size_t value = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return value;
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

BitextParseResult parse_bitext(std::istream& in, std::string_view src_lang,
                               std::string_view tgt_lang, ScoreRange range) {
  if (range.lo > range.hi) {
    throw Error(ErrorKind::invalid_argument, "score range lower bound exceeds upper bound");
  }
  BitextParseResult result;
  std::string line;
  std::size_t line_no = 0;
  for (; read_line(in, line); ++line_no) {
    ++result.lines_read;
    if (line.empty()) {
      result.warnings.push_back({line_no, "blank line skipped"});
      continue;
    }
    const auto fields = split_tabs(line);
    if (fields.size() != 3 && fields.size() != 4) {
      result.errors.push_back(
          {line_no, "expected 3 or 4 tab-separated fields, got " +
                        std::to_string(fields.size())});
      continue;
    }
    const std::size_t off = fields.size() == 4 ? 1 : 0;
    const auto score = parse_double(fields[off]);
    if (!score) {
      result.errors.push_back(
          {line_no, "non-numeric score '" + std::string(fields[off]) + "'"});
      continue;
    }
    std::string pair_id = off == 1 ? std::string(text::trim(fields[0]))
                                   : std::to_string(line_no);
    if (pair_id.empty()) {
      result.errors.push_back({line_no, "empty pair id"});
      continue;
    }
    SentencePair pair =
        make_sentence_pair(std::move(pair_id), std::string(src_lang),
                           std::string(tgt_lang), std::string(fields[off + 1]),
                           std::string(fields[off + 2]), *score);
    pair.line_no = line_no;
    if (pair.src_tokens.empty() || pair.tgt_tokens.empty()) {
      result.warnings.push_back({line_no, "empty sentence skipped"});
      continue;
    }
    if (*score < range.lo || *score > range.hi) continue;
    result.pairs.push_back(std::move(pair));
  }
  return result;
}

AlignmentSet parse_alignment(std::string_view line, const SentencePair& pair,
                             std::string tool_tag) {
  AlignmentSet set;
  set.tool_tag = std::move(tool_tag);
  for (const auto word : text::words(line)) {
    const auto dash = word.find('-');
    std::optional<std::size_t> src;
    std::optional<std::size_t> tgt;
    if (dash != std::string_view::npos) {
      src = parse_index(word.substr(0, dash));
      tgt = parse_index(word.substr(dash + 1));
    }
    if (!src || !tgt) {
      throw Error(ErrorKind::parse, "pair " + pair.pair_id +
                                        ": malformed alignment token '" +
                                        std::string(word) + "'");
    }
    if (*src >= pair.src_tokens.size() || *tgt >= pair.tgt_tokens.size()) {
      throw Error(ErrorKind::invalid_argument,
                  "pair " + pair.pair_id + ": alignment edge " +
                      std::string(word) + " out of range for " +
                      std::to_string(pair.src_tokens.size()) + "x" +
                      std::to_string(pair.tgt_tokens.size()) + " tokens");
    }
    set.edges.insert({*src, *tgt});
  }
  return set;
}

std::map<std::string, AlignmentSet> parse_alignment_file(
    std::istream& in, const std::vector<SentencePair>& pairs,
    const std::string& tool_tag) {
  std::vector<std::string> lines;
  std::string line;
  while (read_line(in, line)) lines.push_back(line);
  std::map<std::string, AlignmentSet> out;
  for (const auto& pair : pairs) {
    if (pair.line_no >= lines.size()) {
      throw Error(ErrorKind::parse, "alignment file " + tool_tag +
                                        " has no line for pair " + pair.pair_id);
    }
    out[pair.pair_id] = parse_alignment(lines[pair.line_no], pair, tool_tag);
  }
  return out;
}

std::string emit_alignment(const AlignmentSet& alignment) {
  std::string out;
  for (const auto& edge : alignment.edges) {
    if (!out.empty()) out.push_back(' ');
    out += std::to_string(edge.src);
    out.push_back('-');
    out += std::to_string(edge.tgt);
  }
  return out;
}

CharSpan token_span_to_char_span(const SentencePair& pair, Side side,
                                 TokenSpan span) {
  const auto& tokens = pair.tokens(side);
  if (span.start >= span.end || span.end > tokens.size()) {
    throw Error(ErrorKind::invalid_argument,
                "pair " + pair.pair_id + ": invalid token span [" +
                    std::to_string(span.start) + "," + std::to_string(span.end) + ")");
  }
  return {tokens[span.start].chars.start, tokens[span.end - 1].chars.end};
}

namespace {

std::string strip_spaces(std::string_view s) {
  std::string out;
  for (const auto word : text::words(s)) out += word;
  return out;
}

}  // namespace

void validate_mention(const SentencePair& pair, const EntityMention& mention) {
  const CharSpan chars = token_span_to_char_span(pair, mention.side, mention.span);
  const std::string_view covered =
      std::string_view(pair.raw(mention.side)).substr(chars.start, chars.size());
  if (strip_spaces(covered) != strip_spaces(mention.surface)) {
    throw Error(ErrorKind::invalid_argument,
                "pair " + pair.pair_id + ": entity surface '" + mention.surface +
                    "' does not match tokens '" + std::string(covered) + "'");
  }
}

EntityParseResult parse_entities(std::istream& in,
                                 const std::vector<SentencePair>& pairs) {
  std::unordered_map<std::string, const SentencePair*> by_id;
  for (const auto& p : pairs) by_id.emplace(p.pair_id, &p);

  EntityParseResult result;
  std::string line;
  for (std::size_t line_no = 0; read_line(in, line); ++line_no) {
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EntityMention m;
      const std::string pair_id = j.at("pair_id").is_string()
                                      ? j.at("pair_id").get<std::string>()
                                      : std::to_string(j.at("pair_id").get<long long>());
      m.side = side_from_string(j.at("side").get<std::string>());
      m.span = {j.at("start_token").get<std::size_t>(), j.at("end_token").get<std::size_t>()};
      m.surface = j.at("surface").get<std::string>();
      if (j.contains("kb_id") && !j.at("kb_id").is_null()) {
        m.kb_id = j.at("kb_id").get<std::string>();
      }
      m.ner_label = j.value("ner_label", std::string());
      const auto it = by_id.find(pair_id);
      if (it == by_id.end()) continue;
      validate_mention(*it->second, m);
      result.by_pair[pair_id].push_back(std::move(m));
    } catch (const Error& e) {
      result.errors.push_back({line_no, e.what()});
    } catch (const nlohmann::json::exception& e) {
      result.errors.push_back({line_no, e.what()});
    }
  }
  return result;
}

}  // namespace expltk
