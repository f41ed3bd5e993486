#include "expltk/generator.hpp"

#include <algorithm>

#include "expltk/error.hpp"
#include "expltk/text.hpp"

namespace expltk {

std::string_view to_string(GenType type) {
  switch (type) {
    case GenType::Short: return "short";
    case GenType::Mid: return "mid";
    case GenType::Long: return "long";
  }
  return "unknown";
}

GenType gen_type_from_string(std::string_view s) {
  const std::string folded = text::fold_case(s);
  if (folded == "short") return GenType::Short;
  if (folded == "mid") return GenType::Mid;
  if (folded == "long") return GenType::Long;
  throw Error(ErrorKind::invalid_argument, "unknown generation type '" + std::string(s) + "'");
}

std::string_view to_string(IntegrationForm form) {
  switch (form) {
    case IntegrationForm::appositive: return "appositive";
    case IntegrationForm::parenthetical: return "parenthetical";
    case IntegrationForm::footnote: return "footnote";
  }
  return "unknown";
}

IntegrationForm integration_form_from_string(std::string_view s) {
  if (s == "appositive") return IntegrationForm::appositive;
  if (s == "parenthetical") return IntegrationForm::parenthetical;
  if (s == "footnote") return IntegrationForm::footnote;
  throw Error(ErrorKind::invalid_argument, "unknown integration form '" + std::string(s) + "'");
}

void validate_generated(const GeneratedExplicitation& gen, int max_sentences) {
  if (text::trim(gen.text).empty()) {
    throw Error(ErrorKind::invalid_argument, "empty explanation text");
  }
  const std::size_t n_words = text::words(gen.text).size();
  switch (gen.type) {
    case GenType::Short:
      if (n_words > 2) throw Error(ErrorKind::invalid_argument, "Short text exceeds two words");
      break;
    case GenType::Mid:
      if (n_words < 3) throw Error(ErrorKind::invalid_argument, "Mid text below three words");
      break;
    case GenType::Long:
      if (split_sentences(gen.text).size() > static_cast<std::size_t>(max_sentences)) {
        throw Error(ErrorKind::invalid_argument, "Long text exceeds sentence limit");
      }
      break;
  }
}

LabelFrequency hypernym_frequencies(std::span<const EntityProfile> pool,
                                    std::string_view lang) {
  LabelFrequency freq;
  for (const auto& profile : pool) {
    for (const auto& ref : profile.instance_of) {
      if (auto it = ref.labels.find(std::string(lang)); it != ref.labels.end()) {
        ++freq[it->second];
      }
    }
  }
  return freq;
}

namespace {

bool is_connector(std::string_view folded) {
  static constexpr std::string_view kConnectors[] = {
      "of", "in", "and", "or", "for", "from", "on", "at", "de", "del", "du",
      "des", "et", "y", "en", "w", "z", "i", "na"};
  return std::find(std::begin(kConnectors), std::end(kConnectors), folded) !=
         std::end(kConnectors);
}

// "city and urban gmina of Poland" -> "city"; "human settlement" stays.
std::string head_words(std::string_view label) {
  const auto all = text::words(label);
  std::size_t stop = all.size();
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (is_connector(text::fold_case(all[i]))) {
      stop = i;
      break;
    }
  }
  const std::size_t begin = stop > 2 ? stop - 2 : 0;
  std::string out;
  for (std::size_t i = begin; i < stop; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += all[i];
  }
  return out;
}

GeneratedExplicitation unavailable(const EntityProfile& profile, std::string_view what,
                                   std::string_view lang) {
  throw Error(ErrorKind::generation_unavailable,
              profile.kb_id + ": no " + std::string(what) + " in " + std::string(lang));
}

}  // namespace

GeneratedExplicitation generate_short(const EntityProfile& profile, std::string_view lang,
                                      const LabelFrequency* pool) {
  const std::string key(lang);
  const LabeledRef* best = nullptr;
  int best_freq = -1;
  for (const auto& ref : profile.instance_of) {
    if (ref.kb_id == "Q5") continue;  // "human" explains nothing
    const auto it = ref.labels.find(key);
    if (it == ref.labels.end() || text::trim(it->second).empty()) continue;
    int freq = 0;
    if (pool != nullptr) {
      if (auto f = pool->find(it->second); f != pool->end()) freq = f->second;
    }
    if (freq > best_freq || (freq == best_freq && it->second < best->labels.at(key))) {
      best = &ref;
      best_freq = freq;
    }
  }
  GeneratedExplicitation gen;
  gen.type = GenType::Short;
  gen.form = IntegrationForm::appositive;
  gen.placement = Placement::after;
  if (best != nullptr) {
    gen.text = text::fold_case(head_words(best->labels.at(key)));
    gen.short_source = ShortSource::hypernym;
    gen.source_facts = {"instance_of:" + best->kb_id, "placement:after"};
    return gen;
  }
  for (const auto& ref : profile.country_of) {
    const auto it = ref.labels.find(key);
    if (it == ref.labels.end() || text::trim(it->second).empty()) continue;
    gen.text = head_words(it->second);
    gen.short_source = ShortSource::country;
    gen.source_facts = {"country_of:" + ref.kb_id, "placement:after"};
    return gen;
  }
  return unavailable(profile, "instance_of or country_of label", lang);
}

GeneratedExplicitation generate_mid(const EntityProfile& profile, std::string_view lang) {
  const auto it = profile.descriptions.find(std::string(lang));
  if (it == profile.descriptions.end()) return unavailable(profile, "description", lang);
  std::string_view desc = text::trim(it->second);
  while (!desc.empty() && desc.back() == '.') desc = text::trim(desc.substr(0, desc.size() - 1));
  if (text::words(desc).size() < 3) {
    return unavailable(profile, "description of three or more words", lang);
  }
  GeneratedExplicitation gen;
  gen.type = GenType::Mid;
  gen.form = IntegrationForm::parenthetical;
  gen.text = std::string(desc);
  gen.source_facts = {"description:" + std::string(lang), "placement:after"};
  return gen;
}

GeneratedExplicitation generate_long(const EntityProfile& profile, std::string_view lang,
                                     int max_sentences) {
  const PageInfo* page = profile.page(lang);
  if (page == nullptr || text::trim(page->first_paragraph).empty()) {
    return unavailable(profile, "first paragraph", lang);
  }
  GeneratedExplicitation gen;
  gen.type = GenType::Long;
  gen.form = IntegrationForm::footnote;
  gen.text = first_sentences(page->first_paragraph, max_sentences);
  gen.source_facts = {"first_paragraph:" + std::string(lang) + ":" + page->title,
                      "placement:after"};
  return gen;
}

GeneratedExplicitation generate(GenType type, const EntityProfile& profile,
                                std::string_view lang, const LabelFrequency* pool) {
  switch (type) {
    case GenType::Short: return generate_short(profile, lang, pool);
    case GenType::Mid: return generate_mid(profile, lang);
    case GenType::Long: return generate_long(profile, lang);
  }
  throw Error(ErrorKind::invalid_argument, "unknown generation type");
}

namespace {

void check_span(std::string_view sentence, CharSpan entity) {
  if (entity.start >= entity.end || entity.end > sentence.size()) {
    throw Error(ErrorKind::invalid_argument,
                "entity span [" + std::to_string(entity.start) + "," +
                    std::to_string(entity.end) + ") invalid for sentence of " +
                    std::to_string(sentence.size()) + " bytes");
  }
}

// Insertion point after the entity; a sentence-final period that the entity
// span swallowed stays at the end.
std::size_t insertion_point(std::string_view sentence, CharSpan entity) {
  if (sentence[entity.end - 1] == '.' && entity.end - 1 > entity.start &&
      text::trim(sentence.substr(entity.end)).empty()) {
    return entity.end - 1;
  }
  return entity.end;
}

IntegrationResult insert_at(std::string_view sentence, CharSpan entity, std::size_t at,
                            const std::string& insertion) {
  IntegrationResult r;
  r.new_sentence.reserve(sentence.size() + insertion.size());
  r.new_sentence.append(sentence.substr(0, at));
  r.new_sentence.append(insertion);
  r.new_sentence.append(sentence.substr(at));
  r.inserted_span = {at, at + insertion.size()};
  if (at <= entity.start) {
    r.entity_span_after = {entity.start + insertion.size(), entity.end + insertion.size()};
  } else {
    r.entity_span_after = {entity.start, std::min(entity.end, at)};
  }
  return r;
}

bool closes_clause(char c) {
  return c == ',' || c == '.' || c == ';' || c == ':' || c == ')' || c == '!' || c == '?';
}

}  // namespace

IntegrationResult integrate(std::string_view sentence, CharSpan entity,
                            const GeneratedExplicitation& gen) {
  check_span(sentence, entity);
  if (gen.text.empty()) return insert_at(sentence, entity, entity.end, "");
  if (gen.placement == Placement::before) {
    return insert_at(sentence, entity, entity.start, gen.text + " ");
  }
  const std::size_t at = insertion_point(sentence, entity);
  switch (gen.type) {
    case GenType::Short: {
      const char* joiner = gen.short_source == ShortSource::country ? ", " : " ";
      return insert_at(sentence, entity, at, joiner + gen.text);
    }
    case GenType::Mid: {
      std::string insertion = ", " + gen.text;
      if (at < sentence.size() && !closes_clause(sentence[at])) insertion.push_back(',');
      return insert_at(sentence, entity, at, insertion);
    }
    case GenType::Long:
      return insert_at(sentence, entity, at, " (" + gen.text + ")");
  }
  throw Error(ErrorKind::invalid_argument, "unknown generation type");
}

IntegrationResult integrate_footnote_marker(std::string_view sentence, CharSpan entity,
                                            const GeneratedExplicitation& gen,
                                            int note_number) {
  check_span(sentence, entity);
  const std::string marker = "[^" + std::to_string(note_number) + "]";
  IntegrationResult r = insert_at(sentence, entity, insertion_point(sentence, entity), marker);
  r.footnote = marker + ": " + gen.text;
  return r;
}

bool is_redundant_short(std::string_view sentence, CharSpan entity,
                        const GeneratedExplicitation& gen, std::size_t window) {
  if (gen.type != GenType::Short) return false;
  const auto tokens = tokenize(sentence);
  std::size_t first = tokens.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].chars.start < entity.end && entity.start < tokens[i].chars.end) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (first == tokens.size()) return false;
  std::vector<std::string> gen_words;
  for (const auto& t : tokenize(gen.text)) {
    if (!text::is_all_punct(t.surface)) gen_words.push_back(text::fold_case(t.surface));
  }
  const std::size_t lo = first > window ? first - window : 0;
  const std::size_t hi = std::min(tokens.size(), last + window + 1);
  for (std::size_t i = lo; i < hi; ++i) {
    if (i >= first && i <= last) continue;
    const std::string folded = text::fold_case(tokens[i].surface);
    if (std::find(gen_words.begin(), gen_words.end(), folded) != gen_words.end()) return true;
  }
  return false;
}

bool answer_inclusion(const GeneratedExplicitation& gen,
                      const std::set<std::string>& aliases) {
  // Whole-word match: "Paris" is not included in "Parisian".
  const std::string haystack = " " + text::normalize_loose(gen.text) + " ";
  return std::any_of(aliases.begin(), aliases.end(), [&](const std::string& alias) {
    const std::string needle = text::normalize_loose(alias);
    return !needle.empty() && haystack.find(" " + needle + " ") != std::string::npos;
  });
}

}  // namespace expltk
