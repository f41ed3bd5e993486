#pragma once

// KB-grounded explanations at three lengths and their integration into a
// sentence. Short: a hypernym or country word. Mid: the entity description.
// Long: the lead sentences of the entity's page, rendered as a footnote.

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expltk/bitext.hpp"
#include "expltk/kb.hpp"

namespace expltk {

enum class GenType { Short, Mid, Long };
enum class IntegrationForm { appositive, parenthetical, footnote };
enum class Placement { before, after };
enum class ShortSource { none, hypernym, country };

std::string_view to_string(GenType type);
GenType gen_type_from_string(std::string_view s);
std::string_view to_string(IntegrationForm form);
IntegrationForm integration_form_from_string(std::string_view s);

struct GeneratedExplicitation {
  GenType type = GenType::Short;
  std::string text;
  IntegrationForm form = IntegrationForm::appositive;
  // Provenance, e.g. "instance_of:Q4022", "description:en", "placement:after".
  std::vector<std::string> source_facts;
  Placement placement = Placement::after;
  ShortSource short_source = ShortSource::none;

  bool operator==(const GeneratedExplicitation&) const = default;
};

// Throws Error(invalid_argument) on a violated length invariant.
void validate_generated(const GeneratedExplicitation& gen, int max_sentences = 3);

// Label -> number of pool entities carrying it as an instance_of label.
using LabelFrequency = std::map<std::string, int>;

LabelFrequency hypernym_frequencies(std::span<const EntityProfile> pool,
                                    std::string_view lang);

// Throw Error(generation_unavailable) when the needed KB field is missing.
GeneratedExplicitation generate_short(const EntityProfile& profile,
                                      std::string_view lang,
                                      const LabelFrequency* pool = nullptr);
GeneratedExplicitation generate_mid(const EntityProfile& profile,
                                    std::string_view lang);
GeneratedExplicitation generate_long(const EntityProfile& profile,
                                     std::string_view lang,
                                     int max_sentences = 3);
GeneratedExplicitation generate(GenType type, const EntityProfile& profile,
                                std::string_view lang,
                                const LabelFrequency* pool = nullptr);

struct IntegrationResult {
  std::string new_sentence;
  CharSpan inserted_span;
  CharSpan entity_span_after;
  std::string footnote;  // non-empty only in marker mode

  bool operator==(const IntegrationResult&) const = default;
};

// Inserts the explanation next to the entity. Erasing `inserted_span` from
// `new_sentence` restores `sentence` exactly.
IntegrationResult integrate(std::string_view sentence, CharSpan entity,
                            const GeneratedExplicitation& gen);

// Footnote rendered as a `[^n]` marker after the entity; the note text is
// returned in `footnote` as "[^n]: text".
IntegrationResult integrate_footnote_marker(std::string_view sentence,
                                            CharSpan entity,
                                            const GeneratedExplicitation& gen,
                                            int note_number);

// True when a word of a Short explanation already occurs within `window`
// tokens of the entity ("the river Sambre" + "river").
bool is_redundant_short(std::string_view sentence, CharSpan entity,
                        const GeneratedExplicitation& gen,
                        std::size_t window = 3);

bool answer_inclusion(const GeneratedExplicitation& gen,
                      const std::set<std::string>& aliases);

}  // namespace expltk
