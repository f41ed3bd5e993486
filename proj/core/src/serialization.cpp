#include "expltk/serialization.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "expltk/error.hpp"

namespace expltk {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::string jsonl_line(const json& j) { return j.dump() + "\n"; }

namespace {

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::schema, std::string(what) + ": " + e.what());
  }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

json lang_map(const LangMap& m) { return m.empty() ? json::object() : json(m); }

json refs_to_json(const std::vector<LabeledRef>& refs) {
  json out = json::array();
  for (const auto& r : refs) out.push_back({{"kb_id", r.kb_id}, {"labels", lang_map(r.labels)}});
  return out;
}

std::vector<LabeledRef> refs_from_json(const json& j) {
  std::vector<LabeledRef> out;
  for (const auto& r : j) {
    out.push_back({r.at("kb_id").get<std::string>(), r.value("labels", LangMap{})});
  }
  return out;
}

json spans_to_json(const std::vector<CharSpan>& spans) {
  json out = json::array();
  for (const auto& s : spans) out.push_back(to_json(s));
  return out;
}

std::vector<CharSpan> spans_from_json(const json& j) {
  std::vector<CharSpan> out;
  for (const auto& s : j) out.push_back(char_span_from_json(s));
  return out;
}

}  // namespace

json to_json(const CharSpan& s) { return json::array({s.start, s.end}); }

CharSpan char_span_from_json(const json& j) {
  return guarded("span", [&] {
    CharSpan s;
    if (j.is_array()) {
      s = {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()};
    } else {
      s = {j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
    }
    if (s.start > s.end) throw Error(ErrorKind::schema, "span start after end");
    return s;
  });
}

json to_json(const EntityMention& m) {
  json j = {{"side", to_string(m.side)},
            {"start_token", m.span.start},
            {"end_token", m.span.end},
            {"surface", m.surface},
            {"ner_label", m.ner_label}};
  j["kb_id"] = m.kb_id ? json(*m.kb_id) : json(nullptr);
  return j;
}

EntityMention mention_from_json(const json& j) {
  return guarded("entity", [&] {
    EntityMention m;
    m.side = side_from_string(j.at("side").get<std::string>());
    m.span = {j.at("start_token").get<std::size_t>(), j.at("end_token").get<std::size_t>()};
    m.surface = j.at("surface").get<std::string>();
    m.kb_id = optional_field<std::string>(j, "kb_id");
    m.ner_label = j.value("ner_label", std::string());
    return m;
  });
}

json to_json(const DecisionOutcome& d) {
  json checks = json::array();
  for (const auto& c : d.per_check) {
    checks.push_back({{"property", to_string(c.property)},
                      {"value_src", number_or_null(c.value_src)},
                      {"value_tgt", number_or_null(c.value_tgt)},
                      {"shift", number_or_null(c.shift)},
                      {"passed", c.passed}});
  }
  return {{"needs_explicitation", d.needs_explicitation},
          {"well_known", d.well_known},
          {"per_check", std::move(checks)}};
}

DecisionOutcome decision_from_json(const json& j) {
  return guarded("decision", [&] {
    DecisionOutcome d;
    d.needs_explicitation = j.at("needs_explicitation").get<bool>();
    d.well_known = j.value("well_known", false);
    for (const auto& c : j.value("per_check", json::array())) {
      CheckResult r;
      r.property = property_from_string(c.at("property").get<std::string>());
      r.value_src = number_from(c.at("value_src"));
      r.value_tgt = number_from(c.at("value_tgt"));
      r.shift = number_from(c.at("shift"));
      r.passed = c.at("passed").get<bool>();
      d.per_check.push_back(r);
    }
    return d;
  });
}

json to_json(const ExplicitationCandidate& c) {
  json j = {{"pair_id", c.pair_id},
            {"entity", to_json(c.entity)},
            {"segment", {{"start_token", c.segment.span.start},
                         {"end_token", c.segment.span.end}}},
            {"distance", c.distance},
            {"segment_text", c.segment_text},
            {"flags", c.flags}};
  j["evidence"] = c.evidence ? json(*c.evidence) : json(nullptr);
  if (c.decision) j["decision"] = to_json(*c.decision);
  return j;
}

ExplicitationCandidate candidate_from_json(const json& j) {
  return guarded("candidate", [&] {
    ExplicitationCandidate c;
    c.pair_id = j.at("pair_id").get<std::string>();
    c.entity = mention_from_json(j.at("entity"));
    const auto& seg = j.at("segment");
    c.segment.span = {seg.at("start_token").get<std::size_t>(),
                      seg.at("end_token").get<std::size_t>()};
    c.distance = j.at("distance").get<std::size_t>();
    c.segment_text = j.value("segment_text", std::string());
    c.evidence = optional_field<std::string>(j, "evidence");
    c.flags = j.value("flags", std::vector<std::string>{});
    if (j.contains("decision") && !j.at("decision").is_null()) {
      c.decision = decision_from_json(j.at("decision"));
    }
    return c;
  });
}

json to_json(const DecisionConfig& c) {
  json checks = json::array();
  for (const auto& k : c.checks) {
    checks.push_back({{"property", to_string(k.property)},
                      {"tau", k.tau},
                      {"comparator", to_string(k.comparator)}});
  }
  json j = {{"src_lang", c.src_lang},
            {"tgt_lang", c.tgt_lang},
            {"source_country", c.source_country},
            {"checks", std::move(checks)},
            {"well_known_cutoff", c.well_known_cutoff},
            {"missing_page", c.missing_page == MissingPagePolicy::fixed ? "fixed"
                                                                        : "pool_minimum"}};
  j["target_country"] = c.target_country ? json(*c.target_country) : json(nullptr);
  if (c.missing_page == MissingPagePolicy::fixed) j["missing_page_value"] = c.missing_page_value;
  return j;
}

DecisionConfig decision_config_from_json(const json& j) {
  return guarded("decision config", [&] {
    const std::string src = j.at("src_lang").get<std::string>();
    const std::string tgt = j.at("tgt_lang").get<std::string>();
    DecisionConfig c = default_decision_config(src, tgt);
    if (j.contains("source_country")) c.source_country = j.at("source_country").get<std::string>();
    if (j.contains("target_country")) {
      c.target_country = optional_field<std::string>(j, "target_country");
    }
    if (j.contains("checks")) {
      c.checks.clear();
      for (const auto& k : j.at("checks")) {
        PropertyCheck check;
        check.property = property_from_string(k.at("property").get<std::string>());
        check.tau = k.at("tau").get<double>();
        check.comparator = comparator_from_string(k.value("comparator", std::string("strict_gt")));
        c.checks.push_back(check);
      }
    }
    c.well_known_cutoff = j.value("well_known_cutoff", c.well_known_cutoff);
    const std::string policy = j.value("missing_page", std::string("pool_minimum"));
    if (policy == "fixed") {
      c.missing_page = MissingPagePolicy::fixed;
      c.missing_page_value = j.value("missing_page_value", 0.0);
    } else if (policy != "pool_minimum") {
      throw Error(ErrorKind::schema, "unknown missing_page policy '" + policy + "'");
    }
    c.validate();
    return c;
  });
}

json to_json(const EntityProfile& p) {
  json pages = json::object();
  for (const auto& [lang, page] : p.pages) {
    json pj = {{"title", page.title},
               {"page_length", page.page_length},
               {"incoming_links", page.incoming_links},
               {"first_paragraph", page.first_paragraph}};
    if (page.full_text) pj["full_text"] = *page.full_text;
    pages[lang] = std::move(pj);
  }
  return {{"kb_id", p.kb_id},
          {"labels", lang_map(p.labels)},
          {"descriptions", lang_map(p.descriptions)},
          {"instance_of", refs_to_json(p.instance_of)},
          {"country_of", refs_to_json(p.country_of)},
          {"direct_country_links", p.direct_country_links},
          {"sitelink_count", p.sitelink_count},
          {"pages", std::move(pages)}};
}

EntityProfile profile_from_json(const json& j) {
  return guarded("profile", [&] {
    EntityProfile p;
    p.kb_id = j.at("kb_id").get<std::string>();
    p.labels = j.value("labels", LangMap{});
    p.descriptions = j.value("descriptions", LangMap{});
    p.instance_of = refs_from_json(j.value("instance_of", json::array()));
    p.country_of = refs_from_json(j.value("country_of", json::array()));
    p.direct_country_links = j.value("direct_country_links", std::set<std::string>{});
    p.sitelink_count = j.value("sitelink_count", std::int64_t{0});
    const json pages = j.value("pages", json::object());
    for (const auto& [lang, pj] : pages.items()) {
      PageInfo page;
      page.title = pj.at("title").get<std::string>();
      page.page_length = pj.value("page_length", std::int64_t{0});
      page.incoming_links = pj.value("incoming_links", std::int64_t{0});
      page.first_paragraph = pj.value("first_paragraph", std::string());
      page.full_text = optional_field<std::string>(pj, "full_text");
      p.pages.emplace(lang, std::move(page));
    }
    return p;
  });
}

json to_json(const GeneratedExplicitation& g) {
  json j = {{"type", to_string(g.type)},
            {"text", g.text},
            {"form", to_string(g.form)},
            {"source_facts", g.source_facts},
            {"placement", g.placement == Placement::before ? "before" : "after"}};
  if (g.short_source != ShortSource::none) {
    j["short_source"] = g.short_source == ShortSource::hypernym ? "hypernym" : "country";
  }
  return j;
}

GeneratedExplicitation generated_from_json(const json& j) {
  return guarded("generated", [&] {
    GeneratedExplicitation g;
    g.type = gen_type_from_string(j.at("type").get<std::string>());
    g.text = j.at("text").get<std::string>();
    g.form = integration_form_from_string(j.at("form").get<std::string>());
    g.source_facts = j.value("source_facts", std::vector<std::string>{});
    g.placement = j.value("placement", std::string("after")) == "before" ? Placement::before
                                                                          : Placement::after;
    const std::string src = j.value("short_source", std::string());
    g.short_source = src == "hypernym"  ? ShortSource::hypernym
                     : src == "country" ? ShortSource::country
                                        : ShortSource::none;
    return g;
  });
}

json to_json(const AnnotationTask& t) {
  json j = {{"task_id", t.task_id},
            {"pair_id", t.pair_id},
            {"src_raw", t.src_raw},
            {"tgt_raw", t.tgt_raw},
            {"unaligned_spans", spans_to_json(t.unaligned_spans)},
            {"src_entity_spans", spans_to_json(t.src_entity_spans)},
            {"tgt_entity_spans", spans_to_json(t.tgt_entity_spans)},
            {"candidate_index", t.candidate_index}};
  j["gloss"] = t.gloss ? json(*t.gloss) : json(nullptr);
  j["country"] = t.country ? json(*t.country) : json(nullptr);
  return j;
}

AnnotationTask task_from_json(const json& j) {
  return guarded("task", [&] {
    AnnotationTask t;
    t.task_id = j.at("task_id").get<std::string>();
    t.pair_id = j.at("pair_id").get<std::string>();
    t.src_raw = j.at("src_raw").get<std::string>();
    t.tgt_raw = j.at("tgt_raw").get<std::string>();
    t.unaligned_spans = spans_from_json(j.value("unaligned_spans", json::array()));
    t.src_entity_spans = spans_from_json(j.value("src_entity_spans", json::array()));
    t.tgt_entity_spans = spans_from_json(j.value("tgt_entity_spans", json::array()));
    t.gloss = optional_field<std::string>(j, "gloss");
    t.country = optional_field<std::string>(j, "country");
    t.candidate_index = j.value("candidate_index", std::size_t{0});
    return t;
  });
}

json to_json(const AnnotationRecord& r) {
  json j = {{"task_id", r.task_id},
            {"annotator_id", r.annotator_id},
            {"category", to_string(r.category)}};
  j["is_explicitation"] = r.is_explicitation ? json(*r.is_explicitation) : json(nullptr);
  j["src_span"] = r.src_span ? to_json(*r.src_span) : json(nullptr);
  j["tgt_span"] = r.tgt_span ? to_json(*r.tgt_span) : json(nullptr);
  if (r.note) j["note"] = *r.note;
  return j;
}

AnnotationRecord record_from_json(const json& j) {
  return guarded("label", [&] {
    AnnotationRecord r;
    r.task_id = j.at("task_id").get<std::string>();
    r.annotator_id = j.at("annotator_id").get<std::string>();
    r.category = label_category_from_string(j.at("category").get<std::string>());
    r.is_explicitation = optional_field<bool>(j, "is_explicitation");
    if (j.contains("src_span") && !j.at("src_span").is_null()) {
      r.src_span = char_span_from_json(j.at("src_span"));
    }
    if (j.contains("tgt_span") && !j.at("tgt_span").is_null()) {
      r.tgt_span = char_span_from_json(j.at("tgt_span"));
    }
    r.note = optional_field<std::string>(j, "note");
    return r;
  });
}

json to_json(const IntrinsicRating& r) {
  json j = {{"item_id", r.item_id},
            {"aspect", to_string(r.aspect)},
            {"rating", to_string(r.rating)}};
  j["gen_type"] = r.gen_type ? json(to_string(*r.gen_type)) : json(nullptr);
  return j;
}

IntrinsicRating rating_from_json(const json& j) {
  return guarded("rating", [&] {
    IntrinsicRating r;
    r.item_id = j.at("item_id").get<std::string>();
    r.aspect = rating_aspect_from_string(j.at("aspect").get<std::string>());
    if (auto t = optional_field<std::string>(j, "gen_type")) r.gen_type = gen_type_from_string(*t);
    r.rating = rating_from_string(j.at("rating").get<std::string>());
    return r;
  });
}

json to_json(const Question& q) {
  json entities = json::array();
  for (const auto& e : q.entities) entities.push_back({{"span", to_json(e.span)}, {"kb_id", e.kb_id}});
  json j = {{"question_id", q.question_id},
            {"lang", q.lang},
            {"text", q.text},
            {"entities", std::move(entities)},
            {"answer_aliases", q.answer_aliases}};
  if (!q.insertions.empty()) j["insertions"] = spans_to_json(q.insertions);
  return j;
}

Question question_from_json(const json& j) {
  return guarded("question", [&] {
    Question q;
    q.question_id = j.at("question_id").get<std::string>();
    q.lang = j.at("lang").get<std::string>();
    q.text = j.at("text").get<std::string>();
    for (const auto& e : j.value("entities", json::array())) {
      q.entities.push_back({char_span_from_json(e.at("span")), e.at("kb_id").get<std::string>()});
    }
    q.answer_aliases = j.at("answer_aliases").get<std::vector<std::string>>();
    q.insertions = spans_from_json(j.value("insertions", json::array()));
    return q;
  });
}

}  // namespace expltk
