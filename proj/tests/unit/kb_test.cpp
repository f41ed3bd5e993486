#include "expltk/kb.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "expltk/error.hpp"
#include "test_support.hpp"

namespace expltk {
namespace {

using nlohmann::json;
using testing::ScriptedTransport;

TEST(Profile, ValidationAndIds) {
  EXPECT_TRUE(is_valid_kb_id("Q217148"));
  EXPECT_FALSE(is_valid_kb_id("Q0"));
  EXPECT_FALSE(is_valid_kb_id("P31"));
  EXPECT_FALSE(is_valid_kb_id("Q"));
  EXPECT_FALSE(is_valid_kb_id("Q12a"));
  EntityProfile p;
  p.kb_id = "Q1";
  p.pages["en"] = {};
  EXPECT_THROW(validate_profile(p), Error);  // 1 page, 0 sitelinks
  p.sitelink_count = 1;
  EXPECT_NO_THROW(validate_profile(p));
  p.pages["en"].incoming_links = -1;
  EXPECT_THROW(validate_profile(p), Error);
}

TEST(Snapshot, FixtureRoundTrips) {
  const KbSnapshot s = testing::fixture_snapshot();
  EXPECT_GE(s.entities.size(), 20u);
  const auto& sambre = s.entities.at("Q217148");
  EXPECT_EQ(sambre.labels.at("en"), "Sambre");
  ASSERT_NE(sambre.page("fr"), nullptr);
  EXPECT_EQ(sambre.page("de"), nullptr);
  EXPECT_EQ(snapshot_parse(snapshot_dump(s)), s);
  std::stringstream buf;
  snapshot_save(s, buf);
  EXPECT_EQ(snapshot_load(buf), s);
}

TEST(Snapshot, RejectsBadInput) {
  auto kind_of = [](const std::string& text) {
    try {
      snapshot_parse(text);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::io;
  };
  EXPECT_EQ(kind_of("{"), ErrorKind::parse);
  EXPECT_EQ(kind_of(R"({"schema_version": 99, "entities": {}})"), ErrorKind::parse);
  EXPECT_EQ(kind_of(R"({"entities": {}})"), ErrorKind::parse);
  EXPECT_EQ(kind_of(R"({"schema_version":1,"entities":{"Q1":{"kb_id":"Q2"}}})"), ErrorKind::parse);
  EXPECT_NO_THROW(snapshot_parse(R"({"schema_version":1,"entities":{}})"));
  EXPECT_THROW(snapshot_load_file("/nonexistent/kb.json"), Error);
}

TEST(Sentences, SplitsAndGuardsAbbreviations) {
  const auto s = split_sentences("St. Louis is a city. It lies on the Mississippi! Is it big? Yes");
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0], "St. Louis is a city.");
  EXPECT_EQ(s[3], "Yes");
  EXPECT_EQ(split_sentences("J. R. R. Tolkien wrote books. Done.").size(), 2u);
  EXPECT_TRUE(split_sentences("   ").empty());
  EXPECT_EQ(split_sentences("Version 2.5 shipped.").size(), 1u);
}

TEST(Sentences, FirstSentences) {
  const std::string p = "One. Two. Three. Four.";
  EXPECT_EQ(first_sentences(p, 1), "One.");
  EXPECT_EQ(first_sentences(p, 3), "One. Two. Three.");
  EXPECT_EQ(first_sentences(p, 9), p);
  EXPECT_THROW(first_sentences(p, 0), Error);
}

TEST(Offline, ServesSnapshotAndRestrictsLanguages) {
  KbGateway kb = KbGateway::offline(testing::fixture_snapshot());
  EXPECT_TRUE(kb.is_offline());
  const auto en = kb.fetch_entity_profile("Q217148", {"en"});
  EXPECT_EQ(en.pages.size(), 1u);
  EXPECT_FALSE(en.labels.contains("fr"));
  const auto all = kb.fetch_entity_profile("Q217148", std::span<const std::string>{});
  EXPECT_EQ(all.pages.size(), 2u);
  try {
    kb.fetch_entity_profile("Q424242", {"en"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_found);
  }
  EXPECT_THROW(kb.fetch_entity_profile("sambre", {"en"}), Error);
}

TEST(Offline, PageLookupsByTitle) {
  const KbSnapshot snapshot = testing::fixture_snapshot();
  KbGateway kb = KbGateway::offline(snapshot);
  const auto& sambre = snapshot.entities.at("Q217148");
  const auto& page = sambre.pages.at("fr");
  const auto stats = kb.fetch_page_stats(page.title, "fr");
  EXPECT_EQ(stats.page_length, page.page_length);
  EXPECT_EQ(stats.incoming_links, page.incoming_links);
  EXPECT_EQ(kb.fetch_first_paragraph(sambre.pages.at("en").title, "en", 1),
            first_sentences(sambre.pages.at("en").first_paragraph, 1));
  EXPECT_THROW(kb.fetch_page_stats("No Such Page", "fr"), Error);
  EXPECT_THROW(kb.fetch_page_stats("", "fr"), Error);
}

// A miniature Wikidata/Wikipedia for the live client.
HttpResponse fake_wiki(const HttpRequest& r) {
  auto query = [&](const std::string& key) {
    for (const auto& [k, v] : r.query) {
      if (k == key) return v;
    }
    return std::string();
  };
  auto claim = [](const char* id) {
    return json{{"mainsnak", {{"datavalue", {{"value", {{"id", id}}}}}}}};
  };
  if (r.url.find("Special:EntityData/Q217148.json") != std::string::npos) {
    json e = {{"labels", {{"en", {{"value", "Sambre"}}}, {"fr", {{"value", "Sambre"}}}}},
              {"descriptions", {{"en", {{"value", "river in France and Belgium"}}}}},
              {"claims", {{"P31", {claim("Q4022")}}, {"P17", {claim("Q142"), claim("Q31")}}}},
              {"sitelinks", {{"enwiki", {{"title", "Sambre"}}}, {"frwiki", {{"title", "Sambre"}}},
                             {"dewiki", {{"title", "Sambre"}}}}}};
    return {200, json{{"entities", {{"Q217148", e}}}}.dump()};
  }
  if (r.url.find("Special:EntityData/") != std::string::npos) return {404, ""};
  if (query("action") == "wbgetentities") {
    json ents = json::object();
    ents["Q4022"] = {{"labels", {{"en", {{"value", "river"}}}}}, {"claims", json::object()}};
    ents["Q142"] = {{"labels", {{"en", {{"value", "France"}}}}}, {"claims", {{"P31", {claim("Q6256")}}}}};
    ents["Q31"] = {{"labels", {{"en", {{"value", "Belgium"}}}}}, {"claims", {{"P31", {claim("Q3624078")}}}}};
    return {200, json{{"entities", ents}}.dump()};
  }
  if (r.url.find("wikipedia.org/w/api.php") != std::string::npos) {
    const bool fr = r.url.find("//fr.") != std::string::npos;
    json page = {{"title", "Sambre"}, {"length", fr ? 512 : 2048},
                 {"extract", fr ? "\nLa Sambre est une rivière.\n\nSuite." : "The Sambre is a river. It flows.\nMore."}};
    return {200, json{{"query", {{"pages", {page}}}}}.dump()};
  }
  if (r.url.find("linkcount") != std::string::npos) {
    return {200, json{{"wikilinks", {{"all", query("project") == "fr.wikipedia.org" ? 42 : 300}}}}.dump()};
  }
  return {500, ""};
}

TEST(Live, BuildsProfileFromApiResponses) {
  auto transport = std::make_shared<ScriptedTransport>(fake_wiki);
  LiveOptions options;
  options.sleep = [](std::chrono::milliseconds) {};
  KbGateway kb = KbGateway::live(transport, options);
  EXPECT_FALSE(kb.is_offline());
  const std::vector<std::string> langs{"en", "fr"};
  const auto p = kb.fetch_entity_profile("Q217148", langs);
  EXPECT_EQ(p.labels.at("en"), "Sambre");
  EXPECT_EQ(p.descriptions.at("en"), "river in France and Belgium");
  ASSERT_EQ(p.instance_of.size(), 1u);
  EXPECT_EQ(p.instance_of[0].labels.at("en"), "river");
  EXPECT_EQ(p.country_of.size(), 2u);
  EXPECT_EQ(p.direct_country_links, (std::set<std::string>{"Q142", "Q31"}));
  EXPECT_EQ(p.sitelink_count, 3);
  ASSERT_EQ(p.pages.size(), 2u);
  EXPECT_EQ(p.pages.at("fr").page_length, 512);
  EXPECT_EQ(p.pages.at("fr").incoming_links, 42);
  EXPECT_EQ(p.pages.at("fr").first_paragraph, "La Sambre est une rivière.");
  EXPECT_EQ(p.pages.at("en").incoming_links, 300);

  // Cached: no further requests, and the snapshot holds the profile.
  const auto calls = transport->requests().size();
  EXPECT_EQ(kb.fetch_entity_profile("Q217148", langs), p);
  EXPECT_EQ(transport->requests().size(), calls);
  const auto snap = kb.to_snapshot();
  EXPECT_EQ(snap.source, SnapshotSource::live);
  EXPECT_EQ(snap.entities.at("Q217148"), p);
  EXPECT_EQ(snapshot_parse(snapshot_dump(snap)), snap);

  try {
    kb.fetch_entity_profile("Q5", langs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_found);
  }
}

TEST(Live, RetriesTransientFailuresWithBackoff) {
  int failures = 2;
  auto transport = std::make_shared<ScriptedTransport>([&](const HttpRequest& r) {
    if (failures > 0) {
      --failures;
      return HttpResponse{503, ""};
    }
    return fake_wiki(r);
  });
  std::vector<std::chrono::milliseconds> sleeps;
  LiveOptions options;
  options.requests_per_second = 0;
  options.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };
  KbGateway kb = KbGateway::live(transport, options);
  EXPECT_NO_THROW(kb.fetch_entity_profile("Q217148", {"en"}));
  ASSERT_EQ(sleeps.size(), 2u);
  EXPECT_EQ(sleeps[0], std::chrono::milliseconds(500));
  EXPECT_EQ(sleeps[1], std::chrono::milliseconds(1000));
}

TEST(Live, GivesUpWithNetworkError) {
  auto transport = std::make_shared<ScriptedTransport>(
      [](const HttpRequest&) -> HttpResponse { throw Error(ErrorKind::network, "down"); });
  LiveOptions options;
  options.max_retries = 2;
  options.sleep = [](std::chrono::milliseconds) {};
  KbGateway kb = KbGateway::live(transport, options);
  try {
    kb.fetch_entity_profile("Q217148", {"en"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::network);
  }
  EXPECT_EQ(transport->requests().size(), 3u);
}

TEST(Live, ClientErrorsAreNotRetried) {
  auto transport = std::make_shared<ScriptedTransport>([](const HttpRequest&) { return HttpResponse{400, ""}; });
  LiveOptions options;
  options.sleep = [](std::chrono::milliseconds) {};
  KbGateway kb = KbGateway::live(transport, options);
  EXPECT_THROW(kb.fetch_entity_profile("Q217148", {"en"}), Error);
  EXPECT_EQ(transport->requests().size(), 1u);
}

TEST(Live, MalformedJsonIsAParseError) {
  auto transport = std::make_shared<ScriptedTransport>([](const HttpRequest&) { return HttpResponse{200, "{"}; });
  LiveOptions options;
  options.sleep = [](std::chrono::milliseconds) {};
  KbGateway kb = KbGateway::live(transport, options);
  try {
    kb.fetch_entity_profile("Q217148", {"en"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
  }
}

TEST(Live, RateLimitSleepsBetweenRequests) {
  auto transport = std::make_shared<ScriptedTransport>(fake_wiki);
  std::chrono::milliseconds slept{0};
  LiveOptions options;
  options.requests_per_second = 2;
  options.sleep = [&](std::chrono::milliseconds d) { slept += d; };
  KbGateway kb = KbGateway::live(transport, options);
  kb.fetch_entity_profile("Q217148", {"en"});
  // 4 requests at 2/s: the later ones wait for their slots.
  EXPECT_EQ(transport->requests().size(), 4u);
  EXPECT_GE(slept.count(), 1000);
}

TEST(Live, NeedsATransport) {
  EXPECT_THROW(KbGateway::live(nullptr), Error);
}

TEST(Counting, CountsAndFailsWithoutInner) {
  CountingTransport counter;
  EXPECT_THROW(counter.send({}), Error);
  EXPECT_EQ(counter.calls(), 1u);
  auto inner = std::make_shared<ScriptedTransport>([](const HttpRequest&) { return HttpResponse{200, "ok"}; });
  CountingTransport wrapped(inner);
  EXPECT_EQ(wrapped.send({}).body, "ok");
  EXPECT_EQ(wrapped.calls(), 1u);
  EXPECT_EQ(url_encode("a b&c/é"), "a%20b%26c%2F%C3%A9");
}

}  // namespace
}  // namespace expltk
