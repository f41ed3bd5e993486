#include "kb_live.hpp"

#include <algorithm>
#include <set>
#include <thread>

#include "expltk/error.hpp"
#include "expltk/text.hpp"

namespace expltk::detail {

namespace {

constexpr std::size_t kBatchSize = 50;
// "country" and "sovereign state"
const std::set<std::string> kCountryClasses = {"Q6256", "Q3624078"};

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out.push_back(sep);
    out += item;
  }
  return out;
}

std::vector<std::string> item_values(const nlohmann::json& claims, const std::string& property) {
  std::vector<std::string> out;
  if (!claims.is_object() || !claims.contains(property)) return out;
  for (const auto& statement : claims.at(property)) {
    const auto& snak = statement.value("mainsnak", nlohmann::json::object());
    if (!snak.contains("datavalue")) continue;
    const auto& value = snak.at("datavalue").value("value", nlohmann::json());
    if (value.is_object() && value.contains("id")) {
      out.push_back(value.at("id").get<std::string>());
    }
  }
  return out;
}

std::vector<std::string> all_item_values(const nlohmann::json& claims) {
  std::vector<std::string> out;
  if (!claims.is_object()) return out;
  for (const auto& [property, statements] : claims.items()) {
    for (auto& id : item_values(claims, property)) {
      if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(std::move(id));
    }
  }
  return out;
}

LangMap lang_values(const nlohmann::json& node, std::span<const std::string> langs) {
  LangMap out;
  if (!node.is_object()) return out;
  for (const auto& lang : langs) {
    if (node.contains(lang)) out[lang] = node.at(lang).at("value").get<std::string>();
  }
  return out;
}

std::string first_paragraph_of(const std::string& extract) {
  std::size_t start = 0;
  while (start < extract.size()) {
    auto end = extract.find('\n', start);
    if (end == std::string::npos) end = extract.size();
    const auto para = text::trim(std::string_view(extract).substr(start, end - start));
    if (!para.empty()) return std::string(para);
    start = end + 1;
  }
  return {};
}

}  // namespace

LiveClient::LiveClient(std::shared_ptr<Transport> transport, LiveOptions options)
    : transport_(std::move(transport)), options_(std::move(options)) {
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
}

void LiveClient::pace() {
  if (options_.requests_per_second <= 0) return;
  const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / options_.requests_per_second));
  std::chrono::steady_clock::duration wait{};
  {
    std::lock_guard lock(pace_mutex_);
    const auto now = std::chrono::steady_clock::now();
    const auto slot = std::max(now, next_slot_);
    wait = slot - now;
    next_slot_ = slot + interval;
  }
  if (wait > std::chrono::steady_clock::duration::zero()) {
    options_.sleep(std::chrono::duration_cast<std::chrono::milliseconds>(wait));
  }
}

nlohmann::json LiveClient::get_json(const HttpRequest& request, const std::string& what) {
  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) options_.sleep(options_.base_backoff * (1 << (attempt - 1)));
    pace();
    HttpResponse response;
    {
      std::unique_lock lock(slots_mutex_);
      slots_cv_.wait(lock, [&] { return in_flight_ < options_.max_in_flight; });
      ++in_flight_;
    }
    try {
      response = transport_->send(request);
    } catch (const Error& e) {
      response.status = 0;
      last_error = e.what();
    }
    {
      std::lock_guard lock(slots_mutex_);
      --in_flight_;
    }
    slots_cv_.notify_one();

    if (response.status == 404) throw Error(ErrorKind::not_found, what + ": not found");
    if (response.status >= 200 && response.status < 300) {
      try {
        return nlohmann::json::parse(response.body);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::parse, what + ": bad JSON at byte " + std::to_string(e.byte));
      }
    }
    if (response.status != 0) last_error = "HTTP " + std::to_string(response.status);
    const bool retryable = response.status == 0 || response.status == 429 ||
                           response.status >= 500;
    if (!retryable) throw Error(ErrorKind::network, what + ": " + last_error);
  }
  throw Error(ErrorKind::network, what + ": giving up after " +
                                      std::to_string(options_.max_retries + 1) +
                                      " attempts (" + last_error + ")");
}

std::string LiveClient::wikipedia_api(const std::string& lang) const {
  std::string base = options_.wikipedia_base;
  if (const auto pos = base.find("{lang}"); pos != std::string::npos) {
    base.replace(pos, 6, lang);
  }
  return base + "/w/api.php";
}

EntityProfile LiveClient::fetch_profile(const std::string& kb_id,
                                        std::span<const std::string> langs) {
  HttpRequest request;
  request.url = options_.wikidata_base + "/wiki/Special:EntityData/" + kb_id + ".json";
  const auto doc = get_json(request, kb_id);
  const auto& entities = doc.value("entities", nlohmann::json::object());
  if (entities.empty()) throw Error(ErrorKind::not_found, kb_id + ": not found");
  const auto& entity = entities.contains(kb_id) ? entities.at(kb_id) : entities.begin().value();

  EntityProfile profile;
  profile.kb_id = kb_id;
  profile.labels = lang_values(entity.value("labels", nlohmann::json()), langs);
  profile.descriptions = lang_values(entity.value("descriptions", nlohmann::json()), langs);
  const auto& claims = entity.value("claims", nlohmann::json::object());
  const auto instance_ids = item_values(claims, "P31");
  const auto country_ids = item_values(claims, "P17");
  const auto linked = all_item_values(claims);

  // Labels and classes of everything the entity points at.
  std::map<std::string, LangMap> ref_labels;
  std::set<std::string> countries;
  for (std::size_t i = 0; i < linked.size(); i += kBatchSize) {
    const std::vector<std::string> batch(
        linked.begin() + i, linked.begin() + std::min(linked.size(), i + kBatchSize));
    HttpRequest refs;
    refs.url = options_.wikidata_base + "/w/api.php";
    refs.query = {{"action", "wbgetentities"},
                  {"ids", join(batch, '|')},
                  {"props", "labels|claims"},
                  {"languages", join({langs.begin(), langs.end()}, '|')},
                  {"format", "json"}};
    const auto refs_doc = get_json(refs, kb_id + " references");
    const nlohmann::json ref_entities = refs_doc.value("entities", nlohmann::json::object());
    for (const auto& [id, ref] : ref_entities.items()) {
      ref_labels[id] = lang_values(ref.value("labels", nlohmann::json()), langs);
      for (const auto& cls : item_values(ref.value("claims", nlohmann::json()), "P31")) {
        if (kCountryClasses.contains(cls)) countries.insert(id);
      }
    }
  }
  auto labeled = [&](const std::vector<std::string>& ids) {
    std::vector<LabeledRef> out;
    for (const auto& id : ids) {
      LangMap labels = ref_labels[id];
      if (labels.empty()) labels["mul"] = id;
      out.push_back({id, std::move(labels)});
    }
    return out;
  };
  profile.instance_of = labeled(instance_ids);
  profile.country_of = labeled(country_ids);
  for (const auto& id : linked) {
    if (countries.contains(id)) profile.direct_country_links.insert(id);
  }

  const auto& sitelinks = entity.value("sitelinks", nlohmann::json::object());
  profile.sitelink_count = static_cast<std::int64_t>(sitelinks.size());
  for (const auto& lang : langs) {
    const std::string site = lang + "wiki";
    if (!sitelinks.contains(site)) continue;
    const auto title = sitelinks.at(site).at("title").get<std::string>();
    if (auto page = fetch_page(title, lang)) profile.pages.emplace(lang, std::move(*page));
  }
  profile.sitelink_count =
      std::max<std::int64_t>(profile.sitelink_count, static_cast<std::int64_t>(profile.pages.size()));
  return profile;
}

std::optional<PageInfo> LiveClient::fetch_page(const std::string& title,
                                               const std::string& lang) {
  HttpRequest request;
  request.url = wikipedia_api(lang);
  request.query = {{"action", "query"},  {"prop", "info|extracts"},
                   {"explaintext", "1"}, {"redirects", "1"},
                   {"format", "json"},   {"formatversion", "2"},
                   {"titles", title}};
  const auto doc = get_json(request, lang + ":" + title);
  const auto& pages = doc.value("query", nlohmann::json::object())
                          .value("pages", nlohmann::json::array());
  if (pages.empty() || pages.at(0).value("missing", false)) return std::nullopt;
  const auto& page = pages.at(0);

  PageInfo info;
  info.title = page.value("title", title);
  info.page_length = page.value("length", std::int64_t{0});
  const std::string extract = page.value("extract", std::string());
  info.first_paragraph = first_paragraph_of(extract);
  if (!extract.empty()) info.full_text = extract;

  HttpRequest links;
  links.url = options_.linkcount_url;
  links.query = {{"page", info.title}, {"project", lang + ".wikipedia.org"}};
  const auto counts = get_json(links, lang + ":" + title + " link count");
  const auto& wikilinks = counts.value("wikilinks", nlohmann::json());
  if (wikilinks.is_object()) {
    info.incoming_links = wikilinks.value("all", std::int64_t{0});
  } else if (wikilinks.is_number()) {
    info.incoming_links = wikilinks.get<std::int64_t>();
  }
  return info;
}

}  // namespace expltk::detail
