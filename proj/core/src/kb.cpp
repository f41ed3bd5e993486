#include "expltk/kb.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>

#include "expltk/error.hpp"
#include "expltk/serialization.hpp"
#include "expltk/text.hpp"
#include "kb_live.hpp"

namespace expltk {

const PageInfo* EntityProfile::page(std::string_view lang) const {
  const auto it = pages.find(std::string(lang));
  return it == pages.end() ? nullptr : &it->second;
}

bool is_valid_kb_id(std::string_view kb_id) {
  if (kb_id.size() < 2 || kb_id[0] != 'Q' || kb_id[1] == '0') return false;
  return std::all_of(kb_id.begin() + 1, kb_id.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

void validate_profile(const EntityProfile& profile) {
  if (!is_valid_kb_id(profile.kb_id)) {
    throw Error(ErrorKind::invalid_argument, "invalid kb id '" + profile.kb_id + "'");
  }
  if (profile.sitelink_count < static_cast<std::int64_t>(profile.pages.size())) {
    throw Error(ErrorKind::invalid_argument,
                profile.kb_id + ": sitelink_count below number of pages");
  }
  for (const auto& [lang, page] : profile.pages) {
    if (page.page_length < 0 || page.incoming_links < 0) {
      throw Error(ErrorKind::invalid_argument,
                  profile.kb_id + ": negative page statistics for " + lang);
    }
  }
}

namespace {

void validate_snapshot(const KbSnapshot& snapshot) {
  for (const auto& [id, profile] : snapshot.entities) {
    if (id != profile.kb_id) {
      throw Error(ErrorKind::parse, "snapshot key " + id + " holds profile " + profile.kb_id);
    }
    validate_profile(profile);
    for (const auto* refs : {&profile.instance_of, &profile.country_of}) {
      for (const auto& ref : *refs) {
        if (ref.labels.empty()) {
          throw Error(ErrorKind::parse, id + ": referenced " + ref.kb_id + " has no label");
        }
      }
    }
  }
}

}  // namespace

std::string snapshot_dump(const KbSnapshot& snapshot) {
  json entities = json::object();
  for (const auto& [id, profile] : snapshot.entities) entities[id] = to_json(profile);
  json j = {
      {"schema_version", KbSnapshot::kSchemaVersion},
      {"fetched_at", snapshot.fetched_at},
      {"source", snapshot.source == SnapshotSource::live ? "live" : "file"},
      {"entities", std::move(entities)},
  };
  return j.dump(2) + "\n";
}

void snapshot_save(const KbSnapshot& snapshot, std::ostream& out) {
  out << snapshot_dump(snapshot);
  if (!out) throw Error(ErrorKind::io, "failed to write snapshot");
}

KbSnapshot snapshot_parse(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, "snapshot parse error at byte " +
                                      std::to_string(e.byte) + ": " + e.what());
  }
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != KbSnapshot::kSchemaVersion) {
      throw Error(ErrorKind::parse,
                  "unsupported snapshot schema version " + std::to_string(version));
    }
    KbSnapshot snapshot;
    snapshot.fetched_at = j.value("fetched_at", std::string());
    snapshot.source = j.value("source", std::string("file")) == "live"
                          ? SnapshotSource::live
                          : SnapshotSource::file;
    for (const auto& [id, value] : j.at("entities").items()) {
      snapshot.entities.emplace(id, profile_from_json(value));
    }
    validate_snapshot(snapshot);
    return snapshot;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("snapshot schema error: ") + e.what());
  }
}

KbSnapshot snapshot_load(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return snapshot_parse(buffer.str());
}

KbSnapshot snapshot_load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open snapshot " + path);
  return snapshot_load(in);
}

namespace {

bool is_abbreviation(std::string_view word) {
  static constexpr std::string_view kGuard[] = {
      "St", "Ste", "Dr", "Mr", "Mrs", "Ms", "Jr", "Sr", "Prof", "Gen", "Col",
      "Lt", "Mt", "No", "vs", "etc", "e.g", "i.e", "ca", "approx", "Inc",
      "Ltd", "Co", "U.S", "U.K", "Fr", "Bros"};
  if (word.size() == 1 && word[0] >= 'A' && word[0] <= 'Z') return true;  // initials
  return std::find(std::begin(kGuard), std::end(kGuard), word) != std::end(kGuard);
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view paragraph) {
  std::vector<std::string> sentences;
  const std::string_view p = text::trim(paragraph);
  std::size_t start = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const char c = p[i];
    if (c != '.' && c != '?' && c != '!') continue;
    const bool at_end = i + 1 == p.size();
    if (!at_end && p[i + 1] != ' ') continue;
    if (c == '.') {
      std::size_t w = i;
      while (w > start && p[w - 1] != ' ' && p[w - 1] != '(') --w;
      if (is_abbreviation(p.substr(w, i - w)) && !at_end) continue;
    }
    const auto sentence = text::trim(p.substr(start, i + 1 - start));
    if (!sentence.empty()) sentences.emplace_back(sentence);
    start = i + 1;
  }
  const auto rest = text::trim(p.substr(std::min(start, p.size())));
  if (!rest.empty()) sentences.emplace_back(rest);
  return sentences;
}

std::string first_sentences(std::string_view paragraph, int max_sentences) {
  if (max_sentences < 1) {
    throw Error(ErrorKind::invalid_argument, "max_sentences must be >= 1");
  }
  const auto sentences = split_sentences(paragraph);
  std::string out;
  const auto n = std::min<std::size_t>(sentences.size(), max_sentences);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out.push_back(' ');
    out += sentences[i];
  }
  return out;
}

// --- gateway -----------------------------------------------------------------

struct KbGateway::Impl {
  bool offline = true;
  KbSnapshot store;
  std::unique_ptr<detail::LiveClient> live;

  mutable std::mutex mutex;
  std::map<std::string, EntityProfile> profile_cache;  // "id|lang,lang"
  std::map<std::pair<std::string, std::string>, std::optional<PageInfo>> page_cache;

  std::optional<PageInfo> find_offline_page(const std::string& title,
                                            const std::string& lang) const {
    for (const auto& [id, profile] : store.entities) {
      const PageInfo* page = profile.page(lang);
      if (page != nullptr && page->title == title) return *page;
    }
    return std::nullopt;
  }

  std::optional<PageInfo> page(const std::string& title, const std::string& lang) {
    const auto key = std::make_pair(lang, title);
    {
      std::lock_guard lock(mutex);
      if (auto it = page_cache.find(key); it != page_cache.end()) return it->second;
      if (offline) {
        auto found = find_offline_page(title, lang);
        page_cache.emplace(key, found);
        return found;
      }
    }
    auto fetched = live->fetch_page(title, lang);
    std::lock_guard lock(mutex);
    return page_cache.emplace(key, std::move(fetched)).first->second;
  }
};

namespace {

std::string cache_key(const std::string& kb_id, std::span<const std::string> langs) {
  std::vector<std::string> sorted(langs.begin(), langs.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::string key = kb_id + "|";
  for (const auto& l : sorted) key += l + ",";
  return key;
}

EntityProfile restrict_langs(EntityProfile p, std::span<const std::string> langs) {
  if (langs.empty()) return p;
  auto keep = [&](const std::string& lang) {
    return std::find(langs.begin(), langs.end(), lang) != langs.end();
  };
  auto filter = [&](auto& map) { std::erase_if(map, [&](const auto& kv) { return !keep(kv.first); }); };
  filter(p.labels);
  filter(p.descriptions);
  filter(p.pages);
  for (auto* refs : {&p.instance_of, &p.country_of}) {
    for (auto& ref : *refs) filter(ref.labels);
  }
  return p;
}

void merge_into(EntityProfile& into, const EntityProfile& from) {
  into.labels.insert(from.labels.begin(), from.labels.end());
  into.descriptions.insert(from.descriptions.begin(), from.descriptions.end());
  into.pages.insert(from.pages.begin(), from.pages.end());
}

}  // namespace

KbGateway::KbGateway(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
KbGateway::KbGateway(KbGateway&&) noexcept = default;
KbGateway& KbGateway::operator=(KbGateway&&) noexcept = default;
KbGateway::~KbGateway() = default;

KbGateway KbGateway::offline(KbSnapshot snapshot) {
  auto impl = std::make_unique<Impl>();
  impl->offline = true;
  impl->store = std::move(snapshot);
  return KbGateway(std::move(impl));
}

KbGateway KbGateway::live(std::shared_ptr<Transport> transport, LiveOptions options) {
  if (!transport) throw Error(ErrorKind::invalid_argument, "live gateway needs a transport");
  auto impl = std::make_unique<Impl>();
  impl->offline = false;
  impl->store.source = SnapshotSource::live;
  impl->live = std::make_unique<detail::LiveClient>(std::move(transport), std::move(options));
  return KbGateway(std::move(impl));
}

bool KbGateway::is_offline() const { return impl_->offline; }

EntityProfile KbGateway::fetch_entity_profile(const std::string& kb_id,
                                              std::initializer_list<std::string> langs) {
  return fetch_entity_profile(kb_id, std::span<const std::string>(langs.begin(), langs.size()));
}

EntityProfile KbGateway::fetch_entity_profile(const std::string& kb_id,
                                              std::span<const std::string> langs) {
  if (!is_valid_kb_id(kb_id)) {
    throw Error(ErrorKind::invalid_argument, "invalid kb id '" + kb_id + "'");
  }
  const std::string key = cache_key(kb_id, langs);
  {
    std::lock_guard lock(impl_->mutex);
    if (auto it = impl_->profile_cache.find(key); it != impl_->profile_cache.end()) {
      return it->second;
    }
    if (impl_->offline) {
      const auto it = impl_->store.entities.find(kb_id);
      if (it == impl_->store.entities.end()) {
        throw Error(ErrorKind::not_found, "kb id " + kb_id + " not in snapshot");
      }
      return impl_->profile_cache.emplace(key, restrict_langs(it->second, langs)).first->second;
    }
  }
  EntityProfile fetched = impl_->live->fetch_profile(kb_id, langs);
  std::lock_guard lock(impl_->mutex);
  auto [it, inserted] = impl_->store.entities.emplace(kb_id, fetched);
  if (!inserted) merge_into(it->second, fetched);
  return impl_->profile_cache.emplace(key, std::move(fetched)).first->second;
}

PageStats KbGateway::fetch_page_stats(const std::string& title, const std::string& lang) {
  if (title.empty()) throw Error(ErrorKind::invalid_argument, "empty page title");
  const auto page = impl_->page(title, lang);
  if (!page) throw Error(ErrorKind::not_found, "no " + lang + " page '" + title + "'");
  return {page->page_length, page->incoming_links};
}

std::string KbGateway::fetch_first_paragraph(const std::string& title,
                                             const std::string& lang, int max_sentences) {
  if (max_sentences < 1) {
    throw Error(ErrorKind::invalid_argument, "max_sentences must be >= 1");
  }
  const auto page = impl_->page(title, lang);
  if (!page) throw Error(ErrorKind::not_found, "no " + lang + " page '" + title + "'");
  return first_sentences(page->first_paragraph, max_sentences);
}

KbSnapshot KbGateway::to_snapshot() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->store;
}

}  // namespace expltk
