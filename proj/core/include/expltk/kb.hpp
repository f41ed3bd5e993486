#pragma once

// Knowledge-base facts consumed by the decision rule and the generators, a
// versioned JSON snapshot format, and a caching gateway that serves either
// from a snapshot (offline) or from the Wikidata/Wikipedia APIs (live).

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expltk/transport.hpp"

namespace expltk {

using LangMap = std::map<std::string, std::string>;

struct LabeledRef {
  std::string kb_id;
  LangMap labels;

  bool operator==(const LabeledRef&) const = default;
};

struct PageInfo {
  std::string title;
  std::int64_t page_length = 0;  // bytes, as reported by page info
  std::int64_t incoming_links = 0;
  std::string first_paragraph;
  std::optional<std::string> full_text;

  // Text searched by the relatedness check.
  const std::string& content() const {
    return full_text ? *full_text : first_paragraph;
  }

  bool operator==(const PageInfo&) const = default;
};

struct EntityProfile {
  std::string kb_id;
  LangMap labels;
  LangMap descriptions;
  std::vector<LabeledRef> instance_of;
  std::vector<LabeledRef> country_of;
  // Countries that are the object of any direct statement on the entity.
  std::set<std::string> direct_country_links;
  std::int64_t sitelink_count = 0;
  std::map<std::string, PageInfo> pages;  // lang -> page

  const PageInfo* page(std::string_view lang) const;

  bool operator==(const EntityProfile&) const = default;
};

// Throws Error(invalid_argument) on a broken invariant.
void validate_profile(const EntityProfile& profile);

bool is_valid_kb_id(std::string_view kb_id);

enum class SnapshotSource { live, file };

struct KbSnapshot {
  static constexpr int kSchemaVersion = 1;

  std::map<std::string, EntityProfile> entities;
  std::string fetched_at;  // ISO-8601, informational
  SnapshotSource source = SnapshotSource::file;

  bool operator==(const KbSnapshot&) const = default;
};

void snapshot_save(const KbSnapshot& snapshot, std::ostream& out);
std::string snapshot_dump(const KbSnapshot& snapshot);
// Throws Error(parse) with the byte offset on malformed input.
KbSnapshot snapshot_load(std::istream& in);
KbSnapshot snapshot_parse(std::string_view text);
KbSnapshot snapshot_load_file(const std::string& path);

// Splits on ". ", "? ", "! " (and at end of text) except after a known
// abbreviation such as "St." or "Dr.".
std::vector<std::string> split_sentences(std::string_view paragraph);

// The first min(max_sentences, available) sentences, joined by one space.
std::string first_sentences(std::string_view paragraph, int max_sentences);

struct PageStats {
  std::int64_t page_length = 0;
  std::int64_t incoming_links = 0;

  bool operator==(const PageStats&) const = default;
};

// Minimal lookup interface used by the miner and the pipeline stages.
class ProfileProvider {
 public:
  virtual ~ProfileProvider() = default;
  // Throws Error(not_found) for unknown ids, Error(network) on I/O failure.
  virtual EntityProfile fetch_entity_profile(
      const std::string& kb_id, std::span<const std::string> langs) = 0;
};

struct LiveOptions {
  std::string wikidata_base = "https://www.wikidata.org";
  // "{lang}" is replaced by the language code.
  std::string wikipedia_base = "https://{lang}.wikipedia.org";
  std::string linkcount_url = "https://linkcount.toolforge.org/api/";
  double requests_per_second = 5.0;  // <= 0 disables rate limiting
  int max_retries = 3;
  std::chrono::milliseconds base_backoff{500};
  std::size_t max_in_flight = 4;
  // Injected so tests never actually wait.
  std::function<void(std::chrono::milliseconds)> sleep;
};

class KbGateway final : public ProfileProvider {
 public:
  // Serves only from the snapshot; never touches a transport.
  static KbGateway offline(KbSnapshot snapshot);
  static KbGateway live(std::shared_ptr<Transport> transport,
                        LiveOptions options = {});

  KbGateway(KbGateway&&) noexcept;
  KbGateway& operator=(KbGateway&&) noexcept;
  ~KbGateway() override;

  // Restricted to `langs` (all languages when empty). Pages missing in a
  // language stay absent. Cached per (kb_id, langs).
  EntityProfile fetch_entity_profile(
      const std::string& kb_id, std::span<const std::string> langs) override;
  EntityProfile fetch_entity_profile(const std::string& kb_id,
                                     std::initializer_list<std::string> langs);

  PageStats fetch_page_stats(const std::string& title, const std::string& lang);
  std::string fetch_first_paragraph(const std::string& title,
                                    const std::string& lang, int max_sentences);

  bool is_offline() const;
  // Everything fetched or loaded so far, for snapshot_save().
  KbSnapshot to_snapshot() const;

 private:
  struct Impl;
  explicit KbGateway(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace expltk
