#pragma once

// Decides whether an entity is bound tightly enough to the source-language
// community to need an explanation: every configured property must shift from
// the source to the target language by more than its threshold, and the entity
// must not be globally well known.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "expltk/kb.hpp"

namespace expltk {

enum class PropertyId { closeness, incoming_links, page_length };
enum class Comparator { strict_gt, ge };

std::string_view to_string(PropertyId id);
PropertyId property_from_string(std::string_view s);
std::string_view to_string(Comparator c);
Comparator comparator_from_string(std::string_view s);

struct PropertyCheck {
  PropertyId property = PropertyId::closeness;
  double tau = 0.0;
  Comparator comparator = Comparator::strict_gt;

  bool passes(double shift) const {
    return comparator == Comparator::ge ? shift >= tau : shift > tau;
  }
  bool operator==(const PropertyCheck&) const = default;
};

// How a missing page is valued for the z-scored properties.
enum class MissingPagePolicy {
  pool_minimum,  // minus the largest z-score in the pool
  fixed,
};

struct DecisionConfig {
  std::string src_lang;
  std::string tgt_lang;
  std::string source_country;
  std::optional<std::string> target_country;
  std::vector<PropertyCheck> checks;
  std::int64_t well_known_cutoff = 250;
  MissingPagePolicy missing_page = MissingPagePolicy::pool_minimum;
  double missing_page_value = 0.0;  // used with MissingPagePolicy::fixed

  // Country kb_id configured for a language, if any.
  std::optional<std::string> country_for(std::string_view lang) const;

  // Throws Error(invalid_argument).
  void validate() const;

  bool operator==(const DecisionConfig&) const = default;
};

// Shipped language -> country defaults (fr, pl, es).
std::optional<std::string> default_country_for_language(std::string_view lang);

// Closeness check only (ge, tau = 1), cutoff 250, country from the defaults.
DecisionConfig default_decision_config(std::string src_lang,
                                       std::string tgt_lang);

struct CheckResult {
  PropertyId property = PropertyId::closeness;
  // NaN when the value could not be computed (degenerate pool).
  double value_src = 0.0;
  double value_tgt = 0.0;
  double shift = 0.0;
  bool passed = false;

  bool operator==(const CheckResult&) const = default;
};

struct DecisionOutcome {
  bool needs_explicitation = false;
  std::vector<CheckResult> per_check;
  bool well_known = false;

  // needs_explicitation == all(passed) && !well_known
  bool consistent() const;
  bool operator==(const DecisionOutcome&) const = default;
};

// Zero mean, unit population variance. Throws Error(degenerate_input) for
// fewer than two values or constant input.
std::vector<double> standardize(std::span<const double> values);

struct PropertyStats {
  double mean = 0.0;
  double sd = 1.0;
  double max_z = 0.0;  // largest z-score observed in the pool
  bool degenerate = false;
};

// Per-language mean/sd of the raw popularity properties over a candidate pool.
class PoolStats {
 public:
  static PoolStats from_profiles(std::span<const EntityProfile> pool,
                                 std::span<const std::string> langs);

  void set(std::string lang, PropertyId property, PropertyStats stats);
  const PropertyStats* find(std::string_view lang, PropertyId property) const;

 private:
  std::map<std::pair<std::string, PropertyId>, PropertyStats, std::less<>>
      stats_;
};

// Raw page value for a z-scored property, or nullopt when the page is absent.
std::optional<double> raw_property(const EntityProfile& profile,
                                   PropertyId property, std::string_view lang);

// closeness: 1 when the entity links directly to the country configured for
// `lang`, else 0. Popularity properties: z-scored raw page values.
// Throws Error(invalid_argument) when pool stats for a popularity property
// are missing, Error(degenerate_input) when they are degenerate.
double property_value(const EntityProfile& profile, PropertyId property,
                      std::string_view lang, const PoolStats& pool,
                      const DecisionConfig& config);

DecisionOutcome decide_explicitation(const EntityProfile& profile,
                                     const DecisionConfig& config,
                                     const PoolStats& pool);

struct LabeledCandidate {
  bool gold = false;
  // (value_src, value_tgt) per check, in the base config's order.
  std::vector<std::pair<double, double>> values;
  std::int64_t sitelink_count = 0;
};

struct TuningResult {
  DecisionConfig config;
  double accuracy = 0.0;
};

// Decision rule applied to precomputed property values.
bool decide_from_values(const LabeledCandidate& candidate,
                        const DecisionConfig& config);

// Exhaustive grid search over per-check tau values (grid[k] for checks[k]).
// Maximizes accuracy against the gold labels; ties go to the
// lexicographically smallest tau vector.
TuningResult tune_thresholds(std::span<const LabeledCandidate> candidates,
                             const DecisionConfig& base,
                             std::span<const std::vector<double>> grid);

}  // namespace expltk
