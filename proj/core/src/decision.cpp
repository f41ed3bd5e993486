#include "expltk/decision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "expltk/error.hpp"

namespace expltk {

std::string_view to_string(PropertyId id) {
  switch (id) {
    case PropertyId::closeness: return "closeness";
    case PropertyId::incoming_links: return "incoming_links";
    case PropertyId::page_length: return "page_length";
  }
  return "unknown";
}

PropertyId property_from_string(std::string_view s) {
  if (s == "closeness") return PropertyId::closeness;
  if (s == "incoming_links") return PropertyId::incoming_links;
  if (s == "page_length") return PropertyId::page_length;
  throw Error(ErrorKind::invalid_argument, "unknown property '" + std::string(s) + "'");
}

std::string_view to_string(Comparator c) {
  return c == Comparator::ge ? "ge" : "strict_gt";
}

Comparator comparator_from_string(std::string_view s) {
  if (s == "ge" || s == ">=") return Comparator::ge;
  if (s == "strict_gt" || s == "gt" || s == ">") return Comparator::strict_gt;
  throw Error(ErrorKind::invalid_argument, "unknown comparator '" + std::string(s) + "'");
}

std::optional<std::string> DecisionConfig::country_for(std::string_view lang) const {
  if (lang == src_lang) return source_country;
  if (lang == tgt_lang) return target_country;
  return std::nullopt;
}

void DecisionConfig::validate() const {
  if (src_lang.empty() || tgt_lang.empty()) {
    throw Error(ErrorKind::invalid_argument, "decision config needs both languages");
  }
  if (checks.empty()) {
    throw Error(ErrorKind::invalid_argument, "decision config has no checks");
  }
  if (well_known_cutoff <= 0) {
    throw Error(ErrorKind::invalid_argument, "well_known_cutoff must be positive");
  }
  if (source_country.empty()) {
    throw Error(ErrorKind::invalid_argument, "decision config has no source country");
  }
}

std::optional<std::string> default_country_for_language(std::string_view lang) {
  if (lang == "fr") return "Q142";  // France
  if (lang == "pl") return "Q36";   // Poland
  if (lang == "es") return "Q29";   // Spain
  return std::nullopt;
}

DecisionConfig default_decision_config(std::string src_lang, std::string tgt_lang) {
  DecisionConfig config;
  config.source_country = default_country_for_language(src_lang).value_or("");
  config.target_country = default_country_for_language(tgt_lang);
  config.src_lang = std::move(src_lang);
  config.tgt_lang = std::move(tgt_lang);
  config.checks = {{PropertyId::closeness, 1.0, Comparator::ge}};
  config.well_known_cutoff = 250;
  return config;
}

bool DecisionOutcome::consistent() const {
  const bool all = std::all_of(per_check.begin(), per_check.end(),
                               [](const CheckResult& c) { return c.passed; });
  return needs_explicitation == (all && !well_known);
}

std::vector<double> standardize(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(ErrorKind::degenerate_input, "standardize needs at least two values");
  }
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  if (!(sd > 0.0)) throw Error(ErrorKind::degenerate_input, "standardize on constant input");
  std::vector<double> z;
  z.reserve(values.size());
  for (const double v : values) z.push_back((v - mean) / sd);
  return z;
}

void PoolStats::set(std::string lang, PropertyId property, PropertyStats stats) {
  stats_[{std::move(lang), property}] = stats;
}

const PropertyStats* PoolStats::find(std::string_view lang, PropertyId property) const {
  const auto it = stats_.find(std::make_pair(std::string(lang), property));
  return it == stats_.end() ? nullptr : &it->second;
}

std::optional<double> raw_property(const EntityProfile& profile, PropertyId property,
                                   std::string_view lang) {
  const PageInfo* page = profile.page(lang);
  if (page == nullptr) return std::nullopt;
  switch (property) {
    case PropertyId::incoming_links: return static_cast<double>(page->incoming_links);
    case PropertyId::page_length: return static_cast<double>(page->page_length);
    case PropertyId::closeness: break;
  }
  return std::nullopt;
}

PoolStats PoolStats::from_profiles(std::span<const EntityProfile> pool,
                                   std::span<const std::string> langs) {
  PoolStats out;
  std::set<std::string> seen;
  std::vector<const EntityProfile*> unique;
  for (const auto& p : pool) {
    if (seen.insert(p.kb_id).second) unique.push_back(&p);
  }
  for (const auto& lang : langs) {
    for (const auto property : {PropertyId::incoming_links, PropertyId::page_length}) {
      std::vector<double> raw;
      for (const auto* p : unique) {
        if (auto v = raw_property(*p, property, lang)) raw.push_back(*v);
      }
      PropertyStats stats;
      try {
        const auto z = standardize(raw);
        const double n = static_cast<double>(raw.size());
        stats.mean = std::accumulate(raw.begin(), raw.end(), 0.0) / n;
        double ss = 0.0;
        for (const double v : raw) ss += (v - stats.mean) * (v - stats.mean);
        stats.sd = std::sqrt(ss / n);
        stats.max_z = *std::max_element(z.begin(), z.end());
      } catch (const Error&) {
        stats.degenerate = true;
      }
      out.set(lang, property, stats);
    }
  }
  return out;
}

double property_value(const EntityProfile& profile, PropertyId property,
                      std::string_view lang, const PoolStats& pool,
                      const DecisionConfig& config) {
  if (property == PropertyId::closeness) {
    const auto country = config.country_for(lang);
    return country && profile.direct_country_links.contains(*country) ? 1.0 : 0.0;
  }
  const PropertyStats* stats = pool.find(lang, property);
  if (stats == nullptr) {
    throw Error(ErrorKind::invalid_argument, "no pool statistics for " +
                                                 std::string(to_string(property)) +
                                                 " in " + std::string(lang));
  }
  if (stats->degenerate) {
    throw Error(ErrorKind::degenerate_input, "degenerate pool for " +
                                                 std::string(to_string(property)) +
                                                 " in " + std::string(lang));
  }
  const auto raw = raw_property(profile, property, lang);
  if (!raw) {
    return config.missing_page == MissingPagePolicy::fixed ? config.missing_page_value
                                                           : -stats->max_z;
  }
  return (*raw - stats->mean) / stats->sd;
}

DecisionOutcome decide_explicitation(const EntityProfile& profile,
                                     const DecisionConfig& config,
                                     const PoolStats& pool) {
  config.validate();
  DecisionOutcome outcome;
  bool all_passed = true;
  for (const auto& check : config.checks) {
    CheckResult result;
    result.property = check.property;
    try {
      result.value_src = property_value(profile, check.property, config.src_lang, pool, config);
      result.value_tgt = property_value(profile, check.property, config.tgt_lang, pool, config);
      result.shift = result.value_src - result.value_tgt;
      result.passed = check.passes(result.shift);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::degenerate_input) throw;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      result.value_src = result.value_tgt = result.shift = nan;
      result.passed = false;
    }
    all_passed = all_passed && result.passed;
    outcome.per_check.push_back(result);
  }
  outcome.well_known = profile.sitelink_count > config.well_known_cutoff;
  outcome.needs_explicitation = all_passed && !outcome.well_known;
  return outcome;
}

bool decide_from_values(const LabeledCandidate& candidate, const DecisionConfig& config) {
  if (candidate.values.size() != config.checks.size()) {
    throw Error(ErrorKind::invalid_argument, "candidate values do not match checks");
  }
  for (std::size_t k = 0; k < config.checks.size(); ++k) {
    const auto [src, tgt] = candidate.values[k];
    if (!config.checks[k].passes(src - tgt)) return false;
  }
  return candidate.sitelink_count <= config.well_known_cutoff;
}

TuningResult tune_thresholds(std::span<const LabeledCandidate> candidates,
                             const DecisionConfig& base,
                             std::span<const std::vector<double>> grid) {
  if (candidates.empty()) throw Error(ErrorKind::invalid_argument, "no labeled candidates");
  if (grid.size() != base.checks.size()) {
    throw Error(ErrorKind::invalid_argument, "grid must have one axis per check");
  }
  std::vector<std::vector<double>> axes(grid.begin(), grid.end());
  for (auto& axis : axes) {
    if (axis.empty()) throw Error(ErrorKind::invalid_argument, "empty grid axis");
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  }

  DecisionConfig config = base;
  TuningResult best{base, -1.0};
  std::vector<std::size_t> index(axes.size(), 0);
  while (true) {
    for (std::size_t k = 0; k < axes.size(); ++k) config.checks[k].tau = axes[k][index[k]];
    std::size_t correct = 0;
    for (const auto& c : candidates) correct += decide_from_values(c, config) == c.gold;
    const double accuracy = static_cast<double>(correct) / candidates.size();
    // Odometer order is lexicographic, so the first maximum wins ties.
    if (accuracy > best.accuracy) best = {config, accuracy};

    std::size_t k = axes.size();
    while (k > 0) {
      --k;
      if (++index[k] < axes[k].size()) break;
      index[k] = 0;
      if (k == 0) return best;
    }
    if (axes.empty()) return best;
  }
}

}  // namespace expltk
