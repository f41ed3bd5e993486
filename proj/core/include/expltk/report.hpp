#pragma once

#include <map>
#include <string>

#include "expltk/qa.hpp"

namespace expltk {

struct LanguageReport {
  std::string lang;
  EvalResult original;
  EvalResult explicitation;
  IncreaseRate ew_increase;
  IncreaseRate ewo_increase;
  IncreaseRate accuracy_increase;
};

struct EvalReport {
  double threshold = 0.0;
  std::string curve;  // "linear" or the table file name
  std::map<std::string, LanguageReport> languages;
};

LanguageReport make_language_report(std::string lang, EvalResult original,
                                    EvalResult explicitation);

std::string report_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
// lang,metric,original,explicitation,increase_rate,absolute
std::string report_csv(const EvalReport& report);
// Grouped bar chart of the three metrics per language.
std::string report_svg(const EvalReport& report);
// Human-readable summary printed by the CLI.
std::string report_text(const EvalReport& report);

}  // namespace expltk
