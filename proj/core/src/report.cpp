#include "expltk/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "expltk/error.hpp"
#include "expltk/serialization.hpp"

namespace expltk {

LanguageReport make_language_report(std::string lang, EvalResult original,
                                    EvalResult explicitation) {
  LanguageReport r;
  r.lang = std::move(lang);
  r.ew_increase = increase_rate(original.ew, explicitation.ew);
  r.ewo_increase = increase_rate(original.ewo, explicitation.ewo);
  r.accuracy_increase =
      increase_rate(original.full_input_accuracy, explicitation.full_input_accuracy);
  r.original = std::move(original);
  r.explicitation = std::move(explicitation);
  return r;
}

namespace {

json optional_step(const std::optional<std::size_t>& s) { return s ? json(*s) : json(nullptr); }

json result_json(const EvalResult& r) {
  json questions = json::array();
  for (const auto& q : r.questions) {
    questions.push_back({{"question_id", q.question_id},
                         {"buzz_step", optional_step(q.buzz_step)},
                         {"correct_at_buzz", q.correct_at_buzz},
                         {"oracle_step", optional_step(q.oracle_step)},
                         {"ew", q.ew},
                         {"ewo", q.ewo},
                         {"full_correct", q.full_correct}});
  }
  return {{"condition", to_string(r.condition)},
          {"ew", r.ew},
          {"ewo", r.ewo},
          {"full_input_accuracy", r.full_input_accuracy},
          {"questions", std::move(questions)}};
}

std::optional<std::size_t> step_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::size_t>();
}

EvalResult result_from(const json& j) {
  EvalResult r;
  r.condition = j.at("condition").get<std::string>() == "explicitation" ? Condition::explicitation
                                                                        : Condition::original;
  r.ew = j.at("ew").get<double>();
  r.ewo = j.at("ewo").get<double>();
  r.full_input_accuracy = j.at("full_input_accuracy").get<double>();
  for (const auto& q : j.value("questions", json::array())) {
    QuestionResult qr;
    qr.question_id = q.at("question_id").get<std::string>();
    qr.buzz_step = step_from(q.at("buzz_step"));
    qr.correct_at_buzz = q.at("correct_at_buzz").get<bool>();
    qr.oracle_step = step_from(q.at("oracle_step"));
    qr.ew = q.at("ew").get<double>();
    qr.ewo = q.at("ewo").get<double>();
    qr.full_correct = q.at("full_correct").get<bool>();
    r.questions.push_back(std::move(qr));
  }
  return r;
}

json rate_json(const IncreaseRate& r) { return {{"value", r.value}, {"absolute", r.absolute}}; }

IncreaseRate rate_from(const json& j) {
  return {j.at("value").get<double>(), j.at("absolute").get<bool>()};
}

struct MetricRow {
  const char* name;
  double original;
  double explicitation;
  IncreaseRate rate;
};

std::vector<MetricRow> metric_rows(const LanguageReport& r) {
  return {{"ew", r.original.ew, r.explicitation.ew, r.ew_increase},
          {"ewo", r.original.ewo, r.explicitation.ewo, r.ewo_increase},
          {"full_input_accuracy", r.original.full_input_accuracy,
           r.explicitation.full_input_accuracy, r.accuracy_increase}};
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string report_json(const EvalReport& report) {
  json languages = json::object();
  for (const auto& [lang, r] : report.languages) {
    languages[lang] = {{"original", result_json(r.original)},
                       {"explicitation", result_json(r.explicitation)},
                       {"increase_rate",
                        {{"ew", rate_json(r.ew_increase)},
                         {"ewo", rate_json(r.ewo_increase)},
                         {"full_input_accuracy", rate_json(r.accuracy_increase)}}}};
  }
  const json j = {{"threshold", report.threshold},
                  {"curve", report.curve},
                  {"languages", std::move(languages)}};
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    EvalReport report;
    report.threshold = j.at("threshold").get<double>();
    report.curve = j.at("curve").get<std::string>();
    for (const auto& [lang, lj] : j.at("languages").items()) {
      LanguageReport r;
      r.lang = lang;
      r.original = result_from(lj.at("original"));
      r.explicitation = result_from(lj.at("explicitation"));
      const auto& rates = lj.at("increase_rate");
      r.ew_increase = rate_from(rates.at("ew"));
      r.ewo_increase = rate_from(rates.at("ewo"));
      r.accuracy_increase = rate_from(rates.at("full_input_accuracy"));
      report.languages.emplace(lang, std::move(r));
    }
    return report;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("report: ") + e.what());
  }
}

std::string report_csv(const EvalReport& report) {
  std::string out = "lang,metric,original,explicitation,increase_rate,absolute\n";
  for (const auto& [lang, r] : report.languages) {
    for (const auto& row : metric_rows(r)) {
      out += lang + "," + row.name + "," + format_number(row.original) + "," +
             format_number(row.explicitation) + "," + format_number(row.rate.value) + "," +
             (row.rate.absolute ? "true" : "false") + "\n";
    }
  }
  return out;
}

std::string report_svg(const EvalReport& report) {
  constexpr int kBar = 24, kGap = 10, kGroupGap = 36, kPlotH = 200, kTop = 40, kLeft = 50;
  const int groups = static_cast<int>(report.languages.size()) * 3;
  const int width = kLeft + groups * (2 * kBar + kGroupGap) + kGap;
  const int height = kTop + kPlotH + 70;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<text x=\"" << kLeft << "\" y=\"20\" font-size=\"13\">threshold "
      << fixed(report.threshold, 2) << ", curve " << xml_escape(report.curve) << "</text>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + kPlotH << "\" x2=\"" << width - kGap
      << "\" y2=\"" << kTop + kPlotH << "\" stroke=\"#333\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const int y = kTop + kPlotH - tick * kPlotH / 4;
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
        << fixed(tick * 0.25, 2) << "</text>\n";
  }
  int x = kLeft + kGap;
  for (const auto& [lang, r] : report.languages) {
    for (const auto& row : metric_rows(r)) {
      const double values[] = {row.original, row.explicitation};
      const char* colors[] = {"#9aa5b1", "#2f6db5"};
      for (int k = 0; k < 2; ++k) {
        const int h = static_cast<int>(std::lround(std::clamp(values[k], 0.0, 1.0) * kPlotH));
        svg << "<rect x=\"" << x + k * kBar << "\" y=\"" << kTop + kPlotH - h << "\" width=\""
            << kBar - 2 << "\" height=\"" << h << "\" fill=\"" << colors[k] << "\"><title>"
            << xml_escape(lang) << " " << row.name << " " << fixed(values[k], 4)
            << "</title></rect>\n";
      }
      svg << "<text x=\"" << x + kBar << "\" y=\"" << kTop + kPlotH + 16
          << "\" text-anchor=\"middle\">" << xml_escape(lang) << "</text>\n";
      svg << "<text x=\"" << x + kBar << "\" y=\"" << kTop + kPlotH + 30
          << "\" text-anchor=\"middle\">" << row.name << "</text>\n";
      x += 2 * kBar + kGroupGap;
    }
  }
  const int legend_y = kTop + kPlotH + 52;
  svg << "<rect x=\"" << kLeft << "\" y=\"" << legend_y - 9
      << "\" width=\"10\" height=\"10\" fill=\"#9aa5b1\"/><text x=\"" << kLeft + 14 << "\" y=\""
      << legend_y << "\">original</text>\n";
  svg << "<rect x=\"" << kLeft + 90 << "\" y=\"" << legend_y - 9
      << "\" width=\"10\" height=\"10\" fill=\"#2f6db5\"/><text x=\"" << kLeft + 104
      << "\" y=\"" << legend_y << "\">explicitation</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string report_text(const EvalReport& report) {
  std::ostringstream out;
  out << "buzzer threshold " << fixed(report.threshold, 2) << ", curve " << report.curve << "\n";
  for (const auto& [lang, r] : report.languages) {
    out << lang << " (" << r.original.questions.size() << " questions)\n";
    for (const auto& row : metric_rows(r)) {
      out << "  " << row.name << ": " << fixed(row.original, 4) << " -> "
          << fixed(row.explicitation, 4) << "  ("
          << (row.rate.absolute ? "abs " : "") << (row.rate.value >= 0 ? "+" : "")
          << (row.rate.absolute ? fixed(row.rate.value, 4)
                                : fixed(row.rate.value * 100.0, 1) + "%")
          << ")\n";
    }
  }
  return out.str();
}

}  // namespace expltk
