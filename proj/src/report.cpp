#include "annomap/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "annomap/errors.hpp"
#include "annomap/io.hpp"

namespace annomap {

namespace {

constexpr const char* kMissing = "-";

std::string fixed2(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
  if (ec != std::errc()) throw IoError("failed to format number");
  return std::string(buf, ptr);
}

void write_summary_cells(std::ostream& out, const GroupedConfidences& group) {
  out << group.values.size() << '\t';
  if (group.summary) {
    const DistributionSummary& s = *group.summary;
    out << format_double(s.min) << '\t' << format_double(s.q1) << '\t'
        << format_double(s.median) << '\t' << format_double(s.q3) << '\t'
        << format_double(s.max) << '\t' << format_double(s.mean);
  } else {
    for (int i = 0; i < 6; ++i) out << kMissing << (i < 5 ? "\t" : "");
  }
  out << '\t';
  if (group.test) {
    out << format_double(group.test->statistic) << '\t' << format_double(group.test->p_value)
        << '\t' << test_method_name(group.test->method) << '\t'
        << significance_band(group.test->p_value) << '\t';
    out << (group.values.empty() ? "empty-group" : "");
  } else {
    out << kMissing << '\t' << kMissing << '\t' << kMissing << '\t' << kMissing << '\t';
    out << (group.values.empty() ? "empty-group;test-omitted" : "test-omitted");
  }
  out << '\n';
}

}  // namespace

void write_correlation_report(std::ostream& out, const std::vector<CorrelationRow>& rows) {
  out << "mode\tn_pairs\tpearson_r\tp_value\tpermutations\tsignificance\n";
  for (const CorrelationRow& row : rows) {
    out << row.mode << '\t' << row.report.n_pairs << '\t' << format_double(row.report.r) << '\t'
        << format_double(row.report.p_value) << '\t' << row.report.permutations << '\t'
        << significance_band(row.report.p_value) << '\n';
  }
}

void write_grouped_report(std::ostream& out, const std::string& grouping,
                          const std::vector<GroupedConfidences>& groups) {
  out << "# grouping: " << grouping << '\n';
  out << "group\tn\tmin\tq1\tmedian\tq3\tmax\tmean\tu_statistic\tp_value\tmethod\t"
         "significance\tnote\n";
  for (const GroupedConfidences& group : groups) {
    out << group.group_key << '\t';
    write_summary_cells(out, group);
  }
}

void write_reversal_report(std::ostream& out, const ReversalReport& report) {
  out << "# subset: items with single-gt confidence < " << format_double(report.t_low) << '\n';
  out << "# subset_items: " << report.n_subset_items << '\n';
  std::vector<GroupedConfidences> groups{report.agree, report.disagree};
  write_grouped_report(out, "minority-vs-majority on low-confidence subset", groups);
}

void write_perspective_report(std::ostream& out, const PerspectiveHistogram& histogram) {
  out << "# threshold: " << format_double(histogram.threshold) << '\n';
  out << "# disagreement_items: " << histogram.n_disagreement_items << '\n';
  out << "labels_above_threshold\tn_items\n";
  for (std::size_t c = 0; c < histogram.buckets.size(); ++c)
    out << c << '\t' << histogram.buckets[c] << '\n';
}

void write_flag_report(std::ostream& out, const std::vector<FlagEntry>& entries,
                       const AnnotatedCorpus& corpus) {
  out << "item_id\ttext\tmajority_label\tminority_label\tsingle_conf\tmulti_conf\tannotator_id\n";
  for (const FlagEntry& entry : entries) {
    for (const FlagAnnotation& annotation : entry.offending) {
      // Text is JSON-quoted so embedded tabs cannot break the table.
      out << corpus.item_id(entry.item) << '\t'
          << nlohmann::json(corpus.item_text(entry.item)).dump() << '\t'
          << corpus.label_name(entry.majority_label) << '\t'
          << corpus.label_name(annotation.label) << '\t' << format_double(entry.single_conf)
          << '\t' << format_double(annotation.multi_conf) << '\t'
          << corpus.annotator_id(annotation.annotator) << '\n';
    }
  }
}

std::vector<MapFileRow> read_map_file(std::istream& in) {
  std::vector<MapFileRow> rows;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable_line(line)) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      cells.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (!header_seen) {
      if (cells.size() < 6 || cells[0] != "item_id")
        throw ValidationError("map file header not recognized (line " + std::to_string(line_no) +
                              ")");
      header_seen = true;
      continue;
    }
    if (cells.size() != 6)
      throw ValidationError("map row has " + std::to_string(cells.size()) +
                            " columns, expected 6 (line " + std::to_string(line_no) + ")");
    MapFileRow row;
    row.item_id = cells[0];
    row.annotator_id = cells[1];
    row.gold = cells[2];
    auto parse_cell = [&](const std::string& cell, double& value) {
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw ValidationError("map row has a non-numeric cell (line " + std::to_string(line_no) +
                              ")");
    };
    parse_cell(cells[3], row.confidence);
    parse_cell(cells[4], row.variability);
    parse_cell(cells[5], row.correctness);
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw ValidationError("map file is empty");
  return rows;
}

namespace {

std::string correctness_color(double c) {
  const auto lerp = [c](double low, double high) {
    return static_cast<int>(std::lround(low + (high - low) * c));
  };
  return "rgb(" + std::to_string(lerp(214, 31)) + "," + std::to_string(lerp(39, 119)) + "," +
         std::to_string(lerp(40, 180)) + ")";
}

}  // namespace

std::string render_map_svg(const std::vector<MapFileRow>& rows, const std::string& meta_comment) {
  if (rows.empty()) throw ValidationError("cannot plot an empty data map");

  constexpr double kLeft = 70.0, kTop = 30.0, kPlotW = 400.0, kPlotH = 400.0;
  constexpr double kWidth = 660.0, kHeight = 510.0;
  const auto x_px = [&](double variability) { return kLeft + variability / 0.5 * kPlotW; };
  const auto y_px = [&](double conf) { return kTop + (1.0 - conf) * kPlotH; };

  std::ostringstream svg;
  svg << "<!--\n" << meta_comment << "-->\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed2(kWidth) << "\" height=\""
      << fixed2(kHeight) << "\" viewBox=\"0 0 " << fixed2(kWidth) << ' ' << fixed2(kHeight)
      << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << fixed2(kWidth) << "\" height=\"" << fixed2(kHeight)
      << "\" fill=\"white\"/>\n";

  // Axes: variability on x in [0, 0.5], confidence on y in [0, 1].
  svg << "<line x1=\"" << fixed2(kLeft) << "\" y1=\"" << fixed2(kTop + kPlotH) << "\" x2=\""
      << fixed2(kLeft + kPlotW) << "\" y2=\"" << fixed2(kTop + kPlotH)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << fixed2(kLeft) << "\" y1=\"" << fixed2(kTop) << "\" x2=\""
      << fixed2(kLeft) << "\" y2=\"" << fixed2(kTop + kPlotH) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = 0.1 * i;
    svg << "<line x1=\"" << fixed2(x_px(v)) << "\" y1=\"" << fixed2(kTop + kPlotH) << "\" x2=\""
        << fixed2(x_px(v)) << "\" y2=\"" << fixed2(kTop + kPlotH + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fixed2(x_px(v)) << "\" y=\"" << fixed2(kTop + kPlotH + 20)
        << "\" font-size=\"12\" text-anchor=\"middle\">" << fixed2(v) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double c = 0.2 * i;
    svg << "<line x1=\"" << fixed2(kLeft - 5) << "\" y1=\"" << fixed2(y_px(c)) << "\" x2=\""
        << fixed2(kLeft) << "\" y2=\"" << fixed2(y_px(c)) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fixed2(kLeft - 10) << "\" y=\"" << fixed2(y_px(c) + 4)
        << "\" font-size=\"12\" text-anchor=\"end\">" << fixed2(c) << "</text>\n";
  }
  svg << "<text x=\"" << fixed2(kLeft + kPlotW / 2) << "\" y=\"" << fixed2(kTop + kPlotH + 45)
      << "\" font-size=\"14\" text-anchor=\"middle\">variability</text>\n";
  svg << "<text x=\"18\" y=\"" << fixed2(kTop + kPlotH / 2)
      << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << fixed2(kTop + kPlotH / 2) << ")\">confidence</text>\n";

  for (const MapFileRow& row : rows) {
    svg << "<circle cx=\"" << fixed2(x_px(std::min(row.variability, 0.5))) << "\" cy=\""
        << fixed2(y_px(std::clamp(row.confidence, 0.0, 1.0))) << "\" r=\"3\" fill=\""
        << correctness_color(std::clamp(row.correctness, 0.0, 1.0))
        << "\" fill-opacity=\"0.6\"/>\n";
  }

  // Legend keyed to the distinct correctness values (multiples of 1/epochs).
  std::set<double> distinct;
  for (const MapFileRow& row : rows) distinct.insert(row.correctness);
  svg << "<text x=\"" << fixed2(kLeft + kPlotW + 30) << "\" y=\"" << fixed2(kTop + 10)
      << "\" font-size=\"14\">correctness</text>\n";
  int slot = 0;
  for (auto it = distinct.rbegin(); it != distinct.rend(); ++it, ++slot) {
    const double y = kTop + 30 + 18.0 * slot;
    svg << "<circle cx=\"" << fixed2(kLeft + kPlotW + 38) << "\" cy=\"" << fixed2(y)
        << "\" r=\"5\" fill=\"" << correctness_color(std::clamp(*it, 0.0, 1.0)) << "\"/>\n";
    svg << "<text x=\"" << fixed2(kLeft + kPlotW + 50) << "\" y=\"" << fixed2(y + 4)
        << "\" font-size=\"12\">" << format_double(*it) << "</text>\n";
  }
  svg << "</svg>\n";
  return std::move(svg).str();
}

}  // namespace annomap
