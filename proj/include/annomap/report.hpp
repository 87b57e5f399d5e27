#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "annomap/analysis.hpp"
#include "annomap/cartography.hpp"
#include "annomap/corpus.hpp"

namespace annomap {

// Correlation table, one row per mode (shape of the paper-style r/p tables).
struct CorrelationRow {
  std::string mode;
  CorrelationReport report;
};
void write_correlation_report(std::ostream& out, const std::vector<CorrelationRow>& rows);

// Grouped confidence distributions with the test against the complement.
void write_grouped_report(std::ostream& out, const std::string& grouping,
                          const std::vector<GroupedConfidences>& groups);

void write_reversal_report(std::ostream& out, const ReversalReport& report);

void write_perspective_report(std::ostream& out, const PerspectiveHistogram& histogram);

// Flag listings in the shape of the paper's example tables: item text plus
// majority/minority labels and both confidences, one row per offending
// annotation.
void write_flag_report(std::ostream& out, const std::vector<FlagEntry>& entries,
                       const AnnotatedCorpus& corpus);

// Point rows parsed back from a serialized data-map file; all the plot needs.
struct MapFileRow {
  std::string item_id;
  std::string annotator_id;
  std::string gold;
  double confidence = 0.0;
  double variability = 0.0;
  double correctness = 0.0;
};

std::vector<MapFileRow> read_map_file(std::istream& in);

// Deterministic SVG scatter: variability on x in [0, 0.5], confidence on y in
// [0, 1], points colored by correctness with one legend entry per distinct
// correctness value. Identical input yields identical bytes.
std::string render_map_svg(const std::vector<MapFileRow>& rows, const std::string& meta_comment);

}  // namespace annomap
