#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "annomap/cartography.hpp"
#include "annomap/corpus.hpp"
#include "annomap/stats.hpp"

namespace annomap {

// One side of a partition of map keys, with its confidence distribution and
// a Mann-Whitney test against the complementary group. The test is omitted
// (and the report flagged) when either side is empty.
struct GroupedConfidences {
  std::string group_key;
  std::vector<double> values;
  std::optional<DistributionSummary> summary;
  std::optional<TestResult> test;
};

struct CorrelationReport {
  double r = 0.0;
  double p_value = 1.0;
  std::size_t n_pairs = 0;
  int permutations = 0;
};

// Pearson r between per-key confidence and the key's item agreement level.
// Every key contributes one pair, so a multi-mode map contributes one pair
// per annotation. Throws AnalysisError when all agreements are identical.
CorrelationReport correlate_confidence_agreement(const std::vector<DataMapPoint>& map,
                                                 const AggregatedView& view,
                                                 int permutations = kDefaultPermutations,
                                                 std::uint64_t seed = 0);

// Multi-mode confidences split by whether the annotation equals the item's
// majority vote. Returns {agree, disagree}.
std::pair<GroupedConfidences, GroupedConfidences> group_by_minority(
    const std::vector<DataMapPoint>& multi_map, const AggregatedView& view);

struct ReversalReport {
  double t_low = 0.5;
  std::size_t n_subset_items = 0;
  GroupedConfidences agree;
  GroupedConfidences disagree;
};

// Restricts to items whose Single-GT confidence is below t_low, then groups
// the multi-mode confidences by minority/majority. An empty subset yields an
// explicit empty report.
ReversalReport reversal_subset(const std::vector<DataMapPoint>& single_map,
                               const std::vector<DataMapPoint>& multi_map,
                               const AggregatedView& view, double t_low = 0.5);

struct FlagAnnotation {
  std::int32_t annotator = -1;
  LabelId label = -1;
  double multi_conf = 0.0;
};

struct FlagEntry {
  std::int32_t item = -1;
  LabelId majority_label = -1;
  LabelId minority_label = -1;   // label of the headline offending annotation
  double single_conf = 0.0;
  double multi_conf = 0.0;       // confidence of the headline offending annotation
  std::vector<FlagAnnotation> offending;
};

struct FlagThresholds {
  double t_low = 0.5;
  double t_high = 0.9;
  double t_min = 0.1;
};

// Items where the Single-GT confidence for the majority label is below t_low
// while some minority annotation reaches Multi-GT confidence above t_high
// (evidence the aggregated label is wrong). The headline annotation is the
// highest-confidence offender.
std::vector<FlagEntry> flag_suspect_majority(const std::vector<DataMapPoint>& single_map,
                                             const std::vector<DataMapPoint>& multi_map,
                                             const AggregatedView& view, double t_low = 0.5,
                                             double t_high = 0.9);

// The converse pattern: confident majority, minority annotation learned with
// confidence below t_min (evidence the minority annotation is noise). The
// headline annotation is the lowest-confidence offender.
std::vector<FlagEntry> flag_suspect_minority(const std::vector<DataMapPoint>& single_map,
                                             const std::vector<DataMapPoint>& multi_map,
                                             const AggregatedView& view, double t_low = 0.5,
                                             double t_min = 0.1);

struct FlagReport {
  FlagThresholds thresholds;
  std::vector<FlagEntry> suspect_majority;
  std::vector<FlagEntry> suspect_minority;
};

struct PerspectiveHistogram {
  double threshold = 0.5;
  std::size_t n_disagreement_items = 0;
  // buckets[c] = number of agreement<1 items with exactly c distinct labels
  // learned above the threshold; bucket counts sum to n_disagreement_items.
  std::vector<std::size_t> buckets;
};

// For each item with agreement < 1.0, counts distinct annotation labels whose
// Multi-GT confidence exceeds t.
PerspectiveHistogram perspective_histogram(const std::vector<DataMapPoint>& multi_map,
                                           const AggregatedView& view, double t = 0.5);

// Confidences bucketed by item agreement level: one bucket per distinct
// observed agreement when there are at most eight, otherwise five equal-width
// bins. Each bucket is tested against the complement.
std::vector<GroupedConfidences> group_by_agreement(const std::vector<DataMapPoint>& map,
                                                   const AggregatedView& view);

}  // namespace annomap
