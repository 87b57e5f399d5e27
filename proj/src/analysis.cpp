#include "annomap/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "annomap/errors.hpp"
#include "annomap/io.hpp"

namespace annomap {

namespace {

GroupedConfidences make_group(std::string key, std::vector<double> values) {
  GroupedConfidences group;
  group.group_key = std::move(key);
  group.values = std::move(values);
  if (!group.values.empty()) group.summary = summarize(group.values);
  return group;
}

// Attaches the Mann-Whitney test between the two groups; omitted when either
// side is empty.
void attach_test(GroupedConfidences& a, GroupedConfidences& b) {
  if (a.values.empty() || b.values.empty()) return;
  TestResult forward = mann_whitney_u(a.values, b.values);
  a.test = forward;
  TestResult backward = forward;
  backward.statistic =
      static_cast<double>(forward.n1) * static_cast<double>(forward.n2) - forward.statistic;
  std::swap(backward.n1, backward.n2);
  b.test = backward;
}

}  // namespace

CorrelationReport correlate_confidence_agreement(const std::vector<DataMapPoint>& map,
                                                 const AggregatedView& view, int permutations,
                                                 std::uint64_t seed) {
  std::vector<double> confidences, agreements;
  confidences.reserve(map.size());
  agreements.reserve(map.size());
  for (const DataMapPoint& p : map) {
    if (p.key.item < 0 || static_cast<std::size_t>(p.key.item) >= view.items.size())
      throw AnalysisError("map key references item outside the aggregated view");
    confidences.push_back(p.confidence);
    agreements.push_back(view.items[p.key.item].agreement);
  }
  CorrelationResult result =
      pearson_permutation_test(confidences, agreements, permutations, seed);
  return {result.r, result.p_value, map.size(), permutations};
}

std::pair<GroupedConfidences, GroupedConfidences> group_by_minority(
    const std::vector<DataMapPoint>& multi_map, const AggregatedView& view) {
  std::vector<double> agree_values, disagree_values;
  for (const DataMapPoint& p : multi_map) {
    if (p.key.annotator < 0)
      throw AnalysisError("group_by_minority requires a multi-mode data map");
    if (p.gold == view.items[p.key.item].majority)
      agree_values.push_back(p.confidence);
    else
      disagree_values.push_back(p.confidence);
  }
  auto agree = make_group("agree", std::move(agree_values));
  auto disagree = make_group("disagree", std::move(disagree_values));
  attach_test(agree, disagree);
  return {std::move(agree), std::move(disagree)};
}

ReversalReport reversal_subset(const std::vector<DataMapPoint>& single_map,
                               const std::vector<DataMapPoint>& multi_map,
                               const AggregatedView& view, double t_low) {
  std::set<std::int32_t> subset;
  for (const DataMapPoint& p : single_map)
    if (p.confidence < t_low) subset.insert(p.key.item);

  std::vector<DataMapPoint> restricted;
  for (const DataMapPoint& p : multi_map)
    if (subset.count(p.key.item)) restricted.push_back(p);

  ReversalReport report;
  report.t_low = t_low;
  report.n_subset_items = subset.size();
  auto groups = group_by_minority(restricted, view);
  report.agree = std::move(groups.first);
  report.disagree = std::move(groups.second);
  return report;
}

namespace {

// Highest Multi-GT confidence per (item, annotation-label), used by both flag
// directions. Only minority annotations (label != majority) are collected.
struct MinorityConfidence {
  std::int32_t annotator;
  LabelId label;
  double conf;
};

std::map<std::int32_t, std::vector<MinorityConfidence>> minority_confidences(
    const std::vector<DataMapPoint>& multi_map, const AggregatedView& view) {
  std::map<std::int32_t, std::vector<MinorityConfidence>> by_item;
  for (const DataMapPoint& p : multi_map) {
    if (p.key.annotator < 0)
      throw AnalysisError("flagging requires a multi-mode data map");
    if (p.gold != view.items[p.key.item].majority)
      by_item[p.key.item].push_back({p.key.annotator, p.gold, p.confidence});
  }
  return by_item;
}

std::map<std::int32_t, double> single_confidences(const std::vector<DataMapPoint>& single_map) {
  std::map<std::int32_t, double> by_item;
  for (const DataMapPoint& p : single_map) by_item[p.key.item] = p.confidence;
  return by_item;
}

}  // namespace

std::vector<FlagEntry> flag_suspect_majority(const std::vector<DataMapPoint>& single_map,
                                             const std::vector<DataMapPoint>& multi_map,
                                             const AggregatedView& view, double t_low,
                                             double t_high) {
  const auto single_conf = single_confidences(single_map);
  const auto minorities = minority_confidences(multi_map, view);
  std::vector<FlagEntry> entries;
  for (const auto& [item, conf] : single_conf) {
    if (!(conf < t_low)) continue;
    auto it = minorities.find(item);
    if (it == minorities.end()) continue;
    FlagEntry entry;
    entry.item = item;
    entry.majority_label = view.items[item].majority;
    entry.single_conf = conf;
    for (const MinorityConfidence& m : it->second) {
      if (m.conf > t_high) entry.offending.push_back({m.annotator, m.label, m.conf});
    }
    if (entry.offending.empty()) continue;
    std::sort(entry.offending.begin(), entry.offending.end(),
              [](const FlagAnnotation& a, const FlagAnnotation& b) {
                return a.multi_conf > b.multi_conf;
              });
    entry.minority_label = entry.offending.front().label;
    entry.multi_conf = entry.offending.front().multi_conf;
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<FlagEntry> flag_suspect_minority(const std::vector<DataMapPoint>& single_map,
                                             const std::vector<DataMapPoint>& multi_map,
                                             const AggregatedView& view, double t_low,
                                             double t_min) {
  const auto single_conf = single_confidences(single_map);
  const auto minorities = minority_confidences(multi_map, view);
  std::vector<FlagEntry> entries;
  for (const auto& [item, conf] : single_conf) {
    if (!(conf > t_low)) continue;
    auto it = minorities.find(item);
    if (it == minorities.end()) continue;
    FlagEntry entry;
    entry.item = item;
    entry.majority_label = view.items[item].majority;
    entry.single_conf = conf;
    for (const MinorityConfidence& m : it->second) {
      if (m.conf < t_min) entry.offending.push_back({m.annotator, m.label, m.conf});
    }
    if (entry.offending.empty()) continue;
    std::sort(entry.offending.begin(), entry.offending.end(),
              [](const FlagAnnotation& a, const FlagAnnotation& b) {
                return a.multi_conf < b.multi_conf;
              });
    entry.minority_label = entry.offending.front().label;
    entry.multi_conf = entry.offending.front().multi_conf;
    entries.push_back(std::move(entry));
  }
  return entries;
}

PerspectiveHistogram perspective_histogram(const std::vector<DataMapPoint>& multi_map,
                                           const AggregatedView& view, double t) {
  std::map<std::int32_t, std::set<LabelId>> learned;  // disagreement item -> labels above t
  std::set<std::int32_t> disagreement_items;
  std::size_t max_labels = 0;
  for (const DataMapPoint& p : multi_map) {
    if (p.key.annotator < 0)
      throw AnalysisError("perspective_histogram requires a multi-mode data map");
    if (view.items[p.key.item].agreement >= 1.0) continue;
    disagreement_items.insert(p.key.item);
    if (p.confidence > t) {
      auto& labels = learned[p.key.item];
      labels.insert(p.gold);
      max_labels = std::max(max_labels, labels.size());
    }
  }
  PerspectiveHistogram histogram;
  histogram.threshold = t;
  histogram.n_disagreement_items = disagreement_items.size();
  histogram.buckets.assign(max_labels + 1, 0);
  for (std::int32_t item : disagreement_items) {
    auto it = learned.find(item);
    const std::size_t count = it == learned.end() ? 0 : it->second.size();
    ++histogram.buckets[count];
  }
  return histogram;
}

std::vector<GroupedConfidences> group_by_agreement(const std::vector<DataMapPoint>& map,
                                                   const AggregatedView& view) {
  std::set<double> distinct;
  for (const DataMapPoint& p : map) distinct.insert(view.items[p.key.item].agreement);

  // Bucket key and membership: one bucket per distinct agreement value when
  // there are at most eight, otherwise five equal-width bins.
  std::vector<std::pair<std::string, std::vector<double>>> buckets;
  auto bucket_of = [&](double agreement) -> std::size_t {
    if (distinct.size() <= 8) {
      return static_cast<std::size_t>(
          std::distance(distinct.begin(), distinct.find(agreement)));
    }
    const double lo = *distinct.begin();
    const double hi = *distinct.rbegin();
    const double width = (hi - lo) / 5.0;
    if (width <= 0.0) return 0;
    auto bin = static_cast<std::size_t>((agreement - lo) / width);
    return std::min<std::size_t>(bin, 4);
  };

  if (distinct.size() <= 8) {
    for (double value : distinct) buckets.emplace_back(format_double(value), std::vector<double>{});
  } else {
    const double lo = *distinct.begin();
    const double hi = *distinct.rbegin();
    const double width = (hi - lo) / 5.0;
    for (int b = 0; b < 5; ++b) {
      buckets.emplace_back("[" + format_double(lo + b * width) + "," +
                               format_double(b == 4 ? hi : lo + (b + 1) * width) +
                               (b == 4 ? "]" : ")"),
                           std::vector<double>{});
    }
  }
  for (const DataMapPoint& p : map)
    buckets[bucket_of(view.items[p.key.item].agreement)].second.push_back(p.confidence);

  std::vector<GroupedConfidences> groups;
  for (auto& [key, values] : buckets) {
    std::vector<double> complement;
    for (auto& [other_key, other_values] : buckets) {
      if (&other_values == &values) continue;
      complement.insert(complement.end(), other_values.begin(), other_values.end());
    }
    GroupedConfidences group = make_group(key, values);
    if (!values.empty() && !complement.empty())
      group.test = mann_whitney_u(values, complement);
    groups.push_back(std::move(group));
  }
  return groups;
}

}  // namespace annomap
