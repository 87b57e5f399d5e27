#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace annomap {

// Index into the corpus label vocabulary.
using LabelId = std::int32_t;

struct Annotation {
  std::int32_t item;
  std::int32_t annotator;
  LabelId label;

  bool operator==(const Annotation&) const = default;
};

// One line of the ingestion format, before index resolution.
struct AnnotationRecord {
  std::string item_id;
  std::string annotator_id;
  std::string label;
  std::string text;
  bool has_text = false;
  std::size_t line = 0;  // 1-based source line, 0 when synthesized in memory
};

// Immutable store of items, annotators and raw annotations. Item and
// annotator indices follow first appearance in the input; the label
// vocabulary is the lexicographically sorted set of observed label strings.
// Annotations are held sorted by (item, annotator).
class AnnotatedCorpus {
 public:
  static AnnotatedCorpus from_records(const std::vector<AnnotationRecord>& records);

  // Same structure with annotation labels replaced one-for-one.
  static AnnotatedCorpus clone_with_labels(const AnnotatedCorpus& base,
                                           const std::vector<LabelId>& labels);

  std::size_t n_items() const { return item_ids_.size(); }
  std::size_t n_annotators() const { return annotator_ids_.size(); }
  std::size_t n_labels() const { return label_vocab_.size(); }
  std::size_t n_annotations() const { return annotations_.size(); }

  const std::string& item_id(std::int32_t item) const { return item_ids_[item]; }
  const std::string& item_text(std::int32_t item) const { return item_texts_[item]; }
  const std::string& annotator_id(std::int32_t annotator) const { return annotator_ids_[annotator]; }
  const std::string& label_name(LabelId label) const { return label_vocab_[label]; }
  const std::vector<std::string>& label_vocab() const { return label_vocab_; }

  std::optional<std::int32_t> find_item(std::string_view id) const;
  std::optional<std::int32_t> find_annotator(std::string_view id) const;
  std::optional<LabelId> find_label(std::string_view name) const;

  const std::vector<Annotation>& annotations() const { return annotations_; }
  // Indices into annotations(), ascending, one bucket per item.
  const std::vector<std::int32_t>& item_annotations(std::int32_t item) const {
    return per_item_[item];
  }

  bool operator==(const AnnotatedCorpus& other) const;

 private:
  friend AnnotatedCorpus subset_corpus(const AnnotatedCorpus&, const std::vector<std::int32_t>&);

  void build_indices();

  std::vector<std::string> item_ids_;
  std::vector<std::string> item_texts_;
  std::vector<std::string> annotator_ids_;
  std::vector<std::string> label_vocab_;
  std::vector<Annotation> annotations_;
  std::vector<std::vector<std::int32_t>> per_item_;
  std::unordered_map<std::string, std::int32_t> item_index_;
  std::unordered_map<std::string, std::int32_t> annotator_index_;
  std::unordered_map<std::string, LabelId> label_index_;
};

struct ItemAggregate {
  LabelId majority;
  double agreement;       // in (0, 1]
  std::int32_t n_annotations;
  bool tied;              // majority count shared by more than one label
};

// Per-item majority vote and agreement level, indexed like corpus items.
struct AggregatedView {
  std::vector<ItemAggregate> items;
};

// Most frequent label; ties broken by smallest LabelId.
LabelId majority_vote(const std::vector<LabelId>& labels);

// Fraction of labels equal to majority_vote(labels), in (0, 1].
double agreement_level(const std::vector<LabelId>& labels);

AggregatedView aggregate(const AnnotatedCorpus& corpus);

struct SplitResult {
  AnnotatedCorpus train;
  AnnotatedCorpus test;
  // Annotators with annotations only on the test side.
  std::vector<std::string> test_only_annotators;
};

// Item-level deterministic split; both sub-corpora keep the parent label
// vocabulary so label indices stay aligned across the split.
SplitResult split_corpus(const AnnotatedCorpus& corpus, double train_fraction,
                         std::uint64_t seed);

// Line-delimited ingestion format: one JSON object per line with fields
// item_id, annotator_id, label and text (text required on the first
// occurrence of an item). '#' lines and blank lines are skipped.
AnnotatedCorpus parse_corpus(std::istream& in);
std::vector<AnnotationRecord> parse_records(std::istream& in);

void write_corpus(std::ostream& out, const AnnotatedCorpus& corpus);
void write_aggregated_view(std::ostream& out, const AggregatedView& view,
                           const AnnotatedCorpus& corpus);

}  // namespace annomap
