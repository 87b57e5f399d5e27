#include "annomap/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include <json.hpp>

#include "annomap/errors.hpp"
#include "annomap/io.hpp"
#include "annomap/rng.hpp"

namespace annomap {

namespace {

std::string at_line(std::size_t line) {
  return line != 0 ? " (line " + std::to_string(line) + ")" : "";
}

}  // namespace

std::optional<std::int32_t> AnnotatedCorpus::find_item(std::string_view id) const {
  auto it = item_index_.find(std::string(id));
  if (it == item_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::int32_t> AnnotatedCorpus::find_annotator(std::string_view id) const {
  auto it = annotator_index_.find(std::string(id));
  if (it == annotator_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<LabelId> AnnotatedCorpus::find_label(std::string_view name) const {
  auto it = label_index_.find(std::string(name));
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

void AnnotatedCorpus::build_indices() {
  item_index_.clear();
  annotator_index_.clear();
  label_index_.clear();
  for (std::size_t i = 0; i < item_ids_.size(); ++i)
    item_index_[item_ids_[i]] = static_cast<std::int32_t>(i);
  for (std::size_t i = 0; i < annotator_ids_.size(); ++i)
    annotator_index_[annotator_ids_[i]] = static_cast<std::int32_t>(i);
  for (std::size_t i = 0; i < label_vocab_.size(); ++i)
    label_index_[label_vocab_[i]] = static_cast<LabelId>(i);

  std::sort(annotations_.begin(), annotations_.end(), [](const Annotation& a, const Annotation& b) {
    return std::tie(a.item, a.annotator) < std::tie(b.item, b.annotator);
  });
  per_item_.assign(item_ids_.size(), {});
  for (std::size_t i = 0; i < annotations_.size(); ++i)
    per_item_[annotations_[i].item].push_back(static_cast<std::int32_t>(i));
}

AnnotatedCorpus AnnotatedCorpus::from_records(const std::vector<AnnotationRecord>& records) {
  if (records.empty()) throw ValidationError("empty input: no annotation records");

  AnnotatedCorpus corpus;
  std::set<std::string> label_set;
  std::map<std::pair<std::int32_t, std::int32_t>, std::size_t> seen_pairs;

  for (const auto& rec : records) {
    if (rec.item_id.empty()) throw ValidationError("record with empty item_id" + at_line(rec.line));
    if (rec.annotator_id.empty())
      throw ValidationError("record with empty annotator_id" + at_line(rec.line));
    if (rec.label.empty()) throw ValidationError("record with empty label" + at_line(rec.line));

    auto [item_it, item_new] =
        corpus.item_index_.try_emplace(rec.item_id, static_cast<std::int32_t>(corpus.item_ids_.size()));
    if (item_new) {
      if (!rec.has_text)
        throw ValidationError("item '" + rec.item_id +
                              "' is missing its text field on first occurrence" + at_line(rec.line));
      corpus.item_ids_.push_back(rec.item_id);
      corpus.item_texts_.push_back(rec.text);
    } else if (rec.has_text && rec.text != corpus.item_texts_[item_it->second]) {
      throw ValidationError("item '" + rec.item_id + "' has conflicting text" + at_line(rec.line));
    }

    auto [ann_it, ann_new] = corpus.annotator_index_.try_emplace(
        rec.annotator_id, static_cast<std::int32_t>(corpus.annotator_ids_.size()));
    if (ann_new) corpus.annotator_ids_.push_back(rec.annotator_id);

    auto [pair_it, pair_new] =
        seen_pairs.try_emplace({item_it->second, ann_it->second}, rec.line);
    if (!pair_new)
      throw ValidationError("duplicate annotation for (item '" + rec.item_id + "', annotator '" +
                            rec.annotator_id + "')" + at_line(rec.line));

    label_set.insert(rec.label);
    corpus.annotations_.push_back(
        {item_it->second, ann_it->second, -1});  // label resolved below
  }

  corpus.label_vocab_.assign(label_set.begin(), label_set.end());  // sorted by std::set
  if (corpus.label_vocab_.size() < 2)
    throw ValidationError("label vocabulary must contain at least 2 labels, found " +
                          std::to_string(corpus.label_vocab_.size()));
  std::unordered_map<std::string, LabelId> label_of;
  for (std::size_t i = 0; i < corpus.label_vocab_.size(); ++i)
    label_of[corpus.label_vocab_[i]] = static_cast<LabelId>(i);
  for (std::size_t i = 0; i < records.size(); ++i)
    corpus.annotations_[i].label = label_of.at(records[i].label);

  corpus.build_indices();
  return corpus;
}

AnnotatedCorpus AnnotatedCorpus::clone_with_labels(const AnnotatedCorpus& base,
                                                   const std::vector<LabelId>& labels) {
  if (labels.size() != base.annotations_.size())
    throw ValidationError("label replacement count does not match annotation count");
  AnnotatedCorpus out = base;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= static_cast<LabelId>(base.label_vocab_.size()))
      throw ValidationError("replacement label out of vocabulary range");
    out.annotations_[i].label = labels[i];
  }
  return out;
}

bool AnnotatedCorpus::operator==(const AnnotatedCorpus& other) const {
  return item_ids_ == other.item_ids_ && item_texts_ == other.item_texts_ &&
         annotator_ids_ == other.annotator_ids_ && label_vocab_ == other.label_vocab_ &&
         annotations_ == other.annotations_;
}

LabelId majority_vote(const std::vector<LabelId>& labels) {
  if (labels.empty()) throw ValidationError("majority_vote on empty label multiset");
  std::map<LabelId, int> counts;
  for (LabelId l : labels) ++counts[l];
  LabelId best = labels.front();
  int best_count = 0;
  for (const auto& [label, count] : counts) {  // ascending label order: ties keep smallest
    if (count > best_count) {
      best = label;
      best_count = count;
    }
  }
  return best;
}

double agreement_level(const std::vector<LabelId>& labels) {
  LabelId majority = majority_vote(labels);
  std::size_t agree = 0;
  for (LabelId l : labels)
    if (l == majority) ++agree;
  return static_cast<double>(agree) / static_cast<double>(labels.size());
}

AggregatedView aggregate(const AnnotatedCorpus& corpus) {
  AggregatedView view;
  view.items.reserve(corpus.n_items());
  std::vector<LabelId> labels;
  for (std::size_t item = 0; item < corpus.n_items(); ++item) {
    labels.clear();
    for (std::int32_t idx : corpus.item_annotations(static_cast<std::int32_t>(item)))
      labels.push_back(corpus.annotations()[idx].label);
    LabelId majority = majority_vote(labels);
    std::map<LabelId, int> counts;
    for (LabelId l : labels) ++counts[l];
    int majority_count = counts.at(majority);
    bool tied = false;
    for (const auto& [label, count] : counts)
      if (label != majority && count == majority_count) tied = true;
    view.items.push_back({majority,
                          static_cast<double>(majority_count) / static_cast<double>(labels.size()),
                          static_cast<std::int32_t>(labels.size()), tied});
  }
  return view;
}

// Sub-corpus over the given parent item indices (ascending). Keeps the parent
// label vocabulary; annotators are re-derived from the surviving annotations.
AnnotatedCorpus subset_corpus(const AnnotatedCorpus& parent,
                              const std::vector<std::int32_t>& item_indices) {
  AnnotatedCorpus out;
  out.label_vocab_ = parent.label_vocab_;
  std::vector<std::int32_t> item_remap(parent.n_items(), -1);
  for (std::int32_t item : item_indices) {
    item_remap[item] = static_cast<std::int32_t>(out.item_ids_.size());
    out.item_ids_.push_back(parent.item_ids_[item]);
    out.item_texts_.push_back(parent.item_texts_[item]);
  }
  std::vector<std::int32_t> annotator_remap(parent.n_annotators(), -1);
  for (const Annotation& a : parent.annotations_) {
    if (item_remap[a.item] < 0) continue;
    if (annotator_remap[a.annotator] < 0) {
      annotator_remap[a.annotator] = static_cast<std::int32_t>(out.annotator_ids_.size());
      out.annotator_ids_.push_back(parent.annotator_ids_[a.annotator]);
    }
    out.annotations_.push_back({item_remap[a.item], annotator_remap[a.annotator], a.label});
  }
  out.build_indices();
  return out;
}

SplitResult split_corpus(const AnnotatedCorpus& corpus, double train_fraction,
                         std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("train_fraction must be in (0, 1)");
  const std::size_t n = corpus.n_items();
  std::vector<std::int32_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::int32_t>(i);
  Rng rng(seed);
  rng.shuffle(order);

  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n)
    throw ValidationError("split would leave one side empty (" + std::to_string(n_train) + " of " +
                          std::to_string(n) + " items in train)");

  std::vector<std::int32_t> train_items(order.begin(), order.begin() + n_train);
  std::vector<std::int32_t> test_items(order.begin() + n_train, order.end());
  std::sort(train_items.begin(), train_items.end());
  std::sort(test_items.begin(), test_items.end());

  SplitResult result{subset_corpus(corpus, train_items), subset_corpus(corpus, test_items), {}};
  for (std::size_t i = 0; i < result.test.n_annotators(); ++i) {
    const std::string& id = result.test.annotator_id(static_cast<std::int32_t>(i));
    if (!result.train.find_annotator(id)) result.test_only_annotators.push_back(id);
  }
  std::sort(result.test_only_annotators.begin(), result.test_only_annotators.end());
  return result;
}

std::vector<AnnotationRecord> parse_records(std::istream& in) {
  std::vector<AnnotationRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable_line(line)) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("malformed record" + at_line(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) throw ValidationError("record is not an object" + at_line(line_no));
    AnnotationRecord rec;
    rec.line = line_no;
    try {
      rec.item_id = obj.at("item_id").get<std::string>();
      rec.annotator_id = obj.at("annotator_id").get<std::string>();
      rec.label = obj.at("label").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("record missing required field" + at_line(line_no) + ": " + e.what());
    }
    if (obj.contains("text")) {
      if (!obj["text"].is_string())
        throw ValidationError("text field must be a string" + at_line(line_no));
      rec.text = obj["text"].get<std::string>();
      rec.has_text = true;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

AnnotatedCorpus parse_corpus(std::istream& in) {
  return AnnotatedCorpus::from_records(parse_records(in));
}

void write_corpus(std::ostream& out, const AnnotatedCorpus& corpus) {
  std::vector<bool> text_written(corpus.n_items(), false);
  for (const Annotation& a : corpus.annotations()) {
    nlohmann::json obj;
    obj["item_id"] = corpus.item_id(a.item);
    if (!text_written[a.item]) {
      obj["text"] = corpus.item_text(a.item);
      text_written[a.item] = true;
    }
    obj["annotator_id"] = corpus.annotator_id(a.annotator);
    obj["label"] = corpus.label_name(a.label);
    out << obj.dump() << '\n';
  }
}

void write_aggregated_view(std::ostream& out, const AggregatedView& view,
                           const AnnotatedCorpus& corpus) {
  for (std::size_t item = 0; item < view.items.size(); ++item) {
    const ItemAggregate& agg = view.items[item];
    nlohmann::json obj;
    obj["item_id"] = corpus.item_id(static_cast<std::int32_t>(item));
    obj["majority_label"] = corpus.label_name(agg.majority);
    obj["agreement"] = agg.agreement;
    obj["n_annotations"] = agg.n_annotations;
    obj["tied"] = agg.tied;
    out << obj.dump() << '\n';
  }
}

}  // namespace annomap
