#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "annomap/corpus.hpp"
#include "annomap/featurizer.hpp"

namespace annomap {

enum class TrainMode { single, multi };

const char* train_mode_name(TrainMode mode);
TrainMode parse_train_mode(std::string_view name);

struct TrainConfig {
  int epochs = 5;
  double learning_rate = 0.1;
  int batch_size = 32;
  int annotator_dim = 16;   // d_a
  double l2_penalty = 1e-5;
  std::uint64_t seed = 0;
  std::uint32_t feature_dim = kDefaultFeatureDim;
  int ngram_order = kDefaultNgramOrder;
};

// Softmax classifier over hashed text features, trained on majority labels.
struct SingleGtModel {
  std::uint32_t dim = 0;
  int k = 0;
  int ngram_order = kDefaultNgramOrder;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> weights;  // k rows of dim
  std::vector<double> bias;                  // k
};

// Same text backbone plus an additive per-annotator term V.e(annotator).
// Unknown annotators fall back to a shared zero-initialized embedding.
struct MultiGtModel {
  std::uint32_t dim = 0;
  int k = 0;
  int annotator_dim = 0;
  int ngram_order = kDefaultNgramOrder;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> weights;      // k rows of dim
  std::vector<double> bias;                      // k
  std::vector<std::vector<double>> annot_proj;   // k rows of annotator_dim (V)
  std::vector<std::string> annotator_ids;
  std::vector<std::vector<double>> embeddings;   // one row per known annotator
  std::vector<double> fallback_embedding;        // annotator_dim, zeros
  std::unordered_map<std::string, std::int32_t> annotator_index;

  // Embedding row for an annotator id, or the fallback row when unknown.
  const std::vector<double>& embedding_for(std::string_view annotator_id) const;
};

// Numerically stable; output sums to 1 within 1e-12. Throws on non-finite input.
std::vector<double> softmax(const std::vector<double>& logits);

// W.x + b
std::vector<double> single_gt_logits(const SingleGtModel& model, const SparseVector& x);

// W.x + V.e(annotator) + b; annotator < 0 selects the fallback embedding.
std::vector<double> multi_gt_logits(const MultiGtModel& model, const SparseVector& x,
                                    std::int32_t annotator);
std::vector<double> multi_gt_logits(const MultiGtModel& model, const SparseVector& x,
                                    std::string_view annotator_id);

LabelId argmax_label(const std::vector<double>& values);

// Per-epoch gold-label probability and prediction for one key. annotator is
// -1 in single mode; (item, annotator) identifies the key in multi mode.
struct DynKey {
  std::int32_t item = -1;
  std::int32_t annotator = -1;

  bool operator==(const DynKey&) const = default;
  auto operator<=>(const DynKey&) const = default;
};

struct DynamicsEntry {
  DynKey key;
  LabelId gold = -1;
  std::vector<double> gold_probs;   // one per epoch
  std::vector<LabelId> predicted;   // one per epoch
};

struct DynamicsLog {
  TrainMode mode = TrainMode::single;
  int epochs = 0;
  std::vector<DynamicsEntry> entries;  // sorted by key

  bool operator==(const DynamicsLog& other) const;
};

// One training example: item features plus the target label. annotator is -1
// in single mode.
struct TrainExample {
  std::int32_t item;
  std::int32_t annotator;
  LabelId target;
};

struct SingleGtGradient {
  std::vector<std::vector<double>> weights;
  std::vector<double> bias;
};

struct MultiGtGradient {
  std::vector<std::vector<double>> weights;
  std::vector<double> bias;
  std::vector<std::vector<double>> annot_proj;
  std::vector<std::vector<double>> embeddings;
  std::vector<double> fallback_embedding;
};

// Mean cross-entropy over the batch plus (l2/2)*||theta||^2 over all
// parameters except biases.
double batch_loss(const SingleGtModel& model, const std::vector<TrainExample>& batch,
                  const std::vector<SparseVector>& features, double l2_penalty);
double batch_loss(const MultiGtModel& model, const std::vector<TrainExample>& batch,
                  const std::vector<SparseVector>& features, double l2_penalty);

// Exact analytic gradient of batch_loss.
SingleGtGradient gradient(const SingleGtModel& model, const std::vector<TrainExample>& batch,
                          const std::vector<SparseVector>& features, double l2_penalty);
MultiGtGradient gradient(const MultiGtModel& model, const std::vector<TrainExample>& batch,
                         const std::vector<SparseVector>& features, double l2_penalty);

struct TrainResult {
  TrainMode mode;
  std::variant<SingleGtModel, MultiGtModel> model;
  DynamicsLog dynamics;
  std::vector<double> epoch_losses;  // full-set loss at each epoch end

  const SingleGtModel& single() const { return std::get<SingleGtModel>(model); }
  const MultiGtModel& multi() const { return std::get<MultiGtModel>(model); }
};

// Mini-batch SGD on cross-entropy. Single mode trains one example per item on
// the majority label; multi mode trains one example per annotation on that
// annotation. After every epoch a full pass over the training set records
// gold_prob and predicted label per key. Deterministic for a fixed seed.
TrainResult train(const AnnotatedCorpus& corpus, const AggregatedView& view, TrainMode mode,
                  const TrainConfig& config);

// Features for every corpus item, in item order, as used by train().
std::vector<SparseVector> featurize_corpus(const AnnotatedCorpus& corpus, std::uint32_t dim,
                                           int ngram_order);

// Weighted-average F1 over classes. Single mode scores majority labels; multi
// mode scores raw annotations.
double evaluate_weighted_f1(const SingleGtModel& model, const AnnotatedCorpus& corpus,
                            const AggregatedView& view);
double evaluate_weighted_f1(const MultiGtModel& model, const AnnotatedCorpus& corpus);

// Line-delimited dynamics format: the contract consumed by cartography and
// accepted from external trainers. Keys and labels are serialized as strings.
void write_dynamics(std::ostream& out, const DynamicsLog& log, const AnnotatedCorpus& corpus);
DynamicsLog load_dynamics(std::istream& in, const AnnotatedCorpus& corpus);

void write_model(std::ostream& out, const SingleGtModel& model);
void write_model(std::ostream& out, const MultiGtModel& model);
std::variant<SingleGtModel, MultiGtModel> load_model(std::istream& in);

}  // namespace annomap
