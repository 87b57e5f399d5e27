#include "annomap/models.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "annomap/errors.hpp"
#include "annomap/io.hpp"
#include "annomap/rng.hpp"

namespace annomap {

namespace {

double dot_sparse(const std::vector<double>& row, const SparseVector& x) {
  double sum = 0.0;
  for (const auto& [idx, w] : x.entries) sum += row[idx] * w;
  return sum;
}

double dot_dense(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

// log(sum(exp(logits))), stable.
double log_sum_exp(const std::vector<double>& logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - m);
  return m + std::log(sum);
}

double sum_squares(const std::vector<std::vector<double>>& rows) {
  double sum = 0.0;
  for (const auto& row : rows)
    for (double v : row) sum += v * v;
  return sum;
}

std::vector<double> random_row(Rng& rng, std::size_t n, double limit) {
  std::vector<double> row(n);
  for (double& v : row) v = rng.uniform(-limit, limit);
  return row;
}

}  // namespace

const char* train_mode_name(TrainMode mode) {
  return mode == TrainMode::single ? "single" : "multi";
}

TrainMode parse_train_mode(std::string_view name) {
  if (name == "single") return TrainMode::single;
  if (name == "multi") return TrainMode::multi;
  throw ValidationError("unknown train mode: '" + std::string(name) + "'");
}

const std::vector<double>& MultiGtModel::embedding_for(std::string_view annotator_id) const {
  auto it = annotator_index.find(std::string(annotator_id));
  if (it == annotator_index.end()) return fallback_embedding;
  return embeddings[it->second];
}

std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) throw ValidationError("softmax: empty logits");
  for (double l : logits)
    if (!std::isfinite(l)) throw ValidationError("softmax: non-finite logit");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> single_gt_logits(const SingleGtModel& model, const SparseVector& x) {
  if (x.dim != model.dim)
    throw ValidationError("feature dimension mismatch: vector has " + std::to_string(x.dim) +
                          ", model expects " + std::to_string(model.dim));
  std::vector<double> logits(model.k);
  for (int k = 0; k < model.k; ++k) logits[k] = dot_sparse(model.weights[k], x) + model.bias[k];
  return logits;
}

std::vector<double> multi_gt_logits(const MultiGtModel& model, const SparseVector& x,
                                    std::int32_t annotator) {
  if (x.dim != model.dim)
    throw ValidationError("feature dimension mismatch: vector has " + std::to_string(x.dim) +
                          ", model expects " + std::to_string(model.dim));
  if (annotator >= static_cast<std::int32_t>(model.embeddings.size()))
    throw ValidationError("annotator index out of range");
  const std::vector<double>& emb =
      annotator < 0 ? model.fallback_embedding : model.embeddings[annotator];
  std::vector<double> logits(model.k);
  for (int k = 0; k < model.k; ++k)
    logits[k] = dot_sparse(model.weights[k], x) + dot_dense(model.annot_proj[k], emb) + model.bias[k];
  return logits;
}

std::vector<double> multi_gt_logits(const MultiGtModel& model, const SparseVector& x,
                                    std::string_view annotator_id) {
  auto it = model.annotator_index.find(std::string(annotator_id));
  return multi_gt_logits(model, x, it == model.annotator_index.end() ? -1 : it->second);
}

LabelId argmax_label(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;  // ties keep the smallest index
  return static_cast<LabelId>(best);
}

bool DynamicsLog::operator==(const DynamicsLog& other) const {
  if (mode != other.mode || epochs != other.epochs || entries.size() != other.entries.size())
    return false;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const DynamicsEntry& a = entries[i];
    const DynamicsEntry& b = other.entries[i];
    if (a.key != b.key || a.gold != b.gold || a.gold_probs != b.gold_probs ||
        a.predicted != b.predicted)
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Loss and gradients

namespace {

// Per-example softmax delta (p - onehot(target)), shared by loss paths.
struct ExampleContext {
  std::vector<double> probs;
  double ce = 0.0;  // cross-entropy of this example
};

ExampleContext example_context(const std::vector<double>& logits, LabelId target) {
  ExampleContext ctx;
  ctx.probs = softmax(logits);
  ctx.ce = log_sum_exp(logits) - logits[target];
  return ctx;
}

}  // namespace

double batch_loss(const SingleGtModel& model, const std::vector<TrainExample>& batch,
                  const std::vector<SparseVector>& features, double l2_penalty) {
  double ce = 0.0;
  for (const TrainExample& ex : batch) {
    const std::vector<double> logits = single_gt_logits(model, features[ex.item]);
    ce += log_sum_exp(logits) - logits[ex.target];
  }
  ce /= static_cast<double>(batch.size());
  return ce + 0.5 * l2_penalty * sum_squares(model.weights);
}

double batch_loss(const MultiGtModel& model, const std::vector<TrainExample>& batch,
                  const std::vector<SparseVector>& features, double l2_penalty) {
  double ce = 0.0;
  for (const TrainExample& ex : batch) {
    const std::vector<double> logits = multi_gt_logits(model, features[ex.item], ex.annotator);
    ce += log_sum_exp(logits) - logits[ex.target];
  }
  ce /= static_cast<double>(batch.size());
  const double l2 = sum_squares(model.weights) + sum_squares(model.annot_proj) +
                    sum_squares(model.embeddings) + dot_dense(model.fallback_embedding,
                                                              model.fallback_embedding);
  return ce + 0.5 * l2_penalty * l2;
}

SingleGtGradient gradient(const SingleGtModel& model, const std::vector<TrainExample>& batch,
                          const std::vector<SparseVector>& features, double l2_penalty) {
  SingleGtGradient grad;
  grad.weights.assign(model.k, std::vector<double>(model.dim, 0.0));
  grad.bias.assign(model.k, 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const TrainExample& ex : batch) {
    const SparseVector& x = features[ex.item];
    ExampleContext ctx = example_context(single_gt_logits(model, x), ex.target);
    for (int k = 0; k < model.k; ++k) {
      const double delta = (ctx.probs[k] - (k == ex.target ? 1.0 : 0.0)) * scale;
      grad.bias[k] += delta;
      for (const auto& [idx, w] : x.entries) grad.weights[k][idx] += delta * w;
    }
  }
  for (int k = 0; k < model.k; ++k)
    for (std::uint32_t d = 0; d < model.dim; ++d)
      grad.weights[k][d] += l2_penalty * model.weights[k][d];
  return grad;
}

MultiGtGradient gradient(const MultiGtModel& model, const std::vector<TrainExample>& batch,
                         const std::vector<SparseVector>& features, double l2_penalty) {
  MultiGtGradient grad;
  grad.weights.assign(model.k, std::vector<double>(model.dim, 0.0));
  grad.bias.assign(model.k, 0.0);
  grad.annot_proj.assign(model.k, std::vector<double>(model.annotator_dim, 0.0));
  grad.embeddings.assign(model.embeddings.size(),
                         std::vector<double>(model.annotator_dim, 0.0));
  grad.fallback_embedding.assign(model.annotator_dim, 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const TrainExample& ex : batch) {
    const SparseVector& x = features[ex.item];
    const std::vector<double>& emb =
        ex.annotator < 0 ? model.fallback_embedding : model.embeddings[ex.annotator];
    std::vector<double>& emb_grad =
        ex.annotator < 0 ? grad.fallback_embedding : grad.embeddings[ex.annotator];
    ExampleContext ctx = example_context(multi_gt_logits(model, x, ex.annotator), ex.target);
    for (int k = 0; k < model.k; ++k) {
      const double delta = (ctx.probs[k] - (k == ex.target ? 1.0 : 0.0)) * scale;
      grad.bias[k] += delta;
      for (const auto& [idx, w] : x.entries) grad.weights[k][idx] += delta * w;
      for (int d = 0; d < model.annotator_dim; ++d) {
        grad.annot_proj[k][d] += delta * emb[d];
        emb_grad[d] += delta * model.annot_proj[k][d];
      }
    }
  }
  for (int k = 0; k < model.k; ++k) {
    for (std::uint32_t d = 0; d < model.dim; ++d)
      grad.weights[k][d] += l2_penalty * model.weights[k][d];
    for (int d = 0; d < model.annotator_dim; ++d)
      grad.annot_proj[k][d] += l2_penalty * model.annot_proj[k][d];
  }
  for (std::size_t a = 0; a < model.embeddings.size(); ++a)
    for (int d = 0; d < model.annotator_dim; ++d)
      grad.embeddings[a][d] += l2_penalty * model.embeddings[a][d];
  for (int d = 0; d < model.annotator_dim; ++d)
    grad.fallback_embedding[d] += l2_penalty * model.fallback_embedding[d];
  return grad;
}

// ---------------------------------------------------------------------------
// Training

std::vector<SparseVector> featurize_corpus(const AnnotatedCorpus& corpus, std::uint32_t dim,
                                           int ngram_order) {
  std::vector<SparseVector> features;
  features.reserve(corpus.n_items());
  for (std::size_t item = 0; item < corpus.n_items(); ++item)
    features.push_back(
        featurize(tokenize(corpus.item_text(static_cast<std::int32_t>(item))), dim, ngram_order));
  return features;
}

namespace {

void validate_config(const TrainConfig& config) {
  if (config.epochs < 1) throw ValidationError("epochs must be >= 1");
  if (!(config.learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (config.batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (config.annotator_dim < 1) throw ValidationError("annotator_dim must be >= 1");
  if (config.l2_penalty < 0.0) throw ValidationError("l2_penalty must be non-negative");
  if (config.ngram_order < 1) throw ValidationError("ngram_order must be >= 1");
}

}  // namespace

TrainResult train(const AnnotatedCorpus& corpus, const AggregatedView& view, TrainMode mode,
                  const TrainConfig& config) {
  validate_config(config);
  if (corpus.n_items() == 0) throw ValidationError("training corpus is empty");
  if (mode == TrainMode::single && view.items.size() != corpus.n_items())
    throw ValidationError("aggregated view does not match corpus");

  const std::vector<SparseVector> features =
      featurize_corpus(corpus, config.feature_dim, config.ngram_order);
  const int k = static_cast<int>(corpus.n_labels());
  const std::uint32_t dim = config.feature_dim;
  const double lr = config.learning_rate;
  const double l2 = config.l2_penalty;

  // One example per item (single) / per annotation (multi).
  std::vector<TrainExample> examples;
  if (mode == TrainMode::single) {
    examples.reserve(corpus.n_items());
    for (std::size_t item = 0; item < corpus.n_items(); ++item)
      examples.push_back({static_cast<std::int32_t>(item), -1, view.items[item].majority});
  } else {
    examples.reserve(corpus.n_annotations());
    for (const Annotation& a : corpus.annotations())
      examples.push_back({a.item, a.annotator, a.label});
  }

  Rng rng(config.seed);
  const double w_limit = 1.0 / std::sqrt(static_cast<double>(dim));

  SingleGtModel single_model;
  MultiGtModel multi_model;
  if (mode == TrainMode::single) {
    single_model.dim = dim;
    single_model.k = k;
    single_model.ngram_order = config.ngram_order;
    single_model.labels = corpus.label_vocab();
    for (int row = 0; row < k; ++row) single_model.weights.push_back(random_row(rng, dim, w_limit));
    single_model.bias.assign(k, 0.0);
  } else {
    multi_model.dim = dim;
    multi_model.k = k;
    multi_model.annotator_dim = config.annotator_dim;
    multi_model.ngram_order = config.ngram_order;
    multi_model.labels = corpus.label_vocab();
    for (int row = 0; row < k; ++row) multi_model.weights.push_back(random_row(rng, dim, w_limit));
    multi_model.bias.assign(k, 0.0);
    for (int row = 0; row < k; ++row)
      multi_model.annot_proj.push_back(random_row(rng, config.annotator_dim, w_limit));
    const double e_limit = 1.0 / std::sqrt(static_cast<double>(config.annotator_dim));
    for (std::size_t a = 0; a < corpus.n_annotators(); ++a) {
      multi_model.annotator_ids.push_back(corpus.annotator_id(static_cast<std::int32_t>(a)));
      multi_model.embeddings.push_back(random_row(rng, config.annotator_dim, e_limit));
      multi_model.annotator_index[multi_model.annotator_ids.back()] =
          static_cast<std::int32_t>(a);
    }
    multi_model.fallback_embedding.assign(config.annotator_dim, 0.0);
  }

  // Dynamics entries in key order; epochs append per pass.
  DynamicsLog log;
  log.mode = mode;
  log.epochs = config.epochs;
  log.entries.reserve(examples.size());
  for (const TrainExample& ex : examples) {
    DynamicsEntry entry;
    entry.key = {ex.item, ex.annotator};
    entry.gold = ex.target;
    entry.gold_probs.reserve(config.epochs);
    entry.predicted.reserve(config.epochs);
    log.entries.push_back(std::move(entry));
  }

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> epoch_losses;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);

      // Per-example softmax deltas from pre-step parameters.
      struct BatchDelta {
        std::size_t example;
        std::vector<double> delta;  // (p - onehot) / batch_size
      };
      std::vector<BatchDelta> deltas;
      deltas.reserve(end - start);
      for (std::size_t pos = start; pos < end; ++pos) {
        const TrainExample& ex = examples[order[pos]];
        const std::vector<double> logits =
            mode == TrainMode::single
                ? single_gt_logits(single_model, features[ex.item])
                : multi_gt_logits(multi_model, features[ex.item], ex.annotator);
        std::vector<double> delta = softmax(logits);
        delta[ex.target] -= 1.0;
        for (double& d : delta) d *= scale;
        deltas.push_back({order[pos], std::move(delta)});
      }

      // theta <- (1 - lr*l2) * theta - lr * ce_grad(theta_pre). The dense
      // cross-entropy terms for the small parameters are accumulated from
      // pre-step values before anything is mutated.
      const double decay = 1.0 - lr * l2;
      if (mode == TrainMode::single) {
        if (l2 != 0.0)
          for (auto& row : single_model.weights)
            for (double& w : row) w *= decay;
        for (const BatchDelta& bd : deltas) {
          const TrainExample& ex = examples[bd.example];
          const SparseVector& x = features[ex.item];
          for (int c = 0; c < k; ++c) {
            const double d = bd.delta[c];
            single_model.bias[c] -= lr * d;
            for (const auto& [idx, w] : x.entries) single_model.weights[c][idx] -= lr * d * w;
          }
        }
      } else {
        std::vector<std::vector<double>> proj_grad(k,
                                                   std::vector<double>(config.annotator_dim, 0.0));
        std::map<std::int32_t, std::vector<double>> emb_grads;  // annotator (-1 = fallback)
        for (const BatchDelta& bd : deltas) {
          const TrainExample& ex = examples[bd.example];
          const std::vector<double>& emb = ex.annotator < 0
                                               ? multi_model.fallback_embedding
                                               : multi_model.embeddings[ex.annotator];
          auto [it, inserted] =
              emb_grads.try_emplace(ex.annotator, std::vector<double>(config.annotator_dim, 0.0));
          for (int c = 0; c < k; ++c) {
            const double d = bd.delta[c];
            for (int dd = 0; dd < config.annotator_dim; ++dd) {
              proj_grad[c][dd] += d * emb[dd];
              it->second[dd] += d * multi_model.annot_proj[c][dd];
            }
          }
        }

        if (l2 != 0.0) {
          for (auto& row : multi_model.weights)
            for (double& w : row) w *= decay;
          for (auto& row : multi_model.annot_proj)
            for (double& w : row) w *= decay;
          for (auto& row : multi_model.embeddings)
            for (double& w : row) w *= decay;
          for (double& w : multi_model.fallback_embedding) w *= decay;
        }
        for (const BatchDelta& bd : deltas) {
          const TrainExample& ex = examples[bd.example];
          const SparseVector& x = features[ex.item];
          for (int c = 0; c < k; ++c) {
            const double d = bd.delta[c];
            multi_model.bias[c] -= lr * d;
            for (const auto& [idx, w] : x.entries) multi_model.weights[c][idx] -= lr * d * w;
          }
        }
        for (int c = 0; c < k; ++c)
          for (int dd = 0; dd < config.annotator_dim; ++dd)
            multi_model.annot_proj[c][dd] -= lr * proj_grad[c][dd];
        for (const auto& [annotator, g] : emb_grads) {
          std::vector<double>& emb = annotator < 0 ? multi_model.fallback_embedding
                                                   : multi_model.embeddings[annotator];
          for (int dd = 0; dd < config.annotator_dim; ++dd) emb[dd] -= lr * g[dd];
        }
      }
    }

    // End-of-epoch pass: record dynamics and the full-set loss.
    double ce = 0.0;
    for (DynamicsEntry& entry : log.entries) {
      const std::vector<double> logits =
          mode == TrainMode::single
              ? single_gt_logits(single_model, features[entry.key.item])
              : multi_gt_logits(multi_model, features[entry.key.item], entry.key.annotator);
      const std::vector<double> probs = softmax(logits);
      entry.gold_probs.push_back(probs[entry.gold]);
      entry.predicted.push_back(argmax_label(probs));
      ce += log_sum_exp(logits) - logits[entry.gold];
    }
    ce /= static_cast<double>(log.entries.size());
    double loss = ce;
    if (mode == TrainMode::single) {
      loss += 0.5 * l2 * sum_squares(single_model.weights);
    } else {
      loss += 0.5 * l2 *
              (sum_squares(multi_model.weights) + sum_squares(multi_model.annot_proj) +
               sum_squares(multi_model.embeddings) +
               dot_dense(multi_model.fallback_embedding, multi_model.fallback_embedding));
    }
    if (!std::isfinite(loss))
      throw TrainingError("training diverged at epoch " + std::to_string(epoch) +
                          " (non-finite loss)");
    epoch_losses.push_back(loss);
  }

  TrainResult result;
  result.mode = mode;
  if (mode == TrainMode::single)
    result.model = std::move(single_model);
  else
    result.model = std::move(multi_model);
  result.dynamics = std::move(log);
  result.epoch_losses = std::move(epoch_losses);
  return result;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double weighted_f1(const std::vector<LabelId>& gold, const std::vector<LabelId>& predicted,
                   int k) {
  std::vector<double> tp(k, 0.0), fp(k, 0.0), fn(k, 0.0), support(k, 0.0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    support[gold[i]] += 1.0;
    if (gold[i] == predicted[i]) {
      tp[gold[i]] += 1.0;
    } else {
      fp[predicted[i]] += 1.0;
      fn[gold[i]] += 1.0;
    }
  }
  double f1 = 0.0;
  const double total = static_cast<double>(gold.size());
  for (int c = 0; c < k; ++c) {
    if (support[c] == 0.0) continue;
    const double denom = 2.0 * tp[c] + fp[c] + fn[c];
    const double class_f1 = denom > 0.0 ? 2.0 * tp[c] / denom : 0.0;
    f1 += support[c] / total * class_f1;
  }
  return f1;
}

}  // namespace

double evaluate_weighted_f1(const SingleGtModel& model, const AnnotatedCorpus& corpus,
                            const AggregatedView& view) {
  if (corpus.n_items() == 0) throw ValidationError("evaluation corpus is empty");
  const std::vector<SparseVector> features =
      featurize_corpus(corpus, model.dim, model.ngram_order);
  std::vector<LabelId> gold, predicted;
  for (std::size_t item = 0; item < corpus.n_items(); ++item) {
    gold.push_back(view.items[item].majority);
    predicted.push_back(argmax_label(single_gt_logits(model, features[item])));
  }
  return weighted_f1(gold, predicted, model.k);
}

double evaluate_weighted_f1(const MultiGtModel& model, const AnnotatedCorpus& corpus) {
  if (corpus.n_annotations() == 0) throw ValidationError("evaluation corpus is empty");
  const std::vector<SparseVector> features =
      featurize_corpus(corpus, model.dim, model.ngram_order);
  std::vector<LabelId> gold, predicted;
  for (const Annotation& a : corpus.annotations()) {
    gold.push_back(a.label);
    predicted.push_back(argmax_label(
        multi_gt_logits(model, features[a.item], corpus.annotator_id(a.annotator))));
  }
  return weighted_f1(gold, predicted, model.k);
}

// ---------------------------------------------------------------------------
// Serialization

void write_dynamics(std::ostream& out, const DynamicsLog& log, const AnnotatedCorpus& corpus) {
  for (const DynamicsEntry& entry : log.entries) {
    for (int epoch = 1; epoch <= log.epochs; ++epoch) {
      nlohmann::json obj;
      obj["item_id"] = corpus.item_id(entry.key.item);
      if (log.mode == TrainMode::multi)
        obj["annotator_id"] = corpus.annotator_id(entry.key.annotator);
      obj["epoch"] = epoch;
      obj["gold"] = corpus.label_name(entry.gold);
      obj["gold_prob"] = entry.gold_probs[epoch - 1];
      obj["predicted"] = corpus.label_name(entry.predicted[epoch - 1]);
      out << obj.dump() << '\n';
    }
  }
}

DynamicsLog load_dynamics(std::istream& in, const AnnotatedCorpus& corpus) {
  struct RawRecord {
    int epoch;
    double gold_prob;
    LabelId gold;
    LabelId predicted;
  };
  std::map<DynKey, std::vector<RawRecord>> by_key;
  std::map<DynKey, LabelId> gold_of;
  bool saw_annotator = false, saw_item_only = false;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable_line(line)) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw AnalysisError("malformed dynamics record (line " + std::to_string(line_no) +
                          "): " + e.what());
    }
    const std::string item_id = obj.at("item_id").get<std::string>();
    auto item = corpus.find_item(item_id);
    if (!item)
      throw AnalysisError("dynamics references unknown item '" + item_id + "' (line " +
                          std::to_string(line_no) + ")");
    DynKey key{*item, -1};
    if (obj.contains("annotator_id")) {
      saw_annotator = true;
      const std::string annotator_id = obj["annotator_id"].get<std::string>();
      auto annotator = corpus.find_annotator(annotator_id);
      if (!annotator)
        throw AnalysisError("dynamics references unknown annotator '" + annotator_id +
                            "' (line " + std::to_string(line_no) + ")");
      key.annotator = *annotator;
    } else {
      saw_item_only = true;
    }
    const std::string gold_name = obj.at("gold").get<std::string>();
    auto gold = corpus.find_label(gold_name);
    if (!gold)
      throw AnalysisError("dynamics references unknown label '" + gold_name + "' (line " +
                          std::to_string(line_no) + ")");
    const std::string pred_name = obj.at("predicted").get<std::string>();
    auto predicted = corpus.find_label(pred_name);
    if (!predicted)
      throw AnalysisError("dynamics references unknown label '" + pred_name + "' (line " +
                          std::to_string(line_no) + ")");
    const double gold_prob = obj.at("gold_prob").get<double>();
    if (!std::isfinite(gold_prob) || gold_prob < 0.0 || gold_prob > 1.0)
      throw AnalysisError("gold_prob out of [0,1] (line " + std::to_string(line_no) + ")");
    const int epoch = obj.at("epoch").get<int>();
    if (epoch < 1) throw AnalysisError("epoch must be >= 1 (line " + std::to_string(line_no) + ")");

    auto [it, inserted] = gold_of.try_emplace(key, *gold);
    if (!inserted && it->second != *gold)
      throw AnalysisError("inconsistent gold label for item '" + item_id + "' (line " +
                          std::to_string(line_no) + ")");
    by_key[key].push_back({epoch, gold_prob, *gold, *predicted});
  }

  if (by_key.empty()) throw AnalysisError("dynamics file contains no records");
  if (saw_annotator && saw_item_only)
    throw AnalysisError("dynamics file mixes single-mode and multi-mode keys");

  int epochs = 0;
  for (const auto& [key, records] : by_key)
    for (const RawRecord& r : records) epochs = std::max(epochs, r.epoch);

  DynamicsLog log;
  log.mode = saw_annotator ? TrainMode::multi : TrainMode::single;
  log.epochs = epochs;
  for (auto& [key, records] : by_key) {
    std::sort(records.begin(), records.end(),
              [](const RawRecord& a, const RawRecord& b) { return a.epoch < b.epoch; });
    DynamicsEntry entry;
    entry.key = key;
    entry.gold = gold_of.at(key);
    std::string key_name = "item '" + corpus.item_id(key.item) + "'";
    if (key.annotator >= 0) key_name += ", annotator '" + corpus.annotator_id(key.annotator) + "'";
    if (records.size() != static_cast<std::size_t>(epochs))
      throw AnalysisError("incomplete dynamics for " + key_name + ": expected " +
                          std::to_string(epochs) + " epochs, found " +
                          std::to_string(records.size()));
    for (int e = 1; e <= epochs; ++e) {
      if (records[e - 1].epoch != e)
        throw AnalysisError("dynamics for " + key_name + " missing epoch " + std::to_string(e));
      entry.gold_probs.push_back(records[e - 1].gold_prob);
      entry.predicted.push_back(records[e - 1].predicted);
    }
    log.entries.push_back(std::move(entry));
  }
  return log;
}

namespace {

nlohmann::json row_json(const char* kind, const std::vector<double>& values) {
  nlohmann::json obj;
  obj["kind"] = kind;
  obj["values"] = values;
  return obj;
}

}  // namespace

void write_model(std::ostream& out, const SingleGtModel& model) {
  nlohmann::json meta;
  meta["kind"] = "meta";
  meta["mode"] = "single";
  meta["dim"] = model.dim;
  meta["k"] = model.k;
  meta["ngram_order"] = model.ngram_order;
  meta["labels"] = model.labels;
  out << meta.dump() << '\n';
  out << row_json("bias", model.bias).dump() << '\n';
  for (int k = 0; k < model.k; ++k) {
    nlohmann::json obj = row_json("weights", model.weights[k]);
    obj["label_index"] = k;
    out << obj.dump() << '\n';
  }
}

void write_model(std::ostream& out, const MultiGtModel& model) {
  nlohmann::json meta;
  meta["kind"] = "meta";
  meta["mode"] = "multi";
  meta["dim"] = model.dim;
  meta["k"] = model.k;
  meta["annotator_dim"] = model.annotator_dim;
  meta["ngram_order"] = model.ngram_order;
  meta["labels"] = model.labels;
  out << meta.dump() << '\n';
  out << row_json("bias", model.bias).dump() << '\n';
  for (int k = 0; k < model.k; ++k) {
    nlohmann::json obj = row_json("weights", model.weights[k]);
    obj["label_index"] = k;
    out << obj.dump() << '\n';
  }
  for (int k = 0; k < model.k; ++k) {
    nlohmann::json obj = row_json("annot_proj", model.annot_proj[k]);
    obj["label_index"] = k;
    out << obj.dump() << '\n';
  }
  out << row_json("fallback_embedding", model.fallback_embedding).dump() << '\n';
  for (std::size_t a = 0; a < model.annotator_ids.size(); ++a) {
    nlohmann::json obj = row_json("embedding", model.embeddings[a]);
    obj["annotator_id"] = model.annotator_ids[a];
    out << obj.dump() << '\n';
  }
}

std::variant<SingleGtModel, MultiGtModel> load_model(std::istream& in) {
  std::string line;
  nlohmann::json meta;
  std::vector<nlohmann::json> rows;
  while (std::getline(in, line)) {
    if (is_skippable_line(line)) continue;
    nlohmann::json obj = nlohmann::json::parse(line);
    if (obj.at("kind") == "meta")
      meta = obj;
    else
      rows.push_back(std::move(obj));
  }
  if (meta.is_null()) throw IoError("model file has no meta record");
  const std::string mode = meta.at("mode").get<std::string>();

  auto fill_common = [&](auto& model) {
    model.dim = meta.at("dim").get<std::uint32_t>();
    model.k = meta.at("k").get<int>();
    model.ngram_order = meta.at("ngram_order").get<int>();
    model.labels = meta.at("labels").get<std::vector<std::string>>();
    model.weights.assign(model.k, {});
    for (const nlohmann::json& row : rows) {
      const std::string kind = row.at("kind").get<std::string>();
      if (kind == "bias")
        model.bias = row.at("values").get<std::vector<double>>();
      else if (kind == "weights")
        model.weights[row.at("label_index").get<int>()] =
            row.at("values").get<std::vector<double>>();
    }
  };

  if (mode == "single") {
    SingleGtModel model;
    fill_common(model);
    return model;
  }
  MultiGtModel model;
  fill_common(model);
  model.annotator_dim = meta.at("annotator_dim").get<int>();
  model.annot_proj.assign(model.k, {});
  for (const nlohmann::json& row : rows) {
    const std::string kind = row.at("kind").get<std::string>();
    if (kind == "annot_proj")
      model.annot_proj[row.at("label_index").get<int>()] =
          row.at("values").get<std::vector<double>>();
    else if (kind == "fallback_embedding")
      model.fallback_embedding = row.at("values").get<std::vector<double>>();
    else if (kind == "embedding") {
      model.annotator_index[row.at("annotator_id").get<std::string>()] =
          static_cast<std::int32_t>(model.annotator_ids.size());
      model.annotator_ids.push_back(row.at("annotator_id").get<std::string>());
      model.embeddings.push_back(row.at("values").get<std::vector<double>>());
    }
  }
  return model;
}

}  // namespace annomap
