#include "annomap/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include <json.hpp>

#include "annomap/errors.hpp"
#include "annomap/rng.hpp"

namespace annomap {

namespace {

std::string padded_id(const char* prefix, int index, int width) {
  std::string digits = std::to_string(index);
  std::string out = prefix;
  out.append(width > static_cast<int>(digits.size()) ? width - digits.size() : 0, '0');
  out += digits;
  return out;
}

int id_width(int count) {
  int width = 1;
  for (int v = count - 1; v >= 10; v /= 10) ++width;
  return width;
}

void validate(const SynthConfig& config, int n_annotators) {
  if (config.n_items < 1) throw ValidationError("synth: n_items must be >= 1");
  if (config.n_labels < 2) throw ValidationError("synth: n_labels must be >= 2");
  if (config.n_topics < 1) throw ValidationError("synth: n_topics must be >= 1");
  if (config.annotations_per_item < 1)
    throw ValidationError("synth: annotations_per_item must be >= 1");
  if (n_annotators < config.annotations_per_item)
    throw ValidationError("synth: annotations_per_item (" +
                          std::to_string(config.annotations_per_item) +
                          ") exceeds annotator count (" + std::to_string(n_annotators) + ")");
  if (config.noise_rate < 0.0 || config.noise_rate > 1.0)
    throw ValidationError("synth: noise_rate must be in [0, 1]");
  if (config.archetypes.empty()) throw ValidationError("synth: at least one archetype required");
  double share_sum = 0.0;
  for (const Archetype& arch : config.archetypes) {
    if (arch.topic_labels.size() != static_cast<std::size_t>(config.n_topics))
      throw ValidationError("synth: archetype must assign a label to every topic");
    for (LabelId label : arch.topic_labels)
      if (label < 0 || label >= config.n_labels)
        throw ValidationError("synth: archetype label out of range");
    if (arch.share < 0.0) throw ValidationError("synth: archetype share must be >= 0");
    share_sum += arch.share;
  }
  if (std::abs(share_sum - 1.0) > 1e-9)
    throw ValidationError("synth: archetype shares must sum to 1");
  if (config.vocab_size < 2 * config.n_topics)
    throw ValidationError("synth: vocab_size too small for the topic count");
  if (config.tokens_per_item < 1) throw ValidationError("synth: tokens_per_item must be >= 1");
  if (config.shared_token_fraction < 0.0 || config.shared_token_fraction >= 1.0)
    throw ValidationError("synth: shared_token_fraction must be in [0, 1)");
}

// Largest-remainder allocation of n annotators to archetype shares.
std::vector<int> allocate_archetypes(const std::vector<Archetype>& archetypes, int n) {
  const std::size_t a = archetypes.size();
  std::vector<int> counts(a, 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < a; ++i) {
    const double exact = archetypes[i].share * n;
    counts[i] = static_cast<int>(exact);
    assigned += counts[i];
    remainders.push_back({exact - counts[i], i});
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  for (int extra = 0; extra < n - assigned; ++extra)
    ++counts[remainders[extra % a].second];

  std::vector<int> assignment;
  assignment.reserve(n);
  for (std::size_t i = 0; i < a; ++i)
    assignment.insert(assignment.end(), counts[i], static_cast<int>(i));
  return assignment;
}

}  // namespace

SynthResult generate(const SynthConfig& config) {
  int n_annotators = config.n_annotators;
  if (config.annotations_per_annotator_target > 0) {
    const double total = static_cast<double>(config.n_items) * config.annotations_per_item;
    n_annotators = std::max(
        config.annotations_per_item,
        static_cast<int>(std::llround(total / config.annotations_per_annotator_target)));
  }
  validate(config, n_annotators);

  Rng rng(config.seed);
  const int item_width = id_width(config.n_items);
  const int annotator_width = id_width(n_annotators);
  const int label_width = id_width(config.n_labels);

  std::vector<std::string> label_names;
  for (int l = 0; l < config.n_labels; ++l)
    label_names.push_back(padded_id("L", l, label_width));

  // Vocabulary: a shared pool plus per-topic pools.
  const int shared_count =
      static_cast<int>(config.vocab_size * config.shared_token_fraction);
  const int topic_pool = (config.vocab_size - shared_count) / config.n_topics;
  if (topic_pool < 1) throw ValidationError("synth: per-topic token pool is empty");
  auto token_name = [&](int index) { return padded_id("w", index, id_width(config.vocab_size)); };

  TruthRecord truth;
  truth.archetypes = config.archetypes;
  truth.item_topic.reserve(config.n_items);

  // Items: topic plus a token draw mixing the topic pool and the shared pool.
  std::vector<std::string> item_texts(config.n_items);
  for (int i = 0; i < config.n_items; ++i) {
    const int topic = static_cast<int>(rng.below(config.n_topics));
    truth.item_topic.push_back(topic);
    std::string text;
    for (int t = 0; t < config.tokens_per_item; ++t) {
      int token_index;
      if (shared_count > 0 && rng.next_double() < config.shared_token_fraction) {
        token_index = static_cast<int>(rng.below(shared_count));
      } else {
        token_index = shared_count + topic * topic_pool + static_cast<int>(rng.below(topic_pool));
      }
      if (t > 0) text += ' ';
      text += token_name(token_index);
    }
    item_texts[i] = std::move(text);
  }

  truth.annotator_archetype = allocate_archetypes(config.archetypes, n_annotators);

  // Annotator assignment walks a shuffled ring so per-annotator counts stay
  // within one of each other.
  std::vector<std::int32_t> ring(n_annotators);
  std::iota(ring.begin(), ring.end(), 0);
  rng.shuffle(ring);

  std::vector<AnnotationRecord> records;
  records.reserve(static_cast<std::size_t>(config.n_items) * config.annotations_per_item);
  std::size_t ring_pos = 0;
  for (int i = 0; i < config.n_items; ++i) {
    const int topic = truth.item_topic[i];
    for (int j = 0; j < config.annotations_per_item; ++j) {
      const std::int32_t annotator = ring[ring_pos % n_annotators];
      ++ring_pos;
      const int archetype = truth.annotator_archetype[annotator];
      const LabelId rule_label = config.archetypes[archetype].topic_labels[topic];
      LabelId assigned = rule_label;
      bool flipped = false;
      if (config.noise_rate > 0.0 && rng.next_double() < config.noise_rate) {
        const auto other = static_cast<LabelId>(rng.below(config.n_labels - 1));
        assigned = other < rule_label ? other : other + 1;
        flipped = true;
      }
      AnnotationRecord rec;
      rec.item_id = padded_id("item", i, item_width);
      rec.annotator_id = padded_id("ann", annotator, annotator_width);
      rec.label = label_names[assigned];
      if (j == 0) {
        rec.text = item_texts[i];
        rec.has_text = true;
      }
      records.push_back(std::move(rec));
      truth.annotations.push_back({i, annotator, assigned, rule_label, flipped});
    }
  }

  SynthResult result{AnnotatedCorpus::from_records(records), std::move(truth)};

  // The corpus label vocabulary is the sorted set of observed labels; the
  // truth record's label ids are only meaningful when every label was
  // observed at least once.
  if (result.corpus.n_labels() != static_cast<std::size_t>(config.n_labels))
    throw ValidationError("synth: not every label was observed; enlarge the corpus or adjust "
                          "archetypes");

  // Re-key annotators from generation order to corpus index order (first
  // appearance along the ring). Annotators that drew no annotation are
  // dropped from the truth record.
  std::vector<int> archetype_by_corpus(result.corpus.n_annotators(), -1);
  std::vector<std::int32_t> corpus_index_of(n_annotators, -1);
  for (int a = 0; a < n_annotators; ++a) {
    auto idx = result.corpus.find_annotator(padded_id("ann", a, annotator_width));
    if (!idx) continue;
    corpus_index_of[a] = *idx;
    archetype_by_corpus[*idx] = result.truth.annotator_archetype[a];
  }
  result.truth.annotator_archetype = std::move(archetype_by_corpus);
  for (AnnotationTruth& t : result.truth.annotations) t.annotator = corpus_index_of[t.annotator];
  return result;
}

NoiseResult inject_label_noise(const AnnotatedCorpus& corpus, double rate, std::uint64_t seed) {
  if (rate < 0.0 || rate > 1.0) throw ValidationError("noise rate must be in [0, 1]");
  const auto k = static_cast<LabelId>(corpus.n_labels());
  Rng rng(seed);
  std::vector<LabelId> labels;
  labels.reserve(corpus.n_annotations());
  std::vector<FlipLogEntry> flips;
  for (std::size_t i = 0; i < corpus.n_annotations(); ++i) {
    const LabelId original = corpus.annotations()[i].label;
    LabelId label = original;
    if (rate > 0.0 && rng.next_double() < rate) {
      const auto other = static_cast<LabelId>(rng.below(k - 1));
      label = other < original ? other : other + 1;
      flips.push_back({i, original, label});
    }
    labels.push_back(label);
  }
  return {AnnotatedCorpus::clone_with_labels(corpus, labels), std::move(flips)};
}

void write_truth(std::ostream& out, const TruthRecord& truth, const AnnotatedCorpus& corpus) {
  for (std::size_t a = 0; a < truth.archetypes.size(); ++a) {
    nlohmann::json obj;
    obj["kind"] = "archetype";
    obj["index"] = a;
    obj["share"] = truth.archetypes[a].share;
    nlohmann::json labels = nlohmann::json::array();
    for (LabelId l : truth.archetypes[a].topic_labels) labels.push_back(corpus.label_name(l));
    obj["topic_labels"] = labels;
    out << obj.dump() << '\n';
  }
  for (std::size_t i = 0; i < truth.item_topic.size(); ++i) {
    nlohmann::json obj;
    obj["kind"] = "item";
    obj["item_id"] = corpus.item_id(static_cast<std::int32_t>(i));
    obj["topic"] = truth.item_topic[i];
    out << obj.dump() << '\n';
  }
  for (std::size_t a = 0; a < truth.annotator_archetype.size(); ++a) {
    nlohmann::json obj;
    obj["kind"] = "annotator";
    obj["annotator_id"] = corpus.annotator_id(static_cast<std::int32_t>(a));
    obj["archetype"] = truth.annotator_archetype[a];
    out << obj.dump() << '\n';
  }
  for (const AnnotationTruth& t : truth.annotations) {
    nlohmann::json obj;
    obj["kind"] = "annotation";
    obj["item_id"] = corpus.item_id(t.item);
    obj["annotator_id"] = corpus.annotator_id(t.annotator);
    obj["label"] = corpus.label_name(t.assigned);
    obj["archetype_label"] = corpus.label_name(t.archetype_label);
    obj["flipped"] = t.flipped;
    out << obj.dump() << '\n';
  }
}

}  // namespace annomap
