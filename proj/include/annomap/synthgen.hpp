#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "annomap/corpus.hpp"

namespace annomap {

// Deterministic labeling rule over latent item topics.
struct Archetype {
  std::vector<LabelId> topic_labels;  // one label per topic
  double share = 1.0;                 // population share, shares sum to 1
};

struct SynthConfig {
  int n_items = 1000;
  int n_annotators = 50;
  int n_labels = 2;
  int n_topics = 2;
  int annotations_per_item = 5;
  std::vector<Archetype> archetypes;
  double noise_rate = 0.0;
  // When > 0, overrides n_annotators so each annotator lands near this many
  // annotations.
  int annotations_per_annotator_target = 0;
  int vocab_size = 240;
  int tokens_per_item = 12;
  double shared_token_fraction = 0.3;  // vocabulary overlap across topics
  std::uint64_t seed = 0;
};

struct AnnotationTruth {
  std::int32_t item;
  std::int32_t annotator;
  LabelId assigned;         // label present in the corpus
  LabelId archetype_label;  // what the annotator's rule dictates
  bool flipped;             // assigned != archetype_label due to noise
};

// Ground-truth bookkeeping: enough to recompute every annotation without the
// corpus.
struct TruthRecord {
  std::vector<int> item_topic;              // per item
  std::vector<int> annotator_archetype;     // per annotator
  std::vector<AnnotationTruth> annotations;
  std::vector<Archetype> archetypes;
};

struct SynthResult {
  AnnotatedCorpus corpus;
  TruthRecord truth;
};

// Pure function of the config. Items draw topic-indicative token pools; each
// annotator follows one archetype; each annotation is the archetype's label
// for the item's topic, flipped to a uniformly random other label with
// probability noise_rate. Throws ValidationError on infeasible configs.
SynthResult generate(const SynthConfig& config);

struct FlipLogEntry {
  std::size_t annotation_index;  // into corpus.annotations()
  LabelId old_label;
  LabelId new_label;
};

struct NoiseResult {
  AnnotatedCorpus corpus;
  std::vector<FlipLogEntry> flips;
};

// Independently flips each annotation to a uniformly random other label with
// the given probability.
NoiseResult inject_label_noise(const AnnotatedCorpus& corpus, double rate, std::uint64_t seed);

void write_truth(std::ostream& out, const TruthRecord& truth, const AnnotatedCorpus& corpus);

}  // namespace annomap
