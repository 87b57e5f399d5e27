#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "annomap/corpus.hpp"
#include "annomap/models.hpp"

namespace annomap {

// Mean gold-label probability across epochs.
double confidence(std::span<const double> gold_probs);

// Population standard deviation of the gold-label probability across epochs.
double variability(std::span<const double> gold_probs);

// Fraction of epochs whose predicted label equals gold.
double correctness(std::span<const LabelId> predicted, LabelId gold);

struct DataMapPoint {
  DynKey key;
  LabelId gold = -1;
  double confidence = 0.0;
  double variability = 0.0;
  double correctness = 0.0;
};

// One point per log key, in key order. Throws AnalysisError naming the key
// when an entry does not cover every epoch.
std::vector<DataMapPoint> build_map(const DynamicsLog& log, const AnnotatedCorpus& corpus);

// Tabular map file: item_id, annotator_id (empty in single mode), gold,
// confidence, variability, correctness.
void write_map(std::ostream& out, const std::vector<DataMapPoint>& map, TrainMode mode,
               const AnnotatedCorpus& corpus);

}  // namespace annomap
