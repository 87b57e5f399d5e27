#include "annomap/cartography.hpp"

#include <cmath>
#include <ostream>

#include "annomap/errors.hpp"
#include "annomap/io.hpp"

namespace annomap {

double confidence(std::span<const double> gold_probs) {
  if (gold_probs.empty()) throw AnalysisError("confidence: empty epoch series");
  double sum = 0.0;
  for (double p : gold_probs) sum += p;
  return sum / static_cast<double>(gold_probs.size());
}

double variability(std::span<const double> gold_probs) {
  if (gold_probs.empty()) throw AnalysisError("variability: empty epoch series");
  const double mean = confidence(gold_probs);
  double sum_sq = 0.0;
  for (double p : gold_probs) sum_sq += (p - mean) * (p - mean);
  // population standard deviation: divide by the epoch count
  return std::sqrt(sum_sq / static_cast<double>(gold_probs.size()));
}

double correctness(std::span<const LabelId> predicted, LabelId gold) {
  if (predicted.empty()) throw AnalysisError("correctness: empty epoch series");
  std::size_t correct = 0;
  for (LabelId p : predicted)
    if (p == gold) ++correct;
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

std::vector<DataMapPoint> build_map(const DynamicsLog& log, const AnnotatedCorpus& corpus) {
  std::vector<DataMapPoint> map;
  map.reserve(log.entries.size());
  for (const DynamicsEntry& entry : log.entries) {
    if (entry.gold_probs.size() != static_cast<std::size_t>(log.epochs) ||
        entry.predicted.size() != static_cast<std::size_t>(log.epochs)) {
      std::string key = "item '" + corpus.item_id(entry.key.item) + "'";
      if (entry.key.annotator >= 0)
        key += ", annotator '" + corpus.annotator_id(entry.key.annotator) + "'";
      throw AnalysisError("incomplete dynamics for " + key + ": expected " +
                          std::to_string(log.epochs) + " epochs, found " +
                          std::to_string(entry.gold_probs.size()));
    }
    DataMapPoint point;
    point.key = entry.key;
    point.gold = entry.gold;
    point.confidence = confidence(entry.gold_probs);
    point.variability = variability(entry.gold_probs);
    point.correctness = correctness(entry.predicted, entry.gold);
    map.push_back(point);
  }
  return map;
}

void write_map(std::ostream& out, const std::vector<DataMapPoint>& map, TrainMode mode,
               const AnnotatedCorpus& corpus) {
  out << "item_id\tannotator_id\tgold\tconfidence\tvariability\tcorrectness\n";
  for (const DataMapPoint& p : map) {
    out << corpus.item_id(p.key.item) << '\t';
    if (mode == TrainMode::multi) out << corpus.annotator_id(p.key.annotator);
    out << '\t' << corpus.label_name(p.gold) << '\t' << format_double(p.confidence) << '\t'
        << format_double(p.variability) << '\t' << format_double(p.correctness) << '\n';
  }
}

}  // namespace annomap
