#include <algorithm>
#include <limits>

#include "phonecap/metrics.hpp"

namespace phonecap::metrics {

std::size_t edit_distance(Sequence a, Sequence b) {
  // Single-row Levenshtein with unit costs.
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

double per(Sequence candidate, Sequence reference) {
  if (reference.empty()) throw Error("PER is undefined for an empty reference");
  return 100.0 * static_cast<double>(edit_distance(candidate, reference)) /
         static_cast<double>(reference.size());
}

MetricScore per_aggregate(std::span<const EvalPair> pairs, PerMode mode) {
  if (pairs.empty()) throw Error("PER needs at least one caption pair");
  MetricScore score{"PER", 0.0, {}};
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& pair : pairs) {
    if (pair.references.empty()) throw Error("image " + pair.image + " has no references");
    double best = std::numeric_limits<double>::infinity();
    double image_sum = 0.0;
    for (const auto& ref : pair.references) {
      const double p = per(pair.candidate, ref);
      best = std::min(best, p);
      image_sum += p;
    }
    if (mode == PerMode::best_reference) {
      score.per_caption[pair.image] = best;
      sum += best;
      ++count;
    } else {
      score.per_caption[pair.image] = image_sum / static_cast<double>(pair.references.size());
      sum += image_sum;
      count += pair.references.size();
    }
  }
  score.value = sum / static_cast<double>(count);
  return score;
}

std::size_t lcs_length(Sequence a, Sequence b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(Sequence candidate, std::span<const PhonemeSequence> references, double beta) {
  if (!(beta > 0.0)) throw Error("ROUGE-L beta must be positive");
  if (references.empty()) throw Error("ROUGE-L needs at least one reference");
  const double beta2 = beta * beta;
  double best = 0.0;
  for (const auto& ref : references) {
    const auto lcs = static_cast<double>(lcs_length(candidate, ref));
    if (lcs == 0.0) continue;
    const double recall = lcs / static_cast<double>(ref.size());
    const double precision = lcs / static_cast<double>(candidate.size());
    const double f = (1.0 + beta2) * precision * recall / (recall + beta2 * precision);
    best = std::max(best, f);
  }
  return 100.0 * best;
}

}  // namespace phonecap::metrics
