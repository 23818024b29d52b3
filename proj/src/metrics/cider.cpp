#include <cmath>
#include <set>

#include "phonecap/metrics.hpp"

namespace phonecap::metrics {

namespace {

using TfIdfVector = std::map<Ngram, double>;

TfIdfVector tf_idf(const NgramProfile& profile, const std::map<Ngram, std::size_t>& doc_freq,
                   double corpus_size) {
  TfIdfVector vec;
  if (profile.total() == 0) return vec;
  const auto total = static_cast<double>(profile.total());
  for (const auto& [gram, count] : profile.counts()) {
    auto it = doc_freq.find(gram);
    const double df = it == doc_freq.end() ? 1.0 : static_cast<double>(it->second);
    vec[gram] = static_cast<double>(count) / total * std::log(corpus_size / df);
  }
  return vec;
}

double cosine(const TfIdfVector& a, const TfIdfVector& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [gram, v] : a) {
    na += v * v;
    auto it = b.find(gram);
    if (it != b.end()) dot += v * it->second;
  }
  for (const auto& [gram, v] : b) nb += v * v;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

MetricScore cider(std::span<const EvalPair> pairs, int max_n) {
  if (pairs.empty()) throw Error("CIDEr needs at least one caption pair");
  if (max_n < 1) throw Error("CIDEr order must be >= 1");

  // Phase 1: document frequency of every reference n-gram, one count per image.
  std::vector<std::map<Ngram, std::size_t>> doc_freq(static_cast<std::size_t>(max_n));
  for (const auto& pair : pairs) {
    for (int n = 1; n <= max_n; ++n) {
      std::set<Ngram> seen;
      for (const auto& ref : pair.references) {
        const NgramProfile profile(ref, n);
        for (const auto& [gram, c] : profile.counts()) seen.insert(gram);
      }
      for (const auto& gram : seen) ++doc_freq[n - 1][gram];
    }
  }

  // Phase 2: per-caption cosine similarities.
  const auto corpus_size = static_cast<double>(pairs.size());
  MetricScore score{"CIDEr", 0.0, {}};
  double sum = 0.0;
  for (const auto& pair : pairs) {
    if (pair.references.empty()) throw Error("image " + pair.image + " has no references");
    double caption = 0.0;
    for (int n = 1; n <= max_n; ++n) {
      const auto& df = doc_freq[n - 1];
      const auto cand = tf_idf(NgramProfile(pair.candidate, n), df, corpus_size);
      double cider_n = 0.0;
      for (const auto& ref : pair.references) {
        cider_n += cosine(cand, tf_idf(NgramProfile(ref, n), df, corpus_size));
      }
      caption += cider_n / static_cast<double>(pair.references.size());
    }
    caption = 100.0 * caption / max_n;
    score.per_caption[pair.image] = caption;
    sum += caption;
  }
  score.value = sum / corpus_size;
  return score;
}

}  // namespace phonecap::metrics
