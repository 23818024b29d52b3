#pragma once

// Caption metrics over phoneme sequences: BLEU (orders 1..8, corpus pooling or
// per-reference averaging), PER, ROUGE-L, METEOR (exact matching) and CIDEr.
// Every score is reported on a 0..100 scale; PER may exceed 100.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "phonecap/core.hpp"

namespace phonecap::metrics {

inline constexpr int kMaxBleuOrder = 8;
inline constexpr double kDefaultBleuEpsilon = 1e-9;
inline constexpr double kDefaultRougeBeta = 1.2;
inline constexpr int kDefaultCiderOrder = 4;
// Largest number of maximum matchings searched exhaustively by METEOR.
inline constexpr double kMeteorExhaustiveLimit = 1048576.0;  // 2^20

using Sequence = std::span<const Symbol>;
using Ngram = std::vector<Symbol>;

// Multiset of the order-n n-grams of one sequence.
class NgramProfile {
 public:
  NgramProfile(Sequence sequence, int n);

  int order() const { return n_; }
  std::size_t count(const Ngram& gram) const;
  std::size_t total() const { return total_; }
  const std::map<Ngram, std::size_t>& counts() const { return counts_; }

 private:
  int n_;
  std::size_t total_ = 0;
  std::map<Ngram, std::size_t> counts_;
};

struct MetricScore {
  std::string metric;
  double value = 0.0;
  std::map<ImageId, double> per_caption;
};

// --- BLEU ----------------------------------------------------------------

struct ClippedCounts {
  std::size_t matches = 0;
  std::size_t total = 0;
};

ClippedCounts modified_precision(Sequence candidate, std::span<const PhonemeSequence> references,
                                 int n);

// Reference length closest to the candidate length; ties go to the shorter one.
std::size_t closest_reference_length(std::size_t candidate_len,
                                     std::span<const std::size_t> reference_lens);
double brevity_penalty(std::size_t candidate_len, std::span<const std::size_t> reference_lens);

// Pooled n-gram statistics over the whole corpus, BP from summed lengths.
MetricScore bleu_corpus(std::span<const EvalPair> pairs, int max_n);

// Single-caption BLEU; zero precisions are replaced by epsilon/total
// (epsilon when the candidate has no n-grams of that order).
double bleu_sentence(Sequence candidate, std::span<const PhonemeSequence> references, int max_n,
                     double epsilon = kDefaultBleuEpsilon);

// Mean of sentence BLEU over every (candidate, single reference) expansion.
// per_caption holds the mean over each image's references.
MetricScore bleu_per_pair_average(std::span<const EvalPair> pairs, int max_n,
                                  double epsilon = kDefaultBleuEpsilon);

// --- PER / LCS / ROUGE-L ---------------------------------------------------

std::size_t edit_distance(Sequence a, Sequence b);

// 100 * Levenshtein(candidate, reference) / |reference|.
double per(Sequence candidate, Sequence reference);

enum class PerMode { best_reference, per_pair_average };

MetricScore per_aggregate(std::span<const EvalPair> pairs, PerMode mode);

std::size_t lcs_length(Sequence a, Sequence b);

double rouge_l(Sequence candidate, std::span<const PhonemeSequence> references,
               double beta = kDefaultRougeBeta);

// --- METEOR ----------------------------------------------------------------

struct MeteorParams {
  double recall_weight = 9.0;
  double penalty_gamma = 0.5;
  double penalty_beta = 3.0;

  void validate() const;
};

struct Alignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  // Set when the matching space exceeded the exhaustive limit and the
  // greedy longest-run alignment was used instead.
  bool heuristic = false;
};

// Number of distinct maximum one-to-one matchings of identical symbols.
double count_maximum_matchings(Sequence candidate, Sequence reference);

// Maximum matching of identical symbols with the fewest chunks.
Alignment align_exact(Sequence candidate, Sequence reference,
                      double exhaustive_limit = kMeteorExhaustiveLimit);

struct MeteorResult {
  double score = 0.0;
  bool heuristic = false;
};

MeteorResult meteor(Sequence candidate, std::span<const PhonemeSequence> references,
                    const MeteorParams& params = {});

// --- CIDEr -----------------------------------------------------------------

// Plain CIDEr: TF-IDF n-gram vectors, mean cosine against the references,
// averaged over orders 1..max_n. Document frequencies are counted over the
// reference sets of the given pairs.
MetricScore cider(std::span<const EvalPair> pairs, int max_n = kDefaultCiderOrder);

}  // namespace phonecap::metrics
