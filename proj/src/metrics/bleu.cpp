#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "phonecap/metrics.hpp"

namespace phonecap::metrics {

namespace {

void check_order(int max_n) {
  if (max_n < 1 || max_n > kMaxBleuOrder) {
    throw Error("BLEU order must be in 1.." + std::to_string(kMaxBleuOrder) + ", got " +
                std::to_string(max_n));
  }
}

std::vector<std::size_t> lengths_of(std::span<const PhonemeSequence> refs) {
  std::vector<std::size_t> lens;
  lens.reserve(refs.size());
  for (const auto& r : refs) lens.push_back(r.size());
  return lens;
}

std::string bleu_name(int max_n) { return "BLEU" + std::to_string(max_n); }

}  // namespace

NgramProfile::NgramProfile(Sequence sequence, int n) : n_(n) {
  if (n < 1) throw Error("n-gram order must be >= 1");
  const auto order = static_cast<std::size_t>(n);
  if (sequence.size() < order) return;
  for (std::size_t i = 0; i + order <= sequence.size(); ++i) {
    ++counts_[Ngram(sequence.begin() + i, sequence.begin() + i + order)];
    ++total_;
  }
}

std::size_t NgramProfile::count(const Ngram& gram) const {
  auto it = counts_.find(gram);
  return it == counts_.end() ? 0 : it->second;
}

ClippedCounts modified_precision(Sequence candidate, std::span<const PhonemeSequence> references,
                                 int n) {
  const NgramProfile cand(candidate, n);
  std::map<Ngram, std::size_t> max_ref;
  for (const auto& ref : references) {
    const NgramProfile profile(ref, n);
    for (const auto& [gram, c] : profile.counts()) {
      auto& m = max_ref[gram];
      m = std::max(m, c);
    }
  }
  ClippedCounts out;
  out.total = cand.total();
  for (const auto& [gram, c] : cand.counts()) {
    auto it = max_ref.find(gram);
    if (it != max_ref.end()) out.matches += std::min(c, it->second);
  }
  return out;
}

std::size_t closest_reference_length(std::size_t candidate_len,
                                     std::span<const std::size_t> reference_lens) {
  if (reference_lens.empty()) throw Error("brevity penalty needs at least one reference");
  std::size_t best = reference_lens.front();
  auto diff = [&](std::size_t r) {
    return r > candidate_len ? r - candidate_len : candidate_len - r;
  };
  for (auto r : reference_lens) {
    if (diff(r) < diff(best) || (diff(r) == diff(best) && r < best)) best = r;
  }
  return best;
}

double brevity_penalty(std::size_t candidate_len, std::span<const std::size_t> reference_lens) {
  if (candidate_len == 0) throw Error("brevity penalty needs a non-empty candidate");
  const auto r = closest_reference_length(candidate_len, reference_lens);
  if (candidate_len >= r) return 1.0;
  return std::exp(1.0 - static_cast<double>(r) / static_cast<double>(candidate_len));
}

MetricScore bleu_corpus(std::span<const EvalPair> pairs, int max_n) {
  check_order(max_n);
  if (pairs.empty()) throw Error("BLEU needs at least one caption pair");

  std::vector<ClippedCounts> pooled(static_cast<std::size_t>(max_n));
  std::size_t cand_len = 0;
  std::size_t ref_len = 0;
  for (const auto& pair : pairs) {
    for (int n = 1; n <= max_n; ++n) {
      const auto c = modified_precision(pair.candidate, pair.references, n);
      pooled[n - 1].matches += c.matches;
      pooled[n - 1].total += c.total;
    }
    const auto lens = lengths_of(pair.references);
    cand_len += pair.candidate.size();
    ref_len += closest_reference_length(pair.candidate.size(), lens);
  }

  MetricScore score{bleu_name(max_n), 0.0, {}};
  double log_sum = 0.0;
  for (const auto& c : pooled) {
    if (c.matches == 0) return score;
    log_sum += std::log(static_cast<double>(c.matches) / static_cast<double>(c.total));
  }
  const double bp =
      cand_len >= ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
  score.value = 100.0 * bp * std::exp(log_sum / max_n);
  return score;
}

double bleu_sentence(Sequence candidate, std::span<const PhonemeSequence> references, int max_n,
                     double epsilon) {
  check_order(max_n);
  if (!(epsilon > 0.0)) throw Error("BLEU smoothing epsilon must be positive");
  if (references.empty()) throw Error("BLEU needs at least one reference");
  if (candidate.empty()) return 0.0;

  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const auto c = modified_precision(candidate, references, n);
    double p;
    if (c.matches > 0) {
      p = static_cast<double>(c.matches) / static_cast<double>(c.total);
    } else {
      p = c.total > 0 ? epsilon / static_cast<double>(c.total) : epsilon;
    }
    log_sum += std::log(p);
  }
  const auto lens = lengths_of(references);
  return 100.0 * brevity_penalty(candidate.size(), lens) * std::exp(log_sum / max_n);
}

MetricScore bleu_per_pair_average(std::span<const EvalPair> pairs, int max_n, double epsilon) {
  check_order(max_n);
  if (pairs.empty()) throw Error("BLEU needs at least one caption pair");

  MetricScore score{bleu_name(max_n), 0.0, {}};
  double sum = 0.0;
  std::size_t expansions = 0;
  for (const auto& pair : pairs) {
    if (pair.references.empty()) throw Error("image " + pair.image + " has no references");
    double image_sum = 0.0;
    for (const auto& ref : pair.references) {
      const double b = bleu_sentence(pair.candidate, std::span(&ref, 1), max_n, epsilon);
      image_sum += b;
      sum += b;
      ++expansions;
    }
    score.per_caption[pair.image] = image_sum / static_cast<double>(pair.references.size());
  }
  score.value = sum / static_cast<double>(expansions);
  return score;
}

}  // namespace phonecap::metrics
