#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "phonecap/metrics.hpp"

namespace phonecap::metrics {

namespace {

// Chunk count of a matching given as cand position -> ref position (-1 when unmatched).
std::size_t count_chunks(const std::vector<long>& ref_of) {
  std::size_t chunks = 0;
  for (std::size_t i = 0; i < ref_of.size(); ++i) {
    if (ref_of[i] < 0) continue;
    const bool continues = i > 0 && ref_of[i - 1] >= 0 && ref_of[i] == ref_of[i - 1] + 1;
    if (!continues) ++chunks;
  }
  return chunks;
}

class ChunkSearch {
 public:
  ChunkSearch(Sequence cand, Sequence ref) : cand_(cand), used_(ref.size(), false) {
    for (std::size_t j = 0; j < ref.size(); ++j) ref_positions_[ref[j]].push_back(j);
    std::unordered_map<std::string_view, std::size_t> cand_count;
    for (const auto& s : cand) ++cand_count[s];
    for (const auto& [s, c] : cand_count) {
      auto it = ref_positions_.find(s);
      const std::size_t r = it == ref_positions_.end() ? 0 : it->second.size();
      spare_[s] = c > r ? c - r : 0;
    }
  }

  std::size_t run(std::size_t matches) {
    best_ = matches + 1;
    if (matches > 0) dfs(0, -1, 0);
    return best_;
  }

 private:
  void dfs(std::size_t i, long prev_ref, std::size_t chunks) {
    if (chunks >= best_) return;
    if (i == cand_.size()) {
      best_ = chunks;
      return;
    }
    const std::string_view s = cand_[i];
    auto it = ref_positions_.find(s);
    if (it != ref_positions_.end()) {
      const auto& positions = it->second;
      // Extending the current chunk first tightens the bound early.
      if (prev_ref >= 0) {
        const auto next = static_cast<std::size_t>(prev_ref + 1);
        if (next < used_.size() && !used_[next] &&
            std::binary_search(positions.begin(), positions.end(), next)) {
          used_[next] = true;
          dfs(i + 1, static_cast<long>(next), chunks);
          used_[next] = false;
          if (best_ == 1) return;
        }
      }
      for (auto j : positions) {
        if (used_[j] || (prev_ref >= 0 && j == static_cast<std::size_t>(prev_ref + 1))) continue;
        used_[j] = true;
        dfs(i + 1, static_cast<long>(j), chunks + 1);
        used_[j] = false;
        if (best_ == 1) return;
      }
    }
    auto& spare = spare_[s];
    if (spare > 0) {
      --spare;
      dfs(i + 1, -1, chunks);
      ++spare;
    }
  }

  Sequence cand_;
  std::vector<bool> used_;
  std::unordered_map<std::string_view, std::vector<std::size_t>> ref_positions_;
  std::unordered_map<std::string_view, std::size_t> spare_;
  std::size_t best_ = 0;
};

// Repeatedly matches the longest run of unmatched identical symbols,
// leftmost in the candidate first, then leftmost in the reference.
std::vector<long> greedy_longest_runs(Sequence cand, Sequence ref) {
  std::vector<long> ref_of(cand.size(), -1);
  std::vector<bool> ref_used(ref.size(), false);
  for (;;) {
    std::size_t best_len = 0, best_i = 0, best_j = 0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (ref_of[i] >= 0) continue;
      for (std::size_t j = 0; j < ref.size(); ++j) {
        std::size_t len = 0;
        while (i + len < cand.size() && j + len < ref.size() && ref_of[i + len] < 0 &&
               !ref_used[j + len] && cand[i + len] == ref[j + len]) {
          ++len;
        }
        if (len > best_len) {
          best_len = len;
          best_i = i;
          best_j = j;
        }
      }
    }
    if (best_len == 0) break;
    for (std::size_t k = 0; k < best_len; ++k) {
      ref_of[best_i + k] = static_cast<long>(best_j + k);
      ref_used[best_j + k] = true;
    }
  }
  return ref_of;
}

std::size_t maximum_matches(Sequence cand, Sequence ref) {
  std::unordered_map<std::string_view, std::size_t> counts;
  for (const auto& s : ref) ++counts[s];
  std::size_t m = 0;
  for (const auto& s : cand) {
    auto it = counts.find(s);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++m;
    }
  }
  return m;
}

}  // namespace

void MeteorParams::validate() const {
  if (!(recall_weight > 0.0)) throw Error("METEOR recall weight must be positive");
  if (!(penalty_gamma >= 0.0 && penalty_gamma <= 1.0)) {
    throw Error("METEOR penalty gamma must be in [0, 1]");
  }
  if (!(penalty_beta >= 1.0)) throw Error("METEOR penalty beta must be >= 1");
}

double count_maximum_matchings(Sequence candidate, Sequence reference) {
  std::unordered_map<std::string_view, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& s : candidate) ++counts[s].first;
  for (const auto& s : reference) ++counts[s].second;
  double total = 1.0;
  for (const auto& [s, cr] : counts) {
    const auto hi = std::max(cr.first, cr.second);
    const auto lo = std::min(cr.first, cr.second);
    // Injective maps from the smaller occurrence set into the larger one.
    for (std::size_t k = 0; k < lo; ++k) total *= static_cast<double>(hi - k);
  }
  return total;
}

Alignment align_exact(Sequence candidate, Sequence reference, double exhaustive_limit) {
  Alignment out;
  out.matches = maximum_matches(candidate, reference);
  if (out.matches == 0) return out;
  if (count_maximum_matchings(candidate, reference) <= exhaustive_limit) {
    out.chunks = ChunkSearch(candidate, reference).run(out.matches);
  } else {
    out.chunks = count_chunks(greedy_longest_runs(candidate, reference));
    out.heuristic = true;
  }
  return out;
}

MeteorResult meteor(Sequence candidate, std::span<const PhonemeSequence> references,
                    const MeteorParams& params) {
  params.validate();
  if (references.empty()) throw Error("METEOR needs at least one reference");
  MeteorResult result;
  for (const auto& ref : references) {
    const auto a = align_exact(candidate, ref);
    result.heuristic = result.heuristic || a.heuristic;
    if (a.matches == 0) continue;
    const double m = static_cast<double>(a.matches);
    const double precision = m / static_cast<double>(candidate.size());
    const double recall = m / static_cast<double>(ref.size());
    const double fmean = (params.recall_weight + 1.0) * precision * recall /
                         (recall + params.recall_weight * precision);
    const double penalty =
        params.penalty_gamma * std::pow(static_cast<double>(a.chunks) / m, params.penalty_beta);
    result.score = std::max(result.score, 100.0 * fmean * (1.0 - penalty));
  }
  return result;
}

}  // namespace phonecap::metrics
