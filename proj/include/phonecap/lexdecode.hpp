#pragma once

// Phoneme-to-word conversion by shortest path through a weighted lexicon
// transducer. Every (word, pronunciation) is a loop of cost base^-length, so a
// word always beats any split of its span into shorter words. Every phoneme
// also has a single-symbol fallback arc of cost `oov_cost`, rendered as
// "<SYM>", which guarantees a path for any input.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phonecap/core.hpp"

namespace phonecap::lexdecode {

inline constexpr double kDefaultBase = 2.0;
inline constexpr double kDefaultOovCost = 10.0;

class DecoderGraph {
 public:
  static DecoderGraph build(Lexicon lexicon, double base = kDefaultBase,
                            double oov_cost = kDefaultOovCost);

  const Lexicon& lexicon() const { return lexicon_; }
  double base() const { return base_; }
  double oov_cost() const { return oov_cost_; }
  double word_cost(std::size_t pronunciation_length) const;

  // Words whose pronunciation is exactly input[begin, end) are reported by
  // walking the trie from `begin`; `visit(end, word)` receives the
  // lexicographically smallest homophone for every matching span.
  template <typename Visit>
  void for_each_word_from(std::span<const Symbol> input, std::size_t begin, Visit&& visit) const;

 private:
  struct Node {
    std::vector<std::pair<Symbol, std::size_t>> children;  // sorted by symbol
    std::string word;                                       // empty unless terminal
  };

  DecoderGraph(Lexicon lexicon, double base, double oov_cost);
  std::size_t child(std::size_t node, std::string_view symbol) const;

  Lexicon lexicon_;
  double base_;
  double oov_cost_;
  std::vector<Node> trie_;
};

struct Segment {
  std::string token;  // lexicon word, or "<SYM>" for a fallback arc
  PhonemeSequence pronunciation;
  bool oov = false;
  double cost = 0.0;
};

struct Decoding {
  std::vector<std::string> words;
  std::vector<Segment> segmentation;
  double total_cost = 0.0;
  bool is_full_sentence = true;

  std::size_t oov_count() const;
  std::string text() const;  // words joined by single spaces
  PhonemeSequence concatenated_pronunciation() const;
};

std::string oov_token(std::string_view symbol);
bool is_oov_token(std::string_view token);

// Minimum-cost segmentation. Equal costs are broken by fewer fallback tokens,
// then fewer words, then the lexicographically smallest word sequence.
Decoding decode(const DecoderGraph& graph, std::span<const Symbol> input);

struct DecodeSummary {
  std::size_t captions = 0;
  std::size_t full_sentences = 0;
  std::size_t with_oov = 0;
  std::size_t oov_tokens = 0;
};

struct CorpusDecoding {
  std::vector<std::pair<ImageId, Decoding>> captions;
  DecodeSummary summary;
};

CorpusDecoding decode_corpus(const DecoderGraph& graph, std::span<const Caption> captions);

// --- inline ----------------------------------------------------------------

template <typename Visit>
void DecoderGraph::for_each_word_from(std::span<const Symbol> input, std::size_t begin,
                                      Visit&& visit) const {
  std::size_t node = 0;
  for (std::size_t end = begin; end < input.size(); ++end) {
    node = child(node, input[end]);
    if (node == 0) return;
    if (!trie_[node].word.empty()) visit(end + 1, trie_[node].word);
  }
}

}  // namespace phonecap::lexdecode
