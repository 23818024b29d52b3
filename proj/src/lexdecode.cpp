#include "phonecap/lexdecode.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace phonecap::lexdecode {

namespace {

struct PathState {
  double cost = 0.0;
  std::size_t oov = 0;
  std::vector<Segment> segments;
};

bool costs_tie(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

bool tokens_less(const std::vector<Segment>& a, const std::vector<Segment>& b) {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(),
      [](const Segment& x, const Segment& y) { return x.token < y.token; });
}

bool better(const PathState& a, const PathState& b) {
  if (!costs_tie(a.cost, b.cost)) return a.cost < b.cost;
  if (a.oov != b.oov) return a.oov < b.oov;
  if (a.segments.size() != b.segments.size()) return a.segments.size() < b.segments.size();
  return tokens_less(a.segments, b.segments);
}

void relax(std::optional<PathState>& slot, const PathState& from, Segment segment) {
  PathState next;
  next.cost = from.cost + segment.cost;
  next.oov = from.oov + (segment.oov ? 1 : 0);
  next.segments = from.segments;
  next.segments.push_back(std::move(segment));
  if (!slot || better(next, *slot)) slot = std::move(next);
}

}  // namespace

DecoderGraph DecoderGraph::build(Lexicon lexicon, double base, double oov_cost) {
  if (!(base > 1.0) || !std::isfinite(base)) {
    throw Error("decoder base must be > 1: weights must decrease with length");
  }
  if (!std::isfinite(oov_cost) || !(oov_cost > 1.0 / base)) {
    throw Error("OOV cost must exceed the largest word cost (base^-1)");
  }
  return DecoderGraph(std::move(lexicon), base, oov_cost);
}

DecoderGraph::DecoderGraph(Lexicon lexicon, double base, double oov_cost)
    : lexicon_(std::move(lexicon)), base_(base), oov_cost_(oov_cost), trie_(1) {
  // Entries iterate in word order, so the first word stored at a node is the
  // lexicographically smallest homophone.
  for (const auto& [word, prons] : lexicon_.entries()) {
    for (const auto& pron : prons) {
      std::size_t node = 0;
      for (const auto& sym : pron) {
        std::size_t next = child(node, sym);
        if (next == 0) {
          next = trie_.size();
          trie_.emplace_back();
          auto& kids = trie_[node].children;
          auto pos = std::lower_bound(kids.begin(), kids.end(), sym,
                                      [](const auto& kid, const Symbol& s) { return kid.first < s; });
          kids.insert(pos, {sym, next});
        }
        node = next;
      }
      if (trie_[node].word.empty()) trie_[node].word = word;
    }
  }
}

std::size_t DecoderGraph::child(std::size_t node, std::string_view symbol) const {
  const auto& kids = trie_[node].children;
  auto pos = std::lower_bound(kids.begin(), kids.end(), symbol,
                              [](const auto& kid, std::string_view s) { return kid.first < s; });
  if (pos == kids.end() || pos->first != symbol) return 0;
  return pos->second;
}

double DecoderGraph::word_cost(std::size_t pronunciation_length) const {
  return std::pow(base_, -static_cast<double>(pronunciation_length));
}

std::size_t Decoding::oov_count() const {
  return static_cast<std::size_t>(
      std::count_if(segmentation.begin(), segmentation.end(), [](const auto& s) { return s.oov; }));
}

std::string Decoding::text() const {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += ' ';
    out += words[i];
  }
  return out;
}

PhonemeSequence Decoding::concatenated_pronunciation() const {
  PhonemeSequence out;
  for (const auto& seg : segmentation) {
    out.insert(out.end(), seg.pronunciation.begin(), seg.pronunciation.end());
  }
  return out;
}

std::string oov_token(std::string_view symbol) { return "<" + std::string(symbol) + ">"; }

bool is_oov_token(std::string_view token) {
  return token.size() > 2 && token.front() == '<' && token.back() == '>';
}

Decoding decode(const DecoderGraph& graph, std::span<const Symbol> input) {
  if (input.empty()) throw Error("cannot decode an empty phoneme sequence");

  std::vector<std::optional<PathState>> best(input.size() + 1);
  best[0] = PathState{};
  for (std::size_t begin = 0; begin < input.size(); ++begin) {
    if (!best[begin]) continue;
    const PathState& from = *best[begin];
    graph.for_each_word_from(input, begin, [&](std::size_t end, const std::string& word) {
      Segment seg{word, PhonemeSequence(input.begin() + begin, input.begin() + end), false,
                  graph.word_cost(end - begin)};
      relax(best[end], from, std::move(seg));
    });
    relax(best[begin + 1], from,
          Segment{oov_token(input[begin]), PhonemeSequence{input[begin]}, true, graph.oov_cost()});
  }

  PathState& final_state = *best[input.size()];
  Decoding out;
  out.total_cost = 0.0;
  for (auto& seg : final_state.segments) {
    out.total_cost += seg.cost;
    out.words.push_back(seg.token);
    if (seg.oov) out.is_full_sentence = false;
  }
  out.segmentation = std::move(final_state.segments);
  return out;
}

CorpusDecoding decode_corpus(const DecoderGraph& graph, std::span<const Caption> captions) {
  CorpusDecoding out;
  out.captions.reserve(captions.size());
  for (const auto& caption : captions) {
    auto d = decode(graph, caption.phonemes);
    ++out.summary.captions;
    if (d.is_full_sentence) {
      ++out.summary.full_sentences;
    } else {
      ++out.summary.with_oov;
      out.summary.oov_tokens += d.oov_count();
    }
    out.captions.emplace_back(caption.image, std::move(d));
  }
  return out;
}

}  // namespace phonecap::lexdecode
