#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "phonecap/core.hpp"
#include "phonecap/humaneval.hpp"

namespace fixtures {

using phonecap::EvalPair;
using phonecap::PhonemeSequence;

inline const std::vector<std::string>& alphabet() {
  static const std::vector<std::string> symbols{"AA", "AE", "AH", "B",  "D",  "EH", "F",  "G",
                                                "IY", "K",  "L",  "M",  "N",  "OW", "P",  "S",
                                                "T",  "UW", "V",  "Z"};
  return symbols;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }

  PhonemeSequence sequence(int min_len, int max_len, int alphabet_size) {
    PhonemeSequence s(static_cast<std::size_t>(uniform(min_len, max_len)));
    for (auto& sym : s) sym = alphabet()[static_cast<std::size_t>(uniform(0, alphabet_size - 1))];
    return s;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

// Random corpus of `images` pairs with 1..max_refs references each.
inline std::vector<EvalPair> random_pairs(Rng& rng, int images, int alphabet_size, int min_len,
                                          int max_len, int max_refs = 5) {
  std::vector<EvalPair> pairs;
  for (int i = 0; i < images; ++i) {
    EvalPair p;
    p.image = "img" + std::to_string(i);
    p.candidate = rng.sequence(min_len, max_len, alphabet_size);
    const int refs = rng.uniform(1, max_refs);
    for (int r = 0; r < refs; ++r) p.references.push_back(rng.sequence(min_len, max_len, alphabet_size));
    pairs.push_back(std::move(p));
  }
  return pairs;
}

inline PhonemeSequence split(const std::string& text) {
  std::istringstream in(text);
  PhonemeSequence out;
  for (std::string s; in >> s;) out.push_back(s);
  return out;
}

// Two sample captions.
inline const std::string kSkiersCaption =
    "EY G R UW P AX F S K IY R Z AXR S K IY IX NG D AW N EY S N OW IY HH IH L";
inline const std::string kStreetCaption =
    "EY M AE N IH N EY Y EH L OW SH ER T IH Z S T AE N D IX NG AA N AX S T R IY T";

inline const char* kSampleLexicon =
    "a\tEY\n"
    "a\tAX\n"
    "group\tG R UW P\n"
    "of\tAX F\n"
    "skiers\tS K IY R Z\n"
    "are\tAXR\n"
    "skiing\tS K IY IX NG\n"
    "down\tD AW N\n"
    "snowy\tS N OW IY\n"
    "hill\tHH IH L\n"
    "man\tM AE N\n"
    "in\tIH N\n"
    "yellow\tY EH L OW\n"
    "shirt\tSH ER T\n"
    "is\tIH Z\n"
    "standing\tS T AE N D IX NG\n"
    "on\tAA N\n"
    "street\tS T R IY T\n"
    // distractors
    "ski\tS K IY\n"
    "an\tAE N\n"
    "stand\tS T AE N D\n";

inline phonecap::Lexicon sample_lexicon() {
  std::istringstream in(kSampleLexicon);
  return phonecap::read_lexicon(in, phonecap::Inventory::extended_arpabet());
}

inline std::string write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path.string();
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("phonecap-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// One rater's full submission for `list` on `scale`: test items get
// `test_value`, controls get the given values.
inline std::vector<phonecap::humaneval::RatingRecord> submission(
    const std::string& rater, const phonecap::humaneval::EvalList& list,
    phonecap::humaneval::RatingScale scale, int good_value, int bad_value,
    const std::function<int(const std::string&)>& test_value) {
  using phonecap::humaneval::ControlPolarity;
  std::vector<phonecap::humaneval::RatingRecord> out;
  for (const auto& item : list.items) {
    int v = item.polarity == ControlPolarity::good  ? good_value
            : item.polarity == ControlPolarity::bad ? bad_value
                                                    : test_value(item.image);
    out.push_back({rater, list.list_id, item.image, scale, v, item.is_control, item.polarity});
  }
  return out;
}

}  // namespace fixtures
