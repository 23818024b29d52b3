#pragma once

// Domain types shared by every phonecap module, plus the parsers for caption,
// lexicon and inventory files.
//
// File formats (UTF-8, one record per line):
//   captions   <image id> TAB <phoneme> SPACE <phoneme> ...
//   lexicon    <word> TAB <phoneme> SPACE <phoneme> ...
//   inventory  <symbol>            ('#' starts a comment)

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace phonecap {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for malformed input files; the message carries source and line.
class ParseError : public Error {
 public:
  ParseError(std::string_view source, std::size_t line, std::string_view what);

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

using Symbol = std::string;
using PhonemeSequence = std::vector<Symbol>;
using ImageId = std::string;

struct Caption {
  ImageId image;
  PhonemeSequence phonemes;
};

// One candidate caption with the references of the same image.
struct EvalPair {
  ImageId image;
  PhonemeSequence candidate;
  std::vector<PhonemeSequence> references;
};

inline constexpr std::size_t kDefaultMaxReferences = 5;

class Inventory {
 public:
  explicit Inventory(std::set<std::string> symbols);

  // Extended ARPABET, including the reduced vowels AX, IX, AXR.
  static const Inventory& extended_arpabet();
  static Inventory read(std::istream& in, std::string_view source = "<inventory>");
  static Inventory load(const std::filesystem::path& path);

  bool contains(std::string_view symbol) const;
  const std::set<std::string, std::less<>>& symbols() const { return symbols_; }
  std::size_t size() const { return symbols_.size(); }

  // Label shape only: 1-4 characters of [A-Z0-9], starting with a letter.
  static bool is_valid_label(std::string_view label);

 private:
  std::set<std::string, std::less<>> symbols_;
};

// word -> pronunciations, in first-seen order. Words are stored lowercase.
class Lexicon {
 public:
  // Returns false when the (word, pronunciation) pair is already present.
  bool add(std::string_view word, PhonemeSequence pronunciation);

  const std::map<std::string, std::vector<PhonemeSequence>>& entries() const { return entries_; }
  std::size_t word_count() const { return entries_.size(); }
  std::size_t pronunciation_count() const;
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::string, std::vector<PhonemeSequence>> entries_;
};

std::string to_lower(std::string_view s);

// Space-joined phoneme labels.
std::string join_symbols(std::span<const Symbol> symbols);

std::vector<Caption> read_captions(std::istream& in, const Inventory& inventory,
                                   std::string_view source = "<captions>");
std::vector<Caption> parse_caption_file(const std::filesystem::path& path,
                                        const Inventory& inventory);
void write_captions(std::ostream& out, std::span<const Caption> captions);

// Duplicate (word, pronunciation) lines are dropped; a note for each is
// appended to `warnings` when it is non-null.
Lexicon read_lexicon(std::istream& in, const Inventory& inventory,
                     std::string_view source = "<lexicon>",
                     std::vector<std::string>* warnings = nullptr);
Lexicon parse_lexicon(const std::filesystem::path& path, const Inventory& inventory,
                      std::vector<std::string>* warnings = nullptr);

// One EvalPair per candidate, in candidate order; references keep file order.
std::vector<EvalPair> group_pairs(std::span<const Caption> candidates,
                                  std::span<const Caption> references,
                                  std::size_t max_references = kDefaultMaxReferences);

}  // namespace phonecap
