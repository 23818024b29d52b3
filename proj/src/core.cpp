#include "phonecap/core.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace phonecap {

namespace {

std::string make_parse_message(std::string_view source, std::size_t line, std::string_view what) {
  std::ostringstream os;
  os << source << ": " << what;
  if (line > 0) os << " at line " << line;
  return os.str();
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

// Splits "<key> TAB <phonemes>" and validates the phonemes against the inventory.
struct KeyedLine {
  std::string key;
  PhonemeSequence phonemes;
};

KeyedLine parse_keyed_line(std::string_view line, const Inventory& inventory,
                           std::string_view source, std::size_t lineno,
                           std::string_view empty_message) {
  const auto tab = line.find('\t');
  if (tab == std::string_view::npos) throw ParseError(source, lineno, "missing tab separator");
  KeyedLine out;
  out.key = std::string(trim(line.substr(0, tab)));
  if (out.key.empty()) throw ParseError(source, lineno, "empty key field");
  for (auto token : split_ws(line.substr(tab + 1))) {
    if (!inventory.contains(token)) {
      throw ParseError(source, lineno, "unknown symbol " + std::string(token));
    }
    out.phonemes.emplace_back(token);
  }
  if (out.phonemes.empty()) throw ParseError(source, lineno, empty_message);
  return out;
}

}  // namespace

ParseError::ParseError(std::string_view source, std::size_t line, std::string_view what)
    : Error(make_parse_message(source, line, what)), line_(line) {}

Inventory::Inventory(std::set<std::string> symbols) {
  if (symbols.empty()) throw Error("phoneme inventory is empty");
  for (auto& s : symbols) {
    if (!is_valid_label(s)) throw Error("invalid phoneme label '" + s + "'");
    symbols_.insert(s);
  }
}

const Inventory& Inventory::extended_arpabet() {
  static const Inventory inventory(std::set<std::string>{
      "AA", "AE", "AH", "AO", "AW", "AX", "AXH", "AXR", "AY", "B",  "CH", "D",  "DH",
      "DX", "EH", "EL", "EM", "EN", "ENG", "ER", "EY", "F",  "G",  "HH", "IH", "IX",
      "IY", "JH", "K",  "L",  "M",  "N",  "NG", "NX", "OW", "OY", "P",  "Q",  "R",
      "S",  "SH", "T",  "TH", "UH", "UW", "UX", "V",  "W",  "WH", "Y",  "Z",  "ZH"});
  return inventory;
}

Inventory Inventory::read(std::istream& in, std::string_view source) {
  std::set<std::string> symbols;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    if (!is_valid_label(view)) {
      throw ParseError(source, lineno, "invalid phoneme label " + std::string(view));
    }
    symbols.emplace(view);
  }
  if (symbols.empty()) throw ParseError(source, 0, "inventory defines no symbols");
  return Inventory(std::move(symbols));
}

Inventory Inventory::load(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read(in, path.string());
}

bool Inventory::contains(std::string_view symbol) const {
  return symbols_.find(symbol) != symbols_.end();
}

bool Inventory::is_valid_label(std::string_view label) {
  if (label.empty() || label.size() > 4) return false;
  if (label[0] < 'A' || label[0] > 'Z') return false;
  return std::all_of(label.begin(), label.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
  });
}

bool Lexicon::add(std::string_view word, PhonemeSequence pronunciation) {
  if (word.empty()) throw Error("lexicon word is empty");
  if (pronunciation.empty()) throw Error("empty pronunciation for '" + std::string(word) + "'");
  auto& prons = entries_[to_lower(word)];
  if (std::find(prons.begin(), prons.end(), pronunciation) != prons.end()) return false;
  prons.push_back(std::move(pronunciation));
  return true;
}

std::size_t Lexicon::pronunciation_count() const {
  std::size_t n = 0;
  for (const auto& [word, prons] : entries_) n += prons.size();
  return n;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::string join_symbols(std::span<const Symbol> symbols) {
  std::string out;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i > 0) out += ' ';
    out += symbols[i];
  }
  return out;
}

std::vector<Caption> read_captions(std::istream& in, const Inventory& inventory,
                                   std::string_view source) {
  std::vector<Caption> captions;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto parsed = parse_keyed_line(line, inventory, source, lineno, "empty phoneme field");
    captions.push_back({std::move(parsed.key), std::move(parsed.phonemes)});
  }
  return captions;
}

std::vector<Caption> parse_caption_file(const std::filesystem::path& path,
                                        const Inventory& inventory) {
  auto in = open_input(path);
  return read_captions(in, inventory, path.string());
}

void write_captions(std::ostream& out, std::span<const Caption> captions) {
  for (const auto& c : captions) out << c.image << '\t' << join_symbols(c.phonemes) << '\n';
}

Lexicon read_lexicon(std::istream& in, const Inventory& inventory, std::string_view source,
                     std::vector<std::string>* warnings) {
  Lexicon lexicon;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto parsed = parse_keyed_line(line, inventory, source, lineno, "empty pronunciation");
    const std::string word = to_lower(parsed.key);
    const std::string pron = join_symbols(parsed.phonemes);
    if (!lexicon.add(word, std::move(parsed.phonemes)) && warnings != nullptr) {
      std::ostringstream os;
      os << source << ": duplicate entry '" << word << "\t" << pron << "' at line " << lineno
         << " ignored";
      warnings->push_back(os.str());
    }
  }
  return lexicon;
}

Lexicon parse_lexicon(const std::filesystem::path& path, const Inventory& inventory,
                      std::vector<std::string>* warnings) {
  auto in = open_input(path);
  return read_lexicon(in, inventory, path.string(), warnings);
}

std::vector<EvalPair> group_pairs(std::span<const Caption> candidates,
                                  std::span<const Caption> references,
                                  std::size_t max_references) {
  std::unordered_map<std::string_view, std::vector<const PhonemeSequence*>> refs_by_image;
  for (const auto& ref : references) refs_by_image[ref.image].push_back(&ref.phonemes);

  std::unordered_set<std::string_view> seen;
  std::vector<std::string> missing;
  std::vector<EvalPair> pairs;
  pairs.reserve(candidates.size());
  for (const auto& cand : candidates) {
    if (!seen.insert(cand.image).second) {
      throw Error("duplicate candidate for image " + cand.image);
    }
    auto it = refs_by_image.find(cand.image);
    if (it == refs_by_image.end()) {
      missing.push_back(cand.image);
      continue;
    }
    if (it->second.size() > max_references) {
      throw Error("image " + cand.image + " has " + std::to_string(it->second.size()) +
                  " references (limit " + std::to_string(max_references) + ")");
    }
    EvalPair pair{cand.image, cand.phonemes, {}};
    for (const auto* r : it->second) pair.references.push_back(*r);
    pairs.push_back(std::move(pair));
  }
  if (!missing.empty()) {
    std::string msg = "candidates without references:";
    for (const auto& id : missing) msg += " " + id;
    throw Error(msg);
  }
  return pairs;
}

}  // namespace phonecap
