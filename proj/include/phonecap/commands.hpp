#pragma once

// Subcommand implementations behind the `phonecap` tool. Each takes its
// resolved options, writes its outputs atomically and returns what it wrote
// so callers (and tests) can inspect the result without re-reading files.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phonecap/core.hpp"
#include "phonecap/humaneval.hpp"
#include "phonecap/lexdecode.hpp"
#include "phonecap/metrics.hpp"
#include "phonecap/report.hpp"

namespace phonecap::cli {

// How multiple references enter BLEU and PER. `multi` pools references per
// caption (corpus BLEU, best-reference PER); `per_pair` averages over every
// (caption, reference) expansion.
enum class Aggregation { multi, per_pair };

Aggregation parse_aggregation(std::string_view name);
std::string_view to_string(Aggregation mode);

// BLEU1..BLEU8, METEOR, ROUGE-L, CIDEr, PER.
const std::vector<std::string>& known_metrics();
// Empty selection means every known metric; unknown names throw.
std::vector<std::string> resolve_metrics(std::span<const std::string> selection);

struct Evaluation {
  std::vector<metrics::MetricScore> scores;  // in selection order
  std::size_t meteor_heuristic_alignments = 0;
};

// Corpus value and per-caption values for each selected metric. Per-caption
// BLEU is smoothed sentence BLEU.
Evaluation evaluate(std::span<const EvalPair> pairs, std::span<const std::string> metric_names,
                    Aggregation mode, double epsilon = metrics::kDefaultBleuEpsilon);

struct ScoreOptions {
  std::filesystem::path candidates;
  std::filesystem::path references;
  std::optional<std::filesystem::path> inventory;
  std::optional<std::filesystem::path> lexicon;  // adds decoder and type/token sections
  std::vector<std::string> metrics;
  Aggregation mode = Aggregation::multi;
  double epsilon = metrics::kDefaultBleuEpsilon;
  double base = lexdecode::kDefaultBase;
  double oov_cost = lexdecode::kDefaultOovCost;
  std::filesystem::path out;
};

Report cmd_score(const ScoreOptions& options);

struct DecodeOptions {
  std::filesystem::path lexicon;
  std::filesystem::path input;
  std::optional<std::filesystem::path> inventory;
  double base = lexdecode::kDefaultBase;
  double oov_cost = lexdecode::kDefaultOovCost;
  std::filesystem::path out;
  std::optional<std::filesystem::path> summary;
};

struct DecodeOutcome {
  lexdecode::CorpusDecoding decoded;
  Report summary;
  std::vector<std::string> warnings;
};

// Writes "<image id> TAB <words>" per caption to `out`.
DecodeOutcome cmd_decode(const DecodeOptions& options);

struct ListsOptions {
  std::filesystem::path pairs;     // "<image id> TAB <caption text>"
  std::filesystem::path controls;  // "good|bad TAB <image id> TAB <caption text>"
  std::size_t n_lists = 34;
  std::size_t list_size = 28;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
};

// Writes one file per list, a combined lists.tsv and manifest.tsv.
std::vector<humaneval::EvalList> cmd_lists(const ListsOptions& options);

std::vector<humaneval::CaptionedImage> read_captioned_images(const std::filesystem::path& path);
humaneval::ControlPair read_controls(const std::filesystem::path& path);

struct CorrelateOptions {
  std::filesystem::path scores;
  std::filesystem::path ratings;
  std::filesystem::path lists;
  humaneval::FilterPolicy policy = humaneval::FilterPolicy::defaults();
  std::filesystem::path out;
};

Report cmd_correlate(const CorrelateOptions& options);

}  // namespace phonecap::cli
