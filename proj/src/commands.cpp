#include "phonecap/commands.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace phonecap::cli {

namespace fs = std::filesystem;

namespace {

const Inventory& inventory_for(const std::optional<fs::path>& path, std::optional<Inventory>& slot) {
  if (!path) return Inventory::extended_arpabet();
  slot = Inventory::load(*path);
  return *slot;
}

void add_meta(Report& report, std::string_view command) {
  report.kv("meta")
      .set("schema_version", std::to_string(kReportSchemaVersion))
      .set("tool", "phonecap")
      .set("tool_version", PHONECAP_VERSION)
      .set("command", std::string(command));
}

void add_input(Report& report, std::string_view name, const fs::path& path) {
  report.kv("inputs")
      .set(std::string(name) + ".path", path.string())
      .set(std::string(name) + ".sha256", sha256_file(path));
}

std::string join(std::span<const std::string> items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

void add_decoder_sections(Report& report, const lexdecode::CorpusDecoding& decoded) {
  const auto& s = decoded.summary;
  report.kv("decoder")
      .set("captions", std::to_string(s.captions))
      .set("full_sentences", std::to_string(s.full_sentences))
      .set("with_oov", std::to_string(s.with_oov))
      .set("oov_tokens", std::to_string(s.oov_tokens));

  std::vector<lexdecode::Decoding> decodings;
  decodings.reserve(decoded.captions.size());
  for (const auto& [id, d] : decoded.captions) decodings.push_back(d);
  auto& tt = report.kv("type_token");
  try {
    const auto stats = humaneval::type_token_ratio(decodings);
    tt.set("types", std::to_string(stats.types))
        .set("tokens", std::to_string(stats.tokens))
        .set("ratio", format_number(stats.ratio));
  } catch (const Error&) {
    tt.set("types", "0").set("tokens", "0").set("ratio", "n/a");
  }
  tt.set("ground_truth_ratio", format_number(humaneval::kGroundTruthTypeTokenRatio));
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::map<ImageId, double> metric_column(const Report::Table& table, std::size_t id_col,
                                        std::size_t col) {
  std::map<ImageId, double> out;
  for (const auto& row : table.rows) out[row[id_col]] = parse_number(row[col]);
  return out;
}

}  // namespace

Aggregation parse_aggregation(std::string_view name) {
  if (name == "multi") return Aggregation::multi;
  if (name == "per_pair") return Aggregation::per_pair;
  throw Error("unknown aggregation mode '" + std::string(name) + "' (multi|per_pair)");
}

std::string_view to_string(Aggregation mode) {
  return mode == Aggregation::multi ? "multi" : "per_pair";
}

const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (int i = 1; i <= metrics::kMaxBleuOrder; ++i) n.push_back("BLEU" + std::to_string(i));
    n.insert(n.end(), {"METEOR", "ROUGE-L", "CIDEr", "PER"});
    return n;
  }();
  return names;
}

std::vector<std::string> resolve_metrics(std::span<const std::string> selection) {
  if (selection.empty()) return known_metrics();
  const auto& known = known_metrics();
  std::vector<std::string> out;
  for (const auto& name : selection) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw Error("unknown metric '" + name + "' (known: " + join(known, ',') + ")");
    }
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
  }
  return out;
}

Evaluation evaluate(std::span<const EvalPair> pairs, std::span<const std::string> metric_names,
                    Aggregation mode, double epsilon) {
  if (pairs.empty()) throw Error("nothing to score: no caption pairs");
  Evaluation out;
  for (const auto& name : resolve_metrics(metric_names)) {
    metrics::MetricScore score;
    if (name.starts_with("BLEU")) {
      const int n = std::stoi(name.substr(4));
      if (mode == Aggregation::multi) {
        score = metrics::bleu_corpus(pairs, n);
        for (const auto& p : pairs) {
          score.per_caption[p.image] = metrics::bleu_sentence(p.candidate, p.references, n, epsilon);
        }
      } else {
        score = metrics::bleu_per_pair_average(pairs, n, epsilon);
      }
    } else if (name == "PER") {
      score = metrics::per_aggregate(pairs, mode == Aggregation::multi
                                                ? metrics::PerMode::best_reference
                                                : metrics::PerMode::per_pair_average);
    } else if (name == "ROUGE-L" || name == "METEOR") {
      score.metric = name;
      double sum = 0.0;
      for (const auto& p : pairs) {
        double v;
        if (name == "ROUGE-L") {
          v = metrics::rouge_l(p.candidate, p.references);
        } else {
          const auto m = metrics::meteor(p.candidate, p.references);
          if (m.heuristic) ++out.meteor_heuristic_alignments;
          v = m.score;
        }
        score.per_caption[p.image] = v;
        sum += v;
      }
      score.value = sum / static_cast<double>(pairs.size());
    } else {
      score = metrics::cider(pairs);
    }
    score.metric = name;
    out.scores.push_back(std::move(score));
  }
  return out;
}

Report cmd_score(const ScoreOptions& options) {
  std::optional<Inventory> custom;
  const Inventory& inventory = inventory_for(options.inventory, custom);
  const auto candidates = parse_caption_file(options.candidates, inventory);
  const auto references = parse_caption_file(options.references, inventory);
  const auto pairs = group_pairs(candidates, references);
  const auto names = resolve_metrics(options.metrics);
  const auto evaluation = evaluate(pairs, names, options.mode, options.epsilon);

  Report report;
  add_meta(report, "score");
  const metrics::MeteorParams meteor_params;
  auto& config = report.kv("config");
  config.set("mode", std::string(to_string(options.mode)))
      .set("metrics", join(names, ','))
      .set("bleu_epsilon", format_number(options.epsilon))
      .set("rouge_beta", format_number(metrics::kDefaultRougeBeta))
      .set("meteor_recall_weight", format_number(meteor_params.recall_weight))
      .set("meteor_penalty_gamma", format_number(meteor_params.penalty_gamma))
      .set("meteor_penalty_beta", format_number(meteor_params.penalty_beta))
      .set("cider_order", std::to_string(metrics::kDefaultCiderOrder))
      .set("inventory", options.inventory ? options.inventory->string() : "extended-arpabet");
  if (options.lexicon) {
    config.set("decoder_base", format_number(options.base))
        .set("decoder_oov_cost", format_number(options.oov_cost));
  }
  add_input(report, "candidates", options.candidates);
  add_input(report, "references", options.references);
  if (options.inventory) add_input(report, "inventory", *options.inventory);
  if (options.lexicon) add_input(report, "lexicon", *options.lexicon);

  std::size_t ref_count = 0;
  for (const auto& p : pairs) ref_count += p.references.size();
  report.kv("summary")
      .set("images", std::to_string(pairs.size()))
      .set("references", std::to_string(ref_count))
      .set("meteor_heuristic_alignments", std::to_string(evaluation.meteor_heuristic_alignments));

  auto& corpus = report.table("corpus", {"metric", "value"});
  for (const auto& s : evaluation.scores) corpus.add_row({s.metric, format_number(s.value)});

  std::vector<std::string> columns{"image_id"};
  columns.insert(columns.end(), names.begin(), names.end());
  auto& per_caption = report.table("per_caption", columns);
  for (const auto& p : pairs) {
    std::vector<std::string> row{p.image};
    for (const auto& s : evaluation.scores) row.push_back(format_number(s.per_caption.at(p.image)));
    per_caption.add_row(std::move(row));
  }

  if (options.lexicon) {
    auto lexicon = parse_lexicon(*options.lexicon, inventory);
    const auto graph = lexdecode::DecoderGraph::build(std::move(lexicon), options.base,
                                                      options.oov_cost);
    add_decoder_sections(report, lexdecode::decode_corpus(graph, candidates));
  }

  ensure_parent(options.out);
  report.save(options.out);
  return report;
}

DecodeOutcome cmd_decode(const DecodeOptions& options) {
  std::optional<Inventory> custom;
  const Inventory& inventory = inventory_for(options.inventory, custom);
  DecodeOutcome outcome;
  auto lexicon = parse_lexicon(options.lexicon, inventory, &outcome.warnings);
  const auto captions = parse_caption_file(options.input, inventory);
  const auto graph =
      lexdecode::DecoderGraph::build(std::move(lexicon), options.base, options.oov_cost);
  outcome.decoded = lexdecode::decode_corpus(graph, captions);

  std::ostringstream lines;
  for (const auto& [id, d] : outcome.decoded.captions) lines << id << '\t' << d.text() << '\n';
  ensure_parent(options.out);
  write_file_atomic(options.out, lines.str());

  auto& report = outcome.summary;
  add_meta(report, "decode");
  report.kv("config")
      .set("decoder_base", format_number(options.base))
      .set("decoder_oov_cost", format_number(options.oov_cost))
      .set("inventory", options.inventory ? options.inventory->string() : "extended-arpabet");
  add_input(report, "lexicon", options.lexicon);
  add_input(report, "input", options.input);
  report.kv("lexicon")
      .set("words", std::to_string(graph.lexicon().word_count()))
      .set("pronunciations", std::to_string(graph.lexicon().pronunciation_count()))
      .set("duplicates_ignored", std::to_string(outcome.warnings.size()));
  add_decoder_sections(report, outcome.decoded);
  if (options.summary) {
    ensure_parent(*options.summary);
    report.save(*options.summary);
  }
  return outcome;
}

std::vector<humaneval::CaptionedImage> read_captioned_images(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<humaneval::CaptionedImage> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(path.string(), lineno, "missing tab separator");
    humaneval::CaptionedImage item{std::string(trim(std::string_view(line).substr(0, tab))),
                                   std::string(trim(std::string_view(line).substr(tab + 1)))};
    if (item.image.empty()) throw ParseError(path.string(), lineno, "empty image id");
    out.push_back(std::move(item));
  }
  return out;
}

humaneval::ControlPair read_controls(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::optional<humaneval::CaptionedImage> good, bad;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::string_view view = line;
    const auto t1 = view.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : view.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) {
      throw ParseError(path.string(), lineno, "expected 'good|bad TAB image TAB caption'");
    }
    const auto kind = trim(view.substr(0, t1));
    humaneval::CaptionedImage item{std::string(trim(view.substr(t1 + 1, t2 - t1 - 1))),
                                   std::string(trim(view.substr(t2 + 1)))};
    if (kind != "good" && kind != "bad") {
      throw ParseError(path.string(), lineno, "control kind must be good or bad");
    }
    auto& slot = kind == "good" ? good : bad;
    if (slot) throw ParseError(path.string(), lineno, "duplicate " + std::string(kind) + " control");
    slot = std::move(item);
  }
  if (!good || !bad) throw Error(path.string() + ": need one good and one bad control");
  return {*good, *bad};
}

std::vector<humaneval::EvalList> cmd_lists(const ListsOptions& options) {
  const auto pairs = read_captioned_images(options.pairs);
  const auto controls = read_controls(options.controls);
  auto lists = humaneval::make_lists(pairs, options.n_lists, options.list_size, controls,
                                     options.seed);

  fs::create_directories(options.out_dir);
  Report manifest;
  add_meta(manifest, "lists");
  manifest.kv("config")
      .set("n_lists", std::to_string(options.n_lists))
      .set("list_size", std::to_string(options.list_size))
      .set("seed", std::to_string(options.seed));
  add_input(manifest, "pairs", options.pairs);
  add_input(manifest, "controls", options.controls);
  auto& table = manifest.table("lists", {"list_id", "items", "file"});
  for (const auto& list : lists) {
    std::ostringstream os;
    humaneval::write_lists(os, std::span(&list, 1));
    const auto file = list.list_id + ".tsv";
    write_file_atomic(options.out_dir / file, os.str());
    table.add_row({list.list_id, std::to_string(list.items.size()), file});
  }
  std::ostringstream all;
  humaneval::write_lists(all, lists);
  write_file_atomic(options.out_dir / "lists.tsv", all.str());
  manifest.save(options.out_dir / "manifest.txt");
  return lists;
}

Report cmd_correlate(const CorrelateOptions& options) {
  using humaneval::RatingScale;
  const auto scores = Report::load(options.scores);
  const auto* per_caption = scores.find_table("per_caption");
  const auto* corpus = scores.find_table("corpus");
  if (per_caption == nullptr || corpus == nullptr) {
    throw Error(options.scores.string() + ": not a score report (missing per_caption or corpus)");
  }
  const auto ratings = humaneval::load_ratings(options.ratings);
  const auto lists = humaneval::load_lists(options.lists);
  const auto filter = humaneval::filter_raters(ratings, lists, options.policy);
  if (filter.accepted.empty()) {
    throw Error("no accepted submissions (" + std::to_string(filter.rejected.size()) +
                " rejected)");
  }
  const auto accepted = humaneval::accepted_records(ratings, filter);

  Report report;
  add_meta(report, "correlate");
  auto& config = report.kv("config");
  for (const auto& [scale, t] : options.policy.thresholds) {
    const std::string prefix = "filter." + std::string(humaneval::to_string(scale));
    config.set(prefix + ".good_min", std::to_string(t.good_min))
        .set(prefix + ".bad_max", std::to_string(t.bad_max));
  }
  config.set("rating_sd", "population").set("alignment", "per-image mean rating");
  add_input(report, "scores", options.scores);
  add_input(report, "ratings", options.ratings);
  add_input(report, "lists", fs::is_directory(options.lists) ? options.lists / "lists.tsv"
                                                             : options.lists);

  std::map<RatingScale, humaneval::RatingAggregate> aggregates;
  for (auto scale : humaneval::kAllScales) {
    std::size_t acc = 0, rej = 0;
    for (const auto& k : filter.accepted) acc += k.scale == scale;
    for (const auto& r : filter.rejected) rej += r.submission.scale == scale;
    if (acc == 0) continue;
    auto agg = humaneval::aggregate_ratings(accepted, scale);
    report.kv("ratings." + std::string(humaneval::to_string(scale)))
        .set("submissions_accepted", std::to_string(acc))
        .set("submissions_rejected", std::to_string(rej))
        .set("ratings", std::to_string(agg.ratings))
        .set("images", std::to_string(agg.per_image.size()))
        .set("mean", format_number(agg.corpus.mean))
        .set("sd", format_number(agg.corpus.sd));
    aggregates.emplace(scale, std::move(agg));
  }

  auto cell_triplet = [](const stats::CorrelationResult& c) {
    return std::vector<std::string>{format_number(c.r), format_number(c.p), std::to_string(c.n)};
  };
  const std::vector<std::string> missing{"-", "-", "-"};
  auto& table = report.table("correlation", {"metric", "score", "r", "p", "n", "r_actions",
                                             "p_actions", "n_actions", "r_objects", "p_objects",
                                             "n_objects"});
  auto& notes = report.table("notes", {"metric", "scale", "note"});

  auto correlate_cell = [&](std::string_view metric, const std::map<ImageId, double>& values,
                            RatingScale scale) -> std::vector<std::string> {
    auto it = aggregates.find(scale);
    if (it == aggregates.end()) return missing;
    try {
      return cell_triplet(humaneval::correlate_metric_with_ratings(values, it->second.means()));
    } catch (const Error& e) {
      if (std::string_view(e.what()) != "zero variance") {
        throw Error(std::string(metric) + " vs " + std::string(humaneval::to_string(scale)) +
                    ": " + e.what());
      }
      notes.add_row({std::string(metric), std::string(humaneval::to_string(scale)), e.what()});
      return {"nan", "nan", "-"};
    }
  };

  // Inter-scale row: overall mean rating against the actions/objects ratings.
  if (auto overall = aggregates.find(RatingScale::overall); overall != aggregates.end()) {
    const auto overall_means = overall->second.means();
    std::vector<std::string> row{"MTurk", format_number(overall->second.corpus.mean)};
    row.insert(row.end(), missing.begin(), missing.end());
    for (auto scale : {RatingScale::actions, RatingScale::objects}) {
      auto cells = correlate_cell("MTurk", overall_means, scale);
      row.insert(row.end(), cells.begin(), cells.end());
    }
    table.add_row(std::move(row));
  }

  const auto id_col = per_caption->column("image_id");
  for (const auto& crow : corpus->rows) {
    const auto& metric = crow[corpus->column("metric")];
    const auto values = metric_column(*per_caption, id_col, per_caption->column(metric));
    std::vector<std::string> row{metric, crow[corpus->column("value")]};
    for (auto scale : humaneval::kAllScales) {
      auto cells = correlate_cell(metric, values, scale);
      row.insert(row.end(), cells.begin(), cells.end());
    }
    table.add_row(std::move(row));
  }

  for (const auto& [scale, agg] : aggregates) {
    auto& hist = report.table("histogram." + std::string(humaneval::to_string(scale)),
                              {"value", "count"});
    for (const auto& [value, count] : humaneval::rating_histogram(accepted, scale)) {
      hist.add_row({std::to_string(value), std::to_string(count)});
    }
  }

  auto& rejections = report.table("rejections", {"rater_id", "list_id", "scale", "reason"});
  for (const auto& r : filter.rejected) {
    rejections.add_row({r.submission.rater_id, r.submission.list_id,
                        std::string(humaneval::to_string(r.submission.scale)), r.reason});
  }

  ensure_parent(options.out);
  report.save(options.out);
  return report;
}

}  // namespace phonecap::cli
