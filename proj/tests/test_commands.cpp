#include <cmath>
#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "pipeline.hpp"
#include "phonecap/commands.hpp"

using namespace phonecap;
namespace fs = std::filesystem;

namespace {

double corpus_value(const Report& r, const std::string& metric) {
  const auto* t = r.find_table("corpus");
  for (const auto& row : t->rows) {
    if (row[0] == metric) return parse_number(row[1]);
  }
  throw Error("no metric " + metric);
}

std::vector<std::string> row_for(const Report& r, const std::string& table, const std::string& key) {
  for (const auto& row : r.find_table(table)->rows) {
    if (row[0] == key) return row;
  }
  throw Error("no row " + key);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("metric selection") {
  CHECK(cli::known_metrics().size() == 12);
  std::vector<std::string> pick{"PER", "BLEU4", "PER"};
  CHECK(cli::resolve_metrics(pick) == std::vector<std::string>{"PER", "BLEU4"});
  std::vector<std::string> bad{"WER"};
  CHECK_THROWS_WITH(cli::resolve_metrics(bad), doctest::Contains("unknown metric"));
  CHECK(cli::parse_aggregation("per_pair") == cli::Aggregation::per_pair);
  CHECK_THROWS(cli::parse_aggregation("pooled"));
}

TEST_CASE("identical files score perfectly") {
  fixtures::TempDir dir("identity");
  const std::string caps = "a\tAA B K IY T S\nb\tM AE N IH N EY Y EH L OW\n";
  cli::ScoreOptions o;
  o.candidates = fixtures::write_file(dir / "c.txt", caps);
  o.references = fixtures::write_file(dir / "r.txt", caps);
  o.out = dir / "out" / "report.txt";
  auto report = cli::cmd_score(o);
  for (int n = 1; n <= 6; ++n) CHECK(corpus_value(report, "BLEU" + std::to_string(n)) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(corpus_value(report, "PER") == 0.0);
  CHECK(corpus_value(report, "ROUGE-L") == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(fs::exists(o.out));
  CHECK(Report::load(o.out).to_string() == report.to_string());
  CHECK(report.value("meta", "schema_version") == "1");
  CHECK(report.value("inputs", "candidates.sha256") == sha256_file(o.candidates));
}

TEST_CASE("report values equal library calls") {
  fixtures::TempDir dir("plumbing");
  auto corpus = pipeline::make_corpus(dir.path());
  for (auto mode : {cli::Aggregation::multi, cli::Aggregation::per_pair}) {
    cli::ScoreOptions o;
    o.candidates = corpus.candidates;
    o.references = corpus.references;
    o.mode = mode;
    o.out = dir / "score.txt";
    auto report = cli::cmd_score(o);

    const auto& inv = Inventory::extended_arpabet();
    auto pairs = group_pairs(parse_caption_file(corpus.candidates, inv), parse_caption_file(corpus.references, inv));
    const bool multi = mode == cli::Aggregation::multi;
    CHECK(corpus_value(report, "BLEU4") == (multi ? metrics::bleu_corpus(pairs, 4).value
                                                  : metrics::bleu_per_pair_average(pairs, 4).value));
    CHECK(corpus_value(report, "PER") ==
          metrics::per_aggregate(pairs, multi ? metrics::PerMode::best_reference : metrics::PerMode::per_pair_average).value);
    CHECK(corpus_value(report, "CIDEr") == metrics::cider(pairs).value);

    const auto* per_caption = report.find_table("per_caption");
    REQUIRE(per_caption->rows.size() == 20);
    const auto col = per_caption->column("METEOR");
    for (const auto& p : pairs) {
      CHECK(parse_number(row_for(report, "per_caption", p.image)[col]) == metrics::meteor(p.candidate, p.references).score);
    }
    if (multi) {
      const auto bcol = per_caption->column("BLEU4");
      const auto& p = pairs[5];
      CHECK(parse_number(row_for(report, "per_caption", p.image)[bcol]) == metrics::bleu_sentence(p.candidate, p.references, 4));
    }
  }
}

TEST_CASE("alignment errors name the file") {
  fixtures::TempDir dir("align");
  cli::ScoreOptions o;
  o.candidates = fixtures::write_file(dir / "c.txt", "a\tAA\nb\tQX\n");
  o.references = fixtures::write_file(dir / "r.txt", "a\tAA\n");
  o.out = dir / "out.txt";
  CHECK_THROWS_WITH(cli::cmd_score(o), doctest::Contains("c.txt"));
  CHECK_FALSE(fs::exists(o.out));
}

TEST_CASE("decode writes lines and a summary") {
  fixtures::TempDir dir("decode");
  cli::DecodeOptions o;
  o.lexicon = fixtures::write_file(dir / "lex.txt", fixtures::kSampleLexicon);
  o.input = fixtures::write_file(dir / "in.txt", "left\t" + fixtures::kSkiersCaption + "\nright\t" + fixtures::kStreetCaption + "\n");
  o.out = dir / "decoded.tsv";
  o.summary = dir / "summary.txt";
  auto outcome = cli::cmd_decode(o);
  CHECK(read_file(o.out) ==
        "left\ta group of skiers are skiing down a snowy hill\n"
        "right\ta man in a yellow shirt is standing on a street\n");
  for (const auto& [id, d] : outcome.decoded.captions) {
    CHECK(d.is_full_sentence);
  }
  auto summary = Report::load(*o.summary);
  CHECK(summary.value("decoder", "full_sentences") == "2");

  std::vector<lexdecode::Decoding> ds;
  for (const auto& [id, d] : outcome.decoded.captions) ds.push_back(d);
  auto tt = humaneval::type_token_ratio(ds);
  CHECK(summary.value("type_token", "types") == std::to_string(tt.types));
  CHECK(summary.value("type_token", "tokens") == std::to_string(tt.tokens));
  CHECK(summary.value("type_token", "ratio") == format_number(tt.ratio));
}

TEST_CASE("decode with an empty lexicon") {
  fixtures::TempDir dir("empty-lex");
  cli::DecodeOptions o;
  o.lexicon = fixtures::write_file(dir / "lex.txt", "");
  o.input = fixtures::write_file(dir / "in.txt", "x\tD AO G\n");
  o.out = dir / "decoded.tsv";
  auto outcome = cli::cmd_decode(o);
  CHECK(read_file(o.out) == "x\t<D> <AO> <G>\n");
  CHECK(outcome.summary.value("type_token", "ratio") == "n/a");
}

TEST_CASE("lists are deterministic") {
  fixtures::TempDir dir("lists");
  std::string pairs;
  for (int i = 0; i < 952; ++i) pairs += "img" + std::to_string(i) + "\tcaption number " + std::to_string(i) + "\n";
  cli::ListsOptions o;
  o.pairs = fixtures::write_file(dir / "pairs.tsv", pairs);
  o.controls = fixtures::write_file(dir / "controls.tsv", "good\tcg\ta fine caption\nbad\tcb\ta poor caption\n");
  o.seed = 42;
  o.out_dir = dir / "a";
  auto lists = cli::cmd_lists(o);
  CHECK(lists.size() == 34);
  int files = 0;
  for (const auto& e : fs::directory_iterator(o.out_dir)) files += e.path().filename().string().starts_with("list-");
  CHECK(files == 34);
  CHECK(humaneval::load_lists(o.out_dir).size() == 34);
  CHECK(humaneval::load_lists(o.out_dir / "list-07.tsv").at(0).items.size() == 30);

  auto same = o;
  same.out_dir = dir / "b";
  cli::cmd_lists(same);
  for (const auto& name : {"lists.tsv", "manifest.txt", "list-01.tsv", "list-34.tsv"}) {
    CHECK(read_file(o.out_dir / name) == read_file(same.out_dir / name));
  }

  auto other = o;
  other.seed = 43;
  other.out_dir = dir / "c";
  auto lists2 = cli::cmd_lists(other);
  std::multiset<std::string> a, b;
  for (const auto& l : lists) for (const auto& it : l.items) a.insert(it.image);
  for (const auto& l : lists2) for (const auto& it : l.items) b.insert(it.image);
  CHECK(a == b);
  CHECK(read_file(o.out_dir / "lists.tsv") != read_file(other.out_dir / "lists.tsv"));

  auto bad = o;
  bad.n_lists = 33;
  bad.out_dir = dir / "d";
  CHECK_THROWS_WITH(cli::cmd_lists(bad), doctest::Contains("cannot partition"));
}

TEST_CASE("pipeline") {
  fixtures::TempDir dir("pipeline");
  auto o = pipeline::run(dir.path());
  const auto* table = o.correlate.find_table("correlation");
  REQUIRE(table != nullptr);
  CHECK(table->rows.size() == 13);
  CHECK(row_for(o.correlate, "correlation", "MTurk").size() == 11);
  CHECK(o.correlate.value("ratings.overall", "submissions_accepted") == "10");
  CHECK(o.correlate.value("ratings.overall", "submissions_rejected") == "2");
  CHECK(o.correlate.find_table("rejections")->rows.size() == 6);
  const auto r = parse_number(row_for(o.correlate, "correlation", "PER")[2]);
  CHECK(r < 0);  // more edits, lower ratings
  CHECK(o.score.value("decoder", "captions") == "20");

  // rerun is byte-identical
  fixtures::TempDir again("pipeline2");
  auto o2 = pipeline::run(again.path());
  CHECK(o2.correlate.find_table("correlation")->rows == table->rows);
}

TEST_CASE("correlate with ratings equal to a metric") {
  fixtures::TempDir dir("planted");
  auto o = pipeline::run(dir.path());

  // Overall ratings copied from the per-caption BLEU4 column: r = 1 for BLEU4.
  const auto* pc = o.score.find_table("per_caption");
  const auto col = pc->column("BLEU4");
  std::map<std::string, double> bleu;
  for (const auto& row : pc->rows) bleu[row[0]] = parse_number(row[col]);
  double lo = 1e300, hi = -1e300;
  for (auto& [k, v] : bleu) lo = std::min(lo, v), hi = std::max(hi, v);

  // Scale BLEU4 onto 1..7 exactly, then write a scores report whose BLEU4
  // column holds the same integers.
  Report scores;
  scores.kv("meta").set("schema_version", "1");
  scores.table("corpus", {"metric", "value"}).add_row({"BLEU4", "1"});
  auto& t = scores.table("per_caption", {"image_id", "BLEU4"});
  std::vector<humaneval::RatingRecord> recs;
  for (const auto& list : o.lists) {
    auto sub = fixtures::submission("w", list, humaneval::RatingScale::overall, 6, 2, [&](const std::string& img) {
      return 1 + static_cast<int>(std::lround(6 * (bleu.at(img) - lo) / (hi - lo)));
    });
    for (const auto& rec : sub) {
      if (!rec.is_control) t.add_row({rec.image, std::to_string(rec.value)});
    }
    recs.insert(recs.end(), sub.begin(), sub.end());
  }
  scores.save(dir / "planted_scores.txt");
  {
    std::ofstream out(dir / "planted.csv");
    humaneval::write_ratings(out, recs);
  }
  cli::CorrelateOptions c;
  c.scores = dir / "planted_scores.txt";
  c.ratings = dir / "planted.csv";
  c.lists = dir / "lists" / "lists.tsv";
  c.out = dir / "planted_out.txt";
  auto report = cli::cmd_correlate(c);
  CHECK(parse_number(row_for(report, "correlation", "BLEU4")[2]) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(row_for(report, "correlation", "BLEU4")[5] == "-");
}

TEST_CASE("planted correlation fixture") {
  fixtures::TempDir dir("fixture");
  // x = (1,2,3,4,5) as metric values, y = (2,4,5,4,5) as the single overall rating
  const std::vector<std::string> ids{"p1", "p2", "p3", "p4", "p5"};
  const int ys[] = {2, 4, 5, 4, 5};
  Report scores;
  scores.table("corpus", {"metric", "value"}).add_row({"X", "3"});
  auto& t = scores.table("per_caption", {"image_id", "X"});
  for (int i = 0; i < 5; ++i) t.add_row({ids[i], std::to_string(i + 1)});
  scores.save(dir / "s.txt");

  humaneval::EvalList list{"list-1", {}};
  for (const auto& id : ids) list.items.push_back({id, "c"});
  list.items.push_back({"g", "c", true, humaneval::ControlPolarity::good});
  list.items.push_back({"b", "c", true, humaneval::ControlPolarity::bad});
  {
    std::ofstream out(dir / "lists.tsv");
    humaneval::write_lists(out, std::span(&list, 1));
  }
  auto recs = fixtures::submission("w", list, humaneval::RatingScale::overall, 7, 1, [&](const std::string& id) {
    return ys[id[1] - '1'];
  });
  {
    std::ofstream out(dir / "r.csv");
    humaneval::write_ratings(out, recs);
  }
  cli::CorrelateOptions c;
  c.scores = dir / "s.txt";
  c.ratings = dir / "r.csv";
  c.lists = dir / "lists.tsv";
  c.out = dir / "out.txt";
  auto report = cli::cmd_correlate(c);
  CHECK(std::abs(parse_number(row_for(report, "correlation", "X")[2]) - 6 / std::sqrt(60.0)) < 1e-6);

  // Everyone fails the controls.
  auto failing = fixtures::submission("w", list, humaneval::RatingScale::overall, 1, 7, [](const std::string&) { return 3; });
  {
    std::ofstream out(dir / "r.csv");
    humaneval::write_ratings(out, failing);
  }
  CHECK_THROWS_WITH(cli::cmd_correlate(c), doctest::Contains("no accepted submissions"));
}

}
