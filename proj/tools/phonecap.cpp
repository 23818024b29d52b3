// phonecap: score, decode, build rating lists, correlate, serve.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "phonecap/commands.hpp"
#include "phonecap/rating_service.hpp"

namespace {

using namespace phonecap;
namespace fs = std::filesystem;

// "<scale>:<good_min>:<bad_max>", e.g. overall:5:3
void apply_threshold(humaneval::FilterPolicy& policy, const std::string& spec) {
  const auto a = spec.find(':');
  const auto b = spec.find(':', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) {
    throw Error("threshold must look like scale:good_min:bad_max, got '" + spec + "'");
  }
  const auto scale = humaneval::parse_scale(spec.substr(0, a));
  policy.thresholds[scale] = {std::stoi(spec.substr(a + 1, b - a - 1)), std::stoi(spec.substr(b + 1))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phoneme caption evaluation toolkit"};
  app.set_version_flag("--version", std::string(PHONECAP_VERSION));
  app.require_subcommand(1);

  // score
  cli::ScoreOptions score;
  std::string score_mode = "multi";
  auto* score_cmd = app.add_subcommand("score", "Score candidate captions against references");
  score_cmd->add_option("--candidates", score.candidates, "Candidate captions")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--references", score.references, "Reference captions")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--inventory", score.inventory, "Phoneme inventory (default: extended ARPAbet)");
  score_cmd->add_option("--lexicon", score.lexicon, "Also decode candidates with this lexicon");
  score_cmd->add_option("--metrics", score.metrics, "Metrics to compute (default: all)")->delimiter(',');
  score_cmd->add_option("--mode", score_mode, "Reference aggregation: multi or per_pair")
      ->check(CLI::IsMember({"multi", "per_pair"}));
  score_cmd->add_option("--epsilon", score.epsilon, "Sentence BLEU smoothing epsilon");
  score_cmd->add_option("--base", score.base, "Decoder length base");
  score_cmd->add_option("--oov-cost", score.oov_cost, "Decoder OOV arc cost");
  score_cmd->add_option("--out", score.out, "Report path")->required();

  // decode
  cli::DecodeOptions decode;
  auto* decode_cmd = app.add_subcommand("decode", "Decode phoneme captions into words");
  decode_cmd->add_option("--lexicon", decode.lexicon, "Pronunciation lexicon")->required()->check(CLI::ExistingFile);
  decode_cmd->add_option("--input", decode.input, "Phoneme captions")->required()->check(CLI::ExistingFile);
  decode_cmd->add_option("--inventory", decode.inventory, "Phoneme inventory");
  decode_cmd->add_option("--base", decode.base, "Length base");
  decode_cmd->add_option("--oov-cost", decode.oov_cost, "OOV arc cost");
  decode_cmd->add_option("--out", decode.out, "Decoded captions")->required();
  decode_cmd->add_option("--summary", decode.summary, "Summary report path");

  // lists
  cli::ListsOptions lists;
  auto* lists_cmd = app.add_subcommand("lists", "Build rating lists with control pairs");
  lists_cmd->add_option("--pairs", lists.pairs, "Image/caption pairs")->required()->check(CLI::ExistingFile);
  lists_cmd->add_option("--controls", lists.controls, "Good and bad control pairs")->required()->check(CLI::ExistingFile);
  lists_cmd->add_option("--n-lists", lists.n_lists, "Number of lists");
  lists_cmd->add_option("--list-size", lists.list_size, "Test items per list");
  lists_cmd->add_option("--seed", lists.seed, "Shuffle seed")->required();
  lists_cmd->add_option("--out-dir", lists.out_dir, "Output directory")->required();

  // correlate
  cli::CorrelateOptions correlate;
  std::vector<std::string> thresholds;
  auto* correlate_cmd = app.add_subcommand("correlate", "Correlate metric scores with ratings");
  correlate_cmd->add_option("--scores", correlate.scores, "Report from `score`")->required()->check(CLI::ExistingFile);
  correlate_cmd->add_option("--ratings", correlate.ratings, "Ratings CSV")->required()->check(CLI::ExistingFile);
  correlate_cmd->add_option("--lists", correlate.lists, "lists.tsv or the directory holding it")->required()->check(CLI::ExistingPath);
  correlate_cmd->add_option("--threshold", thresholds, "Control thresholds as scale:good_min:bad_max");
  correlate_cmd->add_option("--out", correlate.out, "Report path")->required();

  // serve
  service::ServiceOptions serve;
  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Serve lists to raters and record ratings");
  serve_cmd->add_option("--lists", serve.lists, "lists.tsv or the directory holding it")->required()->check(CLI::ExistingPath);
  serve_cmd->add_option("--ratings", serve.ratings, "Ratings CSV to append to")->required();
  serve_cmd->add_option("--images", serve.images, "Image directory")->check(CLI::ExistingDirectory);
  serve_cmd->add_option("--instructions", serve.instructions, "Instruction examples TSV")->check(CLI::ExistingFile);
  serve_cmd->add_option("--ui", serve.ui, "Static UI directory mounted at /")->check(CLI::ExistingDirectory);
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*score_cmd) {
      score.mode = cli::parse_aggregation(score_mode);
      cli::cmd_score(score);
    } else if (*decode_cmd) {
      auto outcome = cli::cmd_decode(decode);
      for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << '\n';
      const auto& s = outcome.decoded.summary;
      std::cerr << s.captions << " captions, " << s.full_sentences << " full sentences, "
                << s.oov_tokens << " OOV tokens\n";
    } else if (*lists_cmd) {
      const auto built = cli::cmd_lists(lists);
      std::cerr << "wrote " << built.size() << " lists to " << lists.out_dir.string() << '\n';
    } else if (*correlate_cmd) {
      for (const auto& t : thresholds) apply_threshold(correlate.policy, t);
      cli::cmd_correlate(correlate);
    } else if (*serve_cmd) {
      std::map<humaneval::RatingScale, std::vector<service::InstructionExample>> examples;
      if (serve.instructions) {
        for (auto scale : humaneval::kAllScales) {
          examples[scale] = service::load_instructions(*serve.instructions, scale);
        }
      }
      service::RatingService svc(humaneval::load_lists(serve.lists), serve.ratings,
                                 std::move(examples));
      service::HttpServer server(svc, serve.images, serve.ui);
      const int bound = server.bind(host, port);
      std::cerr << "listening on http://" << host << ':' << bound << '\n';
      server.run();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
