#pragma once

// Crowdsourced rating protocol: list construction with control pairs, rater
// filtering on control ratings, per-image aggregation and metric/rating
// correlation. Also owns the ratings and lists file formats.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phonecap/core.hpp"
#include "phonecap/lexdecode.hpp"
#include "phonecap/stats.hpp"

namespace phonecap::humaneval {

enum class RatingScale { overall, actions, objects };

struct ScaleBounds {
  int min = 1;
  int max = 7;
};

ScaleBounds bounds(RatingScale scale);
std::string_view to_string(RatingScale scale);
RatingScale parse_scale(std::string_view name);
inline constexpr RatingScale kAllScales[] = {RatingScale::overall, RatingScale::actions,
                                             RatingScale::objects};

enum class ControlPolarity { none, good, bad };

std::string_view to_string(ControlPolarity polarity);
ControlPolarity parse_polarity(std::string_view name);

struct CaptionedImage {
  ImageId image;
  std::string caption;
};

struct ControlPair {
  CaptionedImage good;
  CaptionedImage bad;
};

struct ListItem {
  ImageId image;
  std::string caption;
  bool is_control = false;
  ControlPolarity polarity = ControlPolarity::none;
};

struct EvalList {
  std::string list_id;
  std::vector<ListItem> items;
};

// "list-01" .. "list-34"; width grows with the list count.
std::string list_id_for(std::size_t index, std::size_t n_lists);

// Seeded shuffle of `pairs`, partitioned into n_lists lists of list_size test
// items; both controls are inserted into every list at seeded positions.
std::vector<EvalList> make_lists(std::span<const CaptionedImage> pairs, std::size_t n_lists,
                                 std::size_t list_size, const ControlPair& controls,
                                 std::uint64_t seed);

struct RatingRecord {
  std::string rater_id;
  std::string list_id;
  ImageId image;
  RatingScale scale = RatingScale::overall;
  int value = 0;
  bool is_control = false;
  ControlPolarity polarity = ControlPolarity::none;

  bool operator==(const RatingRecord&) const = default;
};

struct ControlThresholds {
  int good_min = 5;
  int bad_max = 3;
};

struct FilterPolicy {
  std::map<RatingScale, ControlThresholds> thresholds;

  // 7-point: good >= 5, bad <= 3. 4-point: good >= 3, bad <= 2.
  static FilterPolicy defaults();
  const ControlThresholds& for_scale(RatingScale scale) const;
  void validate() const;
};

// One rater's ratings of one list on one scale.
struct SubmissionKey {
  std::string rater_id;
  std::string list_id;
  RatingScale scale = RatingScale::overall;

  auto operator<=>(const SubmissionKey&) const = default;
};

struct Rejection {
  SubmissionKey submission;
  std::string reason;
};

struct FilterResult {
  std::set<SubmissionKey> accepted;
  std::vector<Rejection> rejected;

  bool is_accepted(const RatingRecord& record) const;
};

// A submission is accepted iff it rates every item of its list once, its
// good-control rating is >= good_min and its bad-control rating is <= bad_max.
FilterResult filter_raters(std::span<const RatingRecord> ratings, std::span<const EvalList> lists,
                           const FilterPolicy& policy);

std::vector<RatingRecord> accepted_records(std::span<const RatingRecord> ratings,
                                           const FilterResult& filter);

struct ImageRating {
  double mean = 0.0;
  std::size_t count = 0;
};

struct RatingAggregate {
  RatingScale scale = RatingScale::overall;
  std::map<ImageId, ImageRating> per_image;
  stats::MeanSd corpus;  // over individual ratings
  std::size_t ratings = 0;

  std::map<ImageId, double> means() const;
};

// Non-control records of `scale` only.
RatingAggregate aggregate_ratings(std::span<const RatingRecord> accepted, RatingScale scale);

// value -> number of non-control ratings on `scale`, every scale point listed.
std::map<int, std::size_t> rating_histogram(std::span<const RatingRecord> ratings,
                                            RatingScale scale);

// Pearson correlation over the image ids present in both maps.
stats::CorrelationResult correlate_metric_with_ratings(
    const std::map<ImageId, double>& per_caption_scores,
    const std::map<ImageId, double>& per_image_ratings);

struct TypeTokenStats {
  std::size_t types = 0;
  std::size_t tokens = 0;
  double ratio = 0.0;
};

// Lexicon words only; fallback tokens are not counted.
TypeTokenStats type_token_ratio(std::span<const lexdecode::Decoding> decoded);

// Type/token ratio of the ground-truth Flickr8k text captions.
inline constexpr double kGroundTruthTypeTokenRatio = 0.020;

// --- files -----------------------------------------------------------------

inline constexpr std::string_view kRatingsHeader =
    "rater_id,list_id,image_id,scale,value,is_control,control_polarity";

std::vector<RatingRecord> read_ratings(std::istream& in, std::string_view source = "<ratings>");
std::vector<RatingRecord> load_ratings(const std::filesystem::path& path);
std::string format_rating(const RatingRecord& record);
void write_ratings(std::ostream& out, std::span<const RatingRecord> records);

inline constexpr std::string_view kListsHeader =
    "list_id\tposition\timage_id\tis_control\tcontrol_polarity\tcaption";

std::vector<EvalList> read_lists(std::istream& in, std::string_view source = "<lists>");
// Accepts a lists file or a directory written by `phonecap lists`.
std::vector<EvalList> load_lists(const std::filesystem::path& path);
void write_lists(std::ostream& out, std::span<const EvalList> lists);

}  // namespace phonecap::humaneval
