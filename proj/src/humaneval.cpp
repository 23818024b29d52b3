#include "phonecap/humaneval.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace phonecap::humaneval {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep, std::size_t max_fields) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (out.size() + 1 < max_fields) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) break;
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  out.push_back(line.substr(start));
  return out;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view s, std::string_view source, std::size_t lineno,
              std::string_view field) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(source, lineno, "invalid " + std::string(field) + " '" + std::string(s) + "'");
  }
  return value;
}

bool parse_flag(std::string_view s, std::string_view source, std::size_t lineno) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw ParseError(source, lineno, "invalid is_control flag '" + std::string(s) + "'");
}

// Unbiased draw in [0, n) from a 64-bit engine; fixed across standard libraries.
std::size_t draw_below(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t bound = n;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

void check_field(std::string_view value, std::string_view field) {
  if (value.empty() || value.find_first_of(",\n\r") != std::string_view::npos) {
    throw Error("ratings field " + std::string(field) + " must be non-empty without commas: '" +
                std::string(value) + "'");
  }
}

}  // namespace

ScaleBounds bounds(RatingScale scale) {
  return scale == RatingScale::overall ? ScaleBounds{1, 7} : ScaleBounds{1, 4};
}

std::string_view to_string(RatingScale scale) {
  switch (scale) {
    case RatingScale::overall: return "overall";
    case RatingScale::actions: return "actions";
    case RatingScale::objects: return "objects";
  }
  return "overall";
}

RatingScale parse_scale(std::string_view name) {
  for (auto s : kAllScales) {
    if (to_string(s) == name) return s;
  }
  throw Error("unknown rating scale '" + std::string(name) + "'");
}

std::string_view to_string(ControlPolarity polarity) {
  switch (polarity) {
    case ControlPolarity::none: return "none";
    case ControlPolarity::good: return "good";
    case ControlPolarity::bad: return "bad";
  }
  return "none";
}

ControlPolarity parse_polarity(std::string_view name) {
  if (name == "none") return ControlPolarity::none;
  if (name == "good") return ControlPolarity::good;
  if (name == "bad") return ControlPolarity::bad;
  throw Error("unknown control polarity '" + std::string(name) + "'");
}

std::string list_id_for(std::size_t index, std::size_t n_lists) {
  const auto width = std::max<std::size_t>(2, std::to_string(n_lists).size());
  std::string digits = std::to_string(index + 1);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "list-" + digits;
}

std::vector<EvalList> make_lists(std::span<const CaptionedImage> pairs, std::size_t n_lists,
                                 std::size_t list_size, const ControlPair& controls,
                                 std::uint64_t seed) {
  if (n_lists == 0 || list_size == 0) throw Error("list count and size must be positive");
  const std::size_t needed = n_lists * list_size;
  if (pairs.size() != needed) {
    std::ostringstream os;
    os << "cannot partition " << pairs.size() << " pairs into " << n_lists << " lists of "
       << list_size << ": expected " << needed << ", remainder "
       << static_cast<long long>(pairs.size()) - static_cast<long long>(needed);
    throw Error(os.str());
  }
  if (controls.good.image == controls.bad.image) {
    throw Error("good and bad controls must use different images");
  }
  std::unordered_set<std::string_view> ids;
  for (const auto& p : pairs) {
    if (!ids.insert(p.image).second) throw Error("duplicate test image " + p.image);
  }
  if (ids.count(controls.good.image) || ids.count(controls.bad.image)) {
    throw Error("control images must not be test images");
  }

  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[draw_below(rng, i)]);

  std::vector<EvalList> lists(n_lists);
  for (std::size_t l = 0; l < n_lists; ++l) {
    auto& list = lists[l];
    list.list_id = list_id_for(l, n_lists);
    for (std::size_t k = 0; k < list_size; ++k) {
      const auto& p = pairs[order[l * list_size + k]];
      list.items.push_back({p.image, p.caption, false, ControlPolarity::none});
    }
    const auto good_at = draw_below(rng, list.items.size() + 1);
    list.items.insert(list.items.begin() + static_cast<long>(good_at),
                      {controls.good.image, controls.good.caption, true, ControlPolarity::good});
    const auto bad_at = draw_below(rng, list.items.size() + 1);
    list.items.insert(list.items.begin() + static_cast<long>(bad_at),
                      {controls.bad.image, controls.bad.caption, true, ControlPolarity::bad});
  }
  return lists;
}

FilterPolicy FilterPolicy::defaults() {
  FilterPolicy p;
  p.thresholds[RatingScale::overall] = {5, 3};
  p.thresholds[RatingScale::actions] = {3, 2};
  p.thresholds[RatingScale::objects] = {3, 2};
  return p;
}

const ControlThresholds& FilterPolicy::for_scale(RatingScale scale) const {
  auto it = thresholds.find(scale);
  if (it == thresholds.end()) {
    throw Error("no filter thresholds for scale " + std::string(to_string(scale)));
  }
  return it->second;
}

void FilterPolicy::validate() const {
  for (const auto& [scale, t] : thresholds) {
    const auto b = bounds(scale);
    if (t.good_min < b.min || t.good_min > b.max || t.bad_max < b.min || t.bad_max > b.max) {
      throw Error("filter thresholds for " + std::string(to_string(scale)) + " must lie in " +
                  std::to_string(b.min) + ".." + std::to_string(b.max));
    }
    if (t.good_min <= t.bad_max) {
      throw Error("filter thresholds for " + std::string(to_string(scale)) +
                  " need good_min > bad_max");
    }
  }
}

bool FilterResult::is_accepted(const RatingRecord& record) const {
  return accepted.count(SubmissionKey{record.rater_id, record.list_id, record.scale}) > 0;
}

FilterResult filter_raters(std::span<const RatingRecord> ratings, std::span<const EvalList> lists,
                           const FilterPolicy& policy) {
  policy.validate();
  std::unordered_map<std::string_view, const EvalList*> by_id;
  for (const auto& l : lists) by_id[l.list_id] = &l;

  std::map<SubmissionKey, std::vector<const RatingRecord*>> submissions;
  for (const auto& r : ratings) {
    auto it = by_id.find(r.list_id);
    if (it == by_id.end()) throw Error("rating for unknown list " + r.list_id);
    const auto& items = it->second->items;
    const bool known = std::any_of(items.begin(), items.end(),
                                   [&](const ListItem& item) { return item.image == r.image; });
    if (!known) throw Error("rating for unknown image " + r.image + " in list " + r.list_id);
    submissions[{r.rater_id, r.list_id, r.scale}].push_back(&r);
  }

  FilterResult result;
  for (const auto& [key, records] : submissions) {
    const EvalList& list = *by_id.at(key.list_id);
    std::map<std::string_view, int> value_of;
    bool duplicated = false;
    for (const auto* r : records) duplicated |= !value_of.emplace(r->image, r->value).second;
    if (duplicated) {
      result.rejected.push_back({key, "duplicate item rating"});
      continue;
    }
    if (value_of.size() != list.items.size()) {
      result.rejected.push_back({key, "incomplete"});
      continue;
    }
    const auto& t = policy.for_scale(key.scale);
    std::vector<std::string> reasons;
    for (const auto& item : list.items) {
      const int v = value_of.at(item.image);
      if (item.polarity == ControlPolarity::good && v < t.good_min) {
        reasons.emplace_back("good-control too low");
      } else if (item.polarity == ControlPolarity::bad && v > t.bad_max) {
        reasons.emplace_back("bad-control too high");
      }
    }
    if (reasons.empty()) {
      result.accepted.insert(key);
    } else {
      std::string joined = reasons.front();
      for (std::size_t i = 1; i < reasons.size(); ++i) joined += "; " + reasons[i];
      result.rejected.push_back({key, joined});
    }
  }
  return result;
}

std::vector<RatingRecord> accepted_records(std::span<const RatingRecord> ratings,
                                           const FilterResult& filter) {
  std::vector<RatingRecord> out;
  for (const auto& r : ratings) {
    if (filter.is_accepted(r)) out.push_back(r);
  }
  return out;
}

std::map<ImageId, double> RatingAggregate::means() const {
  std::map<ImageId, double> out;
  for (const auto& [id, r] : per_image) out[id] = r.mean;
  return out;
}

RatingAggregate aggregate_ratings(std::span<const RatingRecord> accepted, RatingScale scale) {
  RatingAggregate agg;
  agg.scale = scale;
  std::map<ImageId, double> sums;
  std::vector<double> values;
  for (const auto& r : accepted) {
    if (r.scale != scale || r.is_control) continue;
    sums[r.image] += r.value;
    ++agg.per_image[r.image].count;
    values.push_back(r.value);
  }
  if (values.empty()) {
    throw Error("no accepted " + std::string(to_string(scale)) + " ratings to aggregate");
  }
  for (auto& [id, rating] : agg.per_image) {
    rating.mean = sums[id] / static_cast<double>(rating.count);
  }
  agg.corpus = stats::mean_sd(values);
  agg.ratings = values.size();
  return agg;
}

std::map<int, std::size_t> rating_histogram(std::span<const RatingRecord> ratings,
                                            RatingScale scale) {
  std::map<int, std::size_t> hist;
  const auto b = bounds(scale);
  for (int v = b.min; v <= b.max; ++v) hist[v] = 0;
  for (const auto& r : ratings) {
    if (r.scale == scale && !r.is_control) ++hist[r.value];
  }
  return hist;
}

stats::CorrelationResult correlate_metric_with_ratings(
    const std::map<ImageId, double>& per_caption_scores,
    const std::map<ImageId, double>& per_image_ratings) {
  std::vector<double> x, y;
  for (const auto& [id, score] : per_caption_scores) {
    auto it = per_image_ratings.find(id);
    if (it == per_image_ratings.end()) continue;
    x.push_back(score);
    y.push_back(it->second);
  }
  if (x.size() < 3) {
    throw Error("correlation needs at least 3 images with both a score and a rating, got " +
                std::to_string(x.size()));
  }
  return stats::pearson(x, y);
}

TypeTokenStats type_token_ratio(std::span<const lexdecode::Decoding> decoded) {
  TypeTokenStats out;
  std::set<std::string_view> types;
  for (const auto& d : decoded) {
    for (const auto& seg : d.segmentation) {
      if (seg.oov) continue;
      ++out.tokens;
      types.insert(seg.token);
    }
  }
  if (out.tokens == 0) throw Error("type/token ratio needs at least one word token");
  out.types = types.size();
  out.ratio = static_cast<double>(out.types) / static_cast<double>(out.tokens);
  return out;
}

std::vector<RatingRecord> read_ratings(std::istream& in, std::string_view source) {
  std::vector<RatingRecord> records;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = strip_cr(line);
    if (view.empty()) continue;
    if (!header_seen) {
      if (view != kRatingsHeader) throw ParseError(source, lineno, "unexpected ratings header");
      header_seen = true;
      continue;
    }
    const auto f = split(view, ',', 8);
    if (f.size() != 7) throw ParseError(source, lineno, "expected 7 comma-separated fields");
    RatingRecord r;
    r.rater_id = std::string(f[0]);
    r.list_id = std::string(f[1]);
    r.image = std::string(f[2]);
    if (r.rater_id.empty() || r.list_id.empty() || r.image.empty()) {
      throw ParseError(source, lineno, "empty identifier field");
    }
    try {
      r.scale = parse_scale(f[3]);
      r.polarity = parse_polarity(f[6]);
    } catch (const Error& e) {
      throw ParseError(source, lineno, e.what());
    }
    r.value = parse_int(f[4], source, lineno, "value");
    r.is_control = parse_flag(f[5], source, lineno);
    const auto b = bounds(r.scale);
    if (r.value < b.min || r.value > b.max) {
      throw ParseError(source, lineno, "value " + std::to_string(r.value) + " outside " +
                                           std::string(to_string(r.scale)) + " scale");
    }
    if (r.is_control != (r.polarity != ControlPolarity::none)) {
      throw ParseError(source, lineno, "is_control disagrees with control_polarity");
    }
    records.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError(source, 0, "missing ratings header");
  return records;
}

std::vector<RatingRecord> load_ratings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_ratings(in, path.string());
}

std::string format_rating(const RatingRecord& r) {
  check_field(r.rater_id, "rater_id");
  check_field(r.list_id, "list_id");
  check_field(r.image, "image_id");
  std::ostringstream os;
  os << r.rater_id << ',' << r.list_id << ',' << r.image << ',' << to_string(r.scale) << ','
     << r.value << ',' << (r.is_control ? 1 : 0) << ',' << to_string(r.polarity);
  return os.str();
}

void write_ratings(std::ostream& out, std::span<const RatingRecord> records) {
  out << kRatingsHeader << '\n';
  for (const auto& r : records) out << format_rating(r) << '\n';
}

std::vector<EvalList> read_lists(std::istream& in, std::string_view source) {
  std::vector<EvalList> lists;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = strip_cr(line);
    if (view.empty()) continue;
    if (!header_seen) {
      if (view != kListsHeader) throw ParseError(source, lineno, "unexpected lists header");
      header_seen = true;
      continue;
    }
    const auto f = split(view, '\t', 6);
    if (f.size() != 6) throw ParseError(source, lineno, "expected 6 tab-separated fields");
    const std::string list_id(f[0]);
    auto [it, inserted] = index.emplace(list_id, lists.size());
    if (inserted) lists.push_back({list_id, {}});
    auto& list = lists[it->second];
    const int position = parse_int(f[1], source, lineno, "position");
    if (position != static_cast<int>(list.items.size()) + 1) {
      throw ParseError(source, lineno, "list positions must be consecutive from 1");
    }
    ListItem item;
    item.image = std::string(f[2]);
    item.is_control = parse_flag(f[3], source, lineno);
    try {
      item.polarity = parse_polarity(f[4]);
    } catch (const Error& e) {
      throw ParseError(source, lineno, e.what());
    }
    item.caption = std::string(f[5]);
    list.items.push_back(std::move(item));
  }
  if (!header_seen) throw ParseError(source, 0, "missing lists header");
  return lists;
}

std::vector<EvalList> load_lists(const std::filesystem::path& path) {
  auto file = std::filesystem::is_directory(path) ? path / "lists.tsv" : path;
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open " + file.string());
  return read_lists(in, file.string());
}

void write_lists(std::ostream& out, std::span<const EvalList> lists) {
  out << kListsHeader << '\n';
  for (const auto& list : lists) {
    for (std::size_t i = 0; i < list.items.size(); ++i) {
      const auto& item = list.items[i];
      out << list.list_id << '\t' << (i + 1) << '\t' << item.image << '\t'
          << (item.is_control ? 1 : 0) << '\t' << to_string(item.polarity) << '\t' << item.caption
          << '\n';
    }
  }
}

}  // namespace phonecap::humaneval
