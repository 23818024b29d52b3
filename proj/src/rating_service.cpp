#include "phonecap/rating_service.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "httplib.h"
#include "phonecap/report.hpp"

namespace phonecap::service {

namespace fs = std::filesystem;
using humaneval::RatingRecord;
using humaneval::RatingScale;
using nlohmann::json;

namespace {

void check_rater_id(const std::string& rater_id) {
  if (rater_id.empty() || rater_id.find_first_of(",\r\n") != std::string::npos) {
    throw ServiceError(400, "rater_id must be non-empty and contain no commas");
  }
}

std::string image_url(const ImageId& id) { return "/images/" + id; }

json scale_json(RatingScale scale) {
  const auto b = humaneval::bounds(scale);
  return {{"name", humaneval::to_string(scale)},
          {"min", b.min},
          {"max", b.max},
          {"min_label", "Very bad"},
          {"max_label", "Very good"}};
}

std::string content_type_for(const fs::path& file) {
  auto ext = to_lower(file.extension().string());
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".png") return "image/png";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  return "application/octet-stream";
}

std::optional<fs::path> find_image(const fs::path& dir, const std::string& id) {
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    const auto& p = entry.path();
    if (p.filename() == id || p.stem() == id) return p;
  }
  return std::nullopt;
}

}  // namespace

RatingStore::RatingStore(fs::path path) : path_(std::move(path)) {
  if (fs::exists(path_) && fs::file_size(path_) > 0) {
    records_ = humaneval::load_ratings(path_);
    return;
  }
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot create ratings store " + path_.string());
  out << humaneval::kRatingsHeader << '\n';
}

void RatingStore::append(const std::vector<RatingRecord>& records) {
  std::string block;
  for (const auto& r : records) block += humaneval::format_rating(r) + '\n';
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  out.write(block.data(), static_cast<std::streamsize>(block.size()));
  out.flush();
  if (!out) throw Error("cannot append to ratings store " + path_.string());
  records_.insert(records_.end(), records.begin(), records.end());
}

std::vector<RatingRecord> RatingStore::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::vector<InstructionExample> load_instructions(const fs::path& path, RatingScale scale) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<InstructionExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, '\t');) f.push_back(cell);
    if (f.size() != 4) {
      throw ParseError(path.string(), lineno, "expected scale, image, caption, rating");
    }
    if (humaneval::parse_scale(f[0]) != scale) continue;
    InstructionExample ex{f[1], f[2], std::stoi(f[3])};
    const auto b = humaneval::bounds(scale);
    if (ex.rating < b.min || ex.rating > b.max) {
      throw ParseError(path.string(), lineno, "example rating outside scale");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

RatingService::RatingService(std::vector<humaneval::EvalList> lists, fs::path ratings_path,
                             std::map<RatingScale, std::vector<InstructionExample>> examples)
    : lists_(std::move(lists)), examples_(std::move(examples)), store_(std::move(ratings_path)) {
  std::set<std::string> ids;
  for (const auto& l : lists_) {
    if (!ids.insert(l.list_id).second) throw Error("duplicate list id " + l.list_id);
  }
  // Completed sessions survive restarts through the store.
  for (const auto& r : store_.records()) {
    auto& s = sessions_[SessionKey{r.rater_id, r.list_id, r.scale}];
    s.completed = true;
    s.values[r.image] = r.value;
  }
}

const humaneval::EvalList& RatingService::find_list(const std::string& list_id) const {
  for (const auto& l : lists_) {
    if (l.list_id == list_id) return l;
  }
  throw ServiceError(404, "unknown list " + list_id);
}

json RatingService::get_list(const std::string& list_id, const std::string& rater_id,
                             RatingScale scale) {
  check_rater_id(rater_id);
  const auto& list = find_list(list_id);
  {
    std::lock_guard lock(mutex_);
    auto [it, inserted] = sessions_.try_emplace(SessionKey{rater_id, list_id, scale});
    if (inserted) it->second.issued_at = std::chrono::system_clock::now();
    if (it->second.completed) throw ServiceError(409, "already evaluated");
  }

  json items = json::array();
  for (std::size_t i = 0; i < list.items.size(); ++i) {
    const auto& item = list.items[i];
    items.push_back({{"position", i + 1},
                     {"image_id", item.image},
                     {"image_url", image_url(item.image)},
                     {"caption", item.caption}});
  }
  json examples = json::array();
  if (auto it = examples_.find(scale); it != examples_.end()) {
    for (const auto& ex : it->second) {
      examples.push_back({{"image_id", ex.image},
                          {"image_url", image_url(ex.image)},
                          {"caption", ex.caption},
                          {"rating", ex.rating}});
    }
  }
  return {{"list_id", list.list_id},
          {"rater_id", rater_id},
          {"scale", scale_json(scale)},
          {"items", std::move(items)},
          {"instructions", std::move(examples)}};
}

json RatingService::submit_ratings(const std::string& rater_id, const std::string& list_id,
                                   RatingScale scale, const std::map<ImageId, int>& values) {
  check_rater_id(rater_id);
  const auto& list = find_list(list_id);
  const auto b = humaneval::bounds(scale);

  std::lock_guard lock(mutex_);
  auto it = sessions_.find(SessionKey{rater_id, list_id, scale});
  if (it == sessions_.end()) throw ServiceError(409, "no open session for this list");
  auto& session = it->second;
  if (session.completed) {
    if (session.values == values) {
      return {{"status", "accepted"}, {"records_appended", 0}, {"duplicate", true}};
    }
    throw ServiceError(409, "already evaluated");
  }

  for (const auto& [image, v] : values) {
    const bool known = std::any_of(list.items.begin(), list.items.end(),
                                   [&](const auto& item) { return item.image == image; });
    if (!known) throw ServiceError(400, "unknown image " + image);
  }
  if (values.size() != list.items.size()) throw ServiceError(400, "incomplete");
  for (const auto& [image, v] : values) {
    if (v < b.min || v > b.max) {
      throw ServiceError(400, "value " + std::to_string(v) + " for image " + image +
                                  " is outside " + std::to_string(b.min) + ".." +
                                  std::to_string(b.max));
    }
  }

  std::vector<RatingRecord> records;
  records.reserve(list.items.size());
  for (const auto& item : list.items) {
    records.push_back({rater_id, list_id, item.image, scale, values.at(item.image),
                       item.is_control, item.polarity});
  }
  store_.append(records);
  session.completed = true;
  session.values = values;
  return {{"status", "accepted"}, {"records_appended", records.size()}, {"duplicate", false}};
}

json RatingService::progress() const {
  std::lock_guard lock(mutex_);
  json lists = json::array();
  for (const auto& l : lists_) {
    json completed = json::object(), open = json::object();
    for (auto scale : humaneval::kAllScales) {
      std::size_t done = 0, pending = 0;
      for (const auto& [key, s] : sessions_) {
        if (key.list_id != l.list_id || key.scale != scale) continue;
        (s.completed ? done : pending) += 1;
      }
      completed[std::string(humaneval::to_string(scale))] = done;
      open[std::string(humaneval::to_string(scale))] = pending;
    }
    lists.push_back({{"list_id", l.list_id},
                     {"items", l.items.size()},
                     {"completed", std::move(completed)},
                     {"open", std::move(open)}});
  }
  return {{"lists", std::move(lists)}, {"records", store_.records().size()}};
}

// --- HTTP ------------------------------------------------------------------

struct HttpServer::Impl {
  RatingService& service;
  std::optional<fs::path> images;
  httplib::Server server;

  explicit Impl(RatingService& s) : service(s) {}
};

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Handler>
void guarded(httplib::Response& res, Handler&& handler) {
  try {
    send_json(res, 200, handler());
  } catch (const ServiceError& e) {
    send_json(res, e.status(), {{"error", e.what()}});
  } catch (const json::exception& e) {
    send_json(res, 400, {{"error", std::string("malformed request: ") + e.what()}});
  } catch (const Error& e) {
    send_json(res, 400, {{"error", e.what()}});
  }
}

}  // namespace

HttpServer::HttpServer(RatingService& service, std::optional<fs::path> images,
                       std::optional<fs::path> ui)
    : impl_(std::make_unique<Impl>(service)) {
  impl_->images = std::move(images);
  auto& srv = impl_->server;
  Impl* self = impl_.get();

  srv.Get(R"(/api/lists/([^/]+))", [self](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto scale = humaneval::parse_scale(
          req.has_param("scale") ? req.get_param_value("scale") : std::string("overall"));
      return self->service.get_list(req.matches[1], req.get_param_value("rater_id"), scale);
    });
  });

  srv.Post(R"(/api/lists/([^/]+)/ratings)",
           [self](const httplib::Request& req, httplib::Response& res) {
             guarded(res, [&] {
               const auto body = json::parse(req.body);
               std::map<ImageId, int> values;
               if (body.contains("ratings")) {
                 for (const auto& r : body.at("ratings")) {
                   const auto image = r.at("image_id").get<std::string>();
                   if (!values.emplace(image, r.at("value").get<int>()).second) {
                     throw ServiceError(400, "duplicate rating for image " + image);
                   }
                 }
               } else {
                 for (const auto& [image, v] : body.at("values").items()) {
                   values[image] = v.get<int>();
                 }
               }
               return self->service.submit_ratings(
                   body.at("rater_id").get<std::string>(), req.matches[1],
                   humaneval::parse_scale(body.at("scale").get<std::string>()), values);
             });
           });

  srv.Get("/api/progress", [self](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { return self->service.progress(); });
  });

  srv.Get(R"(/images/([^/]+))", [self](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto file = self->images ? find_image(*self->images, id) : std::nullopt;
    if (!file) {
      send_json(res, 404, {{"error", "no image " + id}});
      return;
    }
    res.set_content(read_file(*file), content_type_for(*file));
  });

  if (ui) srv.set_mount_point("/", ui->string());
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    const int bound = srv.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
    return bound;
  }
  if (!srv.bind_to_port(host, port)) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace phonecap::service
