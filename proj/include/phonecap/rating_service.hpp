#pragma once

// Serves evaluation lists to raters and appends their submissions to a
// ratings file in the humaneval format.
//
// HTTP endpoints (JSON bodies):
//   GET  /api/lists/<list_id>?rater_id=<id>&scale=<overall|actions|objects>
//   POST /api/lists/<list_id>/ratings   {"rater_id","scale","values":{image_id: int}}
//        or {"rater_id","scale","ratings":[{"image_id","value"}]}
//   GET  /api/progress
//   GET  /images/<image_id>             file from the image directory
//
// A rater holds at most one session per (list, scale). Once the session is
// completed the list is refused with "already evaluated"; an identical
// resubmission is acknowledged without appending anything.

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "phonecap/humaneval.hpp"

namespace phonecap::service {

// Carries the HTTP status the frontend should answer with.
class ServiceError : public Error {
 public:
  ServiceError(int status, const std::string& reason) : Error(reason), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

struct InstructionExample {
  ImageId image;
  std::string caption;
  int rating = 1;
};

// Append-only ratings file; writes are serialized.
class RatingStore {
 public:
  explicit RatingStore(std::filesystem::path path);

  void append(const std::vector<humaneval::RatingRecord>& records);
  std::vector<humaneval::RatingRecord> records() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::vector<humaneval::RatingRecord> records_;
};

struct ServiceOptions {
  std::filesystem::path lists;
  std::filesystem::path ratings;
  std::optional<std::filesystem::path> images;
  std::optional<std::filesystem::path> instructions;  // TSV: scale, image, caption, rating
  std::optional<std::filesystem::path> ui;            // static files mounted at /
};

std::vector<InstructionExample> load_instructions(const std::filesystem::path& path,
                                                  humaneval::RatingScale scale);

class RatingService {
 public:
  RatingService(std::vector<humaneval::EvalList> lists, std::filesystem::path ratings_path,
                std::map<humaneval::RatingScale, std::vector<InstructionExample>> examples = {});

  // Opens (or resumes) the rater's session and returns the list payload.
  // Control items are indistinguishable from test items in the payload.
  nlohmann::json get_list(const std::string& list_id, const std::string& rater_id,
                          humaneval::RatingScale scale);

  nlohmann::json submit_ratings(const std::string& rater_id, const std::string& list_id,
                                humaneval::RatingScale scale,
                                const std::map<ImageId, int>& values);

  nlohmann::json progress() const;

  const RatingStore& store() const { return store_; }

 private:
  struct Session {
    std::chrono::system_clock::time_point issued_at;
    bool completed = false;
    std::map<ImageId, int> values;
  };
  using SessionKey = humaneval::SubmissionKey;

  const humaneval::EvalList& find_list(const std::string& list_id) const;

  std::vector<humaneval::EvalList> lists_;
  std::map<humaneval::RatingScale, std::vector<InstructionExample>> examples_;
  RatingStore store_;
  mutable std::mutex mutex_;
  std::map<SessionKey, Session> sessions_;
};

// HTTP frontend over a RatingService.
class HttpServer {
 public:
  HttpServer(RatingService& service, std::optional<std::filesystem::path> images = std::nullopt,
             std::optional<std::filesystem::path> ui = std::nullopt);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds host:port (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace phonecap::service
