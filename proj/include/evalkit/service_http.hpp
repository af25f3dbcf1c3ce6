// evalkit/service_http.hpp
//
// HTTP front end for the service core.  Routes:
//
//   POST /api/v1/tasks/{1|2}/submissions    raw ZIP body, Bearer auth
//        201 record | 401 | 404 unknown task | 422 rejected record | 429 quota
//   GET  /api/v1/tasks/{t}/submissions/{id} 200 | 401 | 404
//   GET  /api/v1/tasks/{t}/leaderboard      200 entries or {"frozen":true}
//   GET  /api/v1/health                     200
//
// A single worker thread drains the asynchronous scoring queue; submits
// below the configured trial-count threshold are scored inside the
// request and never touch the queue.
//
// Copyright 2026  Evalkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef EVALKIT_SERVICE_HTTP_HPP_
#define EVALKIT_SERVICE_HTTP_HPP_

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "evalkit/service.hpp"

namespace evalkit {
namespace service {

class HttpService {
 public:
  explicit HttpService(ServiceCore &core) : core_(core) {
    server_.set_payload_max_length(1024 * 1024 * 1024);
    Route();
    worker_ = std::thread([this] { WorkerLoop(); });
  }

  ~HttpService() {
    Stop();
    if (worker_.joinable()) worker_.join();
  }

  // Blocks until Stop(); false when the port cannot be bound.
  bool Listen(const std::string &host, int port) {
    return server_.listen(host, port);
  }

  bool BindToPort(const std::string &host, int port) {
    return server_.bind_to_port(host, port);
  }

  bool ListenAfterBind() { return server_.listen_after_bind(); }

  void Stop() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
    }
    wake_.notify_all();
    server_.stop();
  }

  bool is_running() const { return server_.is_running(); }

 private:
  static std::string BearerToken(const httplib::Request &req) {
    std::string auth = req.get_header_value("Authorization");
    constexpr std::string_view kPrefix = "Bearer ";
    if (auth.rfind(kPrefix, 0) != 0) return "";
    return auth.substr(kPrefix.size());
  }

  const TeamConfig *Authenticate(const httplib::Request &req,
                                 httplib::Response &res) {
    const TeamConfig *team = core_.Authenticate(BearerToken(req));
    if (team == nullptr) {
      Fail(res, 401, "Unauthorized", "missing or unknown bearer token");
      return nullptr;
    }
    return team;
  }

  static void Fail(httplib::Response &res, int status, const char *code,
                   const std::string &detail) {
    nlohmann::json j;
    j["error"] = code;
    j["detail"] = detail;
    res.status = status;
    res.set_content(j.dump(), "application/json");
  }

  static void Reply(httplib::Response &res, int status, const nlohmann::json &j) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  }

  void Route() {
    server_.Get("/api/v1/health", [](const httplib::Request &,
                                     httplib::Response &res) {
      Reply(res, 200, {{"status", "ok"}});
    });

    server_.Post(
        R"(/api/v1/tasks/(\d+)/submissions)",
        [this](const httplib::Request &req, httplib::Response &res) {
          const TeamConfig *team = Authenticate(req, res);
          if (team == nullptr) return;
          int task = std::atoi(req.matches[1].str().c_str());
          try {
            auto record = core_.Submit(
                team->team_id, task,
                std::span(reinterpret_cast<const std::uint8_t *>(req.body.data()),
                          req.body.size()));
            if (record.status == SubmissionStatus::Queued) wake_.notify_all();
            int status =
                record.status == SubmissionStatus::Rejected ? 422 : 201;
            Reply(res, status, RecordToJson(record));
          } catch (const ServiceError &e) {
            switch (e.code()) {
              case ServiceErrorCode::QuotaExceeded:
                Fail(res, 429, "QuotaExceeded", e.what());
                break;
              case ServiceErrorCode::UnknownTask:
                Fail(res, 404, "UnknownTask", e.what());
                break;
              default:
                Fail(res, 400, ToString(e.code()), e.what());
            }
          }
        });

    server_.Get(
        R"(/api/v1/tasks/(\d+)/submissions/([^/]+))",
        [this](const httplib::Request &req, httplib::Response &res) {
          const TeamConfig *team = Authenticate(req, res);
          if (team == nullptr) return;
          try {
            auto record =
                core_.GetSubmission(team->team_id, req.matches[2].str());
            Reply(res, 200, RecordToJson(record));
          } catch (const ServiceError &e) {
            if (e.code() == ServiceErrorCode::NotFound)
              Fail(res, 404, "NotFound", e.what());
            else if (e.code() == ServiceErrorCode::Unauthorized)
              Fail(res, 401, "Unauthorized", e.what());
            else
              Fail(res, 400, ToString(e.code()), e.what());
          }
        });

    server_.Get(R"(/api/v1/tasks/(\d+)/leaderboard)",
                [this](const httplib::Request &req, httplib::Response &res) {
                  int task = std::atoi(req.matches[1].str().c_str());
                  try {
                    Reply(res, 200, LeaderboardToJson(core_.GetLeaderboard(task)));
                  } catch (const ServiceError &e) {
                    Fail(res, 404, "UnknownTask", e.what());
                  }
                });
  }

  void WorkerLoop() {
    core_.DrainQueue();  // score whatever a previous process left queued
    std::unique_lock lock(mutex_);
    while (!stopping_) {
      wake_.wait(lock, [this] { return stopping_ || core_.QueuedCount() > 0; });
      if (stopping_) break;
      lock.unlock();
      core_.DrainQueue();
      lock.lock();
    }
  }

  ServiceCore &core_;
  httplib::Server server_;
  std::thread worker_;
  std::mutex mutex_;
  std::condition_variable wake_;
  bool stopping_ = false;
};

}  // namespace service
}  // namespace evalkit

#endif  // EVALKIT_SERVICE_HTTP_HPP_
