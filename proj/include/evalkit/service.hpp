// evalkit/service.hpp
//
// Leaderboard service core, HTTP-free.  Owns the submission lifecycle:
// atomic daily-quota admission, archive storage, validation, scoring
// against the configured trial keys, an append-only journal replayed on
// startup, and the ranking with its end-of-challenge freeze.  The HTTP
// layer in service_http.hpp is a thin adapter over this class, so every
// behavior here is testable without sockets.
//
// Time is injected as a callable returning unix seconds, which makes
// quota-day rollover and the leaderboard freeze exercisable in tests.
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

#ifndef EVALKIT_SERVICE_HPP_
#define EVALKIT_SERVICE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "evalkit/detail/fsio.hpp"
#include "evalkit/detail/hash.hpp"
#include "evalkit/formats.hpp"
#include "evalkit/scorer.hpp"
#include "evalkit/submission.hpp"

namespace evalkit {
namespace service {

// ---------------------------------------------------------------------------
// Time

// Civil-calendar conversions for RFC 3339 timestamps (proleptic Gregorian,
// no leap seconds), so the service does not depend on the host timezone.
namespace timeutil {

inline std::int64_t DaysFromCivil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void CivilFromDays(std::int64_t z, std::int64_t *y, unsigned *m,
                          unsigned *d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  *d = doy - (153 * mp + 2) / 5 + 1;
  *m = mp < 10 ? mp + 3 : mp - 9;
  *y = yr + (*m <= 2);
}

// Accepts "YYYY-MM-DDThh:mm:ss" with optional fractional seconds and a
// mandatory "Z" or "+hh:mm"/"-hh:mm" offset.
inline std::optional<std::int64_t> ParseRfc3339(std::string_view s) {
  auto digits = [&](std::size_t pos, int n, long *out) {
    long v = 0;
    for (int i = 0; i < n; ++i) {
      if (pos + i >= s.size() || s[pos + i] < '0' || s[pos + i] > '9')
        return false;
      v = v * 10 + (s[pos + i] - '0');
    }
    *out = v;
    return true;
  };
  long year, month, day, hour, minute, second;
  if (!digits(0, 4, &year) || s.size() < 20 || s[4] != '-' ||
      !digits(5, 2, &month) || s[7] != '-' || !digits(8, 2, &day) ||
      (s[10] != 'T' && s[10] != 't' && s[10] != ' ') ||
      !digits(11, 2, &hour) || s[13] != ':' || !digits(14, 2, &minute) ||
      s[16] != ':' || !digits(17, 2, &second))
    return std::nullopt;
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 ||
      minute > 59 || second > 60)
    return std::nullopt;
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {  // fractional seconds ignored
    ++pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
  }
  if (pos >= s.size()) return std::nullopt;
  long offset = 0;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    if (pos + 1 != s.size()) return std::nullopt;
  } else if (s[pos] == '+' || s[pos] == '-') {
    long oh, om;
    if (pos + 6 != s.size() || !digits(pos + 1, 2, &oh) || s[pos + 3] != ':' ||
        !digits(pos + 4, 2, &om))
      return std::nullopt;
    offset = (oh * 60 + om) * 60;
    if (s[pos] == '-') offset = -offset;
  } else {
    return std::nullopt;
  }
  std::int64_t days = DaysFromCivil(year, static_cast<unsigned>(month),
                                    static_cast<unsigned>(day));
  return days * 86400 + hour * 3600 + minute * 60 + second - offset;
}

inline std::string FormatRfc3339(std::int64_t t) {
  std::int64_t days = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  std::int64_t y;
  unsigned m, d;
  CivilFromDays(days, &y, &m, &d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), m, d,
                static_cast<long long>(rem / 3600),
                static_cast<long long>(rem / 60 % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

inline std::int64_t UtcDay(std::int64_t t) {
  std::int64_t day = t / 86400;
  if (t % 86400 < 0) --day;
  return day;
}

}  // namespace timeutil

// ---------------------------------------------------------------------------
// Configuration

struct TeamConfig {
  std::string team_id;
  std::string token;
};

struct ServiceConfig {
  std::filesystem::path data_dir;
  int daily_quota = 10;
  std::optional<std::int64_t> freeze_at;  // unix seconds; unset = never frozen
  std::map<int, std::filesystem::path> key_paths;  // task number -> key file
  std::string bind_host = "127.0.0.1";
  int bind_port = 8080;
  std::vector<TeamConfig> teams;
  // Rejected submissions consume quota by default: a submission slot is
  // spent on upload, discouraging format-probing; flip to re-credit them.
  bool rejected_consume_quota = true;
  // Keys at or below this trial count score inside the request; larger
  // ones are queued and scored by DrainQueue.
  std::size_t sync_scoring_max_trials = 1000000;
  submission::ValidationOptions validation;
};

inline ServiceConfig LoadConfigFile(const std::filesystem::path &path) {
  ServiceConfig cfg;
  auto j = nlohmann::json::parse(detail::ReadTextFile(path));
  if (j.contains("data_dir")) cfg.data_dir = j["data_dir"].get<std::string>();
  if (j.contains("daily_quota")) cfg.daily_quota = j["daily_quota"].get<int>();
  if (j.contains("freeze_at")) {
    auto t = timeutil::ParseRfc3339(j["freeze_at"].get<std::string>());
    if (!t)
      throw std::runtime_error("config freeze_at is not an RFC 3339 timestamp");
    cfg.freeze_at = *t;
  }
  if (j.contains("keys"))
    for (const auto &[task, p] : j["keys"].items())
      cfg.key_paths[std::stoi(task)] = p.get<std::string>();
  if (j.contains("bind")) {
    std::string bind = j["bind"].get<std::string>();
    auto colon = bind.rfind(':');
    if (colon == std::string::npos)
      throw std::runtime_error("config bind must be host:port");
    cfg.bind_host = bind.substr(0, colon);
    cfg.bind_port = std::stoi(bind.substr(colon + 1));
  }
  if (j.contains("teams"))
    for (const auto &t : j["teams"])
      cfg.teams.push_back({t.at("team_id").get<std::string>(),
                           t.at("token").get<std::string>()});
  if (j.contains("rejected_consume_quota"))
    cfg.rejected_consume_quota = j["rejected_consume_quota"].get<bool>();
  if (j.contains("sync_scoring_max_trials"))
    cfg.sync_scoring_max_trials = j["sync_scoring_max_trials"].get<std::size_t>();
  if (j.contains("max_archive_bytes"))
    cfg.validation.max_uncompressed_bytes =
        j["max_archive_bytes"].get<std::uint64_t>();
  return cfg;
}

// Environment variables override file settings.
inline void ApplyEnvOverrides(ServiceConfig *cfg) {
  if (const char *v = std::getenv("EVALKIT_DATA_DIR")) cfg->data_dir = v;
  if (const char *v = std::getenv("EVALKIT_DAILY_QUOTA"))
    cfg->daily_quota = std::atoi(v);
  if (const char *v = std::getenv("EVALKIT_FREEZE_AT")) {
    auto t = timeutil::ParseRfc3339(v);
    if (!t)
      throw std::runtime_error("EVALKIT_FREEZE_AT is not an RFC 3339 timestamp");
    cfg->freeze_at = *t;
  }
  if (const char *v = std::getenv("EVALKIT_KEY_TASK1")) cfg->key_paths[1] = v;
  if (const char *v = std::getenv("EVALKIT_KEY_TASK2")) cfg->key_paths[2] = v;
  if (const char *v = std::getenv("EVALKIT_BIND")) {
    std::string bind = v;
    auto colon = bind.rfind(':');
    if (colon == std::string::npos)
      throw std::runtime_error("EVALKIT_BIND must be host:port");
    cfg->bind_host = bind.substr(0, colon);
    cfg->bind_port = std::stoi(bind.substr(colon + 1));
  }
}

// ---------------------------------------------------------------------------
// Records

enum class SubmissionStatus { Queued, Scored, Rejected };

inline const char *ToString(SubmissionStatus s) {
  switch (s) {
    case SubmissionStatus::Queued: return "queued";
    case SubmissionStatus::Scored: return "scored";
    case SubmissionStatus::Rejected: return "rejected";
  }
  return "?";
}

inline std::optional<SubmissionStatus> StatusFromString(std::string_view s) {
  if (s == "queued") return SubmissionStatus::Queued;
  if (s == "scored") return SubmissionStatus::Scored;
  if (s == "rejected") return SubmissionStatus::Rejected;
  return std::nullopt;
}

// The scalar metrics persisted per scored submission (the full DET sweep
// stays out of the journal; it can be regenerated from the archive).
struct ScoredMetrics {
  double min_dcf_norm = 0.0;
  double eer = 0.0;
  double argmin_threshold = 0.0;
  std::size_t n_trials = 0;
  std::size_t n_target = 0;
  std::size_t n_nontarget = 0;
};

struct SubmissionRecord {
  std::string submission_id;
  std::string team_id;
  int task = 1;
  std::int64_t received_at = 0;  // unix seconds
  std::uint64_t seq = 0;         // admission order, unique across restarts
  SubmissionStatus status = SubmissionStatus::Queued;
  std::vector<submission::ValidationError> errors;  // when rejected
  std::optional<ScoredMetrics> metrics;             // when scored
  std::optional<formats::SubmissionMetadata> metadata;
  std::string archive_sha256;
};

struct LeaderboardEntry {
  std::string team_id;
  double best_min_dcf_norm = 0.0;
  double best_eer = 0.0;
  std::size_t submission_count = 0;
  std::int64_t last_improved_at = 0;
};

struct LeaderboardView {
  int task = 1;
  bool frozen = false;
  std::vector<LeaderboardEntry> entries;  // empty when frozen
};

enum class ServiceErrorCode { QuotaExceeded, Unauthorized, UnknownTask, NotFound };

inline const char *ToString(ServiceErrorCode c) {
  switch (c) {
    case ServiceErrorCode::QuotaExceeded: return "QuotaExceeded";
    case ServiceErrorCode::Unauthorized: return "Unauthorized";
    case ServiceErrorCode::UnknownTask: return "UnknownTask";
    case ServiceErrorCode::NotFound: return "NotFound";
  }
  return "?";
}

class ServiceError : public std::runtime_error {
 public:
  ServiceError(ServiceErrorCode code, const std::string &msg)
      : std::runtime_error(msg), code_(code) {}
  ServiceErrorCode code() const { return code_; }

 private:
  ServiceErrorCode code_;
};

// ---------------------------------------------------------------------------
// JSON views

inline nlohmann::json RecordToJson(const SubmissionRecord &r) {
  nlohmann::json j;
  j["submission_id"] = r.submission_id;
  j["team_id"] = r.team_id;
  j["task"] = r.task;
  j["received_at"] = timeutil::FormatRfc3339(r.received_at);
  j["status"] = ToString(r.status);
  j["archive_sha256"] = r.archive_sha256;
  if (!r.errors.empty()) {
    j["errors"] = nlohmann::json::array();
    for (const auto &e : r.errors) {
      nlohmann::json item;
      item["code"] = submission::ToString(e.code);
      item["detail"] = e.detail;
      if (!e.location.empty()) item["location"] = e.location;
      j["errors"].push_back(std::move(item));
    }
  }
  if (r.metrics) {
    j["metrics"] = {{"min_dcf_norm", r.metrics->min_dcf_norm},
                    {"eer", r.metrics->eer},
                    {"argmin_threshold", r.metrics->argmin_threshold},
                    {"n_trials", r.metrics->n_trials},
                    {"n_target", r.metrics->n_target},
                    {"n_nontarget", r.metrics->n_nontarget}};
  }
  if (r.metadata) {
    j["metadata"] = {
        {"public-description", r.metadata->public_description},
        {"fused-systems-count", r.metadata->fused_systems_count}};
  }
  return j;
}

inline double Round4(double x) { return std::round(x * 1e4) / 1e4; }

inline nlohmann::json LeaderboardToJson(const LeaderboardView &view) {
  nlohmann::json j;
  j["task"] = view.task;
  j["frozen"] = view.frozen;
  if (view.frozen) return j;
  j["entries"] = nlohmann::json::array();
  std::size_t rank = 1;
  for (const auto &e : view.entries) {
    j["entries"].push_back({{"rank", rank++},
                            {"team_id", e.team_id},
                            {"min_dcf_norm", Round4(e.best_min_dcf_norm)},
                            {"eer", Round4(e.best_eer)},
                            {"submission_count", e.submission_count},
                            {"last_improved_at",
                             timeutil::FormatRfc3339(e.last_improved_at)}});
  }
  return j;
}

// ---------------------------------------------------------------------------
// Core

class ServiceCore {
 public:
  using Clock = std::function<std::int64_t()>;

  explicit ServiceCore(ServiceConfig config, Clock clock = DefaultClock)
      : config_(std::move(config)), clock_(std::move(clock)) {
    if (config_.data_dir.empty())
      throw std::runtime_error("service requires a data directory");
    std::filesystem::create_directories(config_.data_dir / "archives");
    for (const auto &[task, path] : config_.key_paths) LoadKey(task, path);
    ReplayJournal();
  }

  static std::int64_t DefaultClock() {
    return static_cast<std::int64_t>(std::time(nullptr));
  }

  const ServiceConfig &config() const { return config_; }

  // Token -> team lookup; nullptr when the token is unknown.
  const TeamConfig *Authenticate(std::string_view token) const {
    for (const auto &t : config_.teams)
      if (t.token == token) return &t;
    return nullptr;
  }

  // Admission, validation and (below the size threshold) scoring, all
  // before returning.  The admitted record is journaled before the call
  // returns, so a response implies durability.
  SubmissionRecord Submit(const std::string &team_id, int task,
                          std::span<const std::uint8_t> zip_bytes) {
    const KeySet *key = FindKey(task);
    if (key == nullptr)
      throw ServiceError(ServiceErrorCode::UnknownTask,
                         "task " + std::to_string(task) + " is not configured");
    std::string sha = detail::Sha256Hex(zip_bytes.data(), zip_bytes.size());

    std::unique_lock lock(mutex_);
    std::int64_t now = clock_();
    std::int64_t day = timeutil::UtcDay(now);
    auto quota_key = QuotaKey{team_id, task, day};
    int used = 0;
    if (auto it = quota_.find(quota_key); it != quota_.end()) used = it->second;
    if (used >= config_.daily_quota)
      throw ServiceError(
          ServiceErrorCode::QuotaExceeded,
          "daily quota of " + std::to_string(config_.daily_quota) +
              " submissions reached for task " + std::to_string(task));

    SubmissionRecord record;
    record.seq = next_seq_++;
    char idbuf[24];
    std::snprintf(idbuf, sizeof(idbuf), "sub-%08llu",
                  static_cast<unsigned long long>(record.seq));
    record.submission_id = idbuf;
    record.team_id = team_id;
    record.task = task;
    record.received_at = now;
    record.archive_sha256 = sha;

    detail::WriteFileAtomic(ArchivePath(sha),
                            std::vector<std::uint8_t>(zip_bytes.begin(),
                                                      zip_bytes.end()));

    auto validation =
        submission::ValidateSubmission(zip_bytes, key->trials, config_.validation);
    if (!validation.ok()) {
      record.status = SubmissionStatus::Rejected;
      record.errors = std::move(validation.errors);
      if (config_.rejected_consume_quota) quota_[quota_key] = used + 1;
    } else {
      quota_[quota_key] = used + 1;
      record.metadata = validation.payload->metadata;
      if (key->keys.size() <= config_.sync_scoring_max_trials) {
        record.status = SubmissionStatus::Scored;
        record.metrics = Score(validation.payload->answer, *key);
      } else {
        record.status = SubmissionStatus::Queued;
      }
    }
    AppendSubmitted(record);
    if (record.metrics) AppendScored(record);
    records_[record.submission_id] = record;
    if (record.status == SubmissionStatus::Queued)
      queue_.push_back(record.submission_id);
    return record;
  }

  SubmissionRecord GetSubmission(const std::string &team_id,
                                 const std::string &submission_id) const {
    std::shared_lock lock(mutex_);
    auto it = records_.find(submission_id);
    if (it == records_.end())
      throw ServiceError(ServiceErrorCode::NotFound,
                         "no submission '" + submission_id + "'");
    if (it->second.team_id != team_id)
      throw ServiceError(ServiceErrorCode::Unauthorized,
                         "submission belongs to another team");
    return it->second;
  }

  int RemainingQuota(const std::string &team_id, int task,
                     std::optional<std::int64_t> now = std::nullopt) const {
    std::shared_lock lock(mutex_);
    std::int64_t day = timeutil::UtcDay(now ? *now : clock_());
    int used = 0;
    if (auto it = quota_.find(QuotaKey{team_id, task, day}); it != quota_.end())
      used = it->second;
    return std::max(0, config_.daily_quota - used);
  }

  LeaderboardView GetLeaderboard(int task,
                                 std::optional<std::int64_t> now = std::nullopt) const {
    if (FindKey(task) == nullptr)
      throw ServiceError(ServiceErrorCode::UnknownTask,
                         "task " + std::to_string(task) + " is not configured");
    LeaderboardView view;
    view.task = task;
    std::int64_t t = now ? *now : clock_();
    if (config_.freeze_at && t >= *config_.freeze_at) {
      view.frozen = true;
      return view;
    }
    std::shared_lock lock(mutex_);
    // Per team: the best scored submission at leaderboard precision, and
    // the time the current best was first reached.
    struct Best {
      double dcf = 0.0, eer = 0.0;
      std::int64_t improved_at = 0;
      std::uint64_t seq = 0;
      std::size_t count = 0;
      bool any = false;
    };
    std::map<std::string, Best> best;
    std::vector<const SubmissionRecord *> ordered;
    ordered.reserve(records_.size());
    for (const auto &[id, r] : records_)
      if (r.task == task) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(),
              [](const SubmissionRecord *a, const SubmissionRecord *b) {
                return a->seq < b->seq;
              });
    for (const SubmissionRecord *r : ordered) {
      Best &b = best[r->team_id];
      ++b.count;
      if (r->status != SubmissionStatus::Scored || !r->metrics) continue;
      double dcf = Round4(r->metrics->min_dcf_norm);
      double eer = Round4(r->metrics->eer);
      bool better = !b.any || dcf < b.dcf || (dcf == b.dcf && eer < b.eer);
      if (better) {
        b.any = true;
        b.dcf = dcf;
        b.eer = eer;
        b.improved_at = r->received_at;
        b.seq = r->seq;
      }
    }
    for (const auto &[team, b] : best) {
      if (!b.any) continue;
      view.entries.push_back({team, b.dcf, b.eer, b.count, b.improved_at});
    }
    std::sort(view.entries.begin(), view.entries.end(),
              [&](const LeaderboardEntry &a, const LeaderboardEntry &b) {
                if (a.best_min_dcf_norm != b.best_min_dcf_norm)
                  return a.best_min_dcf_norm < b.best_min_dcf_norm;
                if (a.best_eer != b.best_eer) return a.best_eer < b.best_eer;
                if (a.last_improved_at != b.last_improved_at)
                  return a.last_improved_at < b.last_improved_at;
                return a.team_id < b.team_id;
              });
    return view;
  }

  // Scores queued submissions; returns how many were scored.  Called by
  // the HTTP layer's worker thread and once at startup.
  std::size_t DrainQueue() {
    std::size_t scored = 0;
    for (;;) {
      std::string id;
      {
        std::unique_lock lock(mutex_);
        if (queue_.empty()) break;
        id = queue_.front();
        queue_.erase(queue_.begin());
      }
      SubmissionRecord record;
      {
        std::shared_lock lock(mutex_);
        record = records_.at(id);
      }
      const KeySet *key = FindKey(record.task);
      auto bytes = detail::ReadBinaryFile(ArchivePath(record.archive_sha256));
      auto validation =
          submission::ValidateSubmission(bytes, key->trials, config_.validation);
      std::unique_lock lock(mutex_);
      SubmissionRecord &stored = records_.at(id);
      if (validation.ok()) {
        stored.status = SubmissionStatus::Scored;
        stored.metrics = Score(validation.payload->answer, *key);
        AppendScored(stored);
        ++scored;
      } else {
        // Cannot normally happen: the archive validated at admission.
        stored.status = SubmissionStatus::Rejected;
        stored.errors = std::move(validation.errors);
      }
    }
    return scored;
  }

  std::size_t QueuedCount() const {
    std::shared_lock lock(mutex_);
    return queue_.size();
  }

 private:
  struct KeySet {
    std::vector<formats::TrialKey> keys;
    std::vector<formats::Trial> trials;  // derived from keys, for validation
  };

  struct QuotaKey {
    std::string team_id;
    int task;
    std::int64_t day;
    bool operator<(const QuotaKey &o) const {
      if (team_id != o.team_id) return team_id < o.team_id;
      if (task != o.task) return task < o.task;
      return day < o.day;
    }
  };

  void LoadKey(int task, const std::filesystem::path &path) {
    auto parsed = formats::ParseKey(detail::ReadTextFile(path));
    KeySet set;
    set.keys = std::move(parsed.keys);
    set.trials.reserve(set.keys.size());
    for (const auto &k : set.keys) set.trials.push_back({k.model_id, k.test_id});
    keys_[task] = std::move(set);
  }

  const KeySet *FindKey(int task) const {
    auto it = keys_.find(task);
    return it == keys_.end() ? nullptr : &it->second;
  }

  ScoredMetrics Score(const std::vector<double> &answer, const KeySet &key) const {
    auto report = scorer::ScoreAnswer(answer, key.keys);
    return {report.min_dcf_norm, report.eer,          report.argmin_threshold,
            report.n_trials,     report.n_target,     report.n_nontarget};
  }

  std::filesystem::path ArchivePath(const std::string &sha) const {
    return config_.data_dir / "archives" / (sha + ".zip");
  }

  std::filesystem::path JournalPath() const {
    return config_.data_dir / "journal.jsonl";
  }

  void AppendLine(const nlohmann::json &j) {
    std::ofstream out(JournalPath(), std::ios::app | std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot append to " + JournalPath().string());
    out << j.dump() << '\n';
    out.flush();
    if (!out)
      throw std::runtime_error("journal write failed: " + JournalPath().string());
  }

  void AppendSubmitted(const SubmissionRecord &r) {
    nlohmann::json j;
    j["event"] = "submitted";
    j["seq"] = r.seq;
    j["id"] = r.submission_id;
    j["team"] = r.team_id;
    j["task"] = r.task;
    j["received_at"] = r.received_at;
    j["archive"] = r.archive_sha256;
    j["rejected"] = r.status == SubmissionStatus::Rejected;
    if (!r.errors.empty()) {
      j["errors"] = nlohmann::json::array();
      for (const auto &e : r.errors)
        j["errors"].push_back({{"code", submission::ToString(e.code)},
                               {"detail", e.detail},
                               {"location", e.location}});
    }
    if (r.metadata)
      j["metadata"] = {{"public_description", r.metadata->public_description},
                       {"fused_systems_count", r.metadata->fused_systems_count}};
    AppendLine(j);
  }

  void AppendScored(const SubmissionRecord &r) {
    nlohmann::json j;
    j["event"] = "scored";
    j["id"] = r.submission_id;
    j["metrics"] = {{"min_dcf_norm", r.metrics->min_dcf_norm},
                    {"eer", r.metrics->eer},
                    {"argmin_threshold", r.metrics->argmin_threshold},
                    {"n_trials", r.metrics->n_trials},
                    {"n_target", r.metrics->n_target},
                    {"n_nontarget", r.metrics->n_nontarget}};
    AppendLine(j);
  }

  void ReplayJournal() {
    auto path = JournalPath();
    if (!std::filesystem::exists(path)) return;
    std::ifstream in(path, std::ios::binary);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded())
        throw std::runtime_error("journal line " + std::to_string(line_no) +
                                 " is not valid JSON");
      std::string event = j.value("event", "");
      if (event == "submitted") {
        SubmissionRecord r;
        r.seq = j.at("seq").get<std::uint64_t>();
        r.submission_id = j.at("id").get<std::string>();
        r.team_id = j.at("team").get<std::string>();
        r.task = j.at("task").get<int>();
        r.received_at = j.at("received_at").get<std::int64_t>();
        r.archive_sha256 = j.at("archive").get<std::string>();
        bool rejected = j.value("rejected", false);
        r.status = rejected ? SubmissionStatus::Rejected
                            : SubmissionStatus::Queued;
        if (j.contains("errors"))
          for (const auto &e : j["errors"])
            r.errors.push_back(ParseErrorItem(e));
        if (j.contains("metadata")) {
          formats::SubmissionMetadata m;
          m.public_description =
              j["metadata"].value("public_description", std::string());
          m.fused_systems_count = j["metadata"].value("fused_systems_count", 1L);
          r.metadata = std::move(m);
        }
        bool counts = !rejected || config_.rejected_consume_quota;
        if (counts)
          quota_[QuotaKey{r.team_id, r.task, timeutil::UtcDay(r.received_at)}]++;
        next_seq_ = std::max(next_seq_, r.seq + 1);
        records_[r.submission_id] = std::move(r);
      } else if (event == "scored") {
        auto it = records_.find(j.at("id").get<std::string>());
        if (it == records_.end())
          throw std::runtime_error("journal line " + std::to_string(line_no) +
                                   " scores an unknown submission");
        const auto &m = j.at("metrics");
        it->second.metrics =
            ScoredMetrics{m.at("min_dcf_norm").get<double>(),
                          m.at("eer").get<double>(),
                          m.at("argmin_threshold").get<double>(),
                          m.at("n_trials").get<std::size_t>(),
                          m.at("n_target").get<std::size_t>(),
                          m.at("n_nontarget").get<std::size_t>()};
        it->second.status = SubmissionStatus::Scored;
      }
    }
    for (const auto &[id, r] : records_)
      if (r.status == SubmissionStatus::Queued) queue_.push_back(id);
    std::sort(queue_.begin(), queue_.end(), [&](const auto &a, const auto &b) {
      return records_.at(a).seq < records_.at(b).seq;
    });
  }

  static submission::ValidationError ParseErrorItem(const nlohmann::json &e) {
    submission::ValidationError out;
    std::string code = e.value("code", "");
    out.code = submission::ValidationCode::NotAZip;
    for (int c = 0; c <= static_cast<int>(
                             submission::ValidationCode::FusedCountOutOfRange);
         ++c) {
      auto vc = static_cast<submission::ValidationCode>(c);
      if (code == submission::ToString(vc)) {
        out.code = vc;
        break;
      }
    }
    out.detail = e.value("detail", "");
    out.location = e.value("location", "");
    return out;
  }

  ServiceConfig config_;
  Clock clock_;
  std::map<int, KeySet> keys_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, SubmissionRecord> records_;
  std::map<QuotaKey, int> quota_;
  std::vector<std::string> queue_;
  std::uint64_t next_seq_ = 1;
};

}  // namespace service
}  // namespace evalkit

#endif  // EVALKIT_SERVICE_HPP_
