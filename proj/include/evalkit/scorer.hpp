// evalkit/scorer.hpp
//
// Joins an answer's score vector with a trial key and produces the metrics
// report: overall normalized minimum DCF and EER, plus per-slice
// breakdowns (partition, trial type, phrase).
//
// Slice semantics are toolkit conventions, stated here once:
//   * partition and phrase slices are scored as independent verification
//     sub-problems (own sweep, own minDCF/EER);
//   * trial-type slices are error rates at the overall minDCF threshold —
//     miss rate for target types (TC, TRG), false-alarm rate for the rest —
//     since the protocol assigns one score per trial and per-type minima
//     would conflate thresholds;
//   * an empty or one-class slice is reported as empty, never fatal.
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

#ifndef EVALKIT_SCORER_HPP_
#define EVALKIT_SCORER_HPP_

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "evalkit/formats.hpp"
#include "evalkit/metrics.hpp"

namespace evalkit {
namespace scorer {

using formats::Task;
using formats::TrialKey;
using formats::TrialType;
using metrics::DetCostParams;

inline constexpr int kReportSchemaVersion = 1;

struct SliceSpec {
  std::string dimension;  // "overall", "partition", "trial-type" or "phrase"
  std::string label;      // empty = every label of the dimension
  bool operator==(const SliceSpec &) const = default;
};

struct SliceResult {
  std::string dimension;
  std::string label;
  std::size_t n_trials = 0;
  std::size_t n_target = 0;
  std::size_t n_nontarget = 0;
  bool empty = false;  // EmptySlice: no trials, or targets/nontargets missing
  std::string note;    // reason when empty
  // Independent sub-problem slices (overall/partition/phrase):
  std::optional<double> min_dcf_norm;
  std::optional<double> eer;
  std::optional<double> threshold;
  // Fixed-threshold slices (trial-type):
  std::optional<double> rate;
  std::string rate_kind;  // "miss" or "fa"
};

struct MetricsReport {
  std::optional<Task> task;
  std::size_t n_trials = 0;
  std::size_t n_target = 0;
  std::size_t n_nontarget = 0;
  double min_dcf_norm = 0.0;
  double eer = 0.0;
  double argmin_threshold = 0.0;
  std::vector<metrics::OperatingPoint> det_points;
  std::vector<SliceResult> breakdowns;
  std::optional<std::string> det_csv_path;
};

namespace impl {

inline metrics::TargetFlags FlagsOf(std::span<const TrialKey> keys) {
  metrics::TargetFlags flags;
  flags.reserve(keys.size());
  for (const auto &k : keys) flags.push_back(k.is_target ? 1 : 0);
  return flags;
}

inline std::optional<Task> InferTask(std::span<const TrialKey> keys) {
  if (keys.empty()) return std::nullopt;
  return formats::IsTextDependentType(keys.front().trial_type) ? Task::TD
                                                               : Task::TI;
}

// Scores a subset as its own verification problem; marks the slice empty
// instead of throwing when it lacks trials or one of the two classes.
inline SliceResult SubProblem(std::string dimension, std::string label,
                              const std::vector<double> &scores,
                              const metrics::TargetFlags &flags,
                              const DetCostParams &params) {
  SliceResult r;
  r.dimension = std::move(dimension);
  r.label = std::move(label);
  r.n_trials = scores.size();
  for (auto f : flags) (f ? r.n_target : r.n_nontarget)++;
  if (r.n_trials == 0) {
    r.empty = true;
    r.note = "no trials in slice";
    return r;
  }
  if (r.n_target == 0 || r.n_nontarget == 0) {
    r.empty = true;
    r.note = r.n_target == 0 ? "no target trials in slice"
                             : "no nontarget trials in slice";
    return r;
  }
  auto sweep = metrics::DetSweep(scores, flags);
  auto min_dcf = metrics::MinDcfFromSweep(sweep, params);
  r.min_dcf_norm = min_dcf.min_dcf_norm;
  r.threshold = min_dcf.threshold;
  r.eer = metrics::EerFromSweep(sweep);
  return r;
}

}  // namespace impl

inline MetricsReport ScoreAnswer(std::span<const double> scores,
                                 std::span<const TrialKey> keys,
                                 const DetCostParams &params = {}) {
  if (scores.size() != keys.size())
    throw metrics::MetricError(
        metrics::MetricErrorCode::LengthMismatch,
        "answer has " + std::to_string(scores.size()) + " scores for " +
            std::to_string(keys.size()) + " trials");
  auto flags = impl::FlagsOf(keys);
  MetricsReport report;
  report.task = impl::InferTask(keys);
  report.n_trials = keys.size();
  for (auto f : flags) (f ? report.n_target : report.n_nontarget)++;
  report.det_points = metrics::DetSweep(scores, flags);
  auto min_dcf = metrics::MinDcfFromSweep(report.det_points, params);
  report.min_dcf_norm = min_dcf.min_dcf_norm;
  report.argmin_threshold = min_dcf.threshold;
  report.eer = metrics::EerFromSweep(report.det_points);
  return report;
}

inline MetricsReport BreakdownReport(
    std::span<const double> scores, std::span<const TrialKey> keys,
    const DetCostParams &params, std::span<const SliceSpec> slices,
    const std::map<std::string, std::string> *phrase_of_model = nullptr) {
  MetricsReport report = ScoreAnswer(scores, keys, params);
  const double theta = report.argmin_threshold;

  auto gather = [&](auto &&want) {
    std::pair<std::vector<double>, metrics::TargetFlags> out;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (!want(keys[i])) continue;
      out.first.push_back(scores[i]);
      out.second.push_back(keys[i].is_target ? 1 : 0);
    }
    return out;
  };

  for (const auto &spec : slices) {
    if (spec.dimension == "overall") {
      SliceResult r;
      r.dimension = "overall";
      r.label = "overall";
      r.n_trials = report.n_trials;
      r.n_target = report.n_target;
      r.n_nontarget = report.n_nontarget;
      r.min_dcf_norm = report.min_dcf_norm;
      r.threshold = report.argmin_threshold;
      r.eer = report.eer;
      report.breakdowns.push_back(std::move(r));
    } else if (spec.dimension == "partition") {
      // Both partitions are always reported so a missing one is visible.
      for (auto part :
           {formats::Partition::SameLang, formats::Partition::CrossLang}) {
        std::string label = formats::ToString(part);
        if (!spec.label.empty() && spec.label != label) continue;
        auto [s, f] =
            gather([&](const TrialKey &k) { return k.partition == part; });
        report.breakdowns.push_back(
            impl::SubProblem("partition", label, s, f, params));
      }
    } else if (spec.dimension == "trial-type") {
      std::vector<TrialType> types;
      if (report.task == Task::TD)
        types = {TrialType::TC, TrialType::TW, TrialType::IC, TrialType::IW};
      else
        types = {TrialType::TRG, TrialType::NON};
      for (auto type : types) {
        std::string label = formats::ToString(type);
        if (!spec.label.empty() && spec.label != label) continue;
        SliceResult r;
        r.dimension = "trial-type";
        r.label = label;
        bool target_type = formats::IsTargetType(type);
        std::size_t n = 0, hit = 0;
        for (std::size_t i = 0; i < keys.size(); ++i) {
          if (keys[i].trial_type != type) continue;
          ++n;
          (keys[i].is_target ? r.n_target : r.n_nontarget)++;
          // Accept iff score >= threshold: a target below theta is a miss,
          // a nontarget at or above it is a false alarm.
          if (target_type ? scores[i] < theta : scores[i] >= theta) ++hit;
        }
        r.n_trials = n;
        r.rate_kind = target_type ? "miss" : "fa";
        if (n == 0) {
          r.empty = true;
          r.note = "no trials in slice";
        } else {
          r.rate = static_cast<double>(hit) / static_cast<double>(n);
        }
        report.breakdowns.push_back(std::move(r));
      }
    } else if (spec.dimension == "phrase") {
      if (phrase_of_model == nullptr || phrase_of_model->empty()) {
        SliceResult r;
        r.dimension = "phrase";
        r.label = spec.label;
        r.empty = true;
        r.note = "no model-phrase mapping available";
        report.breakdowns.push_back(std::move(r));
        continue;
      }
      std::map<std::string, bool> labels;  // ordered, deduplicated
      for (const auto &k : keys) {
        auto it = phrase_of_model->find(k.model_id);
        if (it != phrase_of_model->end()) labels[it->second] = true;
      }
      for (const auto &[phrase, unused] : labels) {
        if (!spec.label.empty() && spec.label != phrase) continue;
        auto [s, f] = gather([&](const TrialKey &k) {
          auto it = phrase_of_model->find(k.model_id);
          return it != phrase_of_model->end() && it->second == phrase;
        });
        report.breakdowns.push_back(
            impl::SubProblem("phrase", phrase, s, f, params));
      }
    } else {
      SliceResult r;
      r.dimension = spec.dimension;
      r.label = spec.label;
      r.empty = true;
      r.note = "unknown slice dimension";
      report.breakdowns.push_back(std::move(r));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

namespace impl {

inline double Round6(double x) { return std::round(x * 1e6) / 1e6; }

}  // namespace impl

inline nlohmann::json ReportToJson(const MetricsReport &report) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  if (report.task) j["task"] = formats::TaskNumber(*report.task);
  j["n_trials"] = report.n_trials;
  j["n_target"] = report.n_target;
  j["n_nontarget"] = report.n_nontarget;
  j["min_dcf_norm"] = impl::Round6(report.min_dcf_norm);
  j["eer"] = impl::Round6(report.eer);
  j["argmin_threshold"] = impl::Round6(report.argmin_threshold);
  nlohmann::json breakdowns = nlohmann::json::object();
  for (const auto &slice : report.breakdowns) {
    nlohmann::json s;
    s["label"] = slice.label;
    s["n_trials"] = slice.n_trials;
    s["n_target"] = slice.n_target;
    s["n_nontarget"] = slice.n_nontarget;
    if (slice.empty) {
      s["empty"] = true;
      s["note"] = slice.note;
    } else {
      if (slice.min_dcf_norm) s["min_dcf_norm"] = impl::Round6(*slice.min_dcf_norm);
      if (slice.eer) s["eer"] = impl::Round6(*slice.eer);
      if (slice.threshold) s["threshold"] = impl::Round6(*slice.threshold);
      if (slice.rate) {
        s["rate"] = impl::Round6(*slice.rate);
        s["rate_kind"] = slice.rate_kind;
      }
    }
    breakdowns[slice.dimension].push_back(std::move(s));
  }
  j["breakdowns"] = std::move(breakdowns);
  if (report.det_csv_path) j["det_csv_path"] = *report.det_csv_path;
  return j;
}

// Short human rendering; EER as a percentage with two decimals.
inline std::string RenderText(const MetricsReport &report) {
  char buf[256];
  std::string out;
  if (report.task)
    out += "task " + std::to_string(formats::TaskNumber(*report.task)) + "  ";
  std::snprintf(buf, sizeof(buf),
                "trials %zu (targets %zu, nontargets %zu)\n", report.n_trials,
                report.n_target, report.n_nontarget);
  out += buf;
  std::snprintf(buf, sizeof(buf), "minDCF %.6f at threshold %.6f\n",
                report.min_dcf_norm, report.argmin_threshold);
  out += buf;
  std::snprintf(buf, sizeof(buf), "EER %.2f%%\n", report.eer * 100.0);
  out += buf;
  for (const auto &s : report.breakdowns) {
    if (s.dimension == "overall") continue;
    if (s.empty) {
      std::snprintf(buf, sizeof(buf), "  %s/%s: empty (%s)\n",
                    s.dimension.c_str(), s.label.c_str(), s.note.c_str());
    } else if (s.rate) {
      std::snprintf(buf, sizeof(buf), "  %s/%s: %s %.2f%% over %zu trials\n",
                    s.dimension.c_str(), s.label.c_str(), s.rate_kind.c_str(),
                    *s.rate * 100.0, s.n_trials);
    } else {
      std::snprintf(buf, sizeof(buf),
                    "  %s/%s: minDCF %.6f  EER %.2f%%  (%zu trials)\n",
                    s.dimension.c_str(), s.label.c_str(), *s.min_dcf_norm,
                    *s.eer * 100.0, s.n_trials);
    }
    out += buf;
  }
  return out;
}

}  // namespace scorer
}  // namespace evalkit

#endif  // EVALKIT_SCORER_HPP_
