// evalkit/metrics.hpp
//
// Detection metrics for speaker-verification trials: the detection cost
// function at an operating point, its normalized minimum over the empirical
// threshold sweep, the equal error rate, and a DET sweep export.
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

#ifndef EVALKIT_METRICS_HPP_
#define EVALKIT_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace evalkit {
namespace metrics {

// Challenge cost model: C_Miss = 10, C_FalseAlarm = 1, P_Target = 0.01,
// which makes 0.1 the best cost achievable without processing the input.
struct DetCostParams {
  double c_miss = 10.0;
  double c_fa = 1.0;
  double p_target = 0.01;
};

// One point of the threshold sweep.  The decision rule is accept iff
// score >= threshold, so scores exactly at the threshold are accepted.
struct OperatingPoint {
  double threshold = 0.0;
  double p_miss = 0.0;  // P(score < threshold | target)
  double p_fa = 0.0;    // P(score >= threshold | nontarget)
};

enum class MetricErrorCode { DegenerateKey, LengthMismatch, EmptySweep };

class MetricError : public std::runtime_error {
 public:
  MetricError(MetricErrorCode code, const std::string &msg)
      : std::runtime_error(msg), code_(code) {}
  MetricErrorCode code() const { return code_; }

 private:
  MetricErrorCode code_;
};

using TargetFlags = std::vector<std::uint8_t>;  // 1 = target, 0 = nontarget

// Enumerates the empirical DET sweep.  Candidate thresholds are the
// distinct observed scores plus one sentinel below the minimum (accept
// everything) and one above the maximum (reject everything), in ascending
// order.  Counts are exact integers divided once, so the same trials give
// bitwise identical points regardless of input order.
inline std::vector<OperatingPoint> DetSweep(std::span<const double> scores,
                                            std::span<const std::uint8_t> is_target) {
  if (scores.size() != is_target.size())
    throw MetricError(MetricErrorCode::LengthMismatch,
                      "scores and key have different lengths (" +
                          std::to_string(scores.size()) + " vs " +
                          std::to_string(is_target.size()) + ")");
  std::vector<double> targets, nontargets;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i]))
      throw std::invalid_argument("scores must be finite");
    (is_target[i] ? targets : nontargets).push_back(scores[i]);
  }
  if (targets.empty() || nontargets.empty())
    throw MetricError(MetricErrorCode::DegenerateKey,
                      "key needs at least one target and one nontarget trial");
  std::sort(targets.begin(), targets.end());
  std::sort(nontargets.begin(), nontargets.end());

  std::vector<double> thresholds(scores.begin(), scores.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  thresholds.insert(thresholds.begin(), thresholds.front() - 1.0);
  thresholds.push_back(thresholds.back() + 1.0);

  const double n_t = static_cast<double>(targets.size());
  const double n_n = static_cast<double>(nontargets.size());
  std::vector<OperatingPoint> points;
  points.reserve(thresholds.size());
  for (double th : thresholds) {
    auto miss_count = static_cast<double>(
        std::lower_bound(targets.begin(), targets.end(), th) - targets.begin());
    auto accept_nontarget = static_cast<double>(
        nontargets.end() -
        std::lower_bound(nontargets.begin(), nontargets.end(), th));
    points.push_back({th, miss_count / n_t, accept_nontarget / n_n});
  }
  return points;
}

struct DcfValue {
  double dcf = 0.0;
  double dcf_norm = 0.0;
};

// C_Det = C_Miss * P_Miss * P_Target + C_FA * P_FA * (1 - P_Target),
// normalized by the best cost obtainable without processing input,
// min(C_Miss * P_Target, C_FA * (1 - P_Target)).  The normalization is a
// multiply by the reciprocal: with the default parameters that renders the
// fixed points exactly (norm(1,0) = 1.0, norm(0,1) = 9.9 in doubles).
inline DcfValue DcfAt(const OperatingPoint &point, const DetCostParams &params) {
  DcfValue v;
  v.dcf = params.c_miss * point.p_miss * params.p_target +
          params.c_fa * point.p_fa * (1.0 - params.p_target);
  double divisor = std::min(params.c_miss * params.p_target,
                            params.c_fa * (1.0 - params.p_target));
  v.dcf_norm = v.dcf * (1.0 / divisor);
  return v;
}

struct MinDcfResult {
  double min_dcf_norm = 0.0;
  double threshold = 0.0;   // argmin; ties go to the lowest threshold
  std::size_t sweep_index = 0;
};

inline MinDcfResult MinDcfFromSweep(std::span<const OperatingPoint> sweep,
                                    const DetCostParams &params) {
  if (sweep.empty())
    throw MetricError(MetricErrorCode::EmptySweep, "empty DET sweep");
  MinDcfResult best;
  best.min_dcf_norm = DcfAt(sweep[0], params).dcf_norm;
  best.threshold = sweep[0].threshold;
  best.sweep_index = 0;
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    double norm = DcfAt(sweep[i], params).dcf_norm;
    if (norm < best.min_dcf_norm) {
      best.min_dcf_norm = norm;
      best.threshold = sweep[i].threshold;
      best.sweep_index = i;
    }
  }
  return best;
}

inline MinDcfResult MinDcf(std::span<const double> scores,
                           std::span<const std::uint8_t> is_target,
                           const DetCostParams &params = {}) {
  auto sweep = DetSweep(scores, is_target);
  return MinDcfFromSweep(sweep, params);
}

// EER on the step sweep.  Along the sweep p_miss - p_fa is nondecreasing
// from -1 (accept all) to +1 (reject all); if no point hits equality
// exactly, interpolate linearly on the segment between the two points that
// bracket the sign change.
inline double EerFromSweep(std::span<const OperatingPoint> sweep) {
  if (sweep.empty())
    throw MetricError(MetricErrorCode::EmptySweep, "empty DET sweep");
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    double d = sweep[i].p_miss - sweep[i].p_fa;
    if (d == 0.0) return sweep[i].p_miss;
    if (d > 0.0) {
      const OperatingPoint &hi = sweep[i];
      const OperatingPoint &lo = sweep[i - 1];  // i > 0: first point has d < 0
      double gap_lo = lo.p_fa - lo.p_miss;      // > 0
      double gap_hi = hi.p_miss - hi.p_fa;      // > 0
      double t = gap_lo / (gap_lo + gap_hi);
      return lo.p_miss + t * (hi.p_miss - lo.p_miss);
    }
  }
  throw MetricError(MetricErrorCode::EmptySweep,
                    "sweep never reaches p_miss >= p_fa");
}

inline double Eer(std::span<const double> scores,
                  std::span<const std::uint8_t> is_target) {
  auto sweep = DetSweep(scores, is_target);
  return EerFromSweep(sweep);
}

// CSV export, one row per sweep point in ascending threshold order.
inline std::string ExportDet(std::span<const OperatingPoint> points) {
  if (points.empty())
    throw MetricError(MetricErrorCode::EmptySweep, "cannot export an empty sweep");
  std::string out = "threshold,p_miss,p_fa\n";
  char buf[128];
  for (const auto &p : points) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f\n", p.threshold, p.p_miss,
                  p.p_fa);
    out += buf;
  }
  return out;
}

}  // namespace metrics
}  // namespace evalkit

#endif  // EVALKIT_METRICS_HPP_
