// Copyright 2026  Evalkit Authors

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

#include "evalkit/metrics.hpp"

#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "evalkit/detail/rng.hpp"
#include "support/oracle.hpp"

using namespace evalkit;
using metrics::DetCostParams;
using metrics::TargetFlags;

namespace {

// Interleaves targets and nontargets into the (scores, flags) form.
std::pair<std::vector<double>, TargetFlags> Merge(
    const std::vector<double> &targets, const std::vector<double> &nontargets) {
  std::vector<double> scores;
  TargetFlags flags;
  for (double t : targets) {
    scores.push_back(t);
    flags.push_back(1);
  }
  for (double n : nontargets) {
    scores.push_back(n);
    flags.push_back(0);
  }
  return {scores, flags};
}

const std::vector<double> kFixtureTargets = {0.8, 0.6, 0.4};
const std::vector<double> kFixtureNontargets = {0.7, 0.1, -0.2};

}  // namespace

// ---------------------------------------------------------------------------
// Cost model constants

TEST_CASE("default cost parameters and their fixed points are exact") {
  DetCostParams params;
  CHECK(params.c_miss == 10.0);
  CHECK(params.c_fa == 1.0);
  CHECK(params.p_target == 0.01);

  // Reject everything: cost C_Miss * P_Target = 0.1, normalized exactly 1.
  auto reject_all = metrics::DcfAt({0.0, 1.0, 0.0}, params);
  CHECK(reject_all.dcf == 0.1);
  CHECK(reject_all.dcf_norm == 1.0);

  // Accept everything: cost C_FA * (1 - P_Target) = 0.99, normalized 9.9.
  auto accept_all = metrics::DcfAt({0.0, 0.0, 1.0}, params);
  CHECK(accept_all.dcf == 0.99);
  CHECK(accept_all.dcf_norm == 9.9);

  // A perfect system costs nothing.
  auto perfect = metrics::DcfAt({0.0, 0.0, 0.0}, params);
  CHECK(perfect.dcf == 0.0);
  CHECK(perfect.dcf_norm == 0.0);
}

// ---------------------------------------------------------------------------
// The six-score worked example

TEST_CASE("worked example: sweep structure") {
  auto [scores, flags] = Merge(kFixtureTargets, kFixtureNontargets);
  auto sweep = metrics::DetSweep(scores, flags);

  REQUIRE(sweep.size() == 8);  // 6 distinct scores + 2 sentinels
  const double expected_thresholds[] = {-1.2, -0.2, 0.1, 0.4,
                                        0.6,  0.7,  0.8, 1.8};
  for (std::size_t i = 0; i < 8; ++i)
    CHECK(sweep[i].threshold == expected_thresholds[i]);

  // Extremes: accept-all first, reject-all last.
  CHECK(sweep.front().p_miss == 0.0);
  CHECK(sweep.front().p_fa == 1.0);
  CHECK(sweep.back().p_miss == 1.0);
  CHECK(sweep.back().p_fa == 0.0);

  // A score sitting exactly on the threshold is accepted.
  CHECK(sweep[3].threshold == 0.4);
  CHECK(sweep[3].p_miss == 0.0);        // target 0.4 is not missed at 0.4
  CHECK(sweep[3].p_fa == 1.0 / 3.0);    // nontarget 0.7 still accepted

  for (std::size_t i = 1; i < sweep.size(); ++i) {
    CHECK(sweep[i].p_miss >= sweep[i - 1].p_miss);
    CHECK(sweep[i].p_fa <= sweep[i - 1].p_fa);
  }
}

TEST_CASE("worked example: minimum detection cost") {
  auto [scores, flags] = Merge(kFixtureTargets, kFixtureNontargets);
  auto result = metrics::MinDcf(scores, flags);
  CHECK(result.min_dcf_norm == 2.0 / 3.0);
  CHECK(result.threshold == 0.8);
  CHECK(result.sweep_index == 6);
}

TEST_CASE("worked example: equal error rate") {
  auto [scores, flags] = Merge(kFixtureTargets, kFixtureNontargets);
  // At threshold 0.6 both error rates are exactly one third.
  CHECK(metrics::Eer(scores, flags) == 1.0 / 3.0);
}

TEST_CASE("worked example: results do not depend on input order") {
  auto [scores, flags] = Merge(kFixtureTargets, kFixtureNontargets);
  auto baseline_min = metrics::MinDcf(scores, flags);
  auto baseline_eer = metrics::Eer(scores, flags);

  std::mt19937_64 eng(11);
  for (int round = 0; round < 20; ++round) {
    for (std::size_t i = scores.size(); i > 1; --i) {
      std::size_t j = eng() % i;
      std::swap(scores[i - 1], scores[j]);
      std::swap(flags[i - 1], flags[j]);
    }
    auto shuffled = metrics::MinDcf(scores, flags);
    CHECK(shuffled.min_dcf_norm == baseline_min.min_dcf_norm);
    CHECK(shuffled.threshold == baseline_min.threshold);
    CHECK(metrics::Eer(scores, flags) == baseline_eer);
  }
}

// ---------------------------------------------------------------------------
// Degenerate and edge inputs

TEST_CASE("identical scores for every trial still yield a usable sweep") {
  std::vector<double> scores = {5.0, 5.0, 5.0, 5.0};
  TargetFlags flags = {1, 1, 0, 0};
  auto sweep = metrics::DetSweep(scores, flags);
  REQUIRE(sweep.size() == 3);  // one distinct score + 2 sentinels

  // Only two distinct operating points exist: accept-all and reject-all.
  CHECK(sweep[0].p_miss == 0.0);
  CHECK(sweep[0].p_fa == 1.0);
  CHECK(sweep[1].p_miss == 0.0);  // at the score itself: still accept-all
  CHECK(sweep[1].p_fa == 1.0);
  CHECK(sweep[2].p_miss == 1.0);
  CHECK(sweep[2].p_fa == 0.0);

  auto result = metrics::MinDcfFromSweep(sweep, {});
  CHECK(result.min_dcf_norm == 1.0);  // reject-all is the best on offer
  CHECK(metrics::EerFromSweep(sweep) == 0.5);
}

TEST_CASE("cost ties resolve to the lowest threshold") {
  // With C_Miss = C_FA = 1 and P_Target = 0.5 the normalized cost is
  // p_miss + p_fa; interleaved classes tie at several thresholds.
  DetCostParams params{1.0, 1.0, 0.5};
  std::vector<double> scores = {0.0, 2.0, 1.0, 3.0};
  TargetFlags flags = {1, 1, 0, 0};
  auto sweep = metrics::DetSweep(scores, flags);
  REQUIRE(sweep.size() == 6);
  auto result = metrics::MinDcfFromSweep(sweep, params);
  CHECK(result.min_dcf_norm == 1.0);
  CHECK(result.threshold == -1.0);  // ties go to the first sweep point
  CHECK(result.sweep_index == 0);
}

TEST_CASE("degenerate keys and misaligned inputs are rejected") {
  std::vector<double> scores = {1.0, 2.0};
  try {
    metrics::DetSweep(scores, TargetFlags{1, 1});
    FAIL("expected MetricError");
  } catch (const metrics::MetricError &e) {
    CHECK(e.code() == metrics::MetricErrorCode::DegenerateKey);
  }
  try {
    metrics::DetSweep(scores, TargetFlags{1, 0, 1});
    FAIL("expected MetricError");
  } catch (const metrics::MetricError &e) {
    CHECK(e.code() == metrics::MetricErrorCode::LengthMismatch);
  }
  CHECK_THROWS_AS(
      metrics::DetSweep(std::vector<double>{1.0, std::nan("")},
                        TargetFlags{1, 0}),
      std::invalid_argument);
  CHECK_THROWS_AS(metrics::MinDcfFromSweep({}, {}), metrics::MetricError);
  CHECK_THROWS_AS(metrics::EerFromSweep({}), metrics::MetricError);
}

// ---------------------------------------------------------------------------
// Agreement with the brute-force reference

TEST_CASE("sweep minimum matches brute-force threshold search bit for bit") {
  std::mt19937_64 eng(314159);
  for (int round = 0; round < 200; ++round) {
    std::size_t n_t = 1 + eng() % 40;
    std::size_t n_n = 1 + eng() % 40;
    std::vector<double> targets, nontargets;
    for (std::size_t i = 0; i < n_t; ++i)
      targets.push_back(detail::StandardNormal(eng) + 1.0);
    for (std::size_t i = 0; i < n_n; ++i)
      nontargets.push_back(detail::StandardNormal(eng) - 1.0);
    // Inject score collisions across the classes now and then.
    if (round % 3 == 0 && !nontargets.empty())
      nontargets[0] = targets[0];

    auto [scores, flags] = Merge(targets, nontargets);
    auto fast = metrics::MinDcf(scores, flags);
    auto brute = testsupport::OracleBruteMinDcf(targets, nontargets);
    INFO("round " << round);
    CHECK(fast.min_dcf_norm == brute.min_dcf_norm);
    CHECK(fast.threshold == brute.threshold);
    CHECK(fast.min_dcf_norm >= 0.0);
    CHECK(fast.min_dcf_norm <= 1.0);

    CHECK(metrics::Eer(scores, flags) ==
          testsupport::OracleEer(targets, nontargets));
  }
}

// ---------------------------------------------------------------------------
// Calibration invariance

TEST_CASE("strictly increasing score transforms leave both metrics unchanged") {
  std::vector<double (*)(double)> transforms = {
      [](double x) { return 2.0 * x + 1.0; },
      [](double x) { return x * x * x; },
      [](double x) { return std::atan(x); },
      [](double x) { return std::exp(x); },
      [](double x) { return x / (1.0 + std::fabs(x)); },
  };
  std::mt19937_64 eng(271828);
  for (int round = 0; round < 20; ++round) {
    std::vector<double> scores;
    TargetFlags flags;
    std::size_t n = 30 + eng() % 50;
    for (std::size_t i = 0; i < n; ++i) {
      bool target = eng() % 2 == 0;
      scores.push_back(detail::StandardNormal(eng) + (target ? 1.0 : -1.0));
      flags.push_back(target ? 1 : 0);
    }
    if (std::count(flags.begin(), flags.end(), 1) == 0) flags[0] = 1;
    if (std::count(flags.begin(), flags.end(), 0) == 0) flags[0] = 0;

    auto base_min = metrics::MinDcf(scores, flags);
    auto base_eer = metrics::Eer(scores, flags);
    for (auto *f : transforms) {
      std::vector<double> mapped;
      for (double s : scores) mapped.push_back(f(s));
      auto min = metrics::MinDcf(mapped, flags);
      CHECK(min.min_dcf_norm == base_min.min_dcf_norm);
      CHECK(metrics::Eer(mapped, flags) == base_eer);
    }
  }
}

// ---------------------------------------------------------------------------
// Statistical sanity

TEST_CASE("equal error rate approaches its Gaussian value") {
  // Equal-variance Gaussians separated by two standard deviations cross at
  // Phi(-1) ~ 0.158655; with 20k samples per class the estimate lands well
  // inside +-0.01.
  std::mt19937_64 eng(42);
  std::vector<double> scores;
  TargetFlags flags;
  const std::size_t n = 20000;
  for (std::size_t i = 0; i < n; ++i) {
    scores.push_back(detail::StandardNormal(eng) + 1.0);
    flags.push_back(1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    scores.push_back(detail::StandardNormal(eng) - 1.0);
    flags.push_back(0);
  }
  double eer = metrics::Eer(scores, flags);
  CHECK(std::fabs(eer - 0.158655) < 0.01);
}

// ---------------------------------------------------------------------------
// DET export

TEST_CASE("DET export renders one fixed-format row per sweep point") {
  auto [scores, flags] = Merge(kFixtureTargets, kFixtureNontargets);
  auto sweep = metrics::DetSweep(scores, flags);
  std::string csv = metrics::ExportDet(sweep);
  CHECK(csv.rfind("threshold,p_miss,p_fa\n", 0) == 0);
  CHECK(csv.find("-1.200000,0.000000,1.000000\n") != std::string::npos);
  CHECK(csv.find("0.800000,0.666667,0.000000\n") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);  // header + 8 rows
  CHECK_THROWS_AS(metrics::ExportDet({}), metrics::MetricError);
}
