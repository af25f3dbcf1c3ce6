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

#include "evalkit/scorer.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <map>
#include <string>
#include <vector>

using namespace evalkit;
using formats::Partition;
using formats::Task;
using formats::TrialKey;
using formats::TrialType;
using scorer::SliceSpec;

namespace {

// The six-score worked example expressed as a labeled text-dependent key:
// three target-correct trials and one of each nontarget type.
struct WorkedFixture {
  std::vector<TrialKey> keys;
  std::vector<double> scores;

  WorkedFixture() {
    auto add = [&](const char *model, const char *test, TrialType type,
                   double score) {
      keys.push_back({model, test, type, formats::IsTargetType(type),
                      Partition::None});
      scores.push_back(score);
    };
    add("m_1", "e_1", TrialType::TC, 0.8);
    add("m_1", "e_2", TrialType::TC, 0.6);
    add("m_2", "e_3", TrialType::TC, 0.4);
    add("m_1", "e_4", TrialType::TW, 0.7);
    add("m_2", "e_5", TrialType::IC, 0.1);
    add("m_2", "e_6", TrialType::IW, -0.2);
  }
};

}  // namespace

TEST_CASE("overall scoring reproduces the worked example") {
  WorkedFixture fx;
  auto report = scorer::ScoreAnswer(fx.scores, fx.keys);
  CHECK(report.min_dcf_norm == 2.0 / 3.0);
  CHECK(report.eer == 1.0 / 3.0);
  CHECK(report.argmin_threshold == 0.8);
  CHECK(report.n_trials == 6);
  CHECK(report.n_target == 3);
  CHECK(report.n_nontarget == 3);
  REQUIRE(report.task.has_value());
  CHECK(*report.task == Task::TD);
  CHECK(report.det_points.size() == 8);
}

TEST_CASE("score/key misalignment is a length error with both counts") {
  WorkedFixture fx;
  std::vector<double> five(fx.scores.begin(), fx.scores.end() - 1);
  try {
    scorer::ScoreAnswer(five, fx.keys);
    FAIL("expected MetricError");
  } catch (const metrics::MetricError &e) {
    CHECK(e.code() == metrics::MetricErrorCode::LengthMismatch);
    CHECK(std::string(e.what()).find("5 scores") != std::string::npos);
    CHECK(std::string(e.what()).find("6 trials") != std::string::npos);
  }
  CHECK_THROWS_AS(scorer::ScoreAnswer({}, {}), metrics::MetricError);
}

TEST_CASE("perfect separation scores zero cost and zero error") {
  std::vector<TrialKey> keys = {
      {"m", "a", TrialType::TRG, true, Partition::SameLang},
      {"m", "b", TrialType::NON, false, Partition::SameLang},
  };
  auto report = scorer::ScoreAnswer(std::vector<double>{1.0, -1.0}, keys);
  CHECK(report.min_dcf_norm == 0.0);
  CHECK(report.eer == 0.0);
  CHECK(*report.task == Task::TI);
}

// ---------------------------------------------------------------------------
// Breakdown slices

TEST_CASE("the overall slice restates the headline numbers") {
  WorkedFixture fx;
  std::vector<SliceSpec> slices = {{"overall", ""}};
  auto report =
      scorer::BreakdownReport(fx.scores, fx.keys, {}, slices, nullptr);
  REQUIRE(report.breakdowns.size() == 1);
  const auto &s = report.breakdowns[0];
  CHECK(s.dimension == "overall");
  CHECK(!s.empty);
  CHECK(*s.min_dcf_norm == report.min_dcf_norm);
  CHECK(*s.eer == report.eer);
  CHECK(*s.threshold == report.argmin_threshold);
  CHECK(s.n_trials == report.n_trials);
}

TEST_CASE("partition slices are independent sub-problems and always listed") {
  std::vector<TrialKey> keys = {
      {"m_1", "a", TrialType::TRG, true, Partition::SameLang},
      {"m_1", "b", TrialType::NON, false, Partition::SameLang},
      {"m_2", "c", TrialType::TRG, true, Partition::SameLang},
      {"m_2", "d", TrialType::NON, false, Partition::SameLang},
  };
  std::vector<double> scores = {2.0, -2.0, 1.5, -1.0};
  std::vector<SliceSpec> slices = {{"partition", ""}};
  auto report = scorer::BreakdownReport(scores, keys, {}, slices, nullptr);
  REQUIRE(report.breakdowns.size() == 2);
  CHECK(report.breakdowns[0].label == "same-lang");
  CHECK(!report.breakdowns[0].empty);
  CHECK(*report.breakdowns[0].min_dcf_norm == 0.0);
  CHECK(report.breakdowns[0].n_trials == 4);
  // No cross-language trial exists, yet the slice is reported as such.
  CHECK(report.breakdowns[1].label == "cross-lang");
  CHECK(report.breakdowns[1].empty);
  CHECK(report.breakdowns[1].note == "no trials in slice");

  // Slice counts add up to the full trial count.
  CHECK(report.breakdowns[0].n_trials + report.breakdowns[1].n_trials ==
        report.n_trials);
}

TEST_CASE("a one-class partition slice is empty rather than an error") {
  std::vector<TrialKey> keys = {
      {"m_1", "a", TrialType::TRG, true, Partition::SameLang},
      {"m_1", "b", TrialType::NON, false, Partition::SameLang},
      {"m_1", "c", TrialType::TRG, true, Partition::CrossLang},
  };
  std::vector<double> scores = {2.0, -2.0, 1.0};
  std::vector<SliceSpec> slices = {{"partition", ""}};
  auto report = scorer::BreakdownReport(scores, keys, {}, slices, nullptr);
  REQUIRE(report.breakdowns.size() == 2);
  CHECK(!report.breakdowns[0].empty);
  CHECK(report.breakdowns[1].empty);
  CHECK(report.breakdowns[1].n_trials == 1);
  CHECK(report.breakdowns[1].note == "no nontarget trials in slice");
}

TEST_CASE("trial-type slices report error rates at the overall threshold") {
  WorkedFixture fx;
  // With symmetric costs the overall argmin sits at 0.4, so the wrong-phrase
  // nontarget at 0.7 becomes a false alarm while no target is missed.
  metrics::DetCostParams params{1.0, 1.0, 0.5};
  std::vector<SliceSpec> slices = {{"overall", ""}, {"trial-type", ""}};
  auto report = scorer::BreakdownReport(fx.scores, fx.keys, params, slices,
                                        nullptr);
  CHECK(report.argmin_threshold == 0.4);
  REQUIRE(report.breakdowns.size() == 5);  // overall + TC/TW/IC/IW

  const auto &tc = report.breakdowns[1];
  CHECK(tc.label == "TC");
  CHECK(tc.rate_kind == "miss");
  CHECK(tc.n_trials == 3);
  CHECK(*tc.rate == 0.0);  // the target at exactly 0.4 is accepted

  const auto &tw = report.breakdowns[2];
  CHECK(tw.label == "TW");
  CHECK(tw.rate_kind == "fa");
  CHECK(*tw.rate == 1.0);  // 0.7 >= 0.4

  CHECK(*report.breakdowns[3].rate == 0.0);  // IC at 0.1
  CHECK(*report.breakdowns[4].rate == 0.0);  // IW at -0.2
  for (std::size_t i = 1; i < 5; ++i)
    CHECK(!report.breakdowns[i].min_dcf_norm.has_value());
}

TEST_CASE("an absent trial type yields an empty labeled slice") {
  std::vector<TrialKey> keys = {
      {"m", "a", TrialType::TC, true, Partition::None},
      {"m", "b", TrialType::IC, false, Partition::None},
  };
  std::vector<double> scores = {1.0, -1.0};
  std::vector<SliceSpec> slices = {{"trial-type", ""}};
  auto report = scorer::BreakdownReport(scores, keys, {}, slices, nullptr);
  REQUIRE(report.breakdowns.size() == 4);
  CHECK(report.breakdowns[0].label == "TC");
  CHECK(!report.breakdowns[0].empty);
  CHECK(report.breakdowns[1].label == "TW");
  CHECK(report.breakdowns[1].empty);
  CHECK(report.breakdowns[2].label == "IC");
  CHECK(!report.breakdowns[2].empty);
  CHECK(report.breakdowns[3].label == "IW");
  CHECK(report.breakdowns[3].empty);
}

TEST_CASE("phrase slices follow the model-phrase mapping") {
  std::vector<TrialKey> keys = {
      {"m_1", "a", TrialType::TC, true, Partition::None},
      {"m_1", "b", TrialType::IC, false, Partition::None},
      {"m_2", "c", TrialType::TC, true, Partition::None},
      {"m_2", "d", TrialType::IC, false, Partition::None},
  };
  std::vector<double> scores = {0.9, 0.2, 0.3, 0.6};
  std::map<std::string, std::string> phrases = {{"m_1", "01"}, {"m_2", "02"}};

  std::vector<SliceSpec> slices = {{"phrase", ""}};
  auto report = scorer::BreakdownReport(scores, keys, {}, slices, &phrases);
  REQUIRE(report.breakdowns.size() == 2);
  CHECK(report.breakdowns[0].label == "01");
  CHECK(*report.breakdowns[0].min_dcf_norm == 0.0);
  CHECK(*report.breakdowns[0].eer == 0.0);
  CHECK(report.breakdowns[1].label == "02");
  // Phrase 02 scores are inverted: the imposter outscores the target.
  CHECK(*report.breakdowns[1].min_dcf_norm == 1.0);
  CHECK(*report.breakdowns[1].eer == 1.0);

  // A label filter narrows to a single phrase.
  std::vector<SliceSpec> only01 = {{"phrase", "01"}};
  auto narrowed = scorer::BreakdownReport(scores, keys, {}, only01, &phrases);
  REQUIRE(narrowed.breakdowns.size() == 1);
  CHECK(narrowed.breakdowns[0].label == "01");

  // Without the mapping the dimension degrades to a single empty slice.
  auto unmapped = scorer::BreakdownReport(scores, keys, {}, slices, nullptr);
  REQUIRE(unmapped.breakdowns.size() == 1);
  CHECK(unmapped.breakdowns[0].empty);
  CHECK(unmapped.breakdowns[0].note == "no model-phrase mapping available");
}

TEST_CASE("an unknown slice dimension is reported, not silently dropped") {
  WorkedFixture fx;
  std::vector<SliceSpec> slices = {{"speaker-age", ""}};
  auto report =
      scorer::BreakdownReport(fx.scores, fx.keys, {}, slices, nullptr);
  REQUIRE(report.breakdowns.size() == 1);
  CHECK(report.breakdowns[0].empty);
  CHECK(report.breakdowns[0].note == "unknown slice dimension");
}

// ---------------------------------------------------------------------------
// Serialization

TEST_CASE("the JSON report carries the schema version and rounded values") {
  WorkedFixture fx;
  std::vector<SliceSpec> slices = {{"overall", ""}, {"trial-type", ""}};
  auto report =
      scorer::BreakdownReport(fx.scores, fx.keys, {}, slices, nullptr);
  report.det_csv_path = "det.csv";
  auto j = scorer::ReportToJson(report);
  CHECK(j["schema_version"] == 1);
  CHECK(j["task"] == 1);
  CHECK(j["n_trials"] == 6);
  CHECK(j["min_dcf_norm"] == 0.666667);  // rounded to 6 decimals
  CHECK(j["eer"] == 0.333333);
  CHECK(j["det_csv_path"] == "det.csv");
  REQUIRE(j["breakdowns"].contains("overall"));
  REQUIRE(j["breakdowns"].contains("trial-type"));
  CHECK(j["breakdowns"]["trial-type"].size() == 4);
  CHECK(j["breakdowns"]["trial-type"][0]["label"] == "TC");
  CHECK(j["breakdowns"]["trial-type"][0]["rate_kind"] == "miss");
  // Empty slices say so instead of carrying numbers.
  bool found_empty_value = false;
  for (const auto &s : j["breakdowns"]["trial-type"])
    if (s.contains("empty")) found_empty_value = true;
  CHECK(!found_empty_value);  // worked fixture populates all four types
}

TEST_CASE("the text rendering formats the error rate as a percentage") {
  WorkedFixture fx;
  auto report = scorer::ScoreAnswer(fx.scores, fx.keys);
  std::string text = scorer::RenderText(report);
  CHECK(text.find("task 1") != std::string::npos);
  CHECK(text.find("minDCF 0.666667") != std::string::npos);
  CHECK(text.find("EER 33.33%") != std::string::npos);
  CHECK(text.find("trials 6 (targets 3, nontargets 3)") != std::string::npos);
}
