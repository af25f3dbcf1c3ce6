// evalkit/formats.hpp
//
// Reading and writing of the challenge's documented text files (model
// enrollment, trials, train labels, answer.txt, submission metadata) plus
// the toolkit's own trial-key format.  Parsers accept runs of spaces/tabs
// and both LF and CRLF; writers emit the canonical single-separator, LF
// rendering, so parse(write(x)) == x and write(parse(t)) is canonical.
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

#ifndef EVALKIT_FORMATS_HPP_
#define EVALKIT_FORMATS_HPP_

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "evalkit/detail/text.hpp"

namespace evalkit {
namespace formats {

enum class Task { TD, TI };  // Task 1 (text-dependent), Task 2 (text-independent)

inline int TaskNumber(Task t) { return t == Task::TD ? 1 : 2; }

inline Task TaskFromNumber(int n) {
  if (n == 1) return Task::TD;
  if (n == 2) return Task::TI;
  throw std::invalid_argument("task must be 1 or 2");
}

// ---------------------------------------------------------------------------
// Errors

enum class ParseCode {
  MalformedLine,
  DuplicateModelId,
  InvalidPhraseId,
  DuplicateFileId,
  CountMismatch,
  NonNumericScore,
  NonFiniteScore,
  HeaderLinePresent,
  MissingKey,
  NonIntegerFusedCount,
  FusedCountOutOfRange,
  DuplicateKey,
};

inline const char *ToString(ParseCode c) {
  switch (c) {
    case ParseCode::MalformedLine: return "MalformedLine";
    case ParseCode::DuplicateModelId: return "DuplicateModelId";
    case ParseCode::InvalidPhraseId: return "InvalidPhraseId";
    case ParseCode::DuplicateFileId: return "DuplicateFileId";
    case ParseCode::CountMismatch: return "CountMismatch";
    case ParseCode::NonNumericScore: return "NonNumericScore";
    case ParseCode::NonFiniteScore: return "NonFiniteScore";
    case ParseCode::HeaderLinePresent: return "HeaderLinePresent";
    case ParseCode::MissingKey: return "MissingKey";
    case ParseCode::NonIntegerFusedCount: return "NonIntegerFusedCount";
    case ParseCode::FusedCountOutOfRange: return "FusedCountOutOfRange";
    case ParseCode::DuplicateKey: return "DuplicateKey";
  }
  return "UnknownParseCode";
}

// Every parse error carries the 1-based line number it was detected on
// (0 when the error is not tied to a single line, e.g. a count mismatch).
struct ParseIssue {
  ParseCode code;
  int line = 0;
  std::string detail;
};

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(ParseIssue issue)
      : std::runtime_error(std::string(ToString(issue.code)) + " at line " +
                           std::to_string(issue.line) +
                           (issue.detail.empty() ? "" : ": " + issue.detail)),
        issue_(std::move(issue)) {}

  const ParseIssue &issue() const { return issue_; }
  ParseCode code() const { return issue_.code; }
  int line() const { return issue_.line; }

 private:
  ParseIssue issue_;
};

// ---------------------------------------------------------------------------
// Domain types

struct EnrollmentRecordTD {
  std::string model_id;
  std::string phrase_id;  // "01".."10"
  std::array<std::string, 3> enrollment_ids;
  bool operator==(const EnrollmentRecordTD &) const = default;
};

struct EnrollmentRecordTI {
  std::string model_id;
  std::vector<std::string> enrollment_ids;  // at least one
  bool operator==(const EnrollmentRecordTI &) const = default;
};

struct Trial {
  std::string model_id;
  std::string test_id;
  bool operator==(const Trial &) const = default;
};

struct TrainLabelTD {
  std::string file_id;
  std::string speaker_id;
  std::string phrase_id;
  bool operator==(const TrainLabelTD &) const = default;
};

struct TrainLabelTI {
  std::string file_id;
  std::string speaker_id;
  bool operator==(const TrainLabelTI &) const = default;
};

struct SubmissionMetadata {
  std::string public_description;
  long fused_systems_count = 1;
  bool operator==(const SubmissionMetadata &) const = default;
};

enum class TrialType { TC, TW, IC, IW, TRG, NON };
enum class Partition { None, SameLang, CrossLang };

inline const char *ToString(TrialType t) {
  switch (t) {
    case TrialType::TC: return "TC";
    case TrialType::TW: return "TW";
    case TrialType::IC: return "IC";
    case TrialType::IW: return "IW";
    case TrialType::TRG: return "TRG";
    case TrialType::NON: return "NON";
  }
  return "?";
}

inline const char *ToString(Partition p) {
  switch (p) {
    case Partition::None: return "none";
    case Partition::SameLang: return "same-lang";
    case Partition::CrossLang: return "cross-lang";
  }
  return "?";
}

inline std::optional<TrialType> TrialTypeFromString(std::string_view s) {
  if (s == "TC") return TrialType::TC;
  if (s == "TW") return TrialType::TW;
  if (s == "IC") return TrialType::IC;
  if (s == "IW") return TrialType::IW;
  if (s == "TRG") return TrialType::TRG;
  if (s == "NON") return TrialType::NON;
  return std::nullopt;
}

inline std::optional<Partition> PartitionFromString(std::string_view s) {
  if (s == "none") return Partition::None;
  if (s == "same-lang") return Partition::SameLang;
  if (s == "cross-lang") return Partition::CrossLang;
  return std::nullopt;
}

// True for the four text-dependent types.
inline bool IsTextDependentType(TrialType t) {
  return t == TrialType::TC || t == TrialType::TW || t == TrialType::IC ||
         t == TrialType::IW;
}

inline bool IsTargetType(TrialType t) {
  return t == TrialType::TC || t == TrialType::TRG;
}

// Ground-truth answer for one trial, aligned 1:1 with a trial list.
struct TrialKey {
  std::string model_id;
  std::string test_id;
  TrialType trial_type = TrialType::NON;
  bool is_target = false;
  Partition partition = Partition::None;
  bool operator==(const TrialKey &) const = default;
};

// ---------------------------------------------------------------------------
// Canonical header lines (fixed by the documented file examples)

inline constexpr std::string_view kTrialsHeader = "model-id evaluation-file-id";
inline constexpr std::string_view kEnrollmentTdHeader =
    "model-id phrase-id enroll-file-id1 enroll-file-id2 enroll-file-id3";
inline constexpr std::string_view kEnrollmentTiHeader = "model-id enroll-file-ids ...";
inline constexpr std::string_view kTrainLabelsTdHeader =
    "train-file-id speaker-id phrase-id";
inline constexpr std::string_view kTrainLabelsTiHeader = "train-file-id speaker-id";
inline constexpr std::string_view kKeyHeader =
    "model-id\ttest-file-id\ttrial-type\tis-target\tpartition";

inline bool IsValidPhraseId(std::string_view s) {
  if (s.size() != 2 || s[0] < '0' || s[0] > '9' || s[1] < '0' || s[1] > '9')
    return false;
  int v = (s[0] - '0') * 10 + (s[1] - '0');
  return v >= 1 && v <= 10;
}

template <typename T>
struct ParsedFile {
  std::vector<T> records;
  std::vector<std::string> warnings;
};

namespace impl {

using detail::IsBlank;
using detail::NormalizeSpacing;
using detail::SplitFields;
using detail::SplitLines;
using detail::TextLine;

// The first line of a header-carrying file is always consumed as the
// header.  When it does not match the canonical text but structurally
// resembles a data row, it is still treated as the header and a warning is
// recorded, since silently scoring it as data would misalign everything
// after it.
inline std::size_t ConsumeHeader(const std::vector<TextLine> &lines,
                                 std::string_view canonical_header,
                                 bool first_line_data_like,
                                 std::vector<std::string> *warnings) {
  std::size_t i = 0;
  while (i < lines.size() && IsBlank(lines[i].text)) ++i;
  if (i == lines.size())
    throw ParseError({ParseCode::MalformedLine, 1, "missing header line"});
  if (NormalizeSpacing(lines[i].text) !=
          NormalizeSpacing(canonical_header) &&
      first_line_data_like) {
    warnings->push_back("line " + std::to_string(lines[i].number) +
                        ": header line resembles a data row; treated as header");
  }
  return i + 1;
}

[[noreturn]] inline void ThrowMalformed(const TextLine &line, std::string detail) {
  throw ParseError({ParseCode::MalformedLine, line.number, std::move(detail)});
}

}  // namespace impl

// ---------------------------------------------------------------------------
// Enrollment files

inline ParsedFile<EnrollmentRecordTD> ParseEnrollmentTd(std::string_view text) {
  using namespace impl;
  ParsedFile<EnrollmentRecordTD> out;
  auto lines = SplitLines(text);
  std::size_t first = 0;
  {
    std::size_t i = 0;
    while (i < lines.size() && IsBlank(lines[i].text)) ++i;
    bool data_like = false;
    if (i < lines.size()) {
      auto f = SplitFields(lines[i].text);
      data_like = f.size() == 5 && IsValidPhraseId(f[1]);
    }
    first = ConsumeHeader(lines, kEnrollmentTdHeader, data_like, &out.warnings);
  }
  std::unordered_set<std::string_view> seen_models;
  for (std::size_t i = first; i < lines.size(); ++i) {
    const auto &line = lines[i];
    if (IsBlank(line.text)) continue;
    auto f = SplitFields(line.text);
    if (f.size() != 5)
      ThrowMalformed(line, "expected 5 fields, found " + std::to_string(f.size()));
    if (!IsValidPhraseId(f[1]))
      throw ParseError({ParseCode::InvalidPhraseId, line.number,
                        "phrase id must be 01..10, got '" + std::string(f[1]) + "'"});
    if (!seen_models.insert(f[0]).second)
      throw ParseError({ParseCode::DuplicateModelId, line.number,
                        std::string(f[0])});
    EnrollmentRecordTD rec;
    rec.model_id = f[0];
    rec.phrase_id = f[1];
    rec.enrollment_ids = {std::string(f[2]), std::string(f[3]), std::string(f[4])};
    out.records.push_back(std::move(rec));
  }
  return out;
}

inline ParsedFile<EnrollmentRecordTI> ParseEnrollmentTi(std::string_view text) {
  using namespace impl;
  ParsedFile<EnrollmentRecordTI> out;
  auto lines = SplitLines(text);
  std::size_t first = 0;
  {
    std::size_t i = 0;
    while (i < lines.size() && IsBlank(lines[i].text)) ++i;
    bool data_like = false;
    if (i < lines.size()) {
      auto f = SplitFields(lines[i].text);
      // Any >=2-field line is structurally a valid TI record; only the
      // canonical header text disambiguates.
      data_like = f.size() >= 2 && f.back() != "...";
    }
    first = ConsumeHeader(lines, kEnrollmentTiHeader, data_like, &out.warnings);
  }
  std::unordered_set<std::string_view> seen_models;
  for (std::size_t i = first; i < lines.size(); ++i) {
    const auto &line = lines[i];
    if (IsBlank(line.text)) continue;
    auto f = SplitFields(line.text);
    if (f.size() < 2)
      ThrowMalformed(line, "expected at least 2 fields (model id + enrollment ids)");
    if (!seen_models.insert(f[0]).second)
      throw ParseError({ParseCode::DuplicateModelId, line.number,
                        std::string(f[0])});
    EnrollmentRecordTI rec;
    rec.model_id = f[0];
    std::unordered_set<std::string_view> seen_ids;
    for (std::size_t k = 1; k < f.size(); ++k) {
      if (!seen_ids.insert(f[k]).second)
        ThrowMalformed(line, "enrollment id repeated within record: " +
                                 std::string(f[k]));
      rec.enrollment_ids.emplace_back(f[k]);
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

// Task-tagged view of an enrollment file; exactly one of td/ti is populated.
struct EnrollmentFile {
  Task task = Task::TD;
  std::vector<EnrollmentRecordTD> td;
  std::vector<EnrollmentRecordTI> ti;
  std::vector<std::string> warnings;

  std::size_t size() const { return task == Task::TD ? td.size() : ti.size(); }
};

inline EnrollmentFile ParseEnrollment(std::string_view text, Task task) {
  EnrollmentFile out;
  out.task = task;
  if (task == Task::TD) {
    auto p = ParseEnrollmentTd(text);
    out.td = std::move(p.records);
    out.warnings = std::move(p.warnings);
  } else {
    auto p = ParseEnrollmentTi(text);
    out.ti = std::move(p.records);
    out.warnings = std::move(p.warnings);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trial file

inline ParsedFile<Trial> ParseTrials(std::string_view text) {
  using namespace impl;
  ParsedFile<Trial> out;
  auto lines = SplitLines(text);
  std::size_t first = 0;
  {
    std::size_t i = 0;
    while (i < lines.size() && IsBlank(lines[i].text)) ++i;
    bool data_like = false;
    if (i < lines.size())
      data_like = SplitFields(lines[i].text).size() == 2;
    first = ConsumeHeader(lines, kTrialsHeader, data_like, &out.warnings);
  }
  for (std::size_t i = first; i < lines.size(); ++i) {
    const auto &line = lines[i];
    if (IsBlank(line.text)) continue;
    auto f = SplitFields(line.text);
    if (f.size() != 2)
      ThrowMalformed(line, "expected 2 fields, found " + std::to_string(f.size()));
    out.records.push_back({std::string(f[0]), std::string(f[1])});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Train label files

inline ParsedFile<TrainLabelTD> ParseTrainLabelsTd(std::string_view text) {
  using namespace impl;
  ParsedFile<TrainLabelTD> out;
  auto lines = SplitLines(text);
  std::size_t first = 0;
  {
    std::size_t i = 0;
    while (i < lines.size() && IsBlank(lines[i].text)) ++i;
    bool data_like = false;
    if (i < lines.size()) {
      auto f = SplitFields(lines[i].text);
      data_like = f.size() == 3 && IsValidPhraseId(f[2]);
    }
    first = ConsumeHeader(lines, kTrainLabelsTdHeader, data_like, &out.warnings);
  }
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = first; i < lines.size(); ++i) {
    const auto &line = lines[i];
    if (IsBlank(line.text)) continue;
    auto f = SplitFields(line.text);
    if (f.size() != 3)
      ThrowMalformed(line, "expected 3 fields, found " + std::to_string(f.size()));
    if (!IsValidPhraseId(f[2]))
      throw ParseError({ParseCode::InvalidPhraseId, line.number,
                        "phrase id must be 01..10, got '" + std::string(f[2]) + "'"});
    if (!seen.insert(f[0]).second)
      throw ParseError({ParseCode::DuplicateFileId, line.number, std::string(f[0])});
    out.records.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2])});
  }
  return out;
}

inline ParsedFile<TrainLabelTI> ParseTrainLabelsTi(std::string_view text) {
  using namespace impl;
  ParsedFile<TrainLabelTI> out;
  auto lines = SplitLines(text);
  std::size_t first = 0;
  {
    std::size_t i = 0;
    while (i < lines.size() && IsBlank(lines[i].text)) ++i;
    bool data_like = false;
    if (i < lines.size())
      data_like = SplitFields(lines[i].text).size() == 2;
    first = ConsumeHeader(lines, kTrainLabelsTiHeader, data_like, &out.warnings);
  }
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = first; i < lines.size(); ++i) {
    const auto &line = lines[i];
    if (IsBlank(line.text)) continue;
    auto f = SplitFields(line.text);
    if (f.size() != 2)
      ThrowMalformed(line, "expected 2 fields, found " + std::to_string(f.size()));
    if (!seen.insert(f[0]).second)
      throw ParseError({ParseCode::DuplicateFileId, line.number, std::string(f[0])});
    out.records.push_back({std::string(f[0]), std::string(f[1])});
  }
  return out;
}

// ---------------------------------------------------------------------------
// answer.txt

// Score grammar: optional sign, decimal digits, optional fraction, optional
// exponent.  NaN and infinity spellings are rejected up front; values that
// overflow double are NonFiniteScore.
inline bool MatchesScoreGrammar(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t digits = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') { ++i; ++digits; }
  if (digits == 0) return false;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
  }
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') { ++i; ++exp_digits; }
    if (exp_digits == 0) return false;
  }
  return i == s.size();
}

inline bool LooksNonFiniteToken(std::string_view s) {
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) s.remove_prefix(1);
  std::string lower;
  lower.reserve(s.size());
  for (char c : s) lower += static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c);
  return lower == "inf" || lower == "infinity" || lower == "nan" ||
         lower.rfind("nan(", 0) == 0;
}

struct AnswerCheck {
  std::vector<double> scores;
  std::vector<ParseIssue> issues;
  bool ok() const { return issues.empty(); }
};

inline AnswerCheck CheckAnswer(std::string_view text, std::size_t expected_count) {
  using namespace impl;
  AnswerCheck out;
  auto lines = SplitLines(text);
  constexpr std::size_t kMaxLineIssues = 100;
  bool first_data_seen = false;
  for (const auto &line : lines) {
    if (IsBlank(line.text)) continue;
    if (!first_data_seen) {
      first_data_seen = true;
      if (NormalizeSpacing(line.text) == kTrialsHeader) {
        out.issues.push_back({ParseCode::HeaderLinePresent, line.number,
                              "the trial-file header must not appear in answer.txt"});
        continue;  // header excluded from the score count
      }
    }
    auto f = SplitFields(line.text);
    if (out.issues.size() >= kMaxLineIssues) continue;
    if (f.size() != 1) {
      out.issues.push_back({ParseCode::NonNumericScore, line.number,
                            "expected a single score, found " +
                                std::to_string(f.size()) + " fields"});
      continue;
    }
    std::string_view tok = f[0];
    if (LooksNonFiniteToken(tok)) {
      out.issues.push_back({ParseCode::NonFiniteScore, line.number,
                            "non-finite score '" + std::string(tok) + "'"});
      continue;
    }
    if (!MatchesScoreGrammar(tok)) {
      out.issues.push_back({ParseCode::NonNumericScore, line.number,
                            "not a decimal float: '" + std::string(tok) + "'"});
      continue;
    }
    std::string buf(tok);
    errno = 0;
    char *end = nullptr;
    double v = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size() || !std::isfinite(v)) {
      out.issues.push_back({ParseCode::NonFiniteScore, line.number,
                            "score overflows double: '" + buf + "'"});
      continue;
    }
    out.scores.push_back(v);
  }
  if (out.scores.size() != expected_count) {
    out.issues.push_back(
        {ParseCode::CountMismatch, 0,
         "answer has " + std::to_string(out.scores.size()) + " scores but " +
             std::to_string(expected_count) + " trials must all be scored"});
  }
  return out;
}

inline std::vector<double> ParseAnswer(std::string_view text,
                                       std::size_t expected_count) {
  AnswerCheck check = CheckAnswer(text, expected_count);
  if (!check.ok()) throw ParseError(check.issues.front());
  return std::move(check.scores);
}

// ---------------------------------------------------------------------------
// Submission metadata

struct MetadataCheck {
  SubmissionMetadata metadata;
  std::vector<ParseIssue> issues;
  std::vector<std::string> warnings;  // unknown keys, unparseable lines
  bool ok() const { return issues.empty(); }
};

inline MetadataCheck CheckMetadata(std::string_view text) {
  using namespace impl;
  MetadataCheck out;
  int description_count = 0, fused_count = 0;
  std::string fused_value;
  int fused_line = 0;
  for (const auto &line : SplitLines(text)) {
    if (IsBlank(line.text)) continue;
    std::string_view t = detail::Trim(line.text);
    std::size_t colon = t.find(':');
    if (colon == std::string_view::npos) {
      out.warnings.push_back("line " + std::to_string(line.number) +
                             ": no 'key: value' structure, ignored");
      continue;
    }
    std::string key(detail::Trim(t.substr(0, colon)));
    std::string value(detail::Trim(t.substr(colon + 1)));
    if (key == "public-description") {
      if (++description_count > 1) {
        out.issues.push_back({ParseCode::DuplicateKey, line.number,
                              "public-description given more than once"});
        continue;
      }
      if (value.empty()) {
        out.issues.push_back({ParseCode::MissingKey, line.number,
                              "public-description has an empty value"});
        continue;
      }
      out.metadata.public_description = value;
    } else if (key == "fused-systems-count") {
      if (++fused_count > 1) {
        out.issues.push_back({ParseCode::DuplicateKey, line.number,
                              "fused-systems-count given more than once"});
        continue;
      }
      fused_value = value;
      fused_line = line.number;
    } else {
      out.warnings.push_back("line " + std::to_string(line.number) +
                             ": unknown key '" + key + "'");
    }
  }
  if (description_count == 0)
    out.issues.push_back({ParseCode::MissingKey, 0, "public-description missing"});
  if (fused_count == 0) {
    out.issues.push_back({ParseCode::MissingKey, 0, "fused-systems-count missing"});
  } else if (fused_count == 1) {
    std::string_view v = fused_value;
    bool neg = false;
    std::size_t i = 0;
    if (i < v.size() && (v[i] == '+' || v[i] == '-')) { neg = v[i] == '-'; ++i; }
    bool all_digits = i < v.size();
    for (std::size_t k = i; k < v.size(); ++k)
      if (v[k] < '0' || v[k] > '9') all_digits = false;
    if (!all_digits) {
      out.issues.push_back({ParseCode::NonIntegerFusedCount, fused_line,
                            "'" + fused_value + "' is not an integer"});
    } else {
      long value = 0;
      auto [p, ec] = std::from_chars(v.data() + i, v.data() + v.size(), value);
      bool overflow = ec != std::errc();
      if (neg) value = -value;
      if (overflow) {
        out.issues.push_back({ParseCode::NonIntegerFusedCount, fused_line,
                              "'" + fused_value + "' out of integer range"});
      } else if (value < 1) {
        out.issues.push_back({ParseCode::FusedCountOutOfRange, fused_line,
                              "fused-systems-count must be >= 1, got " +
                                  std::to_string(value)});
      } else {
        out.metadata.fused_systems_count = value;
      }
    }
  }
  return out;
}

inline SubmissionMetadata ParseMetadata(std::string_view text) {
  MetadataCheck check = CheckMetadata(text);
  if (!check.ok()) throw ParseError(check.issues.front());
  return std::move(check.metadata);
}

// ---------------------------------------------------------------------------
// Key file (toolkit-defined, tab-separated)

struct ParsedKey {
  std::vector<TrialKey> keys;
  std::optional<Task> task;  // unset for a header-only key file
  std::vector<std::string> warnings;
};

inline ParsedKey ParseKey(std::string_view text) {
  using namespace impl;
  ParsedKey out;
  auto lines = SplitLines(text);
  std::size_t first = 0;
  {
    std::size_t i = 0;
    while (i < lines.size() && IsBlank(lines[i].text)) ++i;
    bool data_like = false;
    if (i < lines.size()) {
      auto f = SplitFields(lines[i].text);
      data_like = f.size() == 5 && TrialTypeFromString(f[2]).has_value();
    }
    std::vector<std::string> warnings;
    first = ConsumeHeader(lines, kKeyHeader, data_like, &warnings);
    out.warnings = std::move(warnings);
  }
  for (std::size_t i = first; i < lines.size(); ++i) {
    const auto &line = lines[i];
    if (IsBlank(line.text)) continue;
    auto f = SplitFields(line.text);
    if (f.size() != 5)
      ThrowMalformed(line, "expected 5 fields, found " + std::to_string(f.size()));
    auto type = TrialTypeFromString(f[2]);
    if (!type)
      ThrowMalformed(line, "unknown trial type '" + std::string(f[2]) + "'");
    if (f[3] != "0" && f[3] != "1")
      ThrowMalformed(line, "is-target must be 0 or 1, got '" + std::string(f[3]) + "'");
    auto partition = PartitionFromString(f[4]);
    if (!partition)
      ThrowMalformed(line, "unknown partition '" + std::string(f[4]) + "'");
    bool is_target = f[3] == "1";
    if (is_target != IsTargetType(*type))
      ThrowMalformed(line, std::string("is-target flag inconsistent with trial type ") +
                               ToString(*type));
    Task row_task = IsTextDependentType(*type) ? Task::TD : Task::TI;
    if (!out.task) {
      out.task = row_task;
    } else if (*out.task != row_task) {
      ThrowMalformed(line, "trial-type families TC/TW/IC/IW and TRG/NON mixed "
                           "in one key file");
    }
    if (row_task == Task::TD && *partition != Partition::None)
      ThrowMalformed(line, "partition must be 'none' for text-dependent keys");
    out.keys.push_back({std::string(f[0]), std::string(f[1]), *type, is_target,
                        *partition});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Writers (canonical renderings)

namespace impl {

inline void CheckIdentifier(std::string_view id, const char *what) {
  if (id.empty())
    throw std::invalid_argument(std::string(what) + " is empty");
  if (detail::ContainsWhitespace(id))
    throw std::invalid_argument(std::string(what) + " contains whitespace: '" +
                                std::string(id) + "'");
}

}  // namespace impl

inline std::string WriteEnrollmentTd(const std::vector<EnrollmentRecordTD> &records) {
  std::string out(kEnrollmentTdHeader);
  out += '\n';
  for (const auto &r : records) {
    impl::CheckIdentifier(r.model_id, "model id");
    if (!IsValidPhraseId(r.phrase_id))
      throw std::invalid_argument("invalid phrase id: '" + r.phrase_id + "'");
    out += r.model_id;
    out += ' ';
    out += r.phrase_id;
    for (const auto &e : r.enrollment_ids) {
      impl::CheckIdentifier(e, "enrollment id");
      out += ' ';
      out += e;
    }
    out += '\n';
  }
  return out;
}

inline std::string WriteEnrollmentTi(const std::vector<EnrollmentRecordTI> &records) {
  std::string out(kEnrollmentTiHeader);
  out += '\n';
  for (const auto &r : records) {
    impl::CheckIdentifier(r.model_id, "model id");
    if (r.enrollment_ids.empty())
      throw std::invalid_argument("record '" + r.model_id +
                                  "' has no enrollment ids");
    out += r.model_id;
    for (const auto &e : r.enrollment_ids) {
      impl::CheckIdentifier(e, "enrollment id");
      out += ' ';
      out += e;
    }
    out += '\n';
  }
  return out;
}

inline std::string WriteTrials(const std::vector<Trial> &trials) {
  std::string out(kTrialsHeader);
  out += '\n';
  for (const auto &t : trials) {
    impl::CheckIdentifier(t.model_id, "model id");
    impl::CheckIdentifier(t.test_id, "test id");
    out += t.model_id;
    out += ' ';
    out += t.test_id;
    out += '\n';
  }
  return out;
}

inline std::string WriteTrainLabelsTd(const std::vector<TrainLabelTD> &labels) {
  std::string out(kTrainLabelsTdHeader);
  out += '\n';
  for (const auto &l : labels) {
    impl::CheckIdentifier(l.file_id, "file id");
    impl::CheckIdentifier(l.speaker_id, "speaker id");
    if (!IsValidPhraseId(l.phrase_id))
      throw std::invalid_argument("invalid phrase id: '" + l.phrase_id + "'");
    out += l.file_id;
    out += ' ';
    out += l.speaker_id;
    out += ' ';
    out += l.phrase_id;
    out += '\n';
  }
  return out;
}

inline std::string WriteTrainLabelsTi(const std::vector<TrainLabelTI> &labels) {
  std::string out(kTrainLabelsTiHeader);
  out += '\n';
  for (const auto &l : labels) {
    impl::CheckIdentifier(l.file_id, "file id");
    impl::CheckIdentifier(l.speaker_id, "speaker id");
    out += l.file_id;
    out += ' ';
    out += l.speaker_id;
    out += '\n';
  }
  return out;
}

// Shortest decimal rendering that round-trips the exact double.
inline std::string FormatScore(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::string WriteAnswer(const std::vector<double> &scores) {
  std::string out;
  for (double s : scores) {
    if (!std::isfinite(s))
      throw std::invalid_argument("answer scores must be finite");
    out += FormatScore(s);
    out += '\n';
  }
  return out;
}

inline std::string WriteMetadata(const SubmissionMetadata &m) {
  if (m.public_description.empty())
    throw std::invalid_argument("public-description must be nonempty");
  if (m.fused_systems_count < 1)
    throw std::invalid_argument("fused-systems-count must be >= 1");
  std::string out = "public-description: " + m.public_description + "\n";
  out += "fused-systems-count: " + std::to_string(m.fused_systems_count) + "\n";
  return out;
}

inline std::string WriteKey(const std::vector<TrialKey> &keys) {
  std::string out(kKeyHeader);
  out += '\n';
  for (const auto &k : keys) {
    impl::CheckIdentifier(k.model_id, "model id");
    impl::CheckIdentifier(k.test_id, "test id");
    if (k.is_target != IsTargetType(k.trial_type))
      throw std::invalid_argument("is_target inconsistent with trial type for " +
                                  k.model_id + "/" + k.test_id);
    out += k.model_id;
    out += '\t';
    out += k.test_id;
    out += '\t';
    out += ToString(k.trial_type);
    out += '\t';
    out += k.is_target ? '1' : '0';
    out += '\t';
    out += ToString(k.partition);
    out += '\n';
  }
  return out;
}

}  // namespace formats
}  // namespace evalkit

#endif  // EVALKIT_FORMATS_HPP_
