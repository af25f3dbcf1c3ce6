// evalkit/submission.hpp
//
// Submission archive validation.  A submission is a ZIP holding exactly
// two files at its root, "answer.txt" and "metadata" (names matched
// case-sensitively, no extra extension tolerated).  Validation is
// exhaustive: every independently detectable defect is reported in one
// pass, against a closed error taxonomy, so a participant can fix a
// rejected archive in a single round trip.
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

#ifndef EVALKIT_SUBMISSION_HPP_
#define EVALKIT_SUBMISSION_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "evalkit/detail/zip_reader.hpp"
#include "evalkit/formats.hpp"

namespace evalkit {
namespace submission {

// ---------------------------------------------------------------------------
// Error taxonomy (closed)

enum class ValidationCode {
  NotAZip,
  MissingAnswerFile,
  MissingMetadataFile,
  ContainsDirectories,
  UnexpectedEntries,
  FilesNotAtRoot,
  CountMismatch,
  NonNumericScore,
  NonFiniteScore,
  HeaderLinePresent,
  MissingKey,
  NonIntegerFusedCount,
  FusedCountOutOfRange,
};

inline const char *ToString(ValidationCode c) {
  switch (c) {
    case ValidationCode::NotAZip: return "NotAZip";
    case ValidationCode::MissingAnswerFile: return "MissingAnswerFile";
    case ValidationCode::MissingMetadataFile: return "MissingMetadataFile";
    case ValidationCode::ContainsDirectories: return "ContainsDirectories";
    case ValidationCode::UnexpectedEntries: return "UnexpectedEntries";
    case ValidationCode::FilesNotAtRoot: return "FilesNotAtRoot";
    case ValidationCode::CountMismatch: return "CountMismatch";
    case ValidationCode::NonNumericScore: return "NonNumericScore";
    case ValidationCode::NonFiniteScore: return "NonFiniteScore";
    case ValidationCode::HeaderLinePresent: return "HeaderLinePresent";
    case ValidationCode::MissingKey: return "MissingKey";
    case ValidationCode::NonIntegerFusedCount: return "NonIntegerFusedCount";
    case ValidationCode::FusedCountOutOfRange: return "FusedCountOutOfRange";
  }
  return "UnknownValidationCode";
}

struct ValidationError {
  ValidationCode code;
  std::string detail;
  std::string location;  // entry name, optionally ":<line>"; may be empty
  bool operator==(const ValidationError &) const = default;
};

class SubmissionError : public std::runtime_error {
 public:
  explicit SubmissionError(ValidationError error)
      : std::runtime_error(std::string(ToString(error.code)) + ": " +
                           error.detail +
                           (error.location.empty() ? "" : " (" + error.location + ")")),
        error_(std::move(error)) {}
  const ValidationError &error() const { return error_; }

 private:
  ValidationError error_;
};

// ---------------------------------------------------------------------------
// Results

struct SubmissionPayload {
  std::vector<double> answer;
  formats::SubmissionMetadata metadata;
  std::vector<std::string> warnings;
};

struct ValidationOptions {
  // Guard against decompression bombs before any entry is extracted.
  std::uint64_t max_uncompressed_bytes = 256ull * 1024 * 1024;
};

struct ValidationResult {
  std::optional<SubmissionPayload> payload;
  std::vector<ValidationError> errors;
  bool ok() const { return payload.has_value(); }
};

inline constexpr std::string_view kAnswerEntryName = "answer.txt";
inline constexpr std::string_view kMetadataEntryName = "metadata";

// ---------------------------------------------------------------------------
// Implementation

namespace impl {

inline bool HasPathComponents(std::string_view name) {
  return name.find('/') != std::string_view::npos ||
         name.find('\\') != std::string_view::npos;
}

inline std::string_view Basename(std::string_view name) {
  std::size_t slash = name.find_last_of("/\\");
  return slash == std::string_view::npos ? name : name.substr(slash + 1);
}

inline ValidationCode MapParseCode(formats::ParseCode code) {
  using formats::ParseCode;
  switch (code) {
    case ParseCode::CountMismatch: return ValidationCode::CountMismatch;
    case ParseCode::NonNumericScore: return ValidationCode::NonNumericScore;
    case ParseCode::NonFiniteScore: return ValidationCode::NonFiniteScore;
    case ParseCode::HeaderLinePresent: return ValidationCode::HeaderLinePresent;
    case ParseCode::NonIntegerFusedCount:
      return ValidationCode::NonIntegerFusedCount;
    case ParseCode::FusedCountOutOfRange:
      return ValidationCode::FusedCountOutOfRange;
    // The closed taxonomy has no duplicate-key code; a repeated metadata
    // key means the single required key is effectively not well-defined.
    case ParseCode::DuplicateKey: return ValidationCode::MissingKey;
    default: return ValidationCode::MissingKey;
  }
}

inline std::string Location(std::string_view entry, int line) {
  std::string loc(entry);
  if (line > 0) loc += ":" + std::to_string(line);
  return loc;
}

}  // namespace impl

inline ValidationResult ValidateSubmission(std::span<const std::uint8_t> bytes,
                                           std::span<const formats::Trial> trials,
                                           const ValidationOptions &options = {}) {
  using detail::ZipEntryInfo;
  using detail::ZipError;
  using detail::ZipErrorKind;
  ValidationResult result;
  auto fail = [&](ValidationCode code, std::string detail,
                  std::string location = "") {
    result.errors.push_back({code, std::move(detail), std::move(location)});
  };

  if (bytes.empty()) {
    fail(ValidationCode::NotAZip, "empty upload");
    return result;
  }
  std::vector<ZipEntryInfo> entries;
  try {
    entries = detail::ListZipEntries(bytes);
  } catch (const ZipError &e) {
    fail(ValidationCode::NotAZip, e.what());
    return result;
  }

  // Entry-name pass: everything here is detectable without extraction.
  const ZipEntryInfo *answer_entry = nullptr;
  const ZipEntryInfo *metadata_entry = nullptr;
  bool misplaced_answer = false, misplaced_metadata = false;
  std::uint64_t total_uncompressed = 0;
  for (const auto &e : entries) {
    total_uncompressed += e.uncompressed_size;
    if (e.is_directory) {
      fail(ValidationCode::ContainsDirectories,
           "archive must not contain any folders", e.name);
      continue;
    }
    if (impl::HasPathComponents(e.name)) {
      fail(ValidationCode::FilesNotAtRoot,
           "required files must sit at the archive root", e.name);
      std::string_view base = impl::Basename(e.name);
      if (base == kAnswerEntryName) misplaced_answer = true;
      if (base == kMetadataEntryName) misplaced_metadata = true;
      continue;
    }
    if (e.name == kAnswerEntryName) {
      if (answer_entry)
        fail(ValidationCode::UnexpectedEntries, "duplicate entry", e.name);
      else
        answer_entry = &e;
    } else if (e.name == kMetadataEntryName) {
      if (metadata_entry)
        fail(ValidationCode::UnexpectedEntries, "duplicate entry", e.name);
      else
        metadata_entry = &e;
    } else {
      fail(ValidationCode::UnexpectedEntries,
           "only answer.txt and metadata are allowed", e.name);
    }
  }
  if (!answer_entry && !misplaced_answer)
    fail(ValidationCode::MissingAnswerFile, "no answer.txt at the archive root");
  if (!metadata_entry && !misplaced_metadata)
    fail(ValidationCode::MissingMetadataFile, "no metadata file at the archive root");
  if (total_uncompressed > options.max_uncompressed_bytes) {
    fail(ValidationCode::UnexpectedEntries,
         "declared uncompressed size " + std::to_string(total_uncompressed) +
             " exceeds the limit of " +
             std::to_string(options.max_uncompressed_bytes) + " bytes");
    return result;  // refuse to extract anything from a bomb-sized archive
  }

  auto extract = [&](const ZipEntryInfo *entry,
                     std::optional<std::string> &text) {
    if (!entry) return;
    try {
      auto data = detail::ReadZipEntry(bytes, *entry);
      text.emplace(reinterpret_cast<const char *>(data.data()), data.size());
    } catch (const ZipError &e) {
      // Encrypted, unsupported-method and corrupt entries all mean the
      // container is not readable as the plain zip the rules require.
      fail(ValidationCode::NotAZip, e.what(), entry->name);
    }
  };
  std::optional<std::string> answer_text, metadata_text;
  extract(answer_entry, answer_text);
  extract(metadata_entry, metadata_text);

  SubmissionPayload payload;
  if (answer_text) {
    auto check = formats::CheckAnswer(*answer_text, trials.size());
    for (const auto &issue : check.issues)
      fail(impl::MapParseCode(issue.code), issue.detail,
           impl::Location(kAnswerEntryName, issue.line));
    payload.answer = std::move(check.scores);
  }
  if (metadata_text) {
    auto check = formats::CheckMetadata(*metadata_text);
    for (const auto &issue : check.issues)
      fail(impl::MapParseCode(issue.code), issue.detail,
           impl::Location(kMetadataEntryName, issue.line));
    for (auto &w : check.warnings)
      payload.warnings.push_back(std::string(kMetadataEntryName) + ": " + w);
    payload.metadata = std::move(check.metadata);
  }

  if (result.errors.empty()) result.payload = std::move(payload);
  return result;
}

// Container-level open: the two entry texts, or the first structural error.
// Content defects (scores, metadata fields) are not this function's concern.
inline std::pair<std::string, std::string> OpenSubmissionZip(
    std::span<const std::uint8_t> bytes, const ValidationOptions &options = {}) {
  // Reuse the validator (zero trials; content findings are dropped below).
  ValidationResult r = ValidateSubmission(bytes, {}, options);
  for (const auto &e : r.errors) {
    switch (e.code) {
      case ValidationCode::NotAZip:
      case ValidationCode::MissingAnswerFile:
      case ValidationCode::MissingMetadataFile:
      case ValidationCode::ContainsDirectories:
      case ValidationCode::UnexpectedEntries:
      case ValidationCode::FilesNotAtRoot:
        throw SubmissionError(e);
      default:
        break;  // content-level; ignored here
    }
  }
  // Re-extract the texts; structural success is guaranteed at this point.
  auto entries = detail::ListZipEntries(bytes);
  std::string answer, metadata;
  for (const auto &e : entries) {
    auto data = detail::ReadZipEntry(bytes, e);
    std::string text(reinterpret_cast<const char *>(data.data()), data.size());
    if (e.name == kAnswerEntryName) answer = std::move(text);
    else if (e.name == kMetadataEntryName) metadata = std::move(text);
  }
  return {std::move(answer), std::move(metadata)};
}

// ---------------------------------------------------------------------------
// Machine-readable report

inline nlohmann::json ValidationReportJson(const ValidationResult &result) {
  nlohmann::json j;
  j["ok"] = result.ok();
  j["errors"] = nlohmann::json::array();
  for (const auto &e : result.errors) {
    nlohmann::json item;
    item["code"] = ToString(e.code);
    item["detail"] = e.detail;
    if (!e.location.empty()) item["location"] = e.location;
    j["errors"].push_back(std::move(item));
  }
  j["warnings"] = nlohmann::json::array();
  if (result.payload)
    for (const auto &w : result.payload->warnings) j["warnings"].push_back(w);
  if (result.ok()) {
    j["n_scores"] = result.payload->answer.size();
    j["fused_systems_count"] = result.payload->metadata.fused_systems_count;
  }
  return j;
}

}  // namespace submission
}  // namespace evalkit

#endif  // EVALKIT_SUBMISSION_HPP_
