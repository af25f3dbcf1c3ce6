// evalkit/trial_semantics.hpp
//
// Trial classification and key construction.  Task 1 trials fall into the
// four text-dependent types (TC/TW/IC/IW) of which only TC is target;
// Task 2 trials are TRG/NON with a same-language / cross-language
// partition.  Ground truth comes from a toolkit-defined utterance metadata
// sidecar, since the released challenge files deliberately withhold
// speaker, phrase, language and gender for evaluation data.
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

#ifndef EVALKIT_TRIAL_SEMANTICS_HPP_
#define EVALKIT_TRIAL_SEMANTICS_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "evalkit/detail/rng.hpp"
#include "evalkit/detail/text.hpp"
#include "evalkit/formats.hpp"

namespace evalkit {
namespace trials {

using formats::EnrollmentFile;
using formats::Partition;
using formats::Task;
using formats::Trial;
using formats::TrialKey;
using formats::TrialType;

// ---------------------------------------------------------------------------
// Errors

enum class SemanticCode {
  UnknownModelId,
  UnknownTestId,
  MissingPhrase,
  MissingGender,
  EmptyResult,
  InconsistentEnrollment,
};

inline const char *ToString(SemanticCode c) {
  switch (c) {
    case SemanticCode::UnknownModelId: return "UnknownModelId";
    case SemanticCode::UnknownTestId: return "UnknownTestId";
    case SemanticCode::MissingPhrase: return "MissingPhrase";
    case SemanticCode::MissingGender: return "MissingGender";
    case SemanticCode::EmptyResult: return "EmptyResult";
    case SemanticCode::InconsistentEnrollment: return "InconsistentEnrollment";
  }
  return "UnknownSemanticCode";
}

class SemanticError : public std::runtime_error {
 public:
  SemanticError(SemanticCode code, const std::string &msg)
      : std::runtime_error(std::string(ToString(code)) + ": " + msg),
        code_(code) {}
  SemanticCode code() const { return code_; }

 private:
  SemanticCode code_;
};

// ---------------------------------------------------------------------------
// Ground-truth sidecar

// "-" in the file marks an absent phrase or gender; language is mandatory.
struct UtteranceMeta {
  std::string utterance_id;
  std::string speaker_id;
  std::string phrase_id;  // empty when absent (text-independent utterances)
  std::string language;   // "fa" or "en"
  std::string gender;     // "m", "f", or empty when absent
  bool operator==(const UtteranceMeta &) const = default;
};

inline constexpr std::string_view kMetaHeader =
    "utt-id\tspeaker-id\tphrase-id\tlanguage\tgender";

struct MetaTable {
  std::vector<UtteranceMeta> rows;
  std::vector<std::string> warnings;

  const UtteranceMeta *Find(std::string_view utterance_id) const {
    auto it = index_.find(std::string(utterance_id));
    return it == index_.end() ? nullptr : &rows[it->second];
  }

  void RebuildIndex() {
    index_.clear();
    for (std::size_t i = 0; i < rows.size(); ++i)
      index_.emplace(rows[i].utterance_id, i);
  }

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

inline MetaTable ParseMeta(std::string_view text) {
  using formats::ParseCode;
  using formats::ParseError;
  MetaTable out;
  auto lines = detail::SplitLines(text);
  std::size_t i = 0;
  while (i < lines.size() && detail::IsBlank(lines[i].text)) ++i;
  if (i == lines.size())
    throw ParseError({ParseCode::MalformedLine, 1, "missing header line"});
  if (detail::NormalizeSpacing(lines[i].text) !=
      detail::NormalizeSpacing(kMetaHeader))
    out.warnings.push_back("line " + std::to_string(lines[i].number) +
                           ": unexpected metadata header; treated as header");
  ++i;
  std::unordered_set<std::string> seen;
  for (; i < lines.size(); ++i) {
    const auto &line = lines[i];
    if (detail::IsBlank(line.text)) continue;
    auto f = detail::SplitFields(line.text);
    if (f.size() != 5)
      throw ParseError({ParseCode::MalformedLine, line.number,
                        "expected 5 fields, found " + std::to_string(f.size())});
    UtteranceMeta m;
    m.utterance_id = f[0];
    m.speaker_id = f[1];
    if (f[2] != "-") {
      if (!formats::IsValidPhraseId(f[2]))
        throw ParseError({ParseCode::InvalidPhraseId, line.number,
                          "phrase id must be 01..10 or '-', got '" +
                              std::string(f[2]) + "'"});
      m.phrase_id = f[2];
    }
    if (f[3] != "fa" && f[3] != "en")
      throw ParseError({ParseCode::MalformedLine, line.number,
                        "language must be fa or en, got '" + std::string(f[3]) + "'"});
    m.language = f[3];
    if (f[4] != "-") {
      if (f[4] != "m" && f[4] != "f")
        throw ParseError({ParseCode::MalformedLine, line.number,
                          "gender must be m, f or '-', got '" +
                              std::string(f[4]) + "'"});
      m.gender = f[4];
    }
    if (!seen.insert(m.utterance_id).second)
      throw ParseError({ParseCode::DuplicateFileId, line.number, m.utterance_id});
    out.rows.push_back(std::move(m));
  }
  out.RebuildIndex();
  return out;
}

inline std::string WriteMeta(const std::vector<UtteranceMeta> &rows) {
  std::string out(kMetaHeader);
  out += '\n';
  for (const auto &m : rows) {
    out += m.utterance_id;
    out += '\t';
    out += m.speaker_id;
    out += '\t';
    out += m.phrase_id.empty() ? "-" : m.phrase_id;
    out += '\t';
    out += m.language;
    out += '\t';
    out += m.gender.empty() ? "-" : m.gender;
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification

// Total over the four speaker/phrase equality combinations:
//   same speaker, same phrase   -> TC (the only target type)
//   same speaker, wrong phrase  -> TW
//   imposter,     same phrase   -> IC
//   imposter,     wrong phrase  -> IW
inline TrialType ClassifyTrial(std::string_view model_speaker,
                               std::string_view model_phrase,
                               std::string_view test_speaker,
                               std::string_view test_phrase) {
  bool same_speaker = model_speaker == test_speaker;
  bool same_phrase = model_phrase == test_phrase;
  if (same_speaker) return same_phrase ? TrialType::TC : TrialType::TW;
  return same_phrase ? TrialType::IC : TrialType::IW;
}

// Phrase ids 01..05 are the Persian phrases, 06..10 the English ones.
inline std::string PhraseLanguage(std::string_view phrase_id) {
  if (!formats::IsValidPhraseId(phrase_id))
    throw std::invalid_argument("invalid phrase id: '" + std::string(phrase_id) + "'");
  int v = (phrase_id[0] - '0') * 10 + (phrase_id[1] - '0');
  return v <= 5 ? "fa" : "en";
}

// ---------------------------------------------------------------------------
// Model resolution

// Speaker (and for Task 1 the phrase) behind each enrolled model, derived
// from the metadata of its enrollment utterances.
struct ModelInfo {
  std::string model_id;
  std::string speaker_id;
  std::string phrase_id;  // Task 1 only
  std::string gender;     // empty when any enrollment utterance lacks it
  std::vector<std::string> enrollment_ids;
};

inline std::vector<ModelInfo> ResolveModels(const EnrollmentFile &enrollment,
                                            const MetaTable &meta) {
  std::vector<ModelInfo> models;
  auto resolve = [&](const std::string &model_id,
                     const std::vector<std::string> &utt_ids,
                     const std::string &phrase_id) {
    ModelInfo info;
    info.model_id = model_id;
    info.phrase_id = phrase_id;
    info.enrollment_ids = utt_ids;
    for (const auto &utt : utt_ids) {
      const UtteranceMeta *m = meta.Find(utt);
      if (!m)
        throw SemanticError(SemanticCode::UnknownModelId,
                            "model " + model_id + ": enrollment utterance '" +
                                utt + "' not in metadata");
      if (info.speaker_id.empty()) {
        info.speaker_id = m->speaker_id;
        info.gender = m->gender;
      } else if (info.speaker_id != m->speaker_id) {
        throw SemanticError(SemanticCode::InconsistentEnrollment,
                            "model " + model_id +
                                " enrolls utterances of different speakers");
      }
    }
    models.push_back(std::move(info));
  };
  if (enrollment.task == Task::TD) {
    for (const auto &r : enrollment.td) {
      resolve(r.model_id,
              {r.enrollment_ids.begin(), r.enrollment_ids.end()}, r.phrase_id);
    }
  } else {
    for (const auto &r : enrollment.ti) resolve(r.model_id, r.enrollment_ids, "");
  }
  return models;
}

// ---------------------------------------------------------------------------
// Key building

inline std::vector<TrialKey> BuildKey(std::span<const Trial> trial_list,
                                      const EnrollmentFile &enrollment,
                                      const MetaTable &meta, Task task) {
  auto models = ResolveModels(enrollment, meta);
  std::unordered_map<std::string_view, const ModelInfo *> by_id;
  for (const auto &m : models) by_id.emplace(m.model_id, &m);

  std::vector<TrialKey> keys;
  keys.reserve(trial_list.size());
  for (const auto &t : trial_list) {
    auto it = by_id.find(t.model_id);
    if (it == by_id.end())
      throw SemanticError(SemanticCode::UnknownModelId, t.model_id);
    const ModelInfo &model = *it->second;
    const UtteranceMeta *test = meta.Find(t.test_id);
    if (!test)
      throw SemanticError(SemanticCode::UnknownTestId, t.test_id);

    TrialKey key;
    key.model_id = t.model_id;
    key.test_id = t.test_id;
    if (task == Task::TD) {
      if (model.phrase_id.empty())
        throw SemanticError(SemanticCode::MissingPhrase,
                            "model " + t.model_id + " has no phrase id");
      if (test->phrase_id.empty())
        throw SemanticError(SemanticCode::MissingPhrase,
                            "test utterance " + t.test_id + " has no phrase id");
      key.trial_type = ClassifyTrial(model.speaker_id, model.phrase_id,
                                     test->speaker_id, test->phrase_id);
      key.is_target = key.trial_type == TrialType::TC;
      key.partition = Partition::None;
    } else {
      bool same_speaker = model.speaker_id == test->speaker_id;
      key.trial_type = same_speaker ? TrialType::TRG : TrialType::NON;
      key.is_target = same_speaker;
      // Enrollment for Task 2 is always Persian; the test language decides
      // the partition.
      key.partition = test->language == "en" ? Partition::CrossLang
                                             : Partition::SameLang;
    }
    keys.push_back(std::move(key));
  }
  return keys;
}

// Model phrase lookup for phrase-sliced scoring (Task 1).
inline std::map<std::string, std::string> ModelPhrases(const EnrollmentFile &e) {
  std::map<std::string, std::string> out;
  for (const auto &r : e.td) out.emplace(r.model_id, r.phrase_id);
  return out;
}

// ---------------------------------------------------------------------------
// Trial generation

struct GenerationPolicy {
  std::uint64_t seed = 0;
  // Per-type caps; a type without an entry is kept in full.
  std::map<TrialType, std::size_t> caps;
};

// Exhaustive models x tests cross, filtered by the challenge constraints
// (never cross-gender; for Task 1 never across the model phrase language;
// never a model against its own enrollment utterances), then down-sampled
// per trial type with a seeded reservoir so the list is reproducible.
inline std::vector<std::pair<Trial, TrialKey>> GenerateTrials(
    const EnrollmentFile &enrollment, std::span<const UtteranceMeta> tests,
    const MetaTable &meta, Task task, const GenerationPolicy &policy) {
  auto models = ResolveModels(enrollment, meta);
  for (const auto &m : models)
    if (m.gender.empty())
      throw SemanticError(SemanticCode::MissingGender,
                          "model " + m.model_id + " has no gender metadata");

  struct Candidate {
    std::size_t order;
    Trial trial;
    TrialKey key;
  };
  std::map<TrialType, std::vector<Candidate>> by_type;
  std::size_t order = 0;
  for (const auto &model : models) {
    std::unordered_set<std::string_view> own(model.enrollment_ids.begin(),
                                             model.enrollment_ids.end());
    for (const auto &test : tests) {
      if (test.gender.empty())
        throw SemanticError(SemanticCode::MissingGender,
                            "test utterance " + test.utterance_id +
                                " has no gender metadata");
      if (test.gender != model.gender) continue;
      if (own.count(test.utterance_id)) continue;
      TrialKey key;
      key.model_id = model.model_id;
      key.test_id = test.utterance_id;
      if (task == Task::TD) {
        if (test.phrase_id.empty())
          throw SemanticError(SemanticCode::MissingPhrase,
                              "test utterance " + test.utterance_id +
                                  " has no phrase id");
        if (test.language != PhraseLanguage(model.phrase_id)) continue;
        key.trial_type = ClassifyTrial(model.speaker_id, model.phrase_id,
                                       test.speaker_id, test.phrase_id);
        key.is_target = key.trial_type == TrialType::TC;
        key.partition = Partition::None;
      } else {
        bool same_speaker = model.speaker_id == test.speaker_id;
        key.trial_type = same_speaker ? TrialType::TRG : TrialType::NON;
        key.is_target = same_speaker;
        key.partition = test.language == "en" ? Partition::CrossLang
                                              : Partition::SameLang;
      }
      by_type[key.trial_type].push_back(
          {order++, Trial{model.model_id, test.utterance_id}, std::move(key)});
    }
  }

  // Reservoir (algorithm R) per type, then original cross order restored.
  std::vector<Candidate> kept;
  for (auto &[type, bucket] : by_type) {
    auto cap_it = policy.caps.find(type);
    if (cap_it == policy.caps.end() || bucket.size() <= cap_it->second) {
      for (auto &c : bucket) kept.push_back(std::move(c));
      continue;
    }
    std::size_t cap = cap_it->second;
    if (cap == 0) continue;
    std::mt19937_64 eng(detail::DeriveStreamSeed(
        policy.seed, std::string("trials/") + formats::ToString(type)));
    std::vector<std::size_t> reservoir(cap);
    for (std::size_t i = 0; i < bucket.size(); ++i) {
      if (i < cap) {
        reservoir[i] = i;
      } else {
        std::size_t j = eng() % (i + 1);
        if (j < cap) reservoir[j] = i;
      }
    }
    std::sort(reservoir.begin(), reservoir.end());
    for (std::size_t idx : reservoir) kept.push_back(std::move(bucket[idx]));
  }
  std::sort(kept.begin(), kept.end(),
            [](const Candidate &a, const Candidate &b) { return a.order < b.order; });
  if (kept.empty())
    throw SemanticError(SemanticCode::EmptyResult,
                        "no trials survive the generation constraints");

  std::vector<std::pair<Trial, TrialKey>> out;
  out.reserve(kept.size());
  for (auto &c : kept) out.emplace_back(std::move(c.trial), std::move(c.key));
  return out;
}

}  // namespace trials
}  // namespace evalkit

#endif  // EVALKIT_TRIAL_SEMANTICS_HPP_
