// evalkit/synthgen.hpp
//
// Deterministic synthetic corpora and score files.  The generated bundles
// exercise the whole pipeline (formats -> key building -> scoring) and the
// Gaussian score model gives an analytic EER oracle, so these artifacts
// double as test fixtures with known answers.
//
// Everything is a pure function of (spec, seed).  Randomness comes from
// std::mt19937_64 with an explicit Box-Muller transform and fixed per-
// artifact streams; the engine name is recorded in the bundle manifest so
// an independent implementation can reproduce the bytes.
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

#ifndef EVALKIT_SYNTHGEN_HPP_
#define EVALKIT_SYNTHGEN_HPP_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "evalkit/detail/fsio.hpp"
#include "evalkit/detail/hash.hpp"
#include "evalkit/detail/rng.hpp"
#include "evalkit/formats.hpp"
#include "evalkit/trial_semantics.hpp"

namespace evalkit {
namespace synthgen {

using formats::Task;

inline constexpr const char *kPrngName = "mt19937_64";

struct ScoreModel {
  double mu_target = 1.0;
  double mu_nontarget = -1.0;
  double sigma = 1.0;
};

struct SynthSpec {
  std::uint64_t seed = 0;
  std::size_t n_speakers = 1;
  std::size_t n_phrases = 1;  // <= 10
  std::size_t utterances_per_speaker = 3;
  double gender_split = 1.0;  // fraction of speakers assigned gender "m"
  double language_mix = 0.0;  // fraction of English test utterances (Task 2)
  ScoreModel score_model;
};

class InfeasibleSpec : public std::runtime_error {
 public:
  explicit InfeasibleSpec(const std::string &msg) : std::runtime_error(msg) {}
};

struct SynthBundle {
  Task task = Task::TD;
  formats::EnrollmentFile enrollment;
  std::vector<trials::UtteranceMeta> enrollment_meta;
  std::vector<trials::UtteranceMeta> test_meta;
  trials::MetaTable meta;  // enrollment_meta + test_meta, indexed
  std::vector<formats::TrainLabelTD> train_td;
  std::vector<formats::TrainLabelTI> train_ti;
  std::vector<formats::Trial> trial_list;
  std::vector<formats::TrialKey> key;
};

namespace impl {

inline std::string Seq(const char *prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%06zu", prefix, n);
  return buf;
}

inline std::string PhraseId(std::size_t one_based) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%02zu", one_based);
  return buf;
}

inline void CheckSpec(const SynthSpec &spec, Task task) {
  if (spec.n_speakers < 1 || spec.n_phrases < 1 ||
      spec.utterances_per_speaker < 1)
    throw InfeasibleSpec("all counts must be >= 1");
  if (spec.n_phrases > 10)
    throw InfeasibleSpec("at most 10 phrases exist in the protocol");
  if (spec.gender_split < 0.0 || spec.gender_split > 1.0 ||
      spec.language_mix < 0.0 || spec.language_mix > 1.0)
    throw InfeasibleSpec("fractions must lie in [0,1]");
  if (spec.score_model.sigma <= 0.0)
    throw InfeasibleSpec("sigma must be positive");
  if (task == Task::TD && spec.utterances_per_speaker < 3)
    throw InfeasibleSpec(
        "text-dependent enrollment needs 3 utterances per model; "
        "utterances_per_speaker=" +
        std::to_string(spec.utterances_per_speaker));
}

}  // namespace impl

inline SynthBundle SynthCorpus(const SynthSpec &spec, Task task) {
  impl::CheckSpec(spec, task);
  SynthBundle bundle;
  bundle.task = task;
  bundle.enrollment.task = task;

  // Gender assignment is deterministic: the first round(n * split) speakers
  // are "m", the rest "f".  No cross-gender trials are ever generated, so a
  // split of 1.0 maximizes imposter coverage in tiny corpora.
  std::size_t n_male = static_cast<std::size_t>(
      std::llround(spec.gender_split * static_cast<double>(spec.n_speakers)));
  auto gender_of = [&](std::size_t i) { return i < n_male ? "m" : "f"; };

  std::mt19937_64 eng(detail::DeriveStreamSeed(spec.seed, "corpus"));
  std::size_t enr_seq = 0, evl_seq = 0, trn_seq = 0;

  if (task == Task::TD) {
    for (std::size_t i = 0; i < spec.n_speakers; ++i) {
      std::string speaker = impl::Seq("spk", i);
      std::string phrase = impl::PhraseId(i % spec.n_phrases + 1);
      std::string language = trials::PhraseLanguage(phrase);
      formats::EnrollmentRecordTD rec;
      rec.model_id = impl::Seq("mdl", i);
      rec.phrase_id = phrase;
      // Every speaker records utterances_per_speaker takes of their model
      // phrase; the first three enroll the model.
      for (std::size_t u = 0; u < spec.utterances_per_speaker; ++u) {
        std::string utt = impl::Seq("enr", enr_seq++);
        if (u < 3) rec.enrollment_ids[u] = utt;
        bundle.enrollment_meta.push_back(
            {utt, speaker, phrase, language, gender_of(i)});
      }
      bundle.enrollment.td.push_back(std::move(rec));
      // One evaluation utterance per phrase per speaker, so every trial
      // type is reachable wherever genders and phrase languages allow.
      for (std::size_t p = 1; p <= spec.n_phrases; ++p) {
        std::string test_phrase = impl::PhraseId(p);
        bundle.test_meta.push_back({impl::Seq("evl", evl_seq++), speaker,
                                    test_phrase,
                                    trials::PhraseLanguage(test_phrase),
                                    gender_of(i)});
      }
    }
    for (std::size_t i = 0; i < spec.n_speakers; ++i) {
      std::string bg = impl::Seq("bkg", i);
      for (std::size_t u = 0; u < 2; ++u)
        bundle.train_td.push_back({impl::Seq("trn", trn_seq++), bg,
                                   impl::PhraseId((i + u) % spec.n_phrases + 1)});
    }
  } else {
    for (std::size_t i = 0; i < spec.n_speakers; ++i) {
      std::string speaker = impl::Seq("spk", i);
      formats::EnrollmentRecordTI rec;
      rec.model_id = impl::Seq("mdl", i);
      // 1..utterances_per_speaker enrollment utterances, always Persian.
      std::size_t n_enroll = 1 + eng() % spec.utterances_per_speaker;
      for (std::size_t u = 0; u < n_enroll; ++u) {
        std::string utt = impl::Seq("enr", enr_seq++);
        rec.enrollment_ids.push_back(utt);
        bundle.enrollment_meta.push_back({utt, speaker, "", "fa", gender_of(i)});
      }
      bundle.enrollment.ti.push_back(std::move(rec));
      for (std::size_t u = 0; u < spec.utterances_per_speaker; ++u) {
        bool en = detail::Uniform01(eng) < spec.language_mix;
        bundle.test_meta.push_back({impl::Seq("evl", evl_seq++), speaker, "",
                                    en ? "en" : "fa", gender_of(i)});
      }
    }
    for (std::size_t i = 0; i < spec.n_speakers; ++i) {
      std::string bg = impl::Seq("bkg", i);
      for (std::size_t u = 0; u < 2; ++u)
        bundle.train_ti.push_back({impl::Seq("trn", trn_seq++), bg});
    }
  }

  bundle.meta.rows = bundle.enrollment_meta;
  bundle.meta.rows.insert(bundle.meta.rows.end(), bundle.test_meta.begin(),
                          bundle.test_meta.end());
  bundle.meta.RebuildIndex();

  trials::GenerationPolicy policy;
  policy.seed = spec.seed;
  auto generated = trials::GenerateTrials(bundle.enrollment, bundle.test_meta,
                                          bundle.meta, task, policy);
  bundle.trial_list.reserve(generated.size());
  bundle.key.reserve(generated.size());
  for (auto &[trial, key] : generated) {
    bundle.trial_list.push_back(std::move(trial));
    bundle.key.push_back(std::move(key));
  }
  return bundle;
}

inline std::vector<double> SynthScores(std::span<const formats::TrialKey> key,
                                       const ScoreModel &model,
                                       std::uint64_t seed) {
  std::mt19937_64 eng(detail::DeriveStreamSeed(seed, "scores"));
  std::vector<double> scores;
  scores.reserve(key.size());
  for (const auto &k : key)
    scores.push_back((k.is_target ? model.mu_target : model.mu_nontarget) +
                     model.sigma * detail::StandardNormal(eng));
  return scores;
}

// Two equal-variance Gaussians cross where the miss and false-alarm rates
// are both Phi(-(mu_t - mu_n) / (2 sigma)).
inline double ExpectedEerGaussian(const ScoreModel &model) {
  if (model.sigma <= 0.0) throw InfeasibleSpec("sigma must be positive");
  double a = (model.mu_target - model.mu_nontarget) / (2.0 * model.sigma);
  return 0.5 * std::erfc(a / std::sqrt(2.0));
}

// ---------------------------------------------------------------------------
// Bundle serialization

inline std::map<std::string, std::string> BundleFiles(const SynthBundle &b) {
  std::map<std::string, std::string> files;
  if (b.task == Task::TD) {
    files["enrollment.txt"] = formats::WriteEnrollmentTd(b.enrollment.td);
    files["train_labels.txt"] = formats::WriteTrainLabelsTd(b.train_td);
  } else {
    files["enrollment.txt"] = formats::WriteEnrollmentTi(b.enrollment.ti);
    files["train_labels.txt"] = formats::WriteTrainLabelsTi(b.train_ti);
  }
  files["trials.txt"] = formats::WriteTrials(b.trial_list);
  files["key.tsv"] = formats::WriteKey(b.key);
  std::vector<trials::UtteranceMeta> rows = b.enrollment_meta;
  rows.insert(rows.end(), b.test_meta.begin(), b.test_meta.end());
  files["meta.tsv"] = trials::WriteMeta(rows);
  return files;
}

// Writes the bundle plus manifest.json (seed, spec, PRNG name, per-file
// SHA-256) into dir.  When scores are given, an aligned answer.txt is
// included so a bundle is scoreable as-is.
inline void WriteBundle(const SynthBundle &bundle, const SynthSpec &spec,
                        const std::filesystem::path &dir,
                        const std::vector<double> *scores = nullptr) {
  auto files = BundleFiles(bundle);
  if (scores != nullptr) {
    if (scores->size() != bundle.key.size())
      throw std::invalid_argument("scores do not align with the bundle key");
    files["answer.txt"] = formats::WriteAnswer(*scores);
  }
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["schema_version"] = 1;
  manifest["prng"] = kPrngName;
  manifest["task"] = formats::TaskNumber(bundle.task);
  manifest["seed"] = spec.seed;
  manifest["spec"] = {
      {"n_speakers", spec.n_speakers},
      {"n_phrases", spec.n_phrases},
      {"utterances_per_speaker", spec.utterances_per_speaker},
      {"gender_split", spec.gender_split},
      {"language_mix", spec.language_mix},
      {"score_model",
       {{"mu_target", spec.score_model.mu_target},
        {"mu_nontarget", spec.score_model.mu_nontarget},
        {"sigma", spec.score_model.sigma}}},
  };
  nlohmann::json hashes = nlohmann::json::object();
  for (const auto &[name, text] : files) {
    detail::WriteFileAtomic(dir / name, text);
    hashes[name] = {{"sha256", detail::Sha256Hex(text)},
                    {"bytes", text.size()}};
  }
  manifest["files"] = std::move(hashes);
  detail::WriteFileAtomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace synthgen
}  // namespace evalkit

#endif  // EVALKIT_SYNTHGEN_HPP_
