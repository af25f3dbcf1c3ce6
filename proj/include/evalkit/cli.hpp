// evalkit/cli.hpp
//
// The single command-line entry point.  Subcommands: validate, score,
// keygen, synth, audit, det, serve.  Exit codes: 0 success, 1 domain
// error (bad submission, failing audit, infeasible spec, ...), 2 usage
// error.  Output files are written atomically (temp + rename) so an
// aborted run never leaves truncated artifacts.
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

#ifndef EVALKIT_CLI_HPP_
#define EVALKIT_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evalkit/audio_audit.hpp"
#include "evalkit/detail/fsio.hpp"
#include "evalkit/formats.hpp"
#include "evalkit/metrics.hpp"
#include "evalkit/scorer.hpp"
#include "evalkit/service.hpp"
#include "evalkit/service_http.hpp"
#include "evalkit/submission.hpp"
#include "evalkit/synthgen.hpp"
#include "evalkit/trial_semantics.hpp"

namespace evalkit {
namespace cli {

namespace impl {

// "a,b,c" -> three doubles; throws CLI::ValidationError on anything else.
inline std::array<double, 3> ParseTriple(const std::string &s, const char *flag) {
  std::array<double, 3> out{};
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    std::size_t comma = i < 2 ? s.find(',', pos) : s.size();
    if (comma == std::string::npos)
      throw CLI::ValidationError(flag, "expected three comma-separated numbers");
    try {
      out[i] = std::stod(s.substr(pos, comma - pos));
    } catch (const std::exception &) {
      throw CLI::ValidationError(flag, "expected three comma-separated numbers");
    }
    pos = comma + 1;
  }
  return out;
}

inline std::vector<scorer::SliceSpec> ParseSlices(const std::string &list) {
  std::vector<scorer::SliceSpec> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    std::size_t comma = list.find(',', pos);
    if (comma == std::string::npos) comma = list.size();
    std::string item = list.substr(pos, comma - pos);
    if (!item.empty()) {
      scorer::SliceSpec spec;
      std::size_t colon = item.find(':');
      spec.dimension = item.substr(0, colon);
      if (colon != std::string::npos) spec.label = item.substr(colon + 1);
      out.push_back(std::move(spec));
    }
    pos = comma + 1;
  }
  return out;
}

inline formats::Task TaskFlag(int task) { return formats::TaskFromNumber(task); }

inline void WriteJsonAtomic(const std::filesystem::path &path,
                            const nlohmann::json &j) {
  detail::WriteFileAtomic(path, j.dump(2) + "\n");
}

}  // namespace impl

// ---------------------------------------------------------------------------
// Subcommand bodies.  Each returns the process exit code.

struct ValidateArgs {
  int task = 1;
  std::string trials_path;
  std::string zip_path;
  bool json = false;
  std::string report_path;
};

inline int RunValidate(const ValidateArgs &args) {
  auto trials =
      formats::ParseTrials(detail::ReadTextFile(args.trials_path)).records;
  auto bytes = detail::ReadBinaryFile(args.zip_path);
  auto result = submission::ValidateSubmission(bytes, trials);
  nlohmann::json report = submission::ValidationReportJson(result);
  report["schema_version"] = 1;
  report["task"] = args.task;
  report["n_trials"] = trials.size();
  if (!args.report_path.empty())
    impl::WriteJsonAtomic(args.report_path, report);
  if (args.json) {
    std::cout << report.dump() << "\n";
  } else if (result.ok()) {
    std::cout << "OK\n";
    for (const auto &w : result.payload->warnings)
      std::cout << "warning: " << w << "\n";
  } else {
    for (const auto &e : result.errors) {
      std::cout << submission::ToString(e.code);
      if (!e.location.empty()) std::cout << " [" << e.location << "]";
      std::cout << ": " << e.detail << "\n";
    }
  }
  return result.ok() ? 0 : 1;
}

struct ScoreArgs {
  std::string key_path;
  std::string answer_path;
  std::string params;  // "c_miss,c_fa,p_target"
  std::string slices;
  std::string enrollment_path;  // optional; enables phrase slices (Task 1)
  std::string report_path;
  std::string det_path;
  bool json = false;
};

inline int RunScore(const ScoreArgs &args) {
  auto key = formats::ParseKey(detail::ReadTextFile(args.key_path));
  auto scores =
      formats::ParseAnswer(detail::ReadTextFile(args.answer_path), key.keys.size());
  metrics::DetCostParams params;
  if (!args.params.empty()) {
    auto t = impl::ParseTriple(args.params, "--params");
    params = {t[0], t[1], t[2]};
  }
  std::map<std::string, std::string> phrase_of_model;
  if (!args.enrollment_path.empty()) {
    auto enrollment = formats::ParseEnrollment(
        detail::ReadTextFile(args.enrollment_path), formats::Task::TD);
    phrase_of_model = trials::ModelPhrases(enrollment);
  }
  auto slices = impl::ParseSlices(args.slices);
  scorer::MetricsReport report = scorer::BreakdownReport(
      scores, key.keys, params, slices,
      phrase_of_model.empty() ? nullptr : &phrase_of_model);
  if (!args.det_path.empty()) {
    detail::WriteFileAtomic(args.det_path, metrics::ExportDet(report.det_points));
    report.det_csv_path = args.det_path;
  }
  nlohmann::json j = scorer::ReportToJson(report);
  if (!args.report_path.empty()) impl::WriteJsonAtomic(args.report_path, j);
  if (args.json)
    std::cout << j.dump() << "\n";
  else
    std::cout << scorer::RenderText(report);
  return 0;
}

struct KeygenArgs {
  int task = 1;
  std::string enrollment_path;
  std::string trials_path;
  std::string meta_path;
  std::string labels_path;  // optional; cross-checked for disjointness
  std::string out_path;
};

inline int RunKeygen(const KeygenArgs &args) {
  formats::Task task = impl::TaskFlag(args.task);
  auto enrollment =
      formats::ParseEnrollment(detail::ReadTextFile(args.enrollment_path), task);
  auto trial_list =
      formats::ParseTrials(detail::ReadTextFile(args.trials_path)).records;
  auto meta = trials::ParseMeta(detail::ReadTextFile(args.meta_path));
  if (!args.labels_path.empty()) {
    // Train files must stay disjoint from the evaluation metadata.
    std::set<std::string> train_ids;
    if (task == formats::Task::TD)
      for (const auto &l :
           formats::ParseTrainLabelsTd(detail::ReadTextFile(args.labels_path))
               .records)
        train_ids.insert(l.file_id);
    else
      for (const auto &l :
           formats::ParseTrainLabelsTi(detail::ReadTextFile(args.labels_path))
               .records)
        train_ids.insert(l.file_id);
    for (const auto &row : meta.rows)
      if (train_ids.count(row.utterance_id))
        std::cerr << "warning: utterance '" << row.utterance_id
                  << "' appears in both train labels and evaluation metadata\n";
  }
  auto keys = trials::BuildKey(trial_list, enrollment, meta, task);
  detail::WriteFileAtomic(args.out_path, formats::WriteKey(keys));
  std::size_t targets = 0;
  for (const auto &k : keys) targets += k.is_target ? 1 : 0;
  std::cout << "wrote " << keys.size() << " key rows (" << targets
            << " target) to " << args.out_path << "\n";
  return 0;
}

struct SynthArgs {
  int task = 1;
  std::uint64_t seed = 0;
  std::size_t speakers = 2;
  std::size_t phrases = 2;
  std::size_t utts = 3;
  double gender_split = 1.0;
  double language_mix = 0.25;
  double mu_target = 1.0;
  double mu_nontarget = -1.0;
  double sigma = 1.0;
  std::string out_dir;
};

inline int RunSynth(const SynthArgs &args) {
  synthgen::SynthSpec spec;
  spec.seed = args.seed;
  spec.n_speakers = args.speakers;
  spec.n_phrases = args.phrases;
  spec.utterances_per_speaker = args.utts;
  spec.gender_split = args.gender_split;
  spec.language_mix = args.language_mix;
  spec.score_model = {args.mu_target, args.mu_nontarget, args.sigma};
  formats::Task task = impl::TaskFlag(args.task);
  auto bundle = synthgen::SynthCorpus(spec, task);
  auto scores = synthgen::SynthScores(bundle.key, spec.score_model, spec.seed);
  synthgen::WriteBundle(bundle, spec, args.out_dir, &scores);
  std::map<std::string, std::size_t> by_type;
  for (const auto &k : bundle.key) by_type[formats::ToString(k.trial_type)]++;
  std::cout << "bundle written to " << args.out_dir << ": "
            << bundle.trial_list.size() << " trials";
  for (const auto &[type, n] : by_type) std::cout << "  " << type << "=" << n;
  std::cout << "\n";
  return 0;
}

struct AuditArgs {
  int task = 1;
  std::string enrollment_path;
  std::string wav_dir;
  std::string vad;  // "frame_ms,shift_ms,threshold_db"
  double slack = 0.0;
  std::string report_path;
  bool json = false;
};

inline int RunAudit(const AuditArgs &args) {
  formats::Task task = impl::TaskFlag(args.task);
  auto enrollment =
      formats::ParseEnrollment(detail::ReadTextFile(args.enrollment_path), task);
  audio::AuditOptions options;
  options.slack_seconds = args.slack;
  if (!args.vad.empty()) {
    auto t = impl::ParseTriple(args.vad, "--vad");
    options.vad = {t[0], t[1], t[2]};
  }
  auto report = audio::AuditCorpus(enrollment, args.wav_dir, task, options);
  nlohmann::json j = audio::AuditReportJson(report);
  if (!args.report_path.empty()) impl::WriteJsonAtomic(args.report_path, j);
  if (args.json)
    std::cout << j.dump() << "\n";
  else
    std::cout << audio::RenderViolations(report);
  // A corpus that breaks the protocol bounds fails its audit.
  return report.violations.empty() && report.missing.empty() ? 0 : 1;
}

struct DetArgs {
  std::string key_path;
  std::string answer_path;
  std::string out_path;
};

inline int RunDet(const DetArgs &args) {
  auto key = formats::ParseKey(detail::ReadTextFile(args.key_path));
  auto scores =
      formats::ParseAnswer(detail::ReadTextFile(args.answer_path), key.keys.size());
  metrics::TargetFlags flags;
  flags.reserve(key.keys.size());
  for (const auto &k : key.keys) flags.push_back(k.is_target ? 1 : 0);
  auto sweep = metrics::DetSweep(scores, flags);
  detail::WriteFileAtomic(args.out_path, metrics::ExportDet(sweep));
  std::cout << "wrote " << sweep.size() << " operating points to "
            << args.out_path << "\n";
  return 0;
}

struct ServeArgs {
  std::string config_path;
};

inline int RunServe(const ServeArgs &args) {
  service::ServiceConfig config = service::LoadConfigFile(args.config_path);
  service::ApplyEnvOverrides(&config);
  service::ServiceCore core(config);
  service::HttpService http(core);
  std::cout << "listening on " << config.bind_host << ":" << config.bind_port
            << "\n";
  if (!http.Listen(config.bind_host, config.bind_port)) {
    std::cerr << "error: cannot bind " << config.bind_host << ":"
              << config.bind_port << "\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Argument wiring

inline int Run(int argc, const char *const *argv) {
  CLI::App app{"Speaker-verification challenge evaluation toolkit"};
  app.require_subcommand(1);
  int exit_code = 0;

  ValidateArgs validate_args;
  auto *validate = app.add_subcommand(
      "validate", "Check a submission archive against the rules");
  validate->add_option("--task", validate_args.task, "Task number")
      ->required()
      ->check(CLI::Range(1, 2));
  validate->add_option("--trials", validate_args.trials_path, "Trial list file")
      ->required()
      ->check(CLI::ExistingFile);
  validate->add_option("zip", validate_args.zip_path, "Submission archive")
      ->required()
      ->check(CLI::ExistingFile);
  validate->add_flag("--json", validate_args.json, "Machine-readable output");
  validate->add_option("--report", validate_args.report_path,
                       "Write the validation report here");
  validate->callback([&] { exit_code = RunValidate(validate_args); });

  ScoreArgs score_args;
  auto *score =
      app.add_subcommand("score", "Score an answer file against a trial key");
  score->add_option("--key", score_args.key_path, "Trial key file")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--answer", score_args.answer_path, "Answer file")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--params", score_args.params,
                    "Cost parameters c_miss,c_fa,p_target (default 10,1,0.01)");
  score->add_option("--slices", score_args.slices,
                    "Breakdown dimensions, e.g. overall,partition,trial-type");
  score->add_option("--enrollment", score_args.enrollment_path,
                    "Task 1 enrollment file; enables phrase slices")
      ->check(CLI::ExistingFile);
  score->add_option("--report", score_args.report_path, "Metrics report path");
  score->add_option("--det", score_args.det_path, "DET sweep CSV path");
  score->add_flag("--json", score_args.json, "Machine-readable output");
  score->callback([&] { exit_code = RunScore(score_args); });

  KeygenArgs keygen_args;
  auto *keygen = app.add_subcommand(
      "keygen", "Build the trial key from enrollment, trials and metadata");
  keygen->add_option("--task", keygen_args.task, "Task number")
      ->required()
      ->check(CLI::Range(1, 2));
  keygen->add_option("--enrollment", keygen_args.enrollment_path,
                     "Enrollment file")
      ->required()
      ->check(CLI::ExistingFile);
  keygen->add_option("--trials", keygen_args.trials_path, "Trial list file")
      ->required()
      ->check(CLI::ExistingFile);
  keygen->add_option("--meta", keygen_args.meta_path, "Utterance metadata sidecar")
      ->required()
      ->check(CLI::ExistingFile);
  keygen->add_option("--labels", keygen_args.labels_path,
                     "Train labels; checked for overlap with evaluation data")
      ->check(CLI::ExistingFile);
  keygen->add_option("--out", keygen_args.out_path, "Key output path")->required();
  keygen->callback([&] { exit_code = RunKeygen(keygen_args); });

  SynthArgs synth_args;
  auto *synth =
      app.add_subcommand("synth", "Generate a deterministic synthetic bundle");
  synth->add_option("--task", synth_args.task, "Task number")
      ->required()
      ->check(CLI::Range(1, 2));
  synth->add_option("--seed", synth_args.seed, "Generator seed")->required();
  synth->add_option("--speakers", synth_args.speakers, "Speaker count")
      ->required();
  synth->add_option("--phrases", synth_args.phrases, "Phrase count (Task 1)");
  synth->add_option("--utts", synth_args.utts, "Utterances per speaker");
  synth->add_option("--gender-split", synth_args.gender_split,
                    "Fraction of speakers assigned gender m");
  synth->add_option("--language-mix", synth_args.language_mix,
                    "Fraction of English test utterances (Task 2)");
  synth->add_option("--mu-target", synth_args.mu_target, "Target score mean");
  synth->add_option("--mu-nontarget", synth_args.mu_nontarget,
                    "Nontarget score mean");
  synth->add_option("--sigma", synth_args.sigma, "Score standard deviation");
  synth->add_option("--out", synth_args.out_dir, "Bundle directory")->required();
  synth->callback([&] { exit_code = RunSynth(synth_args); });

  AuditArgs audit_args;
  auto *audit =
      app.add_subcommand("audit", "Audit a wav tree against duration rules");
  audit->add_option("--task", audit_args.task, "Task number")
      ->required()
      ->check(CLI::Range(1, 2));
  audit->add_option("--enrollment", audit_args.enrollment_path, "Enrollment file")
      ->required()
      ->check(CLI::ExistingFile);
  audit->add_option("--wav-dir", audit_args.wav_dir, "Directory of wav files")
      ->required()
      ->check(CLI::ExistingDirectory);
  audit->add_option("--vad", audit_args.vad,
                    "VAD parameters frame_ms,shift_ms,threshold_db "
                    "(default 25,10,30)");
  audit->add_option("--slack", audit_args.slack,
                    "Seconds of slack on every range bound");
  audit->add_option("--report", audit_args.report_path, "Audit report path");
  audit->add_flag("--json", audit_args.json, "Machine-readable output");
  audit->callback([&] { exit_code = RunAudit(audit_args); });

  DetArgs det_args;
  auto *det = app.add_subcommand("det", "Export the DET sweep as CSV");
  det->add_option("--key", det_args.key_path, "Trial key file")
      ->required()
      ->check(CLI::ExistingFile);
  det->add_option("--answer", det_args.answer_path, "Answer file")
      ->required()
      ->check(CLI::ExistingFile);
  det->add_option("--out", det_args.out_path, "CSV output path")->required();
  det->callback([&] { exit_code = RunDet(det_args); });

  ServeArgs serve_args;
  auto *serve = app.add_subcommand("serve", "Run the leaderboard service");
  serve->add_option("--config", serve_args.config_path, "Service config file")
      ->required()
      ->check(CLI::ExistingFile);
  serve->callback([&] { exit_code = RunServe(serve_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // 0 covers --help and --version
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}

}  // namespace cli
}  // namespace evalkit

#endif  // EVALKIT_CLI_HPP_
