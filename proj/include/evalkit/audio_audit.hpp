// evalkit/audio_audit.hpp
//
// RIFF/WAVE PCM reading, an energy-based voice activity detector, and the
// corpus duration audit.  The protocol constrains net enrollment speech
// per model (4 to 180 seconds after VAD, Task 2), test utterance duration
// (1 to 8 seconds) and the three-utterance enrollment rule of Task 1; the
// audit verifies a wav tree against those bounds.
//
// The VAD is the simplest member of the energy family: 25 ms frames every
// 10 ms, a frame is speech when its energy is within threshold_db of the
// loudest frame in the same file.  The reference point is per-file, so
// rescaling a file cannot change its labeling.
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

#ifndef EVALKIT_AUDIO_AUDIT_HPP_
#define EVALKIT_AUDIO_AUDIT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "evalkit/detail/fsio.hpp"
#include "evalkit/formats.hpp"

namespace evalkit {
namespace audio {

using formats::Task;

// ---------------------------------------------------------------------------
// WAV reading

enum class WavErrorCode { NotRiff, UnsupportedCodec, TruncatedData };

inline const char *ToString(WavErrorCode c) {
  switch (c) {
    case WavErrorCode::NotRiff: return "NotRiff";
    case WavErrorCode::UnsupportedCodec: return "UnsupportedCodec";
    case WavErrorCode::TruncatedData: return "TruncatedData";
  }
  return "UnknownWavError";
}

class WavError : public std::runtime_error {
 public:
  WavError(WavErrorCode code, const std::string &msg)
      : std::runtime_error(std::string(ToString(code)) + ": " + msg),
        code_(code) {}
  WavErrorCode code() const { return code_; }

 private:
  WavErrorCode code_;
};

struct WavInfo {
  std::uint32_t sample_rate = 0;
  std::uint16_t channels = 0;
  std::uint16_t bits_per_sample = 0;
  std::uint64_t n_samples = 0;  // per channel
  double duration = 0.0;        // n_samples / sample_rate
};

struct WavData {
  WavInfo info;
  std::vector<double> samples;  // mono, normalized to [-1, 1]
  std::vector<std::string> warnings;
};

namespace impl {

inline std::uint16_t ReadU16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

inline std::uint32_t ReadU32(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) |
         (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

inline double DecodeSample(std::span<const std::uint8_t> b, std::size_t off,
                           std::uint16_t bits) {
  switch (bits) {
    case 8:  // unsigned, midpoint 128
      return (static_cast<int>(b[off]) - 128) / 128.0;
    case 16: {
      auto v = static_cast<std::int16_t>(ReadU16(b, off));
      return v / 32768.0;
    }
    case 24: {
      std::int32_t v = b[off] | (b[off + 1] << 8) | (b[off + 2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    case 32: {
      auto v = static_cast<std::int32_t>(ReadU32(b, off));
      return v / 2147483648.0;
    }
    default:
      throw WavError(WavErrorCode::UnsupportedCodec,
                     std::to_string(bits) + "-bit PCM not supported");
  }
}

}  // namespace impl

inline WavData ReadWav(std::span<const std::uint8_t> bytes) {
  using impl::ReadU16;
  using impl::ReadU32;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw WavError(WavErrorCode::NotRiff, "missing RIFF/WAVE signature");

  bool have_fmt = false;
  std::uint16_t audio_format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t sample_rate = 0;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    std::uint32_t chunk_size = ReadU32(bytes, pos + 4);
    std::string_view id(reinterpret_cast<const char *>(bytes.data() + pos), 4);
    std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (chunk_size < 16 || body + 16 > bytes.size())
        throw WavError(WavErrorCode::TruncatedData, "fmt chunk truncated");
      audio_format = ReadU16(bytes, body);
      channels = ReadU16(bytes, body + 2);
      sample_rate = ReadU32(bytes, body + 4);
      block_align = ReadU16(bytes, body + 12);
      bits = ReadU16(bytes, body + 14);
      have_fmt = true;
    } else if (id == "data") {
      if (body + chunk_size > bytes.size())
        throw WavError(WavErrorCode::TruncatedData,
                       "data chunk declares " + std::to_string(chunk_size) +
                           " bytes but the file ends early");
      data = bytes.subspan(body, chunk_size);
      have_data = true;
    }
    // Chunks are word-aligned: odd sizes carry one pad byte.
    pos = body + chunk_size + (chunk_size & 1);
  }
  if (!have_fmt)
    throw WavError(WavErrorCode::NotRiff, "no fmt chunk");
  if (!have_data)
    throw WavError(WavErrorCode::TruncatedData, "no data chunk");
  if (audio_format != 1)  // WAVE_FORMAT_PCM
    throw WavError(WavErrorCode::UnsupportedCodec,
                   "compressed codec tag " + std::to_string(audio_format));
  if (channels == 0 || sample_rate == 0)
    throw WavError(WavErrorCode::NotRiff, "fmt chunk has zero channels or rate");
  if (bits != 8 && bits != 16 && bits != 24 && bits != 32)
    throw WavError(WavErrorCode::UnsupportedCodec,
                   std::to_string(bits) + "-bit PCM not supported");
  std::size_t bytes_per_sample = bits / 8;
  if (block_align != bytes_per_sample * channels)
    throw WavError(WavErrorCode::NotRiff, "block alignment inconsistent");

  WavData out;
  out.info.sample_rate = sample_rate;
  out.info.channels = channels;
  out.info.bits_per_sample = bits;
  std::uint64_t frames = data.size() / (bytes_per_sample * channels);
  out.info.n_samples = frames;
  out.info.duration = static_cast<double>(frames) / sample_rate;
  if (channels != 1)
    out.warnings.push_back("file has " + std::to_string(channels) +
                           " channels; averaged to mono");
  out.samples.reserve(frames);
  for (std::uint64_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c)
      acc += impl::DecodeSample(data, (f * channels + c) * bytes_per_sample, bits);
    out.samples.push_back(acc / channels);
  }
  return out;
}

// Minimal mono 16-bit writer for constructing audit fixtures.
inline void WriteWavPcm16(const std::filesystem::path &path,
                          std::span<const double> samples,
                          std::uint32_t sample_rate) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(44 + samples.size() * 2);
  auto put_u16 = [&](std::uint16_t v) {
    bytes.push_back(v & 0xFF);
    bytes.push_back(v >> 8);
  };
  auto put_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back((v >> (8 * i)) & 0xFF);
  };
  auto put_tag = [&](const char *t) {
    bytes.insert(bytes.end(), t, t + 4);
  };
  std::uint32_t data_size = static_cast<std::uint32_t>(samples.size() * 2);
  put_tag("RIFF");
  put_u32(36 + data_size);
  put_tag("WAVE");
  put_tag("fmt ");
  put_u32(16);
  put_u16(1);  // PCM
  put_u16(1);  // mono
  put_u32(sample_rate);
  put_u32(sample_rate * 2);  // byte rate
  put_u16(2);                // block align
  put_u16(16);
  put_tag("data");
  put_u32(data_size);
  for (double s : samples) {
    double clamped = std::clamp(s, -1.0, 1.0);
    auto v = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
    put_u16(static_cast<std::uint16_t>(v));
  }
  detail::WriteFileAtomic(path, bytes);
}

// ---------------------------------------------------------------------------
// Energy VAD

struct VadParams {
  double frame_ms = 25.0;
  double shift_ms = 10.0;
  double threshold_db = 30.0;  // below the per-file maximum frame energy
};

// Net speech covered by the labeled frames: with c speech frames this is
// (c - 1) * shift + frame_len, i.e. one shift per frame plus one frame
// length for the final frame, capped by the file duration so overlapping
// frames never count the tail twice.
inline double NetSpeechDuration(std::span<const double> samples,
                                double sample_rate, const VadParams &params = {}) {
  if (samples.empty() || sample_rate <= 0.0) return 0.0;
  auto flen = static_cast<std::size_t>(params.frame_ms * 1e-3 * sample_rate);
  auto shift = static_cast<std::size_t>(params.shift_ms * 1e-3 * sample_rate);
  if (flen == 0 || shift == 0) return 0.0;
  if (flen > samples.size()) flen = samples.size();

  std::vector<double> energies;
  for (std::size_t start = 0; start + flen <= samples.size(); start += shift) {
    double e = 0.0;
    for (std::size_t i = start; i < start + flen; ++i)
      e += samples[i] * samples[i];
    energies.push_back(e);
  }
  if (energies.empty()) return 0.0;
  double max_energy = *std::max_element(energies.begin(), energies.end());
  if (max_energy <= 0.0) return 0.0;  // digital silence
  // e >= e_max * 10^(-t/10) is the dB comparison without taking logs of
  // possibly zero energies.
  double floor = max_energy * std::pow(10.0, -params.threshold_db / 10.0);
  std::size_t speech = 0;
  for (double e : energies)
    if (e >= floor) ++speech;
  if (speech == 0) return 0.0;
  double duration = static_cast<double>(samples.size()) / sample_rate;
  double net = (static_cast<double>(speech - 1) * shift + flen) / sample_rate;
  return std::min(net, duration);
}

// ---------------------------------------------------------------------------
// Corpus audit

struct FileAudit {
  std::string file_id;
  double duration = 0.0;
  double net_speech = 0.0;
  bool is_enrollment = false;
};

struct ModelAudit {
  std::string model_id;
  std::size_t n_utterances = 0;  // utterances with a readable wav
  double net_enrollment = 0.0;
  bool complete = true;  // false when any utterance file is missing
};

struct AuditViolation {
  std::string subject;  // model or file id
  std::string rule;
  double value = 0.0;
  std::string detail;
};

struct AuditReport {
  std::vector<FileAudit> files;    // sorted by file id
  std::vector<ModelAudit> models;  // sorted by model id
  std::vector<AuditViolation> violations;
  std::vector<std::string> missing;  // MissingFile entries, not fatal
  std::vector<std::string> warnings;
};

struct AuditOptions {
  VadParams vad;
  double slack_seconds = 0.0;  // widens every range check symmetrically
};

// Protocol bounds under audit.
inline constexpr double kMinNetEnrollmentSeconds = 4.0;
inline constexpr double kMaxNetEnrollmentSeconds = 180.0;
inline constexpr double kMinTestSeconds = 1.0;
inline constexpr double kMaxTestSeconds = 8.0;

// Audits every *.wav under wav_dir.  Files referenced by the enrollment
// records are enrollment utterances and accumulate per-model net speech;
// the rest are treated as test utterances.  Task 2 checks model net
// enrollment against [4, 180] s and test durations against [1, 8] s;
// Task 1 checks the three-utterance enrollment rule.
inline AuditReport AuditCorpus(const formats::EnrollmentFile &enrollment,
                               const std::filesystem::path &wav_dir, Task task,
                               const AuditOptions &options = {}) {
  AuditReport report;
  std::set<std::string> enrollment_ids;
  if (enrollment.task == Task::TD)
    for (const auto &r : enrollment.td)
      enrollment_ids.insert(r.enrollment_ids.begin(), r.enrollment_ids.end());
  else
    for (const auto &r : enrollment.ti)
      enrollment_ids.insert(r.enrollment_ids.begin(), r.enrollment_ids.end());

  // Per-file pass, sorted for order-stable reports.
  std::map<std::string, FileAudit> audited;
  std::set<std::string> present;
  if (std::filesystem::exists(wav_dir))
    for (const auto &entry : std::filesystem::directory_iterator(wav_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".wav")
        present.insert(entry.path().stem().string());
  for (const auto &id : present) {
    WavData wav;
    try {
      auto bytes = detail::ReadBinaryFile(wav_dir / (id + ".wav"));
      wav = ReadWav(bytes);
    } catch (const std::exception &e) {
      report.warnings.push_back(id + ": unreadable (" + e.what() + ")");
      continue;
    }
    for (const auto &w : wav.warnings) report.warnings.push_back(id + ": " + w);
    FileAudit fa;
    fa.file_id = id;
    fa.duration = wav.info.duration;
    fa.net_speech = NetSpeechDuration(wav.samples, wav.info.sample_rate,
                                      options.vad);
    fa.is_enrollment = enrollment_ids.count(id) > 0;
    audited.emplace(id, std::move(fa));
  }

  const double slack = options.slack_seconds;
  auto audit_model = [&](const std::string &model_id,
                         std::span<const std::string> utts) {
    ModelAudit m;
    m.model_id = model_id;
    for (const auto &utt : utts) {
      auto it = audited.find(utt);
      if (it == audited.end()) {
        report.missing.push_back("model " + model_id + ": utterance '" + utt +
                                 "' has no readable wav file");
        m.complete = false;
        continue;
      }
      ++m.n_utterances;
      m.net_enrollment += it->second.net_speech;
    }
    if (task == Task::TD) {
      if (m.n_utterances != 3)
        report.violations.push_back(
            {model_id, "enrollment-utterance-count",
             static_cast<double>(m.n_utterances),
             "text-dependent models enroll exactly three utterances"});
    } else if (m.complete) {
      if (m.net_enrollment < kMinNetEnrollmentSeconds - slack ||
          m.net_enrollment > kMaxNetEnrollmentSeconds + slack)
        report.violations.push_back(
            {model_id, "net-enrollment-out-of-range", m.net_enrollment,
             "net enrollment speech must lie in [4, 180] s after VAD"});
    }
    report.models.push_back(std::move(m));
  };
  if (enrollment.task == Task::TD) {
    for (const auto &r : enrollment.td) {
      std::vector<std::string> utts(r.enrollment_ids.begin(),
                                    r.enrollment_ids.end());
      audit_model(r.model_id, utts);
    }
  } else {
    for (const auto &r : enrollment.ti) audit_model(r.model_id, r.enrollment_ids);
  }

  for (auto &[id, fa] : audited) {
    if (task == Task::TI && !fa.is_enrollment) {
      if (fa.duration < kMinTestSeconds - slack ||
          fa.duration > kMaxTestSeconds + slack)
        report.violations.push_back(
            {id, "test-duration-out-of-range", fa.duration,
             "test utterances last between 1 and 8 seconds"});
    }
    report.files.push_back(std::move(fa));
  }
  return report;
}

inline nlohmann::json AuditReportJson(const AuditReport &report) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["files"] = nlohmann::json::array();
  for (const auto &f : report.files)
    j["files"].push_back({{"file_id", f.file_id},
                          {"duration", f.duration},
                          {"net_speech", f.net_speech},
                          {"is_enrollment", f.is_enrollment}});
  j["models"] = nlohmann::json::array();
  for (const auto &m : report.models)
    j["models"].push_back({{"model_id", m.model_id},
                           {"n_utterances", m.n_utterances},
                           {"net_enrollment", m.net_enrollment},
                           {"complete", m.complete}});
  j["violations"] = nlohmann::json::array();
  for (const auto &v : report.violations)
    j["violations"].push_back({{"subject", v.subject},
                               {"rule", v.rule},
                               {"value", v.value},
                               {"detail", v.detail}});
  j["missing"] = report.missing;
  j["warnings"] = report.warnings;
  return j;
}

// Human-readable violations table.
inline std::string RenderViolations(const AuditReport &report) {
  if (report.violations.empty() && report.missing.empty())
    return "audit clean: no violations\n";
  std::string out;
  char buf[256];
  for (const auto &v : report.violations) {
    std::snprintf(buf, sizeof(buf), "%-24s %-32s %10.3f  %s\n",
                  v.subject.c_str(), v.rule.c_str(), v.value, v.detail.c_str());
    out += buf;
  }
  for (const auto &m : report.missing) out += "missing: " + m + "\n";
  return out;
}

}  // namespace audio
}  // namespace evalkit

#endif  // EVALKIT_AUDIO_AUDIT_HPP_
