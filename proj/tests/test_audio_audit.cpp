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

#include "evalkit/audio_audit.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "evalkit/detail/fsio.hpp"
#include "support/tempdir.hpp"

using namespace evalkit;
using audio::VadParams;
using audio::WavError;
using audio::WavErrorCode;
using Catch::Matchers::WithinAbs;

namespace {

constexpr std::uint32_t kRate = 16000;

// Rectangular speech/silence fixture: VAD frame decisions are unambiguous
// because every sample inside a segment has the same magnitude.
std::vector<double> Rect(double seconds_on, double seconds_off,
                         double amplitude = 0.5, double tail_on = 0.0) {
  std::vector<double> s;
  auto n = [&](double sec) { return static_cast<std::size_t>(sec * kRate); };
  s.insert(s.end(), n(seconds_on), amplitude);
  s.insert(s.end(), n(seconds_off), 0.0);
  s.insert(s.end(), n(tail_on), amplitude);
  return s;
}

// Hand-rolled wav container so tests can forge malformed headers.
struct WavForge {
  std::uint16_t format = 1;
  std::uint16_t channels = 1;
  std::uint32_t rate = kRate;
  std::uint16_t bits = 16;
  std::uint16_t block_align_override = 0;  // 0 = consistent
  std::vector<std::uint8_t> payload;
  std::uint32_t declared_data_size_override = 0xFFFFFFFF;  // sentinel

  std::vector<std::uint8_t> Build() const {
    std::vector<std::uint8_t> b;
    auto u16 = [&](std::uint16_t v) {
      b.push_back(v & 0xFF);
      b.push_back(v >> 8);
    };
    auto u32 = [&](std::uint32_t v) {
      for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xFF);
    };
    auto tag = [&](const char *t) { b.insert(b.end(), t, t + 4); };
    std::uint32_t data_size = declared_data_size_override != 0xFFFFFFFF
                                  ? declared_data_size_override
                                  : static_cast<std::uint32_t>(payload.size());
    std::uint16_t align = block_align_override
                              ? block_align_override
                              : static_cast<std::uint16_t>(bits / 8 * channels);
    tag("RIFF");
    u32(36 + static_cast<std::uint32_t>(payload.size()));
    tag("WAVE");
    tag("fmt ");
    u32(16);
    u16(format);
    u16(channels);
    u32(rate);
    u32(rate * align);
    u16(align);
    u16(bits);
    tag("data");
    u32(data_size);
    b.insert(b.end(), payload.begin(), payload.end());
    return b;
  }
};

formats::EnrollmentRecordTI TiModel(std::string id,
                                    std::vector<std::string> utts) {
  formats::EnrollmentRecordTI r;
  r.model_id = std::move(id);
  r.enrollment_ids = std::move(utts);
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// WAV container

TEST_CASE("written wav files read back with matching header and samples") {
  testsupport::ScopedTempDir tmp;
  std::vector<double> samples;
  for (std::size_t i = 0; i < kRate; ++i)
    samples.push_back(0.25 * std::sin(2.0 * 3.14159265358979 * 440.0 * i / kRate));
  auto path = tmp.path() / "tone.wav";
  audio::WriteWavPcm16(path, samples, kRate);

  auto wav = audio::ReadWav(detail::ReadBinaryFile(path));
  CHECK(wav.info.sample_rate == kRate);
  CHECK(wav.info.channels == 1);
  CHECK(wav.info.bits_per_sample == 16);
  CHECK(wav.info.n_samples == samples.size());
  CHECK_THAT(wav.info.duration, WithinAbs(1.0, 1e-12));
  REQUIRE(wav.samples.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); i += 997)
    CHECK_THAT(wav.samples[i], WithinAbs(samples[i], 1.0 / 32767.0));
  CHECK(wav.warnings.empty());
}

TEST_CASE("every PCM width decodes and stereo averages to mono") {
  SECTION("8-bit unsigned") {
    WavForge f;
    f.bits = 8;
    f.payload = {128, 255, 0, 128};  // 0, max, min, 0
    auto wav = audio::ReadWav(f.Build());
    REQUIRE(wav.samples.size() == 4);
    CHECK_THAT(wav.samples[0], WithinAbs(0.0, 1e-12));
    CHECK(wav.samples[1] > 0.98);
    CHECK(wav.samples[2] == -1.0);
  }
  SECTION("24-bit signed") {
    WavForge f;
    f.bits = 24;
    f.payload = {0x00, 0x00, 0x40,   // +0x400000 -> +0.5
                 0x00, 0x00, 0xC0};  // -0x400000 -> -0.5
    auto wav = audio::ReadWav(f.Build());
    REQUIRE(wav.samples.size() == 2);
    CHECK_THAT(wav.samples[0], WithinAbs(0.5, 1e-9));
    CHECK_THAT(wav.samples[1], WithinAbs(-0.5, 1e-9));
  }
  SECTION("32-bit signed") {
    WavForge f;
    f.bits = 32;
    f.payload = {0x00, 0x00, 0x00, 0x40};  // +2^30 -> +0.5
    auto wav = audio::ReadWav(f.Build());
    REQUIRE(wav.samples.size() == 1);
    CHECK_THAT(wav.samples[0], WithinAbs(0.5, 1e-9));
  }
  SECTION("stereo averaged with a warning") {
    WavForge f;
    f.channels = 2;
    // Left +0.5, right -0.25 -> mean +0.125 (16-bit LE frames).
    f.payload = {0x00, 0x40, 0x00, 0xE0};
    auto wav = audio::ReadWav(f.Build());
    CHECK(wav.info.channels == 2);
    REQUIRE(wav.samples.size() == 1);
    CHECK_THAT(wav.samples[0], WithinAbs(0.125, 1e-4));
    REQUIRE(wav.warnings.size() == 1);
    CHECK(wav.warnings[0].find("averaged to mono") != std::string::npos);
  }
}

TEST_CASE("malformed wav bytes raise the documented error codes") {
  auto code_of = [](const std::vector<std::uint8_t> &bytes) {
    try {
      audio::ReadWav(bytes);
    } catch (const WavError &e) {
      return e.code();
    }
    FAIL("expected a WavError");
    return WavErrorCode::NotRiff;
  };

  SECTION("not RIFF at all") {
    std::vector<std::uint8_t> garbage(64, 0x55);
    CHECK(code_of(garbage) == WavErrorCode::NotRiff);
    CHECK(code_of({}) == WavErrorCode::NotRiff);
    auto riff_only = WavForge{}.Build();
    riff_only[8] = 'X';  // RIFF but not WAVE
    CHECK(code_of(riff_only) == WavErrorCode::NotRiff);
  }
  SECTION("compressed codec tag") {
    WavForge f;
    f.format = 6;  // a-law
    f.payload = {0, 0};
    CHECK(code_of(f.Build()) == WavErrorCode::UnsupportedCodec);
  }
  SECTION("unsupported bit depth") {
    WavForge f;
    f.bits = 12;
    f.block_align_override = 2;
    CHECK(code_of(f.Build()) == WavErrorCode::UnsupportedCodec);
  }
  SECTION("data chunk declares more bytes than the file holds") {
    WavForge f;
    f.payload = {0, 0, 0, 0};
    f.declared_data_size_override = 4096;
    CHECK(code_of(f.Build()) == WavErrorCode::TruncatedData);
  }
  SECTION("no data chunk") {
    auto bytes = WavForge{}.Build();
    bytes.resize(bytes.size() - 8);  // drop the empty data header
    CHECK(code_of(bytes) == WavErrorCode::TruncatedData);
  }
  SECTION("zero channels") {
    WavForge f;
    f.channels = 0;
    f.block_align_override = 2;
    CHECK(code_of(f.Build()) == WavErrorCode::NotRiff);
  }
  SECTION("inconsistent block alignment") {
    WavForge f;
    f.block_align_override = 5;
    f.payload = {0, 0};
    CHECK(code_of(f.Build()) == WavErrorCode::NotRiff);
  }
}

// ---------------------------------------------------------------------------
// Voice activity detection

TEST_CASE("digital silence and empty input yield zero net speech") {
  std::vector<double> silence(4 * kRate, 0.0);
  CHECK(audio::NetSpeechDuration(silence, kRate) == 0.0);
  CHECK(audio::NetSpeechDuration({}, kRate) == 0.0);
  std::vector<double> tone(kRate, 0.5);
  CHECK(audio::NetSpeechDuration(tone, 0.0) == 0.0);
}

TEST_CASE("net speech counts only the voiced segments") {
  // 1 s speech + 3 s silence + 1 s speech.  Frames are 400 samples every
  // 160; each pulse covers exactly 100 frames, so the measured net is
  // (200 - 1) * 160 + 400 = 32240 samples = 2.015 s.
  auto samples = Rect(1.0, 3.0, 0.5, 1.0);
  double net = audio::NetSpeechDuration(samples, kRate);
  CHECK_THAT(net, WithinAbs(2.015, 1e-12));
  CHECK_THAT(net, WithinAbs(2.0, 0.025));  // within one frame of construction
}

TEST_CASE("the threshold is relative so rescaling cannot change the label") {
  auto samples = Rect(1.0, 3.0, 0.5, 1.0);
  auto scaled = samples;
  for (auto &s : scaled) s *= 0.01;
  CHECK(audio::NetSpeechDuration(samples, kRate) ==
        audio::NetSpeechDuration(scaled, kRate));
}

TEST_CASE("the threshold depth decides what counts as speech") {
  // Loud 0.5 s at amplitude 1.0 then quiet 0.5 s at 0.1: the quiet part
  // sits 20 dB down, inside a 30 dB threshold but outside a 10 dB one.
  std::vector<double> s(kRate / 2, 1.0);
  s.insert(s.end(), kRate / 2, 0.1);
  double wide = audio::NetSpeechDuration(s, kRate, {25.0, 10.0, 30.0});
  double narrow = audio::NetSpeechDuration(s, kRate, {25.0, 10.0, 10.0});
  CHECK_THAT(wide, WithinAbs(0.995, 1e-9));   // everything voiced
  CHECK(narrow < 0.6);                        // quiet half dropped
  CHECK(narrow > 0.4);
}

TEST_CASE("net speech never exceeds the file duration") {
  // Shorter than one frame: the lone clamped frame covers the whole file.
  std::vector<double> tiny(200, 0.5);
  CHECK_THAT(audio::NetSpeechDuration(tiny, kRate),
             WithinAbs(200.0 / kRate, 1e-12));
  // Degenerate parameters.
  std::vector<double> tone(kRate, 0.5);
  CHECK(audio::NetSpeechDuration(tone, kRate, {0.0, 10.0, 30.0}) == 0.0);
  CHECK(audio::NetSpeechDuration(tone, kRate, {25.0, 0.0, 30.0}) == 0.0);
  auto all = Rect(2.0, 0.0);
  double net = audio::NetSpeechDuration(all, kRate);
  CHECK(net <= 2.0);
  CHECK_THAT(net, WithinAbs(1.995, 1e-12));
}

// ---------------------------------------------------------------------------
// Corpus audit

namespace {

// Writes a wav of `speech` seconds of signal followed by `silence` seconds.
void PutWav(const std::filesystem::path &dir, const std::string &id,
            double speech, double silence = 0.0) {
  audio::WriteWavPcm16(dir / (id + ".wav"), Rect(speech, silence), kRate);
}

}  // namespace

TEST_CASE("the text-independent audit enforces both duration ranges") {
  testsupport::ScopedTempDir tmp;
  auto dir = tmp.path();
  // Model A: three 2 s utterances -> net 3 * 1.995 = 5.985 s, in range.
  PutWav(dir, "a1", 2.0);
  PutWav(dir, "a2", 2.0);
  PutWav(dir, "a3", 2.0);
  // Model B: single 1 s utterance -> net 0.995 s, below the 4 s floor.
  PutWav(dir, "b1", 1.0);
  // Tests: in range, too short, too long (gross duration, mostly silence).
  PutWav(dir, "t_ok", 3.0);
  PutWav(dir, "t_short", 0.5);
  PutWav(dir, "t_long", 1.0, 8.0);

  formats::EnrollmentFile enrollment;
  enrollment.task = formats::Task::TI;
  enrollment.ti = {TiModel("mdl_a", {"a1", "a2", "a3"}),
                   TiModel("mdl_b", {"b1"}),
                   TiModel("mdl_c", {"c1"})};  // no wav on disk

  auto report = audio::AuditCorpus(enrollment, dir, formats::Task::TI);

  REQUIRE(report.models.size() == 3);
  CHECK(report.models[0].model_id == "mdl_a");
  CHECK(report.models[0].n_utterances == 3);
  CHECK_THAT(report.models[0].net_enrollment, WithinAbs(5.985, 1e-9));
  CHECK(report.models[0].complete);
  CHECK_THAT(report.models[1].net_enrollment, WithinAbs(0.995, 1e-9));
  CHECK(!report.models[2].complete);
  CHECK(report.models[2].n_utterances == 0);

  REQUIRE(report.missing.size() == 1);
  CHECK(report.missing[0].find("mdl_c") != std::string::npos);
  CHECK(report.missing[0].find("c1") != std::string::npos);

  // Violations: model B net too low, t_short too short, t_long too long.
  // Incomplete model C is reported missing, never range-checked.
  REQUIRE(report.violations.size() == 3);
  std::map<std::string, std::string> by_subject;
  for (const auto &v : report.violations) by_subject[v.subject] = v.rule;
  CHECK(by_subject["mdl_b"] == "net-enrollment-out-of-range");
  CHECK(by_subject["t_short"] == "test-duration-out-of-range");
  CHECK(by_subject["t_long"] == "test-duration-out-of-range");
  for (const auto &v : report.violations)
    if (v.subject == "t_long") CHECK_THAT(v.value, WithinAbs(9.0, 1e-9));

  // Enrollment files are never held to the test-utterance bounds even
  // though a 2 s file would violate the [1, 8] s range's lower bound.
  for (const auto &f : report.files)
    if (f.file_id == "a1") CHECK(f.is_enrollment);

  SECTION("slack widens every range symmetrically") {
    audio::AuditOptions options;
    options.slack_seconds = 0.6;
    auto relaxed = audio::AuditCorpus(enrollment, dir, formats::Task::TI,
                                      options);
    std::set<std::string> subjects;
    for (const auto &v : relaxed.violations) subjects.insert(v.subject);
    CHECK(!subjects.count("t_short"));        // 0.5 >= 1 - 0.6
    CHECK(subjects.count("mdl_b") == 1);      // 0.995 still < 4 - 0.6
    CHECK(subjects.count("t_long") == 1);     // 9 still > 8 + 0.6
  }
}

TEST_CASE("the text-dependent audit checks the three-utterance rule") {
  testsupport::ScopedTempDir tmp;
  auto dir = tmp.path();
  for (const auto *id : {"e1", "e2", "e3", "e4", "e5"}) PutWav(dir, id, 2.0);
  // A 0.2 s test file: fine for Task 1, which has no test-duration rule.
  PutWav(dir, "t1", 0.2);

  formats::EnrollmentFile enrollment;
  enrollment.task = formats::Task::TD;
  enrollment.td = {
      {"mdl_ok", "01", {"e1", "e2", "e3"}},
      {"mdl_gap", "02", {"e4", "e5", "e_missing"}},
  };

  auto report = audio::AuditCorpus(enrollment, dir, formats::Task::TD);
  REQUIRE(report.models.size() == 2);
  CHECK(report.models[0].n_utterances == 3);
  CHECK(report.models[1].n_utterances == 2);
  CHECK(!report.models[1].complete);

  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].subject == "mdl_gap");
  CHECK(report.violations[0].rule == "enrollment-utterance-count");
  CHECK(report.violations[0].value == 2.0);
  REQUIRE(report.missing.size() == 1);
}

TEST_CASE("unreadable and absent wav trees degrade gracefully") {
  testsupport::ScopedTempDir tmp;
  auto dir = tmp.path();
  PutWav(dir, "good", 2.0);
  detail::WriteFileAtomic(dir / "bad.wav", std::string("this is not audio"));

  formats::EnrollmentFile enrollment;
  enrollment.task = formats::Task::TI;
  enrollment.ti = {TiModel("mdl", {"good", "bad"})};

  auto report = audio::AuditCorpus(enrollment, dir, formats::Task::TI);
  CHECK(report.files.size() == 1);  // the unreadable file is not audited
  REQUIRE(report.warnings.size() == 1);
  CHECK(report.warnings[0].find("bad") != std::string::npos);
  CHECK(report.warnings[0].find("NotRiff") != std::string::npos);
  REQUIRE(report.missing.size() == 1);
  CHECK(!report.models[0].complete);

  auto nowhere = audio::AuditCorpus(enrollment, dir / "does-not-exist",
                                    formats::Task::TI);
  CHECK(nowhere.files.empty());
  CHECK(nowhere.missing.size() == 2);
}

// ---------------------------------------------------------------------------
// Reports

TEST_CASE("audit reports serialize and render") {
  testsupport::ScopedTempDir tmp;
  auto dir = tmp.path();
  PutWav(dir, "b1", 1.0);
  PutWav(dir, "t_short", 0.5);

  formats::EnrollmentFile enrollment;
  enrollment.task = formats::Task::TI;
  enrollment.ti = {TiModel("mdl_b", {"b1"}), TiModel("mdl_c", {"c1"})};
  auto report = audio::AuditCorpus(enrollment, dir, formats::Task::TI);

  auto j = audio::AuditReportJson(report);
  CHECK(j["schema_version"] == 1);
  CHECK(j["files"].size() == 2);
  CHECK(j["models"].size() == 2);
  CHECK(j["violations"].size() == 2);
  CHECK(j["missing"].size() == 1);
  bool saw_b1 = false;
  for (const auto &f : j["files"])
    if (f["file_id"] == "b1") {
      saw_b1 = true;
      CHECK(f["is_enrollment"] == true);
      CHECK_THAT(f["net_speech"].get<double>(), WithinAbs(0.995, 1e-9));
    }
  CHECK(saw_b1);

  auto text = audio::RenderViolations(report);
  CHECK(text.find("net-enrollment-out-of-range") != std::string::npos);
  CHECK(text.find("test-duration-out-of-range") != std::string::npos);
  CHECK(text.find("missing: ") != std::string::npos);

  audio::AuditReport clean;
  CHECK(audio::RenderViolations(clean) == "audit clean: no violations\n");
}
