// Copyright 2026 The fsed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fsed/annotations.hpp"
#include "fsed/dsp.hpp"
#include "fsed/synth.hpp"

using namespace fsed;
namespace fs = std::filesystem;

namespace {

SynthConfig small_config(uint64_t seed = 42) {
  SynthConfig cfg;
  cfg.rng_seed = seed;
  cfg.duration_s = 12.0;
  cfg.n_events_min = 6;
  cfg.n_events_max = 6;
  cfg.event_dur_min_s = 0.15;
  cfg.event_dur_max_s = 0.3;
  cfg.min_gap_s = 0.3;
  return cfg;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("fsed_synth_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("generate_episode: event counts and non-overlap") {
  GeneratedEpisode ep = generate_episode(small_config());
  REQUIRE(ep.table.events.size() == 6);
  for (const Event& e : ep.table.events) CHECK(e.value == LabelValue::kPos);
  for (size_t i = 1; i < ep.table.events.size(); ++i) {
    CHECK(ep.table.events[i].onset_s >= ep.table.events[i - 1].offset_s);
  }
  CHECK(ep.audio.samples.size() == 12 * 22050);
  CHECK(ep.audio.samples.abs().maxCoeff() <= 1.0);
  // support events fit the first half; the annotations parse back cleanly
  for (int i = 0; i < 5; ++i) CHECK(ep.table.events[i].offset_s <= 6.0);
  AnnotationTable parsed = parse_annotation_csv(write_annotation_csv(ep.table));
  CHECK(parsed.events.size() == 6);
}

TEST_CASE("generate_episode: the same seed is bit-identical") {
  GeneratedEpisode a = generate_episode(small_config(7));
  GeneratedEpisode b = generate_episode(small_config(7));
  CHECK((a.audio.samples == b.audio.samples).all());
  CHECK(write_annotation_csv(a.table) == write_annotation_csv(b.table));
  GeneratedEpisode c = generate_episode(small_config(8));
  CHECK(write_annotation_csv(c.table) != write_annotation_csv(a.table));
}

TEST_CASE("generate_episode: UNK fraction labels only non-support events") {
  SynthConfig cfg = small_config(11);
  cfg.n_events_min = cfg.n_events_max = 10;
  cfg.duration_s = 20.0;
  cfg.unk_fraction = 0.3;  // round(3) of 10
  GeneratedEpisode ep = generate_episode(cfg);
  int n_unk = 0;
  for (const Event& e : ep.table.events) n_unk += e.value == LabelValue::kUnk;
  CHECK(n_unk == 3);
  FewShotEpisode episode = extract_episode(ep.table, cfg.class_name, FewShotConfig{});
  CHECK(episode.support.size() == 5);  // support stayed POS
}

TEST_CASE("generate_episode: annotated spans carry band energy at the set SNR") {
  SynthConfig cfg = small_config(23);
  cfg.snr_db = 40.0;
  cfg.kind = EventKind::kTone;
  GeneratedEpisode ep = generate_episode(cfg);

  // Band-energy oracle: STFT the audio, find each event's peak bin over its
  // annotated frames, and compare the energy in a +-100 Hz band around that
  // peak against the same band over event-free frames.
  Spectrogram s = stft_magnitude(ep.audio, 1024, 256);
  const double bin_hz = s.bin_axis[1] - s.bin_axis[0];
  const Index half_band = (Index)std::ceil(100.0 / bin_hz);

  std::vector<bool> in_event(s.n_frames(), false);
  for (const Event& e : ep.table.events) {
    for (Index t = std::max<Index>(0, frame_floor(e.onset_s, s.t0_s, s.hop_s));
         t <= std::min<Index>(s.n_frames() - 1, frame_ceil(e.offset_s, s.t0_s, s.hop_s));
         ++t) {
      in_event[t] = true;
    }
  }
  for (const Event& e : ep.table.events) {
    const Index first = std::max<Index>(0, frame_floor(e.onset_s, s.t0_s, s.hop_s));
    const Index last =
        std::min<Index>(s.n_frames() - 1, frame_ceil(e.offset_s, s.t0_s, s.hop_s));
    Index peak_bin = 0;
    double peak = -1.0;
    for (Index t = first; t <= last; ++t) {
      Index arg;
      s.values.row(t).maxCoeff(&arg);
      if (s.values(t, arg) > peak) {
        peak = s.values(t, arg);
        peak_bin = arg;
      }
    }
    const Index b0 = std::max<Index>(0, peak_bin - half_band);
    const Index b1 = std::min<Index>(s.n_bins() - 1, peak_bin + half_band);
    double event_energy = 0.0;
    long event_frames = 0;
    for (Index t = first; t <= last; ++t) {
      event_energy += s.values.row(t).segment(b0, b1 - b0 + 1).squaredNorm();
      ++event_frames;
    }
    double noise_energy = 0.0;
    long noise_frames = 0;
    for (Index t = 0; t < s.n_frames(); ++t) {
      if (in_event[t]) continue;
      noise_energy += s.values.row(t).segment(b0, b1 - b0 + 1).squaredNorm();
      ++noise_frames;
    }
    const double ratio_db = 10.0 * std::log10((event_energy / event_frames) /
                                              (noise_energy / noise_frames));
    CHECK(ratio_db >= 30.0);
  }
}

TEST_CASE("generate_episode: distractors live in their own band and can be NEG") {
  SynthConfig cfg = small_config(31);
  cfg.distractor_count = 4;
  cfg.distractors_as_neg = true;
  GeneratedEpisode ep = generate_episode(cfg);
  int n_neg = 0;
  for (const Event& e : ep.table.events) n_neg += e.value == LabelValue::kNeg;
  CHECK(n_neg == 4);

  SynthConfig unlabelled = cfg;
  unlabelled.distractors_as_neg = false;
  GeneratedEpisode ep2 = generate_episode(unlabelled);
  CHECK(ep2.table.events.size() == 6);  // distractors invisible to the table
}

TEST_CASE("generate_episode: impossible placement fails loudly") {
  SynthConfig cfg = small_config(1);
  cfg.duration_s = 16.0;
  cfg.n_events_min = cfg.n_events_max = 40;  // too many for half the file
  cfg.min_gap_s = 1.0;
  CHECK_THROWS_AS(generate_episode(cfg), Error);
  SynthConfig bad = small_config(1);
  bad.n_events_min = bad.n_events_max = 4;  // below k_shot + 1
  CHECK_THROWS_AS(generate_episode(bad), Error);
}

TEST_CASE("generate_benchmark: layout, manifest, determinism") {
  std::vector<SynthConfig> configs;
  for (const char* name : {"tone", "chirp", "pulse"}) {
    SynthConfig cfg = small_config(5);
    cfg.dataset_name = name;
    cfg.kind = event_kind_from_name(name);
    cfg.n_files = 2;
    configs.push_back(std::move(cfg));
  }
  const fs::path dir_a = fresh_dir("a");
  const fs::path dir_b = fresh_dir("b");
  generate_benchmark(configs, dir_a);
  generate_benchmark(configs, dir_b);

  auto manifest = read_manifest_file(dir_a / "manifest.csv");
  CHECK(manifest.size() == 6);
  CHECK(manifest.at("tone_00.wav") == "tone");
  CHECK(manifest.at("pulse_01.wav") == "pulse");

  for (const auto& [file, dataset] : manifest) {
    const fs::path wav = dir_a / dataset / file;
    fs::path csv = wav;
    csv.replace_extension(".csv");
    REQUIRE(fs::exists(wav));
    REQUIRE(fs::exists(csv));
    CHECK(slurp(wav) == slurp(dir_b / dataset / file));
    CHECK(slurp(csv) == slurp(fs::path(dir_b / dataset / file).replace_extension(".csv")));
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("generate_benchmark: bad configs are rejected") {
  CHECK_THROWS_AS(generate_benchmark({}, fresh_dir("x")), Error);
  SynthConfig zero = small_config();
  zero.n_files = 0;
  CHECK_THROWS_AS(generate_benchmark({zero}, fresh_dir("y")), Error);
  SynthConfig a = small_config();
  a.n_files = 1;
  CHECK_THROWS_AS(generate_benchmark({a, a}, fresh_dir("z")), Error);  // name clash
}

TEST_CASE("event kind names round-trip") {
  for (EventKind k : {EventKind::kTone, EventKind::kChirp, EventKind::kPulseTrain}) {
    CHECK(event_kind_from_name(to_string(k)) == k);
  }
  CHECK_THROWS_AS(event_kind_from_name("square"), Error);
}
