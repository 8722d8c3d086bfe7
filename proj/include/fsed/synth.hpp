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
//
// Deterministic synthetic-episode generator. Produces recordings of narrowband
// events (tones, chirps, pulse trains) over a white-noise floor together with
// exact ground-truth annotations, so the whole detection and scoring pipeline
// can be exercised end to end without any real dataset.

#ifndef FSED_SYNTH_HPP_
#define FSED_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fsed/annotations.hpp"
#include "fsed/dsp.hpp"

namespace fsed {

enum class EventKind { kTone, kChirp, kPulseTrain };

std::string_view to_string(EventKind kind);
EventKind event_kind_from_name(std::string_view name);  // "tone"|"chirp"|"pulse"

struct SynthConfig {
  uint64_t rng_seed = 1;
  std::string dataset_name = "synth";
  std::string class_name = "call";
  std::string audio_file = "synth.wav";
  int n_files = 1;  // used by generate_benchmark

  double duration_s = 24.0;
  int sample_rate = 22050;

  // Target events. The first k_shot are always POS and placed in the first
  // half of the file; the rest go to the second half. n_events is drawn
  // uniformly per file from [n_events_min, n_events_max].
  int k_shot = 5;
  int n_events_min = 8;
  int n_events_max = 8;
  EventKind kind = EventKind::kTone;
  double event_dur_min_s = 0.15;
  double event_dur_max_s = 0.35;
  double f_min_hz = 2000.0;
  double f_max_hz = 4000.0;
  double snr_db = 20.0;        // over the event's occupied band
  double unk_fraction = 0.0;   // of target events, never the support ones
  double min_gap_s = 0.5;      // between target events

  // Distractors: events in a different band, unlabelled unless
  // distractors_as_neg is set (then written as NEG rows).
  EventKind distractor_kind = EventKind::kTone;
  int distractor_count = 0;
  double distractor_f_min_hz = 6000.0;
  double distractor_f_max_hz = 9000.0;
  bool distractors_as_neg = false;

  double noise_rms = 0.02;  // white-noise floor
};

struct GeneratedEpisode {
  Waveform audio;
  AnnotationTable table;
};

// Generates one recording plus its annotation table. Placement is by
// rejection sampling; throws Error after 10^4 failed attempts for any event.
// Event times are quantized to the sample grid so the annotations match the
// rendered samples exactly.
GeneratedEpisode generate_episode(const SynthConfig& config);

// Writes one subdirectory per config (wav + csv per file) plus a
// `manifest.csv` mapping every audio file to its dataset:
//
//   out_dir/<dataset>/<dataset>_<NN>.wav
//   out_dir/<dataset>/<dataset>_<NN>.csv
//   out_dir/manifest.csv   (header Audiofilename,Dataset)
//
// Per-file seeds are derived from each config's rng_seed, so regeneration is
// bit-identical. Throws on duplicate dataset names, n_files < 1, or I/O
// failure.
void generate_benchmark(const std::vector<SynthConfig>& configs,
                        const std::filesystem::path& out_dir);

// Parses a manifest written by generate_benchmark: audio file -> dataset.
std::map<std::string, std::string> parse_manifest_csv(std::istream& in);
std::map<std::string, std::string> read_manifest_file(const std::filesystem::path& path);

}  // namespace fsed

#endif  // FSED_SYNTH_HPP_
