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
// Batch pipeline shared by the CLI and the end-to-end tests: frontends,
// per-file detection over (wav, csv) pair directories, prediction output,
// run logs, and directory-level scoring.

#ifndef FSED_PIPELINE_HPP_
#define FSED_PIPELINE_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "fsed/annotations.hpp"
#include "fsed/dsp.hpp"
#include "fsed/postprocess.hpp"
#include "fsed/proto_detector.hpp"
#include "fsed/scoring.hpp"
#include "fsed/template_match.hpp"

namespace fsed {

struct FrontendConfig {
  int sample_rate = 22050;  // processing rate; input is resampled on load
  int win = 1024;
  int hop = 256;
  int n_mels = 128;
  double f_min = 50.0;
  double f_max = 0.0;  // 0 means Nyquist
  PcenParams pcen;
};

enum class DetectorKind { kTemplateMatch, kPrototype };

struct TemplateMatchConfig {
  double threshold = 0.45;  // on the fused correlation curve
};

struct PrototypeConfig {
  std::string embedder = "mean-pcen";
  double threshold = 0.5;
  int neg_samples = 32;
  uint64_t rng_seed = 2022;
  bool swap_prototypes = false;  // sanity/debug switch, inverts the decision
};

struct DetectionRunConfig {
  DetectorKind detector = DetectorKind::kTemplateMatch;
  FrontendConfig frontend;
  TemplateMatchConfig template_match;
  PrototypeConfig prototype;
  PostprocessConfig postprocess;
  FewShotConfig few_shot;
  int jobs = 0;  // worker pool size, 0 = hardware concurrency
};

// Resample to the processing rate, then magnitude STFT. The template-matching
// baseline runs on this frontend so its scores are amplitude invariant.
Spectrogram compute_frontend_stft(const Waveform& raw, const FrontendConfig& config);

// Resample, STFT, mel projection, PCEN. The prototype baseline's frontend.
Spectrogram compute_frontend_pcen(const Waveform& raw, const FrontendConfig& config);

struct EpisodeDetection {
  std::vector<Event> events;
  long n_discarded = 0;  // detections that ended inside the support region
};

// One episode with the template-matching detector on a magnitude STFT of the
// whole recording. Detections are clipped to the query region, merged, and
// duration-filtered.
EpisodeDetection detect_episode_template(const Spectrogram& spec,
                                         const FewShotEpisode& episode,
                                         const TemplateMatchConfig& config,
                                         const PostprocessConfig& post);

// One episode with the prototype detector on a PCEN mel spectrogram.
EpisodeDetection detect_episode_prototype(const Spectrogram& pcen_spec,
                                          const AnnotationTable& table,
                                          const FewShotEpisode& episode,
                                          const PrototypeConfig& config,
                                          const PostprocessConfig& post);

struct FileDetection {
  std::string audio_file;
  std::vector<std::string> classes;  // episodes run for this file
  std::vector<Event> events;
  long n_discarded = 0;
  double elapsed_ms = 0.0;
};

// Runs every eligible episode of one recording (each class with at least
// k_shot POS events). Throws InsufficientShots when no class is eligible.
FileDetection detect_file(const std::filesystem::path& wav_path,
                          const AnnotationTable& truth, const DetectionRunConfig& config);

// JSON used for run logs and fingerprints.
std::string detection_config_json(const DetectionRunConfig& config);
std::string scoring_config_json(const MatchConfig& match, const FewShotConfig& few_shot);

struct DetectionRunResult {
  std::vector<FileDetection> files;  // sorted by audio file
  std::filesystem::path log_path;
};

// Detects every (csv, wav) pair under input_dir (recursively; manifest.csv is
// skipped), writing one prediction CSV per input to out_dir (mirroring the
// directory layout) plus a run_log.json with the config, its fingerprint, and
// per-file timing and discard counts. Files are processed by a bounded worker
// pool; outputs do not depend on completion order.
DetectionRunResult run_detection(const std::filesystem::path& input_dir,
                                 const std::filesystem::path& out_dir,
                                 const DetectionRunConfig& config);

// Scores a prediction directory against a ground-truth directory using the
// manifest's file-to-dataset mapping. Ground-truth files without predictions
// count as all-miss.
MatchReport run_scoring(const std::filesystem::path& pred_dir,
                        const std::filesystem::path& ref_dir,
                        const std::filesystem::path& manifest_path,
                        const MatchConfig& match, const FewShotConfig& few_shot);

}  // namespace fsed

#endif  // FSED_PIPELINE_HPP_
