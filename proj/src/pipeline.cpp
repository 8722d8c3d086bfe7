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

#include "fsed/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <thread>

#include "json.hpp"

#include "fsed/report.hpp"
#include "fsed/synth.hpp"
#include "fsed/wav.hpp"

namespace fsed {
namespace {

namespace fs = std::filesystem;

double effective_f_max(const FrontendConfig& c) {
  return c.f_max > 0.0 ? c.f_max : c.sample_rate / 2.0;
}

// Largest usable odd kernel for a curve of length n.
int adapt_kernel(int kernel, Index n) {
  int k = std::min<Index>(kernel, n);
  if (k % 2 == 0) --k;
  return std::max(1, k);
}

std::vector<Event> clip_to_query(std::vector<Event> events, double query_start_s,
                                 long* n_discarded) {
  size_t before = events.size();
  std::erase_if(events, [&](const Event& e) { return e.offset_s <= query_start_s; });
  *n_discarded += static_cast<long>(before - events.size());
  for (Event& e : events) e.onset_s = std::max(e.onset_s, query_start_s);
  return events;
}

std::vector<std::string> eligible_classes(const AnnotationTable& table, int k_shot) {
  std::vector<std::string> classes;
  for (const std::string& name : table.class_names) {
    long n_pos = 0;
    for (const Event& e : table.events) {
      if (e.class_name == name && e.value == LabelValue::kPos) ++n_pos;
    }
    if (n_pos >= k_shot) classes.push_back(name);
  }
  return classes;
}

struct InputPair {
  fs::path csv;
  fs::path wav;
  fs::path relative;  // csv path relative to the input root
};

std::vector<InputPair> scan_input_pairs(const fs::path& input_dir) {
  if (!fs::is_directory(input_dir)) {
    throw Error("input directory '" + input_dir.string() + "' does not exist");
  }
  std::vector<InputPair> pairs;
  for (const auto& entry : fs::recursive_directory_iterator(input_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    if (entry.path().filename() == "manifest.csv") continue;
    InputPair pair;
    pair.csv = entry.path();
    pair.wav = entry.path();
    pair.wav.replace_extension(".wav");
    if (!fs::exists(pair.wav)) {
      throw Error("no audio next to '" + pair.csv.string() + "'");
    }
    pair.relative = fs::relative(pair.csv, input_dir);
    pairs.push_back(std::move(pair));
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const InputPair& a, const InputPair& b) { return a.csv < b.csv; });
  if (pairs.empty()) {
    throw Error("no (csv, wav) pairs under '" + input_dir.string() + "'");
  }
  return pairs;
}

}  // namespace

Spectrogram compute_frontend_stft(const Waveform& raw, const FrontendConfig& config) {
  Waveform w = resample_linear(raw, config.sample_rate);
  return stft_magnitude(w, config.win, config.hop);
}

Spectrogram compute_frontend_pcen(const Waveform& raw, const FrontendConfig& config) {
  Spectrogram spec = compute_frontend_stft(raw, config);
  Spectrogram mel = mel_spectrogram(spec, config.n_mels, config.sample_rate,
                                    config.f_min, effective_f_max(config));
  return pcen(mel, config.pcen);
}

EpisodeDetection detect_episode_template(const Spectrogram& spec,
                                         const FewShotEpisode& episode,
                                         const TemplateMatchConfig& config,
                                         const PostprocessConfig& post) {
  std::vector<Template> templates = extract_templates<double>(spec, episode.support);
  std::vector<DetectionCurve> curves;
  curves.reserve(templates.size());
  for (const Template& t : templates) {
    DetectionCurve curve = xcorr_curve(spec, t);
    curve.scores = median_filter(curve.scores,
                                 adapt_kernel(post.median_kernel, curve.scores.size()));
    curves.push_back(std::move(curve));
  }
  std::vector<Index> lengths = template_lengths<double>(templates);
  EpisodeDetection out;
  std::vector<Event> events =
      detect_from_curves(curves, config.threshold, lengths, episode.class_name);
  events = clip_to_query(std::move(events), episode.query_start_s, &out.n_discarded);
  events = merge_events(std::move(events), post.merge_gap_s);
  out.events = filter_min_duration(std::move(events), episode.support,
                                   post.min_duration_factor);
  return out;
}

EpisodeDetection detect_episode_prototype(const Spectrogram& pcen_spec,
                                          const AnnotationTable& table,
                                          const FewShotEpisode& episode,
                                          const PrototypeConfig& config,
                                          const PostprocessConfig& post) {
  EpisodeDetection out;
  const Embedder embedder = embedder_from_name(config.embedder);
  const Index seg_len = adaptive_segment_length(episode.support, pcen_spec.hop_s);
  const Index seg_hop = std::max<Index>(1, seg_len / 2);
  SegmentGrid grid = make_segment_grid(pcen_spec, episode.query_start_s, seg_len, seg_hop);
  if (grid.starts.empty()) return out;  // query shorter than one segment

  auto [pos, neg] = build_prototypes(pcen_spec, table, episode, embedder, seg_len,
                                     config.neg_samples, config.rng_seed);
  if (config.swap_prototypes) std::swap(pos, neg);
  Eigen::ArrayXd probs = segment_probabilities(pcen_spec, grid, embedder, pos, neg);
  probs = median_filter(probs, adapt_kernel(post.median_kernel, probs.size()));
  std::vector<Event> events = probabilities_to_events(
      probs, grid, config.threshold, episode.query_start_s, episode.class_name);
  events = merge_events(std::move(events), post.merge_gap_s);
  out.events = filter_min_duration(std::move(events), episode.support,
                                   post.min_duration_factor);
  return out;
}

FileDetection detect_file(const std::filesystem::path& wav_path,
                          const AnnotationTable& truth, const DetectionRunConfig& config) {
  const auto start_time = std::chrono::steady_clock::now();
  FileDetection out;
  out.audio_file = truth.audio_file;
  out.classes = eligible_classes(truth, config.few_shot.k_shot);
  if (out.classes.empty()) {
    throw InsufficientShots("no class in '" + truth.audio_file + "' has " +
                            std::to_string(config.few_shot.k_shot) + " POS events");
  }

  const Waveform raw = read_wav_file(wav_path);
  Spectrogram spec;
  if (config.detector == DetectorKind::kTemplateMatch) {
    spec = compute_frontend_stft(raw, config.frontend);
  } else {
    spec = compute_frontend_pcen(raw, config.frontend);
  }

  for (const std::string& class_name : out.classes) {
    FewShotEpisode episode = extract_episode(truth, class_name, config.few_shot);
    EpisodeDetection detection =
        config.detector == DetectorKind::kTemplateMatch
            ? detect_episode_template(spec, episode, config.template_match,
                                      config.postprocess)
            : detect_episode_prototype(spec, truth, episode, config.prototype,
                                       config.postprocess);
    out.n_discarded += detection.n_discarded;
    out.events.insert(out.events.end(), detection.events.begin(), detection.events.end());
  }
  std::stable_sort(out.events.begin(), out.events.end(), event_less);
  out.elapsed_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start_time)
                       .count();
  return out;
}

std::string detection_config_json(const DetectionRunConfig& c) {
  nlohmann::ordered_json j;
  j["detector"] =
      c.detector == DetectorKind::kTemplateMatch ? "template-match" : "prototype";
  j["frontend"] = {{"sample_rate", c.frontend.sample_rate},
                   {"win", c.frontend.win},
                   {"hop", c.frontend.hop},
                   {"n_mels", c.frontend.n_mels},
                   {"f_min", c.frontend.f_min},
                   {"f_max", c.frontend.f_max}};
  j["pcen"] = {{"smoothing", c.frontend.pcen.smoothing},
               {"gain", c.frontend.pcen.gain},
               {"bias", c.frontend.pcen.bias},
               {"exponent", c.frontend.pcen.exponent},
               {"eps", c.frontend.pcen.eps}};
  if (c.detector == DetectorKind::kTemplateMatch) {
    j["template_match"] = {{"threshold", c.template_match.threshold}};
  } else {
    j["prototype"] = {{"embedder", c.prototype.embedder},
                      {"threshold", c.prototype.threshold},
                      {"neg_samples", c.prototype.neg_samples},
                      {"rng_seed", c.prototype.rng_seed},
                      {"swap_prototypes", c.prototype.swap_prototypes}};
  }
  j["postprocess"] = {{"min_duration_factor", c.postprocess.min_duration_factor},
                      {"merge_gap_s", c.postprocess.merge_gap_s},
                      {"median_kernel", c.postprocess.median_kernel}};
  j["k_shot"] = c.few_shot.k_shot;
  return j.dump();
}

std::string scoring_config_json(const MatchConfig& match, const FewShotConfig& few_shot) {
  nlohmann::ordered_json j;
  j["iou_min"] = match.iou_min;
  j["k_shot"] = few_shot.k_shot;
  return j.dump();
}

DetectionRunResult run_detection(const std::filesystem::path& input_dir,
                                 const std::filesystem::path& out_dir,
                                 const DetectionRunConfig& config) {
  const std::vector<InputPair> pairs = scan_input_pairs(input_dir);
  fs::create_directories(out_dir);

  std::vector<FileDetection> results(pairs.size());
  std::vector<std::exception_ptr> errors(pairs.size());
  std::atomic<size_t> next{0};
  const unsigned n_workers = std::max(
      1u, config.jobs > 0 ? static_cast<unsigned>(config.jobs)
                          : std::min<unsigned>(std::thread::hardware_concurrency(),
                                               static_cast<unsigned>(pairs.size())));
  auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= pairs.size()) return;
      try {
        std::ifstream in(pairs[i].csv);
        if (!in) throw Error("cannot open '" + pairs[i].csv.string() + "'");
        AnnotationTable truth = parse_annotation_csv(in);
        results[i] = detect_file(pairs[i].wav, truth, config);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  for (unsigned t = 0; t < n_workers; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);  // first failing file in path order
  }

  const std::string config_json = detection_config_json(config);
  nlohmann::ordered_json log;
  log["config"] = nlohmann::ordered_json::parse(config_json);
  log["fingerprint"] = fingerprint(config_json);
  log["files"] = nlohmann::ordered_json::array();
  for (size_t i = 0; i < pairs.size(); ++i) {
    fs::path out_csv = out_dir / pairs[i].relative;
    fs::create_directories(out_csv.parent_path());
    std::ofstream out(out_csv);
    if (!out) throw Error("cannot write '" + out_csv.string() + "'");
    write_prediction_csv(out, results[i].audio_file, results[i].events);
    if (!out) throw Error("prediction write failed for '" + out_csv.string() + "'");

    nlohmann::ordered_json entry;
    entry["file"] = pairs[i].relative.generic_string();
    entry["classes"] = results[i].classes;
    entry["n_events"] = results[i].events.size();
    entry["n_discarded"] = results[i].n_discarded;
    entry["elapsed_ms"] = results[i].elapsed_ms;
    log["files"].push_back(std::move(entry));
  }

  DetectionRunResult run;
  run.files = std::move(results);
  run.log_path = out_dir / "run_log.json";
  std::ofstream log_out(run.log_path);
  if (!log_out) throw Error("cannot write run log");
  log_out << log.dump(2) << "\n";
  return run;
}

MatchReport run_scoring(const std::filesystem::path& pred_dir,
                        const std::filesystem::path& ref_dir,
                        const std::filesystem::path& manifest_path,
                        const MatchConfig& match, const FewShotConfig& few_shot) {
  std::map<std::string, AnnotationTable> ground_truth;
  for (const InputPair& pair : scan_input_pairs(ref_dir)) {
    std::ifstream in(pair.csv);
    if (!in) throw Error("cannot open '" + pair.csv.string() + "'");
    AnnotationTable table = parse_annotation_csv(in);
    if (table.audio_file.empty()) {
      table.audio_file = pair.wav.filename().string();
    }
    if (ground_truth.count(table.audio_file)) {
      throw Error("duplicate ground truth for '" + table.audio_file + "'");
    }
    ground_truth.emplace(table.audio_file, std::move(table));
  }

  const std::map<std::string, std::string> dataset_of = read_manifest_file(manifest_path);

  std::map<std::string, std::vector<Event>> predictions;
  if (!fs::is_directory(pred_dir)) {
    throw Error("prediction directory '" + pred_dir.string() + "' does not exist");
  }
  std::vector<fs::path> pred_files;
  for (const auto& entry : fs::recursive_directory_iterator(pred_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv" &&
        entry.path().filename() != "manifest.csv") {
      pred_files.push_back(entry.path());
    }
  }
  std::sort(pred_files.begin(), pred_files.end());
  for (const fs::path& path : pred_files) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    for (auto& [file, events] : parse_prediction_csv(in)) {
      auto& merged = predictions[file];
      merged.insert(merged.end(), events.begin(), events.end());
    }
  }
  for (auto& [file, events] : predictions) {
    std::stable_sort(events.begin(), events.end(), event_less);
  }

  return evaluate(predictions, ground_truth, dataset_of, match, few_shot);
}

}  // namespace fsed
