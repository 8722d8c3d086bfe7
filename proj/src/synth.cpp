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

#include "fsed/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>

#include "fsed/rng.hpp"
#include "fsed/wav.hpp"

namespace fsed {
namespace {

constexpr int kMaxPlacementAttempts = 10000;
constexpr double kRampDuration = 0.010;     // cosine on/off ramps
constexpr double kPulseRateHz = 25.0;       // pulse-train repetition rate
constexpr double kPulseDuty = 0.4;
constexpr double kChirpSweepHz = 500.0;
constexpr double kEdgePad = 0.5;            // keep events away from file edges

struct PlannedEvent {
  double onset_s = 0.0;
  double duration_s = 0.0;
  double f0_hz = 0.0;
  double f1_hz = 0.0;  // chirp end frequency (== f0 otherwise)
  EventKind kind = EventKind::kTone;
  LabelValue value = LabelValue::kPos;
  bool is_distractor = false;

  double offset_s() const { return onset_s + duration_s; }
};

void validate(const SynthConfig& c) {
  if (c.duration_s <= 0.0 || c.sample_rate <= 0) throw Error("invalid duration or rate");
  if (c.k_shot < 1) throw Error("k_shot must be >= 1");
  if (c.n_events_min > c.n_events_max) throw Error("n_events range inverted");
  if (c.n_events_min < c.k_shot + 1) throw Error("n_events must be >= k_shot + 1");
  if (!(c.event_dur_min_s > 0.0 && c.event_dur_min_s <= c.event_dur_max_s)) {
    throw Error("invalid event duration range");
  }
  if (!(c.f_min_hz > 0.0 && c.f_min_hz <= c.f_max_hz &&
        c.f_max_hz < c.sample_rate / 2.0)) {
    throw Error("event band outside (0, Nyquist)");
  }
  if (c.distractor_count > 0 &&
      !(c.distractor_f_min_hz > 0.0 && c.distractor_f_min_hz <= c.distractor_f_max_hz &&
        c.distractor_f_max_hz < c.sample_rate / 2.0)) {
    throw Error("distractor band outside (0, Nyquist)");
  }
  if (c.unk_fraction < 0.0 || c.unk_fraction > 1.0) throw Error("unk_fraction outside [0, 1]");
  if (!(c.noise_rms > 0.0)) throw Error("noise_rms must be > 0");
  if (c.min_gap_s < 0.0) throw Error("min_gap_s must be >= 0");
  if (c.event_dur_max_s + 2.0 * kEdgePad >= c.duration_s / 2.0) {
    throw Error("events do not fit in half the file duration");
  }
}

bool collides(const PlannedEvent& e, const std::vector<PlannedEvent>& placed, double gap) {
  for (const PlannedEvent& p : placed) {
    if (e.onset_s < p.offset_s() + gap && p.onset_s < e.offset_s() + gap) return true;
  }
  return false;
}

// Occupied frequency band used for the SNR definition.
double occupied_band_hz(const PlannedEvent& e) {
  switch (e.kind) {
    case EventKind::kTone: return 100.0;
    case EventKind::kChirp: return std::abs(e.f1_hz - e.f0_hz) + 100.0;
    case EventKind::kPulseTrain: return 300.0;
  }
  return 100.0;
}

// Amplitude-modulation envelope with cosine ramps, unit peak.
Eigen::ArrayXd build_envelope(EventKind kind, Index n, int sample_rate) {
  Eigen::ArrayXd env = Eigen::ArrayXd::Ones(n);
  if (kind == EventKind::kPulseTrain) {
    const double period = 1.0 / kPulseRateHz;
    const double width = kPulseDuty * period;
    for (Index i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / sample_rate;
      const double phase = std::fmod(t, period);
      // Hann-shaped pulse of the given width at the start of each period.
      env[i] = phase < width
                   ? 0.5 - 0.5 * std::cos(2.0 * M_PI * phase / width)
                   : 0.0;
    }
  }
  const Index ramp = std::min<Index>(n / 2, static_cast<Index>(kRampDuration * sample_rate));
  for (Index i = 0; i < ramp; ++i) {
    const double g = 0.5 - 0.5 * std::cos(M_PI * (i + 1) / (ramp + 1));
    env[i] *= g;
    env[n - 1 - i] *= g;
  }
  return env;
}

void render_event(const PlannedEvent& e, const SynthConfig& cfg, double phase,
                  Eigen::ArrayXd& samples) {
  const int sr = cfg.sample_rate;
  const Index start = static_cast<Index>(std::llround(e.onset_s * sr));
  const Index n = static_cast<Index>(std::llround(e.duration_s * sr));
  Eigen::ArrayXd env = build_envelope(e.kind, n, sr);

  // Scale so the rendered in-band power is amplitude^2 / 2 like a plain tone,
  // then pick the amplitude that meets the configured band SNR over the
  // white-noise floor.
  const double env_power = env.square().mean();
  const double snr_linear = std::pow(10.0, cfg.snr_db / 10.0);
  const double band_fraction = occupied_band_hz(e) / (sr / 2.0);
  const double noise_band_power = cfg.noise_rms * cfg.noise_rms * band_fraction;
  const double amplitude =
      std::sqrt(2.0 * snr_linear * noise_band_power) / std::sqrt(std::max(env_power, 1e-12));

  const double sweep_rate = (e.f1_hz - e.f0_hz) / e.duration_s;  // 0 for non-chirps
  for (Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sr;
    const double arg = 2.0 * M_PI * (e.f0_hz * t + 0.5 * sweep_rate * t * t) + phase;
    samples[start + i] += amplitude * env[i] * std::sin(arg);
  }
}

std::string file_name_for(const std::string& dataset, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%02d", index);
  return dataset + buf;
}

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kTone: return "tone";
    case EventKind::kChirp: return "chirp";
    case EventKind::kPulseTrain: return "pulse";
  }
  return "tone";
}

EventKind event_kind_from_name(std::string_view name) {
  if (name == "tone") return EventKind::kTone;
  if (name == "chirp") return EventKind::kChirp;
  if (name == "pulse") return EventKind::kPulseTrain;
  throw Error("unknown event kind '" + std::string(name) +
              "' (expected tone, chirp or pulse)");
}

GeneratedEpisode generate_episode(const SynthConfig& cfg) {
  validate(cfg);
  SeededRng rng(cfg.rng_seed);
  const int n_events =
      cfg.n_events_min +
      static_cast<int>(rng.index(static_cast<size_t>(cfg.n_events_max - cfg.n_events_min + 1)));

  auto plan_one = [&](EventKind kind, double f_lo, double f_hi, bool first_half,
                      bool distractor, const std::vector<PlannedEvent>& placed,
                      double gap) -> PlannedEvent {
    for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
      PlannedEvent e;
      e.kind = kind;
      e.is_distractor = distractor;
      e.duration_s = rng.uniform(cfg.event_dur_min_s, cfg.event_dur_max_s);
      const double lo = kEdgePad;
      const double hi = (first_half ? cfg.duration_s / 2.0 : cfg.duration_s - kEdgePad) -
                        e.duration_s;
      const double onset_lo = first_half ? lo : cfg.duration_s / 2.0;
      if (hi <= onset_lo) continue;
      e.onset_s = rng.uniform(onset_lo, hi);
      e.f0_hz = rng.uniform(f_lo, f_hi);
      e.f1_hz = e.f0_hz;
      if (kind == EventKind::kChirp) {
        e.f1_hz = e.f0_hz + kChirpSweepHz <= f_hi ? e.f0_hz + kChirpSweepHz
                                                  : e.f0_hz - kChirpSweepHz;
      }
      // Quantize to the sample grid so annotations match the samples exactly.
      e.onset_s = std::llround(e.onset_s * cfg.sample_rate) /
                  static_cast<double>(cfg.sample_rate);
      e.duration_s = std::llround(e.duration_s * cfg.sample_rate) /
                     static_cast<double>(cfg.sample_rate);
      if (!collides(e, placed, gap)) return e;
    }
    throw Error("event placement failed after " + std::to_string(kMaxPlacementAttempts) +
                " attempts; reduce event count or duration");
  };

  std::vector<PlannedEvent> placed;
  for (int i = 0; i < n_events; ++i) {
    const bool first_half = i < cfg.k_shot;
    placed.push_back(plan_one(cfg.kind, cfg.f_min_hz, cfg.f_max_hz, first_half,
                              /*distractor=*/false, placed, cfg.min_gap_s));
  }
  // UNK labels go to a seeded random subset of the non-support events.
  const int n_unk = std::min<int>(
      n_events - cfg.k_shot,
      static_cast<int>(std::llround(cfg.unk_fraction * n_events)));
  std::vector<size_t> query_indices;
  for (int i = cfg.k_shot; i < n_events; ++i) query_indices.push_back(static_cast<size_t>(i));
  rng.shuffle(query_indices);
  for (int u = 0; u < n_unk; ++u) placed[query_indices[static_cast<size_t>(u)]].value = LabelValue::kUnk;

  for (int d = 0; d < cfg.distractor_count; ++d) {
    placed.push_back(plan_one(cfg.distractor_kind, cfg.distractor_f_min_hz,
                              cfg.distractor_f_max_hz, /*first_half=*/false,
                              /*distractor=*/true, placed, 0.1));
  }

  GeneratedEpisode out;
  out.audio.sample_rate = cfg.sample_rate;
  const Index n_samples = static_cast<Index>(std::llround(cfg.duration_s * cfg.sample_rate));
  out.audio.samples.resize(n_samples);
  for (Index i = 0; i < n_samples; ++i) out.audio.samples[i] = cfg.noise_rms * rng.normal();
  for (const PlannedEvent& e : placed) {
    render_event(e, cfg, rng.uniform(0.0, 2.0 * M_PI), out.audio.samples);
  }
  out.audio.samples = out.audio.samples.min(1.0).max(-1.0);

  out.table.audio_file = cfg.audio_file;
  out.table.class_names = {cfg.class_name};
  for (const PlannedEvent& e : placed) {
    if (e.is_distractor && !cfg.distractors_as_neg) continue;
    out.table.events.push_back(Event{e.onset_s, e.offset_s(), cfg.class_name,
                                     e.is_distractor ? LabelValue::kNeg : e.value});
  }
  std::stable_sort(out.table.events.begin(), out.table.events.end(), event_less);
  return out;
}

void generate_benchmark(const std::vector<SynthConfig>& configs,
                        const std::filesystem::path& out_dir) {
  if (configs.empty()) throw Error("no dataset configs");
  for (size_t i = 0; i < configs.size(); ++i) {
    if (configs[i].n_files < 1) throw Error("n_files must be >= 1");
    if (configs[i].dataset_name.empty()) throw Error("empty dataset name");
    for (size_t j = i + 1; j < configs.size(); ++j) {
      if (configs[i].dataset_name == configs[j].dataset_name) {
        throw Error("duplicate dataset name '" + configs[i].dataset_name + "'");
      }
    }
  }
  std::filesystem::create_directories(out_dir);
  std::string manifest = "Audiofilename,Dataset\n";
  for (const SynthConfig& base : configs) {
    const std::filesystem::path dataset_dir = out_dir / base.dataset_name;
    std::filesystem::create_directories(dataset_dir);
    for (int f = 0; f < base.n_files; ++f) {
      SynthConfig cfg = base;
      cfg.rng_seed = derive_seed(base.rng_seed, static_cast<uint64_t>(f));
      const std::string stem = file_name_for(base.dataset_name, f);
      cfg.audio_file = stem + ".wav";
      GeneratedEpisode episode = generate_episode(cfg);
      write_wav16_file(dataset_dir / (stem + ".wav"), episode.audio);
      std::ofstream csv(dataset_dir / (stem + ".csv"));
      if (!csv) throw Error("cannot write " + (dataset_dir / (stem + ".csv")).string());
      write_annotation_csv(csv, episode.table);
      if (!csv) throw Error("annotation write failed for " + stem);
      manifest += cfg.audio_file + "," + base.dataset_name + "\n";
    }
  }
  std::ofstream mf(out_dir / "manifest.csv");
  if (!mf) throw Error("cannot write manifest.csv");
  mf << manifest;
  if (!mf) throw Error("manifest write failed");
}

std::map<std::string, std::string> parse_manifest_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || (line != "Audiofilename,Dataset" &&
                                  line != "Audiofilename,Dataset\r")) {
    throw ParseError("malformed manifest header", 1);
  }
  std::map<std::string, std::string> dataset_of;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 >= line.size()) {
      throw ParseError("malformed manifest row", line_no);
    }
    dataset_of[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return dataset_of;
}

std::map<std::string, std::string> read_manifest_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest '" + path.string() + "'");
  return parse_manifest_csv(in);
}

}  // namespace fsed
