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
// End-to-end acceptance suite. Each check prints one PASS/FAIL line; the
// process exits non-zero if any check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fsed/pipeline.hpp"
#include "fsed/report.hpp"
#include "fsed/rng.hpp"
#include "fsed/synth.hpp"
#include "fsed/wav.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace fsed;

namespace {

struct Check {
  std::string name;
  std::function<void(std::string& detail)> body;  // throws or appends detail
};

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define ACCEPT_REQUIRE(cond)                                       \
  do {                                                             \
    if (!(cond)) throw Failure("requirement failed: " #cond);      \
  } while (0)

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("fsed_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Event make_interval(double onset, double offset, LabelValue v = LabelValue::kPos) {
  return Event{onset, offset, "q", v};
}

std::vector<Event> random_intervals(SeededRng& rng, int max_count) {
  std::vector<Event> events;
  const int n = (int)rng.index((size_t)max_count + 1);
  for (int i = 0; i < n; ++i) {
    const double onset = rng.uniform(0.0, 57.0);
    events.push_back(make_interval(onset, onset + rng.uniform(0.05, 3.0)));
  }
  std::stable_sort(events.begin(), events.end(), event_less);
  return events;
}

// ---------------------------------------------------------------- criteria

void check_matching_oracle(std::string& detail) {
  SeededRng rng(101);
  MatchConfig config;
  long episodes = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Event> pos = random_intervals(rng, 8);
    std::vector<Event> unk = random_intervals(rng, 3);
    for (Event& e : unk) e.value = LabelValue::kUnk;
    std::vector<Event> preds = random_intervals(rng, 8);
    FewShotEpisode episode;
    episode.audio_file = "a.wav";
    episode.class_name = "q";
    episode.query_start_s = 0.0;
    episode.reference_pos = pos;
    episode.reference_unk = unk;

    Counts got = count_episode(preds, episode, config);
    Counts want = testing::oracle_count_episode(preds, episode, config.iou_min);
    ACCEPT_REQUIRE(got.tp == want.tp);
    ACCEPT_REQUIRE(got.fp == want.fp);
    ACCEPT_REQUIRE(got.fn == want.fn);
    ++episodes;
  }
  detail = std::to_string(episodes) + " episodes exact";
}

void check_hopcroft_karp(std::string& detail) {
  SeededRng rng(102);
  for (int trial = 0; trial < 1000; ++trial) {
    const int nl = 1 + (int)rng.index(8);
    const int nr = 1 + (int)rng.index(8);
    const double density = rng.uniform(0.05, 0.6);
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < nl; ++i) {
      for (int j = 0; j < nr; ++j) {
        if (rng.uniform01() < density) edges.emplace_back(i, j);
      }
    }
    const int got = (int)max_bipartite_matching(edges, nl, nr).size();
    const int want = testing::brute_max_matching(edges, nl, nr);
    ACCEPT_REQUIRE(got == want);
  }
  detail = "1000 graphs exact";
}

void check_metric_arithmetic(std::string& detail) {
  const PrecisionRecallF prf = fscore(Counts{3, 1, 2});
  ACCEPT_REQUIRE(std::abs(prf.fscore - 0.6667) < 5e-5);
  const std::vector<double> values{1.0, 0.5};
  ACCEPT_REQUIRE(std::abs(harmonic_mean(values) - 0.6667) < 5e-5);
  detail = "F(3,1,2)=0.6667, H(1.0,0.5)=0.6667";
}

void check_iou_threshold_edge(std::string& detail) {
  FewShotEpisode episode;
  episode.audio_file = "a.wav";
  episode.class_name = "q";
  episode.reference_pos = {make_interval(0.0, 10.0)};

  // IoU exactly 0.30 -> match
  Counts at = count_episode({make_interval(0.0, 3.0)}, episode, MatchConfig{});
  ACCEPT_REQUIRE(at.tp == 1);
  ACCEPT_REQUIRE(at.fp == 0);

  // IoU = 0.30 - 1e-9 -> no match
  Counts under = count_episode({make_interval(0.0, 3.0 - 1e-8)}, episode, MatchConfig{});
  ACCEPT_REQUIRE(under.tp == 0);
  ACCEPT_REQUIRE(under.fp == 1);
  ACCEPT_REQUIRE(under.fn == 1);
  detail = "inclusive at 0.3, exclusive at 0.3 - 1e-9";
}

std::vector<SynthConfig> benchmark_configs(uint64_t seed, int distractors) {
  std::vector<SynthConfig> configs;
  const struct {
    const char* name;
    EventKind kind;
    double f_lo, f_hi;
  } presets[] = {{"tone", EventKind::kTone, 2000, 4000},
                 {"chirp", EventKind::kChirp, 2000, 3500},
                 {"pulse", EventKind::kPulseTrain, 2500, 4000}};
  for (size_t i = 0; i < 3; ++i) {
    SynthConfig cfg;
    cfg.dataset_name = presets[i].name;
    cfg.class_name = presets[i].name;
    cfg.kind = presets[i].kind;
    cfg.f_min_hz = presets[i].f_lo;
    cfg.f_max_hz = presets[i].f_hi;
    cfg.rng_seed = derive_seed(seed, i);
    cfg.n_files = 10;
    cfg.n_events_min = 6;
    cfg.n_events_max = 12;
    cfg.duration_s = 24.0;
    cfg.snr_db = 20.0;
    cfg.distractor_count = distractors;
    configs.push_back(std::move(cfg));
  }
  return configs;
}

double run_benchmark(const fs::path& root, uint64_t seed, DetectorKind detector,
                     int distractors, bool swap_prototypes, MatchReport* out_report) {
  const fs::path data = root / "data";
  const fs::path preds = root / "preds";
  generate_benchmark(benchmark_configs(seed, distractors), data);
  DetectionRunConfig config;
  config.detector = detector;
  config.prototype.swap_prototypes = swap_prototypes;
  config.jobs = 1;
  run_detection(data, preds, config);
  MatchReport report =
      run_scoring(preds, data, data / "manifest.csv", MatchConfig{}, FewShotConfig{});
  if (out_report != nullptr) *out_report = report;
  return report.overall;
}

void check_template_end_to_end(std::string& detail) {
  const fs::path root = fresh_dir("template_e2e");
  MatchReport report;
  const double overall =
      run_benchmark(root, 2022, DetectorKind::kTemplateMatch, 0, false, &report);
  std::string scores;
  for (const DatasetScore& d : report.per_dataset) {
    scores += d.dataset_name + "=" + std::to_string(d.fscore).substr(0, 6) + " ";
  }
  detail = "overall F = " + std::to_string(overall).substr(0, 6) + " (" + scores + ")";
  fs::remove_all(root);
  ACCEPT_REQUIRE(overall >= 0.90);
}

void check_prototype_end_to_end(std::string& detail) {
  const fs::path root = fresh_dir("proto_e2e");
  MatchReport report;
  const double overall =
      run_benchmark(root, 2023, DetectorKind::kPrototype, 8, false, &report);
  fs::remove_all(root);
  const fs::path swapped_root = fresh_dir("proto_e2e_swapped");
  const double swapped =
      run_benchmark(swapped_root, 2023, DetectorKind::kPrototype, 8, true, nullptr);
  fs::remove_all(swapped_root);
  detail = "overall F = " + std::to_string(overall).substr(0, 6) +
           ", swapped prototypes F = " + std::to_string(swapped).substr(0, 6);
  ACCEPT_REQUIRE(overall >= 0.80);
  ACCEPT_REQUIRE(overall > swapped);
}

void check_determinism(std::string& detail) {
  auto one_run = [&](const std::string& tag) {
    const fs::path root = fresh_dir("determinism_" + tag);
    const fs::path data = root / "data";
    const fs::path preds = root / "preds";
    std::vector<SynthConfig> configs = benchmark_configs(77, 2);
    for (SynthConfig& cfg : configs) cfg.n_files = 2;
    generate_benchmark(configs, data);
    DetectionRunConfig config;
    config.detector = DetectorKind::kTemplateMatch;
    config.jobs = 2;  // byte-identical output must survive the worker pool
    run_detection(data, preds, config);
    MatchReport report =
        run_scoring(preds, data, data / "manifest.csv", MatchConfig{}, FewShotConfig{});
    write_report_file(root / "report.json", report, "determinism",
                      scoring_config_json(MatchConfig{}, FewShotConfig{}));
    return root;
  };
  const fs::path a = one_run("a");
  const fs::path b = one_run("b");
  long compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a / "preds")) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const fs::path rel = fs::relative(entry.path(), a);
    ACCEPT_REQUIRE(slurp(entry.path()) == slurp(b / rel));
    ++compared;
  }
  ACCEPT_REQUIRE(compared == 6);
  ACCEPT_REQUIRE(slurp(a / "report.json") == slurp(b / "report.json"));
  fs::remove_all(a);
  fs::remove_all(b);
  detail = std::to_string(compared) + " prediction files + report byte-identical";
}

void check_dsp_numerics(std::string& detail) {
  // Parseval per frame, 1e-6 relative
  SeededRng rng(301);
  Waveform w;
  w.sample_rate = 22050;
  w.samples.resize(22050);
  for (Index i = 0; i < w.samples.size(); ++i) w.samples[i] = 0.3 * rng.normal();
  const int win = 1024, hop = 256;
  Spectrogram s = stft_magnitude(w, win, hop);
  const ArrayX<double> window = hann_window<double>(win);
  for (Index t = 0; t < s.n_frames(); ++t) {
    double spec_energy = s.values(t, 0) * s.values(t, 0) +
                         s.values(t, s.n_bins() - 1) * s.values(t, s.n_bins() - 1);
    for (Index k = 1; k < s.n_bins() - 1; ++k) {
      spec_energy += 2.0 * s.values(t, k) * s.values(t, k);
    }
    const double time_energy =
        win * (w.samples.segment(t * hop, win) * window).square().sum();
    ACCEPT_REQUIRE(std::abs(spec_energy - time_energy) <= 1e-6 * time_energy);
  }

  // PCEN constant-input closed form, 1e-9
  const PcenParams params{0.025, 0.98, 2.0, 0.5, 1e-6};
  Spectrogram mel;
  mel.values = Eigen::MatrixXd::Constant(40, 6, 1.0);
  mel.hop_s = 0.01;
  Spectrogram out = pcen(mel, params);
  const double closed_form =
      std::pow(1.0 / std::pow(params.eps + 1.0, params.gain) + params.bias,
               params.exponent) -
      std::pow(params.bias, params.exponent);
  ACCEPT_REQUIRE((out.values.array() - closed_form).abs().maxCoeff() < 1e-9);

  // Pearson affine invariance, 1e-9
  SeededRng rng2(302);
  Eigen::MatrixXd a(12, 7), b(12, 7);
  for (Index i = 0; i < a.size(); ++i) {
    a(i) = rng2.normal();
    b(i) = rng2.normal();
  }
  const double base = pearson(a, b);
  const Eigen::MatrixXd affine = 3.0 * b.array() + 2.0;
  ACCEPT_REQUIRE(std::abs(pearson(a, affine) - base) < 1e-9);
  detail = "Parseval 1e-6, PCEN closed form 1e-9, Pearson affine 1e-9";
}

void check_property_suites(std::string& detail) {
  long cases = 0;
  SeededRng rng(401);

  // merge idempotence (3000 cases)
  for (int trial = 0; trial < 3000; ++trial) {
    std::vector<Event> events;
    const int n = (int)rng.index(16);
    for (int i = 0; i < n; ++i) {
      const double onset = rng.uniform(0.0, 20.0);
      events.push_back(make_interval(onset, onset + rng.uniform(0.01, 1.5)));
    }
    std::stable_sort(events.begin(), events.end(), event_less);
    const double gap = rng.uniform(0.0, 0.4);
    std::vector<Event> once = merge_events(events, gap);
    std::vector<Event> twice = merge_events(once, gap);
    ACCEPT_REQUIRE(once.size() == twice.size());
    for (size_t i = 0; i < once.size(); ++i) {
      ACCEPT_REQUIRE(once[i].onset_s == twice[i].onset_s);
      ACCEPT_REQUIRE(once[i].offset_s == twice[i].offset_s);
    }
    ++cases;
  }

  // detection threshold monotonicity (2500 cases)
  for (int trial = 0; trial < 2500; ++trial) {
    DetectionCurve curve;
    curve.hop_s = 0.01;
    curve.scores.resize(40);
    for (Index i = 0; i < curve.scores.size(); ++i) {
      curve.scores[i] = rng.uniform(-1.0, 1.0);
    }
    std::vector<DetectionCurve> curves{curve};
    std::vector<Index> lengths{1 + (Index)rng.index(10)};
    const double lo = rng.uniform(-1.0, 1.0);
    const double hi = rng.uniform(lo, 1.0);
    const size_t n_lo = detect_from_curves(curves, lo, lengths, "q").size();
    const size_t n_hi = detect_from_curves(curves, hi, lengths, "q").size();
    ACCEPT_REQUIRE(n_hi <= n_lo);
    ++cases;
  }

  // probability complement is exact (3000 cases)
  for (int trial = 0; trial < 3000; ++trial) {
    const double d_pos = rng.uniform(0.0, 200.0);
    const double d_neg = rng.uniform(0.0, 200.0);
    const double p = softmax_pair_probability(d_pos, d_neg);
    const double q = softmax_pair_probability(d_neg, d_pos);
    ACCEPT_REQUIRE(p + q == 1.0);
    ACCEPT_REQUIRE(p > 0.0);
    ACCEPT_REQUIRE(p < 1.0);
    ++cases;
  }

  // annotation round trip (2000 cases)
  for (int trial = 0; trial < 2000; ++trial) {
    AnnotationTable table;
    table.audio_file = "r.wav";
    table.class_names = {"a", "b"};
    const int n = (int)rng.index(12);
    for (int i = 0; i < n; ++i) {
      Event e;
      e.onset_s = rng.uniform(0.0, 50.0);
      e.offset_s = e.onset_s + rng.uniform(0.001, 4.0);
      e.class_name = rng.uniform01() < 0.5 ? "a" : "b";
      e.value = rng.uniform01() < 0.7 ? LabelValue::kPos
                                      : (rng.uniform01() < 0.5 ? LabelValue::kNeg
                                                               : LabelValue::kUnk);
      table.events.push_back(std::move(e));
    }
    std::stable_sort(table.events.begin(), table.events.end(), event_less);
    AnnotationTable back = parse_annotation_csv(write_annotation_csv(table));
    ACCEPT_REQUIRE(back.events.size() == table.events.size());
    for (size_t i = 0; i < back.events.size(); ++i) {
      ACCEPT_REQUIRE(std::abs(back.events[i].onset_s - table.events[i].onset_s) <= 1e-6);
      ACCEPT_REQUIRE(std::abs(back.events[i].offset_s - table.events[i].offset_s) <= 1e-6);
      ACCEPT_REQUIRE(back.events[i].class_name == table.events[i].class_name);
      ACCEPT_REQUIRE(back.events[i].value == table.events[i].value);
    }
    ++cases;
  }
  detail = std::to_string(cases) + " randomized cases";
}

}  // namespace

int main() {
  const std::vector<Check> checks = {
      {"matching-oracle-equivalence", check_matching_oracle},
      {"hopcroft-karp-cardinality", check_hopcroft_karp},
      {"metric-arithmetic", check_metric_arithmetic},
      {"iou-threshold-edge", check_iou_threshold_edge},
      {"template-matching-end-to-end", check_template_end_to_end},
      {"prototype-detector-end-to-end", check_prototype_end_to_end},
      {"determinism-suite", check_determinism},
      {"dsp-numerical-checks", check_dsp_numerics},
      {"property-suites", check_property_suites},
  };

  int failures = 0;
  for (const Check& check : checks) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      check.body(detail);
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %s (%.1f s)%s%s\n", ok ? "PASS" : "FAIL", check.name.c_str(),
                seconds, detail.empty() ? "" : ": ", detail.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
