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
// fsed: few-shot sound event detection toolkit.
//
//   fsed synth            generate a synthetic benchmark (wav + csv + manifest)
//   fsed detect-template  template-matching baseline over a benchmark directory
//   fsed detect-proto     prototype-distance baseline over a benchmark directory
//   fsed score            event-level evaluation (IoU matching, per-dataset F,
//                         harmonic-mean summary)
//   fsed report           leaderboard table from one or more score reports
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fsed/pipeline.hpp"
#include "fsed/report.hpp"
#include "fsed/synth.hpp"

namespace {

using namespace fsed;

struct SynthOptions {
  std::string out_dir;
  uint64_t seed = 1;
  std::vector<std::string> datasets = {"tone", "chirp", "pulse"};
  int files = 10;
  int events_min = 6;
  int events_max = 12;
  double duration_s = 24.0;
  int sample_rate = 22050;
  double snr_db = 20.0;
  double unk_fraction = 0.0;
  int distractors = 0;
  bool distractors_as_neg = false;
  int k_shot = 5;
};

// Per-archetype default bands (fundamental frequency ranges in Hz).
void apply_kind_defaults(SynthConfig& cfg) {
  switch (cfg.kind) {
    case EventKind::kTone:
      cfg.f_min_hz = 2000.0;
      cfg.f_max_hz = 4000.0;
      break;
    case EventKind::kChirp:
      cfg.f_min_hz = 2000.0;
      cfg.f_max_hz = 3500.0;
      break;
    case EventKind::kPulseTrain:
      cfg.f_min_hz = 2500.0;
      cfg.f_max_hz = 4000.0;
      break;
  }
}

int cmd_synth(const SynthOptions& opt) {
  std::vector<SynthConfig> configs;
  for (size_t i = 0; i < opt.datasets.size(); ++i) {
    SynthConfig cfg;
    cfg.dataset_name = opt.datasets[i];
    cfg.class_name = opt.datasets[i];
    cfg.kind = event_kind_from_name(opt.datasets[i]);
    apply_kind_defaults(cfg);
    cfg.rng_seed = derive_seed(opt.seed, i);
    cfg.n_files = opt.files;
    cfg.n_events_min = opt.events_min;
    cfg.n_events_max = opt.events_max;
    cfg.duration_s = opt.duration_s;
    cfg.sample_rate = opt.sample_rate;
    cfg.snr_db = opt.snr_db;
    cfg.unk_fraction = opt.unk_fraction;
    cfg.distractor_count = opt.distractors;
    cfg.distractors_as_neg = opt.distractors_as_neg;
    cfg.k_shot = opt.k_shot;
    configs.push_back(std::move(cfg));
  }
  generate_benchmark(configs, opt.out_dir);
  std::cout << "wrote " << opt.datasets.size() << " dataset(s) x " << opt.files
            << " file(s) to " << opt.out_dir << "\n";
  return 0;
}

struct DetectOptions {
  std::string input_dir;
  std::string out_dir;
  DetectionRunConfig run;
};

int cmd_detect(const DetectOptions& opt) {
  DetectionRunResult result = run_detection(opt.input_dir, opt.out_dir, opt.run);
  long events = 0;
  long discarded = 0;
  for (const FileDetection& f : result.files) {
    events += static_cast<long>(f.events.size());
    discarded += f.n_discarded;
  }
  std::cout << "detected " << events << " event(s) over " << result.files.size()
            << " file(s), " << discarded << " discarded; log: "
            << result.log_path.string() << "\n";
  return 0;
}

struct ScoreOptions {
  std::string pred_dir;
  std::string ref_dir;
  std::string manifest;
  std::string out_json = "report.json";
  std::string run_name = "run";
  bool per_class_macro = false;
  MatchConfig match;
  FewShotConfig few_shot;
};

int cmd_score(const ScoreOptions& opt) {
  const std::string manifest =
      opt.manifest.empty() ? (std::filesystem::path(opt.ref_dir) / "manifest.csv").string()
                           : opt.manifest;
  MatchReport report =
      run_scoring(opt.pred_dir, opt.ref_dir, manifest, opt.match, opt.few_shot);
  std::cout << format_report_table(report, opt.per_class_macro);
  write_report_file(opt.out_json, report, opt.run_name,
                    scoring_config_json(opt.match, opt.few_shot));
  std::cout << "report written to " << opt.out_json << "\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& report_files) {
  std::vector<LeaderboardEntry> entries;
  for (const std::string& path : report_files) {
    entries.push_back(read_report_entry(path));
  }
  const std::vector<LeaderboardEntry> sorted = sort_leaderboard(std::move(entries));
  std::cout << format_leaderboard(sorted);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fsed: few-shot sound event detection toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file with defaults for any option");

  SynthOptions synth_opt;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic benchmark");
  synth->add_option("--out", synth_opt.out_dir, "output directory")->required();
  synth->add_option("--seed", synth_opt.seed, "master seed");
  synth->add_option("--datasets", synth_opt.datasets,
                    "dataset archetypes (tone, chirp, pulse)")
      ->delimiter(',');
  synth->add_option("--files", synth_opt.files, "files per dataset");
  synth->add_option("--events-min", synth_opt.events_min, "min target events per file");
  synth->add_option("--events-max", synth_opt.events_max, "max target events per file");
  synth->add_option("--duration", synth_opt.duration_s, "file duration in seconds");
  synth->add_option("--sample-rate", synth_opt.sample_rate, "sample rate in Hz");
  synth->add_option("--snr-db", synth_opt.snr_db, "event band SNR in dB");
  synth->add_option("--unk-fraction", synth_opt.unk_fraction,
                    "fraction of target events labelled UNK");
  synth->add_option("--distractors", synth_opt.distractors,
                    "distractor events per file (disjoint band)");
  synth->add_flag("--distractors-as-neg", synth_opt.distractors_as_neg,
                  "write distractors as NEG rows");
  synth->add_option("--k-shot", synth_opt.k_shot, "support events per file");

  auto add_detect_options = [](CLI::App* cmd, DetectOptions& opt) {
    cmd->add_option("--input", opt.input_dir, "directory of (wav, csv) pairs")->required();
    cmd->add_option("--out", opt.out_dir, "prediction output directory")->required();
    cmd->add_option("--jobs", opt.run.jobs, "worker pool size (0 = auto)");
    cmd->add_option("--k-shot", opt.run.few_shot.k_shot, "support events per episode");
    cmd->add_option("--sample-rate", opt.run.frontend.sample_rate, "processing rate");
    cmd->add_option("--win", opt.run.frontend.win, "STFT window in samples");
    cmd->add_option("--hop", opt.run.frontend.hop, "STFT hop in samples");
    cmd->add_option("--n-mels", opt.run.frontend.n_mels, "mel bands");
    cmd->add_option("--f-min", opt.run.frontend.f_min, "mel range lower edge (Hz)");
    cmd->add_option("--f-max", opt.run.frontend.f_max, "mel range upper edge (0 = Nyquist)");
    cmd->add_option("--merge-gap", opt.run.postprocess.merge_gap_s,
                    "merge events closer than this gap (s)");
    cmd->add_option("--min-duration-factor", opt.run.postprocess.min_duration_factor,
                    "drop events shorter than factor * mean shot duration");
    cmd->add_option("--median-kernel", opt.run.postprocess.median_kernel,
                    "odd median filter kernel for score curves");
  };

  DetectOptions template_opt;
  template_opt.run.detector = DetectorKind::kTemplateMatch;
  CLI::App* detect_template =
      app.add_subcommand("detect-template", "template-matching baseline");
  add_detect_options(detect_template, template_opt);
  detect_template->add_option("--threshold", template_opt.run.template_match.threshold,
                              "correlation threshold");

  DetectOptions proto_opt;
  proto_opt.run.detector = DetectorKind::kPrototype;
  CLI::App* detect_proto =
      app.add_subcommand("detect-proto", "prototype-distance baseline");
  add_detect_options(detect_proto, proto_opt);
  detect_proto->add_option("--threshold", proto_opt.run.prototype.threshold,
                           "probability threshold");
  detect_proto->add_option("--embedder", proto_opt.run.prototype.embedder,
                           "flatten-pcen or mean-pcen");
  detect_proto->add_option("--neg-samples", proto_opt.run.prototype.neg_samples,
                           "segments averaged into the negative prototype");
  detect_proto->add_option("--rng-seed", proto_opt.run.prototype.rng_seed,
                           "seed for negative sampling");
  detect_proto->add_flag("--swap-prototypes", proto_opt.run.prototype.swap_prototypes,
                         "invert the decision (sanity check)");

  ScoreOptions score_opt;
  CLI::App* score = app.add_subcommand("score", "event-level evaluation");
  score->add_option("--pred", score_opt.pred_dir, "prediction directory")->required();
  score->add_option("--ref", score_opt.ref_dir, "ground-truth directory")->required();
  score->add_option("--manifest", score_opt.manifest,
                    "file-to-dataset manifest (default <ref>/manifest.csv)");
  score->add_option("--out", score_opt.out_json, "structured report path");
  score->add_option("--name", score_opt.run_name, "run name recorded in the report");
  score->add_option("--iou-min", score_opt.match.iou_min, "minimum IoU for a match");
  score->add_option("--k-shot", score_opt.few_shot.k_shot, "support events per episode");
  score->add_flag("--per-class-macro", score_opt.per_class_macro,
                  "also show the per-class macro-averaged F column");

  std::vector<std::string> report_files;
  CLI::App* report = app.add_subcommand("report", "leaderboard from score reports");
  report->add_option("reports", report_files, "report.json files")
      ->required()
      ->expected(-1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_opt);
    if (detect_template->parsed()) return cmd_detect(template_opt);
    if (detect_proto->parsed()) return cmd_detect(proto_opt);
    if (score->parsed()) return cmd_score(score_opt);
    if (report->parsed()) return cmd_report(report_files);
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const fsed::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
