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

#ifndef FSED_SCORING_HPP_
#define FSED_SCORING_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fsed/annotations.hpp"

namespace fsed {

struct MatchConfig {
  double iou_min = 0.3;  // inclusive IoU threshold for a candidate match
};

struct Counts {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
};

struct PrecisionRecallF {
  double precision = 0.0;
  double recall = 0.0;
  double fscore = 0.0;
};

struct DatasetScore {
  std::string dataset_name;
  Counts counts;
  double precision = 0.0;
  double recall = 0.0;
  double fscore = 0.0;        // from counts summed over the dataset's episodes
  double macro_fscore = 0.0;  // mean of per-class F within the dataset
  long n_episodes = 0;
  long n_discarded = 0;  // predictions ending inside a support region
};

struct MatchReport {
  std::vector<DatasetScore> per_dataset;  // sorted by dataset name
  double overall = 0.0;        // harmonic mean of per-dataset fscore
  double overall_macro = 0.0;  // harmonic mean of per-dataset macro_fscore
  long total_discarded = 0;
};

// Intersection over union of two time intervals, 0 when disjoint (touching
// endpoints count as disjoint). Symmetric, in [0, 1].
double interval_iou(double a_onset, double a_offset, double b_onset, double b_offset);
double interval_iou(const Event& a, const Event& b);

// All (prediction index, reference index) pairs with IoU >= iou_min. Inputs
// must be sorted by onset; a sweep keeps the cost near O(P + R + E) instead of
// O(P * R) for inputs without heavily nested intervals.
std::vector<std::pair<int, int>> build_candidate_edges(std::span<const Event> preds,
                                                       std::span<const Event> refs,
                                                       const MatchConfig& config);

// Maximum-cardinality bipartite matching (Hopcroft-Karp). Edge endpoints must
// satisfy 0 <= first < n_left and 0 <= second < n_right.
std::vector<std::pair<int, int>> max_bipartite_matching(
    const std::vector<std::pair<int, int>>& edges, int n_left, int n_right);

// Scores one episode. Predictions ending at or before query_start_s are
// discarded first (counted into *n_discarded when given). Matching maximizes
// TP against the POS references, then lets leftover predictions be absorbed by
// UNK references; absorbed predictions are not counted as FP. The result is
// the lexicographic optimum over all matchings (TP first, then absorption), so
// counts do not depend on matching tie-breaks. tp + fn == |reference_pos|.
Counts count_episode(std::vector<Event> preds, const FewShotEpisode& episode,
                     const MatchConfig& config, long* n_discarded = nullptr);

// precision = tp/(tp+fp), recall = tp/(tp+fn), F = harmonic mean of the two;
// every 0/0 is defined as 0.
PrecisionRecallF fscore(const Counts& counts);

// n / sum(1 / max(v_i, 1e-12)). Zero-dominant: one zero drags the mean to
// ~1e-12 * n. Throws Error on an empty list.
double harmonic_mean(std::span<const double> values);

// Full evaluation: one episode per (file, class with >= k_shot POS events),
// counts summed per dataset, F per dataset, overall harmonic mean. Files in
// the ground truth with no prediction entry are scored as all-miss. A
// prediction for a file without ground truth or without a dataset assignment
// is an error.
MatchReport evaluate(const std::map<std::string, std::vector<Event>>& predictions,
                     const std::map<std::string, AnnotationTable>& ground_truth,
                     const std::map<std::string, std::string>& dataset_of,
                     const MatchConfig& match_config,
                     const FewShotConfig& fewshot_config);

}  // namespace fsed

#endif  // FSED_SCORING_HPP_
