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

#include "fsed/scoring.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace fsed {
namespace {

constexpr double kHarmonicEps = 1e-12;

void validate(const MatchConfig& config) {
  if (!(config.iou_min > 0.0 && config.iou_min <= 1.0)) {
    throw Error("iou_min must be in (0, 1]");
  }
}

// Hopcroft-Karp. Left vertices are matched greedily along shortest augmenting
// paths found by BFS layering; overall O(E * sqrt(V)).
class HopcroftKarp {
 public:
  HopcroftKarp(const std::vector<std::pair<int, int>>& edges, int n_left, int n_right)
      : n_left_(n_left),
        adj_(n_left),
        match_left_(n_left, -1),
        match_right_(n_right, -1),
        dist_(n_left) {
    for (const auto& [u, v] : edges) {
      if (u < 0 || u >= n_left || v < 0 || v >= n_right) {
        throw Error("matching edge endpoint out of bounds");
      }
      adj_[u].push_back(v);
    }
  }

  std::vector<std::pair<int, int>> run() {
    while (bfs()) {
      for (int u = 0; u < n_left_; ++u) {
        if (match_left_[u] == -1) dfs(u);
      }
    }
    std::vector<std::pair<int, int>> matched;
    for (int u = 0; u < n_left_; ++u) {
      if (match_left_[u] != -1) matched.emplace_back(u, match_left_[u]);
    }
    return matched;
  }

 private:
  static constexpr int kInf = std::numeric_limits<int>::max();

  bool bfs() {
    std::queue<int> queue;
    for (int u = 0; u < n_left_; ++u) {
      if (match_left_[u] == -1) {
        dist_[u] = 0;
        queue.push(u);
      } else {
        dist_[u] = kInf;
      }
    }
    bool reachable_free_right = false;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop();
      for (int v : adj_[u]) {
        int w = match_right_[v];
        if (w == -1) {
          reachable_free_right = true;
        } else if (dist_[w] == kInf) {
          dist_[w] = dist_[u] + 1;
          queue.push(w);
        }
      }
    }
    return reachable_free_right;
  }

  bool dfs(int u) {
    for (int v : adj_[u]) {
      int w = match_right_[v];
      if (w == -1 || (dist_[w] == dist_[u] + 1 && dfs(w))) {
        match_left_[u] = v;
        match_right_[v] = u;
        return true;
      }
    }
    dist_[u] = kInf;
    return false;
  }

  int n_left_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> match_left_;
  std::vector<int> match_right_;
  std::vector<int> dist_;
};

}  // namespace

double interval_iou(double a_onset, double a_offset, double b_onset, double b_offset) {
  double inter = std::min(a_offset, b_offset) - std::max(a_onset, b_onset);
  if (inter <= 0.0) return 0.0;
  double uni = (a_offset - a_onset) + (b_offset - b_onset) - inter;
  return inter / uni;
}

double interval_iou(const Event& a, const Event& b) {
  return interval_iou(a.onset_s, a.offset_s, b.onset_s, b.offset_s);
}

std::vector<std::pair<int, int>> build_candidate_edges(std::span<const Event> preds,
                                                       std::span<const Event> refs,
                                                       const MatchConfig& config) {
  validate(config);
  std::vector<std::pair<int, int>> edges;
  size_t j_start = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    // References ending before this prediction starts can never overlap any
    // later prediction either (onsets are non-decreasing).
    while (j_start < refs.size() && refs[j_start].offset_s <= preds[i].onset_s) {
      ++j_start;
    }
    for (size_t j = j_start; j < refs.size() && refs[j].onset_s < preds[i].offset_s;
         ++j) {
      if (interval_iou(preds[i], refs[j]) >= config.iou_min) {
        edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  return edges;
}

std::vector<std::pair<int, int>> max_bipartite_matching(
    const std::vector<std::pair<int, int>>& edges, int n_left, int n_right) {
  if (n_left < 0 || n_right < 0) throw Error("negative vertex count");
  return HopcroftKarp(edges, n_left, n_right).run();
}

Counts count_episode(std::vector<Event> preds, const FewShotEpisode& episode,
                     const MatchConfig& config, long* n_discarded) {
  validate(config);
  size_t before = preds.size();
  std::erase_if(preds, [&](const Event& e) {
    return e.offset_s <= episode.query_start_s;
  });
  if (n_discarded != nullptr) {
    *n_discarded = static_cast<long>(before - preds.size());
  }
  std::stable_sort(preds.begin(), preds.end(), event_less);

  const int n_preds = static_cast<int>(preds.size());
  const int n_pos = static_cast<int>(episode.reference_pos.size());
  const int n_unk = static_cast<int>(episode.reference_unk.size());

  std::vector<std::pair<int, int>> pos_edges =
      build_candidate_edges(preds, episode.reference_pos, config);
  long max_tp =
      static_cast<long>(max_bipartite_matching(pos_edges, n_preds, n_pos).size());

  // Maximizing TP and then UNK absorption is equivalent to pairing the
  // POS-only maximum with the maximum over the combined POS+UNK graph: any
  // combined matching has at most max_tp POS pairs, and augmenting a POS-only
  // maximum inside the combined graph only ever adds UNK pairs. So
  // absorbed = max_combined - max_tp, independent of tie-breaking.
  std::vector<std::pair<int, int>> combined = pos_edges;
  for (auto [i, j] : build_candidate_edges(preds, episode.reference_unk, config)) {
    combined.emplace_back(i, j + n_pos);
  }
  long max_combined = static_cast<long>(
      max_bipartite_matching(combined, n_preds, n_pos + n_unk).size());

  Counts counts;
  counts.tp = max_tp;
  counts.fn = n_pos - max_tp;
  counts.fp = n_preds - max_combined;
  return counts;
}

PrecisionRecallF fscore(const Counts& counts) {
  if (counts.tp < 0 || counts.fp < 0 || counts.fn < 0) {
    throw Error("negative count");
  }
  PrecisionRecallF out;
  if (counts.tp + counts.fp > 0) {
    out.precision = static_cast<double>(counts.tp) / (counts.tp + counts.fp);
  }
  if (counts.tp + counts.fn > 0) {
    out.recall = static_cast<double>(counts.tp) / (counts.tp + counts.fn);
  }
  if (out.precision + out.recall > 0.0) {
    out.fscore = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

double harmonic_mean(std::span<const double> values) {
  if (values.empty()) throw Error("harmonic mean of an empty list");
  double denom = 0.0;
  for (double v : values) {
    if (v < 0.0 || v > 1.0) throw Error("harmonic mean input outside [0, 1]");
    denom += 1.0 / std::max(v, kHarmonicEps);
  }
  return static_cast<double>(values.size()) / denom;
}

MatchReport evaluate(const std::map<std::string, std::vector<Event>>& predictions,
                     const std::map<std::string, AnnotationTable>& ground_truth,
                     const std::map<std::string, std::string>& dataset_of,
                     const MatchConfig& match_config,
                     const FewShotConfig& fewshot_config) {
  validate(match_config);
  for (const auto& [file, events] : predictions) {
    if (!ground_truth.count(file)) {
      throw Error("prediction for unknown file '" + file + "'");
    }
  }

  struct DatasetAccum {
    Counts counts;
    long n_episodes = 0;
    long n_discarded = 0;
    std::map<std::string, Counts> per_class;
  };
  std::map<std::string, DatasetAccum> accum;
  static const std::vector<Event> kNoPredictions;

  for (const auto& [file, table] : ground_truth) {
    auto dataset_it = dataset_of.find(file);
    if (dataset_it == dataset_of.end()) {
      throw Error("file '" + file + "' has no dataset assignment");
    }
    DatasetAccum& acc = accum[dataset_it->second];
    auto pred_it = predictions.find(file);
    const std::vector<Event>& preds =
        pred_it != predictions.end() ? pred_it->second : kNoPredictions;
    for (const std::string& class_name : table.class_names) {
      long n_pos = 0;
      for (const Event& e : table.events) {
        if (e.class_name == class_name && e.value == LabelValue::kPos) ++n_pos;
      }
      if (n_pos < fewshot_config.k_shot) continue;  // no episode for this class
      FewShotEpisode episode = extract_episode(table, class_name, fewshot_config);
      long discarded = 0;
      Counts counts = count_episode(preds, episode, match_config, &discarded);
      acc.counts += counts;
      acc.per_class[class_name] += counts;
      acc.n_episodes += 1;
      acc.n_discarded += discarded;
    }
  }

  MatchReport report;
  std::vector<double> dataset_f;
  std::vector<double> dataset_macro_f;
  for (const auto& [dataset, acc] : accum) {
    DatasetScore score;
    score.dataset_name = dataset;
    score.counts = acc.counts;
    PrecisionRecallF prf = fscore(acc.counts);
    score.precision = prf.precision;
    score.recall = prf.recall;
    score.fscore = prf.fscore;
    double macro_sum = 0.0;
    for (const auto& [class_name, counts] : acc.per_class) {
      macro_sum += fscore(counts).fscore;
    }
    score.macro_fscore =
        acc.per_class.empty() ? 0.0 : macro_sum / static_cast<double>(acc.per_class.size());
    score.n_episodes = acc.n_episodes;
    score.n_discarded = acc.n_discarded;
    report.total_discarded += acc.n_discarded;
    dataset_f.push_back(score.fscore);
    dataset_macro_f.push_back(score.macro_fscore);
    report.per_dataset.push_back(std::move(score));
  }
  if (!report.per_dataset.empty()) {
    report.overall = harmonic_mean(dataset_f);
    report.overall_macro = harmonic_mean(dataset_macro_f);
  }
  return report;
}

}  // namespace fsed
