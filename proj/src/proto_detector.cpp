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

#include "fsed/proto_detector.hpp"

#include <cfloat>
#include <cmath>

namespace fsed {

std::string_view Embedder::name() const {
  switch (kind) {
    case EmbedderKind::kFlattenPcen: return "flatten-pcen";
    case EmbedderKind::kMeanPcen: return "mean-pcen";
  }
  return "mean-pcen";
}

Index Embedder::dim(Index seg_len_frames, Index n_bins) const {
  switch (kind) {
    case EmbedderKind::kFlattenPcen: return seg_len_frames * n_bins;
    case EmbedderKind::kMeanPcen: return n_bins;
  }
  return n_bins;
}

Embedder embedder_from_name(std::string_view name) {
  if (name == "flatten-pcen") return Embedder{EmbedderKind::kFlattenPcen};
  if (name == "mean-pcen") return Embedder{EmbedderKind::kMeanPcen};
  throw Error("unknown embedder '" + std::string(name) +
              "' (expected flatten-pcen or mean-pcen)");
}

Index adaptive_segment_length(std::span<const Event> support, double hop_s,
                              Index max_seg_frames) {
  if (support.empty()) throw Error("empty support set");
  if (!(hop_s > 0.0)) throw Error("hop must be positive");
  double mean_duration = 0.0;
  for (const Event& e : support) mean_duration += e.duration_s();
  mean_duration /= static_cast<double>(support.size());
  const Index frames = static_cast<Index>(std::llround(mean_duration / hop_s));
  return std::clamp<Index>(frames, 2, max_seg_frames);
}

double softmax_pair_probability(double d_self, double d_other) {
  // Branch on the smaller distance so that the swapped call evaluates the
  // same intermediate q and returns exactly its complement.
  if (d_self <= d_other) {
    double q = 1.0 / (1.0 + std::exp(d_self - d_other));
    if (q >= 1.0) q = 1.0 - DBL_EPSILON / 2;  // exp underflowed
    return q;
  }
  double q = 1.0 / (1.0 + std::exp(d_other - d_self));
  if (q >= 1.0) q = 1.0 - DBL_EPSILON / 2;
  return 1.0 - q;
}

std::vector<Event> probabilities_to_events(const Eigen::ArrayXd& probs,
                                           const SegmentGrid& grid, double threshold,
                                           double query_start_s,
                                           const std::string& class_name) {
  if (probs.size() != static_cast<Index>(grid.starts.size())) {
    throw Error("probability/grid length mismatch");
  }
  // Merge overlapping or touching positive segment spans in frame space.
  std::vector<std::pair<Index, Index>> spans;  // [first, last) frames
  for (Index i = 0; i < probs.size(); ++i) {
    if (probs[i] < threshold) continue;
    const Index first = grid.starts[static_cast<size_t>(i)];
    const Index last = first + grid.seg_len_frames;
    if (!spans.empty() && first <= spans.back().second) {
      spans.back().second = std::max(spans.back().second, last);
    } else {
      spans.emplace_back(first, last);
    }
  }
  std::vector<Event> events;
  for (const auto& [first, last] : spans) {
    Event e;
    e.onset_s = grid.t0_s + first * grid.hop_s;
    e.offset_s = grid.t0_s + last * grid.hop_s;
    e.class_name = class_name;
    e.value = LabelValue::kPos;
    if (e.offset_s <= query_start_s) continue;
    e.onset_s = std::max(e.onset_s, query_start_s);
    events.push_back(std::move(e));
  }
  return events;
}

}  // namespace fsed
