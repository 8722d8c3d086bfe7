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
// Prototype-distance detector: embed fixed-length spectrogram segments with a
// deterministic (non-trained) embedding, build a positive prototype from the
// support events and a negative prototype from sampled background segments,
// then classify query segments by squared-Euclidean distance to the two
// prototypes. The segment length adapts to the target class (mean support
// event duration).

#ifndef FSED_PROTO_DETECTOR_HPP_
#define FSED_PROTO_DETECTOR_HPP_

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fsed/annotations.hpp"
#include "fsed/dsp.hpp"
#include "fsed/rng.hpp"

namespace fsed {

// Deterministic segment embeddings over PCEN mel frames.
enum class EmbedderKind {
  kFlattenPcen,  // concatenate the segment's frames
  kMeanPcen,     // per-bin average over the segment's frames
};

struct Embedder {
  EmbedderKind kind = EmbedderKind::kMeanPcen;

  std::string_view name() const;
  Index dim(Index seg_len_frames, Index n_bins) const;
};

// Accepts "flatten-pcen" and "mean-pcen".
Embedder embedder_from_name(std::string_view name);

template <typename Scalar>
VectorX<Scalar> embed_segment(const Embedder& embedder,
                              const Eigen::Ref<const MatrixX<Scalar>>& segment) {
  switch (embedder.kind) {
    case EmbedderKind::kFlattenPcen: {
      MatrixX<Scalar> copy = segment;
      return Eigen::Map<VectorX<Scalar>>(copy.data(), copy.size());
    }
    case EmbedderKind::kMeanPcen:
      return segment.colwise().mean().transpose();
  }
  throw Error("unknown embedder kind");
}

// Class centroid in embedding space.
template <typename Scalar>
struct BasicPrototype {
  VectorX<Scalar> centroid;
  int n_sources = 0;  // segments averaged
  LabelValue polarity = LabelValue::kPos;
};
using Prototype = BasicPrototype<double>;

// Fixed-length segmentation of the query region.
struct SegmentGrid {
  Index seg_len_frames = 0;
  Index seg_hop_frames = 0;
  std::vector<Index> starts;  // frame index of each segment
  double hop_s = 0.0;
  double t0_s = 0.0;
};

// Segment length tracking the target class: round(mean support duration /
// hop), clamped to [2, max_seg_frames].
Index adaptive_segment_length(std::span<const Event> support, double hop_s,
                              Index max_seg_frames = 128);

// Segment starts covering frames from the query boundary to the end of the
// spectrogram. Can be empty when the query region is shorter than a segment.
template <typename Scalar>
SegmentGrid make_segment_grid(const BasicSpectrogram<Scalar>& spec,
                              double query_start_s, Index seg_len_frames,
                              Index seg_hop_frames) {
  if (seg_len_frames < 1 || seg_hop_frames < 1) {
    throw Error("segment length and hop must be >= 1");
  }
  SegmentGrid grid;
  grid.seg_len_frames = seg_len_frames;
  grid.seg_hop_frames = seg_hop_frames;
  grid.hop_s = spec.hop_s;
  grid.t0_s = spec.t0_s;
  Index start = std::max<Index>(0, frame_ceil(query_start_s, spec.t0_s, spec.hop_s));
  for (; start + seg_len_frames <= spec.n_frames(); start += seg_hop_frames) {
    grid.starts.push_back(start);
  }
  return grid;
}

// Two-way softmax exp(-d_self) / (exp(-d_self) + exp(-d_other)) in an exactly
// complement-symmetric form: evaluating with the distances swapped returns
// exactly 1 - p, and the result stays strictly inside (0, 1).
double softmax_pair_probability(double d_self, double d_other);

// Thresholds segment probabilities (p >= threshold), merges overlapping or
// adjacent positive segment spans, converts merged spans to events via the
// frame-time mapping, and clips every event to start at or after
// query_start_s.
std::vector<Event> probabilities_to_events(const Eigen::ArrayXd& probs,
                                           const SegmentGrid& grid, double threshold,
                                           double query_start_s,
                                           const std::string& class_name);

// Builds the two prototypes from the support region [0, query_start_s). The
// positive centroid averages one segment per support event, centred on the
// event midpoint. The negative centroid averages neg_samples segments drawn
// (seeded, with replacement) from segment positions that overlap no POS/UNK
// event of the target class; positions lying fully inside NEG-labelled
// regions are preferred when any exist. Throws when no position is eligible.
template <typename Scalar>
std::pair<BasicPrototype<Scalar>, BasicPrototype<Scalar>> build_prototypes(
    const BasicSpectrogram<Scalar>& spec, const AnnotationTable& table,
    const FewShotEpisode& episode, const Embedder& embedder, Index seg_len_frames,
    int neg_samples, uint64_t rng_seed) {
  if (neg_samples < 1) throw Error("neg_samples must be >= 1");
  if (episode.support.empty()) throw Error("empty support set");
  const Index n_frames = spec.n_frames();
  const Index n_bins = spec.n_bins();
  if (seg_len_frames < 1 || seg_len_frames > n_frames) {
    throw Error("segment length outside the spectrogram");
  }

  BasicPrototype<Scalar> pos;
  pos.polarity = LabelValue::kPos;
  pos.n_sources = static_cast<int>(episode.support.size());
  pos.centroid = VectorX<Scalar>::Zero(embedder.dim(seg_len_frames, n_bins));
  for (const Event& e : episode.support) {
    const double mid_s = 0.5 * (e.onset_s + e.offset_s);
    Index mid = static_cast<Index>(std::llround((mid_s - spec.t0_s) / spec.hop_s));
    Index start = std::clamp<Index>(mid - seg_len_frames / 2, 0, n_frames - seg_len_frames);
    pos.centroid += embed_segment<Scalar>(
        embedder, spec.values.block(start, 0, seg_len_frames, n_bins));
  }
  pos.centroid /= static_cast<Scalar>(pos.n_sources);

  // Frames blocked for negative sampling: any overlap with a POS or UNK event
  // of the target class. NEG coverage is tracked separately for the
  // preference rule.
  const Index query_frame =
      std::clamp<Index>(frame_ceil(episode.query_start_s, spec.t0_s, spec.hop_s), 0, n_frames);
  std::vector<int> blocked(static_cast<size_t>(n_frames), 0);
  std::vector<int> neg_covered(static_cast<size_t>(n_frames), 0);
  for (const Event& e : table.events) {
    if (e.class_name != episode.class_name) continue;
    const Index first = std::clamp<Index>(frame_floor(e.onset_s, spec.t0_s, spec.hop_s),
                                          0, n_frames - 1);
    const Index last = std::clamp<Index>(frame_ceil(e.offset_s, spec.t0_s, spec.hop_s),
                                         first, n_frames - 1);
    for (Index f = first; f <= last; ++f) {
      if (e.value == LabelValue::kNeg) {
        neg_covered[static_cast<size_t>(f)] = 1;
      } else {
        blocked[static_cast<size_t>(f)] = 1;
      }
    }
  }
  std::vector<Index> blocked_prefix(static_cast<size_t>(n_frames) + 1, 0);
  std::vector<Index> neg_prefix(static_cast<size_t>(n_frames) + 1, 0);
  for (Index f = 0; f < n_frames; ++f) {
    blocked_prefix[f + 1] = blocked_prefix[f] + blocked[static_cast<size_t>(f)];
    neg_prefix[f + 1] = neg_prefix[f] + neg_covered[static_cast<size_t>(f)];
  }

  std::vector<Index> eligible;
  std::vector<Index> eligible_neg;
  for (Index start = 0; start + seg_len_frames <= query_frame; ++start) {
    if (blocked_prefix[start + seg_len_frames] - blocked_prefix[start] > 0) continue;
    eligible.push_back(start);
    if (neg_prefix[start + seg_len_frames] - neg_prefix[start] == seg_len_frames) {
      eligible_neg.push_back(start);
    }
  }
  if (eligible.empty()) {
    throw Error("no negative-eligible segment in the support region of '" +
                episode.audio_file + "'");
  }
  const std::vector<Index>& pool = eligible_neg.empty() ? eligible : eligible_neg;

  BasicPrototype<Scalar> neg;
  neg.polarity = LabelValue::kNeg;
  neg.n_sources = neg_samples;
  neg.centroid = VectorX<Scalar>::Zero(embedder.dim(seg_len_frames, n_bins));
  SeededRng rng(rng_seed);
  for (int i = 0; i < neg_samples; ++i) {
    const Index start = pool[rng.index(pool.size())];
    neg.centroid += embed_segment<Scalar>(
        embedder, spec.values.block(start, 0, seg_len_frames, n_bins));
  }
  neg.centroid /= static_cast<Scalar>(neg_samples);
  return {std::move(pos), std::move(neg)};
}

// p(POS) for each grid segment.
template <typename Scalar>
Eigen::ArrayXd segment_probabilities(const BasicSpectrogram<Scalar>& spec,
                                     const SegmentGrid& grid, const Embedder& embedder,
                                     const BasicPrototype<Scalar>& pos,
                                     const BasicPrototype<Scalar>& neg) {
  if (pos.centroid.size() != neg.centroid.size()) {
    throw Error("prototype dimension mismatch");
  }
  if (!grid.starts.empty() &&
      pos.centroid.size() != embedder.dim(grid.seg_len_frames, spec.n_bins())) {
    throw Error("prototype dimension does not match the embedder");
  }
  Eigen::ArrayXd probs(static_cast<Index>(grid.starts.size()));
  for (size_t i = 0; i < grid.starts.size(); ++i) {
    const VectorX<Scalar> z = embed_segment<Scalar>(
        embedder,
        spec.values.block(grid.starts[i], 0, grid.seg_len_frames, spec.n_bins()));
    const double d_pos = static_cast<double>((z - pos.centroid).squaredNorm());
    const double d_neg = static_cast<double>((z - neg.centroid).squaredNorm());
    probs[static_cast<Index>(i)] = softmax_pair_probability(d_pos, d_neg);
  }
  return probs;
}

}  // namespace fsed

#endif  // FSED_PROTO_DETECTOR_HPP_
