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
// Template-matching detector: slide each support-event spectrogram patch over
// the query spectrogram, score positions by zero-mean normalized
// cross-correlation (Pearson over all patch cells), fuse the per-template
// curves by a per-frame maximum, and turn above-threshold runs into events.

#ifndef FSED_TEMPLATE_MATCH_HPP_
#define FSED_TEMPLATE_MATCH_HPP_

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "fsed/annotations.hpp"
#include "fsed/dsp.hpp"
#include "fsed/postprocess.hpp"

namespace fsed {

// A support event's spectrogram slice. Zero-norm patches are rejected at
// construction time (extract_templates drops them).
template <typename Scalar>
struct BasicTemplate {
  MatrixX<Scalar> patch;  // n_frames_t x n_bins
  Event source_event;
  double hop_s = 0.0;
  double t0_s = 0.0;

  Index n_frames() const { return patch.rows(); }
  Index n_bins() const { return patch.cols(); }
};
using Template = BasicTemplate<double>;

// Correlation scores, one per valid sliding position:
// scores.size() == n_frames_query - n_frames_template + 1.
template <typename Scalar>
struct BasicDetectionCurve {
  ArrayX<Scalar> scores;  // in [-1, 1]
  double hop_s = 0.0;
  double t0_s = 0.0;
};
using DetectionCurve = BasicDetectionCurve<double>;

// Slices one template per support event using the frame mapping (onset floor,
// offset ceil, both inclusive). Slices with zero Frobenius norm are dropped;
// when everything is dropped there is nothing to match and this throws.
template <typename Scalar>
std::vector<BasicTemplate<Scalar>> extract_templates(
    const BasicSpectrogram<Scalar>& spec, std::span<const Event> support) {
  if (support.empty()) throw Error("empty support set");
  const double span_s = spec.time_of_frame(spec.n_frames() - 1);
  std::vector<BasicTemplate<Scalar>> templates;
  for (const Event& e : support) {
    if (e.onset_s > span_s + spec.hop_s || e.offset_s < 0.0) {
      throw Error("support event outside the spectrogram time span");
    }
    Index first = std::clamp<Index>(frame_floor(e.onset_s, spec.t0_s, spec.hop_s), 0,
                                    spec.n_frames() - 1);
    Index last = std::clamp<Index>(frame_ceil(e.offset_s, spec.t0_s, spec.hop_s), first,
                                   spec.n_frames() - 1);
    BasicTemplate<Scalar> t;
    t.patch = spec.values.block(first, 0, last - first + 1, spec.n_bins());
    t.source_event = e;
    t.hop_s = spec.hop_s;
    t.t0_s = spec.t0_s;
    if (!(t.patch.norm() > Scalar(0))) continue;  // silent slice, drop
    templates.push_back(std::move(t));
  }
  if (templates.empty()) throw Error("all support templates have zero norm");
  return templates;
}

// Normalized cross-correlation of the template against every equally shaped
// window of the query. Windows with (numerically) zero variance score 0, and
// everything is clamped to [-1, 1]. Per-window means and variances come from
// prefix sums, so the cost per offset is one template-sized dot product.
template <typename Scalar>
BasicDetectionCurve<Scalar> xcorr_curve(const BasicSpectrogram<Scalar>& spec,
                                        const BasicTemplate<Scalar>& tmpl) {
  if (tmpl.n_bins() != spec.n_bins()) throw Error("template/query bin count mismatch");
  if (tmpl.n_frames() > spec.n_frames()) throw Error("template longer than query");

  const Index len_t = tmpl.n_frames();
  const Index n_bins = spec.n_bins();
  const Index n_positions = spec.n_frames() - len_t + 1;
  const double n_cells = static_cast<double>(len_t * n_bins);

  // Centered template; its dot with any window already removes the window
  // mean, since the centered template sums to zero.
  Eigen::MatrixXd centered = tmpl.patch.template cast<double>();
  centered.array() -= centered.sum() / n_cells;
  const double template_norm = centered.norm();

  BasicDetectionCurve<Scalar> curve;
  curve.hop_s = spec.hop_s;
  curve.t0_s = spec.t0_s;
  curve.scores.resize(n_positions);
  if (!(template_norm > 0.0)) {
    curve.scores.setZero();
    return curve;
  }

  Eigen::VectorXd prefix_sum = Eigen::VectorXd::Zero(spec.n_frames() + 1);
  Eigen::VectorXd prefix_sumsq = Eigen::VectorXd::Zero(spec.n_frames() + 1);
  for (Index t = 0; t < spec.n_frames(); ++t) {
    const auto row = spec.values.row(t).template cast<double>();
    prefix_sum[t + 1] = prefix_sum[t] + row.sum();
    prefix_sumsq[t + 1] = prefix_sumsq[t] + row.array().square().sum();
  }

  for (Index tau = 0; tau < n_positions; ++tau) {
    const double win_sum = prefix_sum[tau + len_t] - prefix_sum[tau];
    const double win_sumsq = prefix_sumsq[tau + len_t] - prefix_sumsq[tau];
    const double centered_energy = std::max(0.0, win_sumsq - win_sum * win_sum / n_cells);
    const double window_norm = std::sqrt(centered_energy);
    if (window_norm <= 1e-9 * std::sqrt(std::max(win_sumsq, 0.0))) {
      curve.scores[tau] = Scalar(0);
      continue;
    }
    const double cross =
        (centered.array() *
         spec.values.block(tau, 0, len_t, n_bins).template cast<double>().array())
            .sum();
    const double score = cross / (template_norm * window_norm);
    curve.scores[tau] = static_cast<Scalar>(std::clamp(score, -1.0, 1.0));
  }
  return curve;
}

// Median length of the templates in frames (mean of the two middle values,
// rounded, when the count is even).
Index median_template_length(std::span<const Index> lengths);

// Fuses curves by a per-frame maximum over every curve that is still defined
// at the position, finds runs strictly above the threshold, and emits one
// event per run spanning [run start, run start + (median template length +
// run length) * hop]. Overlapping events are merged.
std::vector<Event> detect_from_curves(std::span<const DetectionCurve> curves,
                                      double threshold,
                                      std::span<const Index> template_lengths,
                                      const std::string& class_name);

template <typename Scalar>
std::vector<Index> template_lengths(std::span<const BasicTemplate<Scalar>> templates) {
  std::vector<Index> lengths;
  lengths.reserve(templates.size());
  for (const auto& t : templates) lengths.push_back(t.n_frames());
  return lengths;
}

}  // namespace fsed

#endif  // FSED_TEMPLATE_MATCH_HPP_
