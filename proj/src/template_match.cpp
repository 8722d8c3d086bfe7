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

#include "fsed/template_match.hpp"

#include <cmath>

namespace fsed {

Index median_template_length(std::span<const Index> lengths) {
  if (lengths.empty()) throw Error("no template lengths");
  std::vector<Index> sorted(lengths.begin(), lengths.end());
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return static_cast<Index>(
      std::llround(0.5 * static_cast<double>(sorted[n / 2 - 1] + sorted[n / 2])));
}

std::vector<Event> detect_from_curves(std::span<const DetectionCurve> curves,
                                      double threshold,
                                      std::span<const Index> template_lengths,
                                      const std::string& class_name) {
  if (curves.empty()) return {};
  const double hop_s = curves.front().hop_s;
  const double t0_s = curves.front().t0_s;
  Index n_positions = 0;
  for (const DetectionCurve& c : curves) {
    if (std::abs(c.hop_s - hop_s) > 1e-12 || std::abs(c.t0_s - t0_s) > 1e-12) {
      throw Error("detection curves disagree on frame geometry");
    }
    n_positions = std::max(n_positions, c.scores.size());
  }
  if (n_positions == 0) return {};

  Eigen::ArrayXd pooled = Eigen::ArrayXd::Constant(n_positions, -1.0);
  for (const DetectionCurve& c : curves) {
    pooled.head(c.scores.size()) = pooled.head(c.scores.size()).max(c.scores);
  }

  const Index median_len = median_template_length(template_lengths);
  std::vector<Event> events;
  Index run_start = -1;
  for (Index i = 0; i <= n_positions; ++i) {
    const bool active = i < n_positions && pooled[i] > threshold;
    if (active && run_start < 0) run_start = i;
    if (!active && run_start >= 0) {
      const Index run_length = i - run_start;
      Event e;
      e.onset_s = t0_s + run_start * hop_s;
      e.offset_s = e.onset_s + (median_len + run_length) * hop_s;
      e.class_name = class_name;
      e.value = LabelValue::kPos;
      events.push_back(std::move(e));
      run_start = -1;
    }
  }
  return merge_events(std::move(events), 0.0);
}

}  // namespace fsed
