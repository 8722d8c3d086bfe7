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

#ifndef FSED_POSTPROCESS_HPP_
#define FSED_POSTPROCESS_HPP_

#include <algorithm>
#include <span>
#include <vector>

#include "fsed/annotations.hpp"
#include "fsed/dsp.hpp"

namespace fsed {

struct PostprocessConfig {
  double min_duration_factor = 0.5;  // of the mean support duration
  double merge_gap_s = 0.1;
  int median_kernel = 3;  // odd; applied to score/probability curves
};

// Sliding median with symmetric window shrinking at the edges (the radius at
// position i is min(kernel/2, i, n-1-i), so every window stays odd). Kernel
// must be odd and no longer than the sequence.
template <typename Scalar>
ArrayX<Scalar> median_filter(const ArrayX<Scalar>& curve, int kernel) {
  if (kernel < 1 || kernel % 2 == 0) throw Error("median kernel must be odd and >= 1");
  const Index n = curve.size();
  if (n == 0) return curve;
  if (kernel > n) throw Error("median kernel longer than sequence");
  const Index radius = kernel / 2;
  ArrayX<Scalar> out(n);
  std::vector<Scalar> window;
  window.reserve(kernel);
  for (Index i = 0; i < n; ++i) {
    const Index r = std::min({radius, i, n - 1 - i});
    window.assign(curve.data() + (i - r), curve.data() + (i + r + 1));
    std::nth_element(window.begin(), window.begin() + r, window.end());
    out[i] = window[r];
  }
  return out;
}

// Merges consecutive same-class events whose gap is <= merge_gap_s (overlaps
// merge too). Output is sorted, non-overlapping, and a fixed point of the
// operation.
std::vector<Event> merge_events(std::vector<Event> events, double merge_gap_s);

// Drops events shorter than factor * mean(support durations).
std::vector<Event> filter_min_duration(std::vector<Event> events,
                                       std::span<const Event> support,
                                       double factor);

}  // namespace fsed

#endif  // FSED_POSTPROCESS_HPP_
