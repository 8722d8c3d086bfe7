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

#include "fsed/postprocess.hpp"

namespace fsed {

std::vector<Event> merge_events(std::vector<Event> events, double merge_gap_s) {
  if (merge_gap_s < 0.0) throw Error("merge gap must be >= 0");
  if (events.size() < 2) return events;
  std::stable_sort(events.begin(), events.end(), event_less);
  std::vector<Event> merged;
  merged.push_back(events.front());
  for (size_t i = 1; i < events.size(); ++i) {
    Event& last = merged.back();
    if (events[i].onset_s - last.offset_s <= merge_gap_s) {
      last.offset_s = std::max(last.offset_s, events[i].offset_s);
    } else {
      merged.push_back(events[i]);
    }
  }
  return merged;
}

std::vector<Event> filter_min_duration(std::vector<Event> events,
                                       std::span<const Event> support,
                                       double factor) {
  if (support.empty()) throw Error("empty support set");
  if (factor < 0.0) throw Error("duration factor must be >= 0");
  double mean = 0.0;
  for (const Event& e : support) mean += e.duration_s();
  mean /= static_cast<double>(support.size());
  const double min_duration = factor * mean;
  std::erase_if(events, [&](const Event& e) { return e.duration_s() < min_duration; });
  return events;
}

}  // namespace fsed
