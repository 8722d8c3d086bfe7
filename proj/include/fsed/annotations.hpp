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

#ifndef FSED_ANNOTATIONS_HPP_
#define FSED_ANNOTATIONS_HPP_

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsed/error.hpp"

namespace fsed {

// Annotation value of an interval for one sound class.
enum class LabelValue { kPos, kNeg, kUnk };

// Returns "POS" / "NEG" / "UNK".
std::string_view to_string(LabelValue v);

// Parses a label token; throws ParseError on anything else.
LabelValue parse_label(std::string_view token);

// A labelled time interval. Invariants: 0 <= onset_s < offset_s and a
// non-empty class name.
struct Event {
  double onset_s = 0.0;
  double offset_s = 0.0;
  std::string class_name;
  LabelValue value = LabelValue::kPos;

  double duration_s() const { return offset_s - onset_s; }
};

// Total order used for every event list in the toolkit:
// (onset, offset, class name, value). Makes sorting deterministic.
bool event_less(const Event& a, const Event& b);

bool operator==(const Event& a, const Event& b);

// One recording's annotations: events sorted by event_less, every class name
// present in class_names.
struct AnnotationTable {
  std::string audio_file;
  std::vector<Event> events;
  std::vector<std::string> class_names;  // header order
};

struct FewShotConfig {
  int k_shot = 5;  // support events per episode
  int n_way = 1;   // simultaneous target classes (detection is binary per class)
};

// The detection problem for one (recording, target class) pair: the first
// k_shot POS events are given as the support set, and everything from the end
// of the last support event onwards is the query region to be detected and
// scored. Events straddling query_start_s are dropped entirely.
struct FewShotEpisode {
  std::string audio_file;
  std::string class_name;
  std::vector<Event> support;        // exactly k_shot POS events
  double query_start_s = 0.0;        // end of the support region
  std::vector<Event> reference_pos;  // POS events with onset >= query_start_s
  std::vector<Event> reference_unk;  // UNK events with onset >= query_start_s
};

// Ground-truth CSV: header `Audiofilename,Starttime,Endtime,<Class1>[,...]`,
// then one row per annotated interval with a POS/NEG/UNK token per class
// column (an empty cell leaves that class unannotated for the row). Accepts
// LF or CRLF and unsorted rows; the returned table is sorted and validated.
// All format problems throw ParseError with a line number.
AnnotationTable parse_annotation_csv(std::istream& in);
AnnotationTable parse_annotation_csv(const std::string& text);

// Inverse of parse_annotation_csv: one row per event, other class cells empty.
void write_annotation_csv(std::ostream& out, const AnnotationTable& table);
std::string write_annotation_csv(const AnnotationTable& table);

// Prediction CSV: header `Audiofilename,Starttime,Endtime`, one row per
// predicted event, times with six decimal places (round-trips through
// parse_prediction_csv to within 1e-6 s).
void write_prediction_csv(std::ostream& out, const std::string& audio_file,
                          std::span<const Event> events);
std::string write_prediction_csv(const std::string& audio_file,
                                 std::span<const Event> events);

// Reads prediction rows grouped by audio file. The class of a predicted event
// is implied by whichever episode it is scored against, so parsed events carry
// the placeholder class "prediction". Each group is sorted.
std::map<std::string, std::vector<Event>> parse_prediction_csv(std::istream& in);
std::map<std::string, std::vector<Event>> parse_prediction_csv(const std::string& text);

// Derives the few-shot episode for one target class. The support set is the
// chronologically first k_shot POS events; the query region starts where the
// support region ends (the largest support offset, which for non-overlapping
// events is the offset of the k_shot-th event). Reference lists keep only
// events with onset >= query_start_s, so events straddling the boundary are
// excluded from both sides. Throws InsufficientShots when the class has fewer
// than k_shot POS events, Error when the class is not in the table header.
FewShotEpisode extract_episode(const AnnotationTable& table,
                               const std::string& class_name,
                               const FewShotConfig& config);

}  // namespace fsed

#endif  // FSED_ANNOTATIONS_HPP_
