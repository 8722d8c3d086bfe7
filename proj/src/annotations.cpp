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

#include "fsed/annotations.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

namespace fsed {
namespace {

constexpr std::string_view kTimeHeader[3] = {"Audiofilename", "Starttime", "Endtime"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> cells;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.emplace_back(trim(line.substr(start)));
      break;
    }
    cells.emplace_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

double parse_time_cell(const std::string& cell, int line) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty()) {
    throw ParseError("non-numeric time '" + cell + "'", line);
  }
  return value;
}

void validate_times(double onset, double offset, int line) {
  if (onset < 0.0) throw ParseError("negative onset", line);
  if (onset == offset) throw ParseError("zero-length event", line);
  if (onset > offset) throw ParseError("onset after offset", line);
}

void append_time(std::string& out, double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", t);
  out += buf;
}

int label_rank(LabelValue v) { return static_cast<int>(v); }

}  // namespace

std::string_view to_string(LabelValue v) {
  switch (v) {
    case LabelValue::kPos: return "POS";
    case LabelValue::kNeg: return "NEG";
    case LabelValue::kUnk: return "UNK";
  }
  return "POS";
}

LabelValue parse_label(std::string_view token) {
  if (token == "POS") return LabelValue::kPos;
  if (token == "NEG") return LabelValue::kNeg;
  if (token == "UNK") return LabelValue::kUnk;
  throw ParseError("unknown label token '" + std::string(token) + "'");
}

bool event_less(const Event& a, const Event& b) {
  if (a.onset_s != b.onset_s) return a.onset_s < b.onset_s;
  if (a.offset_s != b.offset_s) return a.offset_s < b.offset_s;
  if (a.class_name != b.class_name) return a.class_name < b.class_name;
  return label_rank(a.value) < label_rank(b.value);
}

bool operator==(const Event& a, const Event& b) {
  return a.onset_s == b.onset_s && a.offset_s == b.offset_s &&
         a.class_name == b.class_name && a.value == b.value;
}

AnnotationTable parse_annotation_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("malformed header: empty input", 1);
  std::vector<std::string> header = split_csv(line);
  if (header.size() < 4) {
    throw ParseError("malformed header: expected Audiofilename,Starttime,Endtime "
                     "plus at least one class column", 1);
  }
  for (int i = 0; i < 3; ++i) {
    if (header[i] != kTimeHeader[i]) {
      throw ParseError("malformed header: column " + std::to_string(i + 1) +
                       " must be '" + std::string(kTimeHeader[i]) + "'", 1);
    }
  }
  AnnotationTable table;
  table.class_names.assign(header.begin() + 3, header.end());
  for (size_t i = 0; i < table.class_names.size(); ++i) {
    if (table.class_names[i].empty()) throw ParseError("empty class name in header", 1);
    for (size_t j = i + 1; j < table.class_names.size(); ++j) {
      if (table.class_names[i] == table.class_names[j]) {
        throw ParseError("duplicate class column '" + table.class_names[i] + "'", 1);
      }
    }
  }

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) +
                       " columns, got " + std::to_string(cells.size()), line_no);
    }
    if (cells[0].empty()) throw ParseError("empty audio file name", line_no);
    if (table.audio_file.empty()) {
      table.audio_file = cells[0];
    } else if (table.audio_file != cells[0]) {
      throw ParseError("multiple audio files in one table ('" + table.audio_file +
                       "' vs '" + cells[0] + "')", line_no);
    }
    double onset = parse_time_cell(cells[1], line_no);
    double offset = parse_time_cell(cells[2], line_no);
    validate_times(onset, offset, line_no);
    for (size_t c = 0; c < table.class_names.size(); ++c) {
      const std::string& cell = cells[3 + c];
      if (cell.empty()) continue;
      LabelValue value;
      try {
        value = parse_label(cell);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), line_no);
      }
      table.events.push_back(Event{onset, offset, table.class_names[c], value});
    }
  }
  std::stable_sort(table.events.begin(), table.events.end(), event_less);
  return table;
}

AnnotationTable parse_annotation_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_annotation_csv(in);
}

void write_annotation_csv(std::ostream& out, const AnnotationTable& table) {
  std::string line = "Audiofilename,Starttime,Endtime";
  for (const std::string& name : table.class_names) {
    line += ',';
    line += name;
  }
  line += '\n';
  out << line;
  for (const Event& e : table.events) {
    line.clear();
    line += table.audio_file;
    line += ',';
    append_time(line, e.onset_s);
    line += ',';
    append_time(line, e.offset_s);
    for (const std::string& name : table.class_names) {
      line += ',';
      if (name == e.class_name) line += to_string(e.value);
    }
    line += '\n';
    out << line;
  }
}

std::string write_annotation_csv(const AnnotationTable& table) {
  std::ostringstream out;
  write_annotation_csv(out, table);
  return out.str();
}

void write_prediction_csv(std::ostream& out, const std::string& audio_file,
                          std::span<const Event> events) {
  out << "Audiofilename,Starttime,Endtime\n";
  std::string line;
  for (const Event& e : events) {
    line.clear();
    line += audio_file;
    line += ',';
    append_time(line, e.onset_s);
    line += ',';
    append_time(line, e.offset_s);
    line += '\n';
    out << line;
  }
}

std::string write_prediction_csv(const std::string& audio_file,
                                 std::span<const Event> events) {
  std::ostringstream out;
  write_prediction_csv(out, audio_file, events);
  return out.str();
}

std::map<std::string, std::vector<Event>> parse_prediction_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("malformed header: empty input", 1);
  std::vector<std::string> header = split_csv(line);
  if (header.size() != 3 || header[0] != kTimeHeader[0] ||
      header[1] != kTimeHeader[1] || header[2] != kTimeHeader[2]) {
    throw ParseError("malformed header: expected Audiofilename,Starttime,Endtime", 1);
  }
  std::map<std::string, std::vector<Event>> by_file;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_csv(line);
    if (cells.size() != 3) {
      throw ParseError("expected 3 columns, got " + std::to_string(cells.size()),
                       line_no);
    }
    if (cells[0].empty()) throw ParseError("empty audio file name", line_no);
    double onset = parse_time_cell(cells[1], line_no);
    double offset = parse_time_cell(cells[2], line_no);
    validate_times(onset, offset, line_no);
    by_file[cells[0]].push_back(Event{onset, offset, "prediction", LabelValue::kPos});
  }
  for (auto& [file, events] : by_file) {
    std::stable_sort(events.begin(), events.end(), event_less);
  }
  return by_file;
}

std::map<std::string, std::vector<Event>> parse_prediction_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_prediction_csv(in);
}

FewShotEpisode extract_episode(const AnnotationTable& table,
                               const std::string& class_name,
                               const FewShotConfig& config) {
  if (config.k_shot < 1) throw Error("k_shot must be >= 1");
  if (std::find(table.class_names.begin(), table.class_names.end(), class_name) ==
      table.class_names.end()) {
    throw Error("class '" + class_name + "' not present in table for '" +
                table.audio_file + "'");
  }
  FewShotEpisode episode;
  episode.audio_file = table.audio_file;
  episode.class_name = class_name;

  std::vector<Event> pos;
  std::vector<Event> unk;
  for (const Event& e : table.events) {
    if (e.class_name != class_name) continue;
    if (e.value == LabelValue::kPos) pos.push_back(e);
    if (e.value == LabelValue::kUnk) unk.push_back(e);
  }
  if (static_cast<int>(pos.size()) < config.k_shot) {
    throw InsufficientShots("class '" + class_name + "' in '" + table.audio_file +
                            "' has " + std::to_string(pos.size()) + " POS events, " +
                            std::to_string(config.k_shot) + " required");
  }
  episode.support.assign(pos.begin(), pos.begin() + config.k_shot);
  // The support region ends where its last event ends. With non-overlapping
  // events this is exactly the offset of the k_shot-th event.
  double query_start = episode.support.front().offset_s;
  for (const Event& e : episode.support) query_start = std::max(query_start, e.offset_s);
  episode.query_start_s = query_start;

  for (auto it = pos.begin() + config.k_shot; it != pos.end(); ++it) {
    if (it->onset_s >= query_start) episode.reference_pos.push_back(*it);
  }
  for (const Event& e : unk) {
    if (e.onset_s >= query_start) episode.reference_unk.push_back(e);
  }
  return episode;
}

}  // namespace fsed
