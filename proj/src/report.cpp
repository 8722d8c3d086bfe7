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

#include "fsed/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace fsed {
namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

}  // namespace

std::string format_report_table(const MatchReport& report, bool show_macro) {
  size_t name_width = 7;  // "dataset"
  for (const DatasetScore& d : report.per_dataset) {
    name_width = std::max(name_width, d.dataset_name.size());
  }
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s %6s %6s %6s %10s %8s %8s", (int)name_width,
                "dataset", "TP", "FP", "FN", "precision", "recall", "fscore");
  out += line;
  if (show_macro) out += "   macro-F";
  out += '\n';
  for (const DatasetScore& d : report.per_dataset) {
    std::snprintf(line, sizeof line, "%-*s %6ld %6ld %6ld %10s %8s %8s",
                  (int)name_width, d.dataset_name.c_str(), d.counts.tp, d.counts.fp,
                  d.counts.fn, fixed4(d.precision).c_str(), fixed4(d.recall).c_str(),
                  fixed4(d.fscore).c_str());
    out += line;
    if (show_macro) {
      out += "   ";
      out += fixed4(d.macro_fscore);
    }
    out += '\n';
  }
  out += "overall (harmonic mean of dataset F-scores): " + fixed4(report.overall) + "\n";
  if (show_macro) {
    out += "overall macro (harmonic mean of per-class macro-F): " +
           fixed4(report.overall_macro) + "\n";
  }
  out += "discarded predictions (ended inside a support region): " +
         std::to_string(report.total_discarded) + "\n";
  return out;
}

std::string report_to_json_string(const MatchReport& report, const std::string& run_name,
                                  const std::string& config_json) {
  nlohmann::ordered_json j;
  j["name"] = run_name;
  try {
    j["config"] = nlohmann::ordered_json::parse(config_json);
  } catch (const nlohmann::json::exception&) {
    throw Error("config_json is not valid JSON");
  }
  j["fingerprint"] = fingerprint(config_json);
  j["per_dataset"] = nlohmann::ordered_json::array();
  for (const DatasetScore& d : report.per_dataset) {
    nlohmann::ordered_json entry;
    entry["dataset"] = d.dataset_name;
    entry["tp"] = d.counts.tp;
    entry["fp"] = d.counts.fp;
    entry["fn"] = d.counts.fn;
    entry["precision"] = round4(d.precision);
    entry["recall"] = round4(d.recall);
    entry["fscore"] = round4(d.fscore);
    entry["macro_fscore"] = round4(d.macro_fscore);
    entry["n_episodes"] = d.n_episodes;
    entry["discarded"] = d.n_discarded;
    j["per_dataset"].push_back(std::move(entry));
  }
  j["overall"] = round4(report.overall);
  j["overall_macro"] = round4(report.overall_macro);
  j["total_discarded"] = report.total_discarded;
  return j.dump(2) + "\n";
}

void write_report_file(const std::filesystem::path& path, const MatchReport& report,
                       const std::string& run_name, const std::string& config_json) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write report '" + path.string() + "'");
  out << report_to_json_string(report, run_name, config_json);
  if (!out) throw Error("report write failed");
}

LeaderboardEntry read_report_entry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open report '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed report file '" + path.string() + "': " + e.what());
  }
  LeaderboardEntry entry;
  if (!j.contains("overall") || !j["overall"].is_number()) {
    throw ParseError("malformed report file '" + path.string() + "': missing overall");
  }
  entry.overall = j["overall"].get<double>();
  entry.name = j.value("name", path.stem().string());
  return entry;
}

std::vector<LeaderboardEntry> sort_leaderboard(std::vector<LeaderboardEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
              if (a.overall != b.overall) return a.overall > b.overall;
              return a.name < b.name;
            });
  return entries;
}

std::string format_leaderboard(std::span<const LeaderboardEntry> sorted) {
  size_t name_width = 3;  // "run"
  for (const LeaderboardEntry& e : sorted) name_width = std::max(name_width, e.name.size());
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%4s  %-*s %8s", "rank", (int)name_width, "run",
                "overall");
  out += line;
  out += '\n';
  for (size_t i = 0; i < sorted.size(); ++i) {
    std::snprintf(line, sizeof line, "%4zu  %-*s %8s", i + 1, (int)name_width,
                  sorted[i].name.c_str(), fixed4(sorted[i].overall).c_str());
    out += line;
    out += '\n';
  }
  return out;
}

std::string fingerprint(std::string_view bytes) {
  uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace fsed
