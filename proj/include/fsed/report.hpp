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

#ifndef FSED_REPORT_HPP_
#define FSED_REPORT_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsed/scoring.hpp"

namespace fsed {

// Plain-text score table: one row per dataset (TP/FP/FN, precision, recall,
// F), the harmonic-mean summary line, and the discarded-prediction count.
// Scores are printed to 4 decimal places. show_macro adds the per-class
// macro-F column.
std::string format_report_table(const MatchReport& report, bool show_macro = false);

// Machine-readable report. `config_json` is embedded verbatim (pass "{}" for
// none); a FNV-1a fingerprint of the config is included so a run can be
// re-identified. The structured file mirrors MatchReport field by field.
std::string report_to_json_string(const MatchReport& report, const std::string& run_name,
                                  const std::string& config_json);
void write_report_file(const std::filesystem::path& path, const MatchReport& report,
                       const std::string& run_name, const std::string& config_json);

struct LeaderboardEntry {
  std::string name;
  double overall = 0.0;
};

// Reads `name` and `overall` back from a report file written above.
LeaderboardEntry read_report_entry(const std::filesystem::path& path);

// Rows sorted by overall F descending; ties keep a stable order by run name.
std::vector<LeaderboardEntry> sort_leaderboard(std::vector<LeaderboardEntry> entries);
std::string format_leaderboard(std::span<const LeaderboardEntry> sorted);

// FNV-1a 64-bit hash, hex encoded. Used as the config fingerprint in run logs
// and reports.
std::string fingerprint(std::string_view bytes);

}  // namespace fsed

#endif  // FSED_REPORT_HPP_
