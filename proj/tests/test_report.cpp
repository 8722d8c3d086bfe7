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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "fsed/report.hpp"
#include "fsed/rng.hpp"

using namespace fsed;
namespace fs = std::filesystem;

namespace {

MatchReport sample_report() {
  MatchReport report;
  DatasetScore a;
  a.dataset_name = "tone";
  a.counts = Counts{9, 1, 2};
  a.precision = 0.9;
  a.recall = 9.0 / 11.0;
  a.fscore = 2 * a.precision * a.recall / (a.precision + a.recall);
  a.macro_fscore = a.fscore;
  a.n_episodes = 3;
  a.n_discarded = 4;
  report.per_dataset.push_back(a);
  DatasetScore b = a;
  b.dataset_name = "chirp";
  report.per_dataset.push_back(b);
  report.overall = a.fscore;
  report.overall_macro = a.fscore;
  report.total_discarded = 8;
  return report;
}

}  // namespace

TEST_CASE("report table prints 4-decimal scores and the summary lines") {
  const std::string table = format_report_table(sample_report());
  CHECK(table.find("tone") != std::string::npos);
  CHECK(table.find("0.9000") != std::string::npos);   // precision
  CHECK(table.find("0.8571") != std::string::npos);   // fscore
  CHECK(table.find("overall (harmonic mean") != std::string::npos);
  CHECK(table.find("discarded predictions") != std::string::npos);
  CHECK(table.find("macro") == std::string::npos);

  const std::string with_macro = format_report_table(sample_report(), true);
  CHECK(with_macro.find("macro-F") != std::string::npos);
}

TEST_CASE("report JSON round-trips through read_report_entry") {
  const fs::path path = fs::temp_directory_path() / "fsed_test_report.json";
  write_report_file(path, sample_report(), "my-run", R"({"iou_min":0.3})");
  LeaderboardEntry entry = read_report_entry(path);
  CHECK(entry.name == "my-run");
  CHECK(entry.overall == doctest::Approx(0.8571));
  fs::remove(path);
}

TEST_CASE("malformed report files are rejected") {
  const fs::path path = fs::temp_directory_path() / "fsed_test_bad_report.json";
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(read_report_entry(path), ParseError);
  std::ofstream(path) << R"({"name":"x"})";
  CHECK_THROWS_AS(read_report_entry(path), ParseError);
  fs::remove(path);
  CHECK_THROWS_AS(read_report_entry(path), Error);  // missing file
}

TEST_CASE("leaderboard ordering: score desc, stable names on ties") {
  std::vector<LeaderboardEntry> entries{
      {"bravo", 0.4}, {"alpha", 0.6}, {"delta", 0.4}, {"charlie", 0.4}};
  std::vector<LeaderboardEntry> sorted = sort_leaderboard(entries);
  REQUIRE(sorted.size() == 4);
  CHECK(sorted[0].name == "alpha");
  CHECK(sorted[1].name == "bravo");
  CHECK(sorted[2].name == "charlie");
  CHECK(sorted[3].name == "delta");

  // tie-break property: any permutation sorts to the same order
  SeededRng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<LeaderboardEntry> shuffled = entries;
    rng.shuffle(shuffled);
    std::vector<LeaderboardEntry> again = sort_leaderboard(shuffled);
    for (size_t i = 0; i < sorted.size(); ++i) CHECK(again[i].name == sorted[i].name);
  }

  const std::string text = format_leaderboard(sorted);
  CHECK(text.find("alpha") < text.find("bravo"));
  CHECK(text.find("0.6000") != std::string::npos);
}

TEST_CASE("single report gives a single row") {
  std::vector<LeaderboardEntry> one{{"solo", 0.5}};
  const std::string text = format_leaderboard(sort_leaderboard(one));
  CHECK(text.find("solo") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);  // header + one row
}

TEST_CASE("fingerprint is stable and input-sensitive") {
  CHECK(fingerprint("abc") == fingerprint("abc"));
  CHECK(fingerprint("abc") != fingerprint("abd"));
  CHECK(fingerprint("").size() == 16);
}
