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

#include <cmath>

#include "fsed/rng.hpp"
#include "fsed/template_match.hpp"

using namespace fsed;

namespace {

Spectrogram random_spec(SeededRng& rng, Index frames, Index bins, double hop_s = 0.01) {
  Spectrogram s;
  s.values.resize(frames, bins);
  for (Index t = 0; t < frames; ++t) {
    for (Index b = 0; b < bins; ++b) s.values(t, b) = std::abs(rng.normal());
  }
  s.hop_s = hop_s;
  s.t0_s = 0.005;
  s.bin_axis = Eigen::VectorXd::LinSpaced(bins, 0, 1000);
  return s;
}

Event span_frames(const Spectrogram& s, Index first, Index last) {
  return Event{s.time_of_frame(first), s.time_of_frame(last), "q", LabelValue::kPos};
}

}  // namespace

TEST_CASE("extract_templates: frame-exact slicing") {
  SeededRng rng(2);
  Spectrogram s = random_spec(rng, 100, 8);
  std::vector<Event> support{span_frames(s, 10, 20)};
  auto templates = extract_templates<double>(s, support);
  REQUIRE(templates.size() == 1);
  CHECK(templates[0].n_frames() == 11);
  CHECK(templates[0].patch == s.values.block(10, 0, 11, 8));
}

TEST_CASE("extract_templates: silent events are dropped, all-silent throws") {
  SeededRng rng(3);
  Spectrogram s = random_spec(rng, 100, 8);
  s.values.block(30, 0, 10, 8).setZero();
  std::vector<Event> support{span_frames(s, 31, 38), span_frames(s, 50, 60)};
  auto templates = extract_templates<double>(s, support);
  REQUIRE(templates.size() == 1);  // the silent one was dropped
  CHECK(templates[0].source_event.onset_s == doctest::Approx(s.time_of_frame(50)));

  std::vector<Event> all_silent{span_frames(s, 31, 38)};
  CHECK_THROWS_AS(extract_templates<double>(s, all_silent), Error);
  CHECK_THROWS_AS(extract_templates<double>(s, {}), Error);
}

TEST_CASE("extract_templates: five events of differing lengths") {
  SeededRng rng(4);
  Spectrogram s = random_spec(rng, 400, 6);
  std::vector<Event> support;
  std::vector<Index> expected;
  Index start = 5;
  for (Index len : {4, 9, 13, 2, 30}) {
    support.push_back(span_frames(s, start, start + len));
    // onset floor / offset ceil, both inclusive, over the frame-time mapping
    const Index first = (Index)std::floor((support.back().onset_s - s.t0_s) / s.hop_s + 1e-9);
    const Index last = (Index)std::ceil((support.back().offset_s - s.t0_s) / s.hop_s - 1e-9);
    expected.push_back(last - first + 1);
    start += len + 10;
  }
  auto templates = extract_templates<double>(s, support);
  REQUIRE(templates.size() == 5);
  for (size_t i = 0; i < 5; ++i) CHECK(templates[i].n_frames() == expected[i]);
}

TEST_CASE("extract_templates: event outside the time span throws") {
  SeededRng rng(5);
  Spectrogram s = random_spec(rng, 50, 4);
  std::vector<Event> support{Event{100.0, 101.0, "q", LabelValue::kPos}};
  CHECK_THROWS_AS(extract_templates<double>(s, support), Error);
}

TEST_CASE("xcorr: exact copy scores 1 at its own offset") {
  SeededRng rng(6);
  Spectrogram s = random_spec(rng, 60, 10);
  std::vector<Event> support{span_frames(s, 25, 32)};
  auto templates = extract_templates<double>(s, support);
  DetectionCurve curve = xcorr_curve(s, templates[0]);
  CHECK(curve.scores.size() == s.n_frames() - templates[0].n_frames() + 1);
  CHECK(curve.scores[25] == doctest::Approx(1.0).epsilon(1e-12));
  Index argmax;
  curve.scores.maxCoeff(&argmax);
  CHECK(argmax == 25);
}

TEST_CASE("xcorr: affine-transformed copy still scores 1") {
  SeededRng rng(7);
  Spectrogram s = random_spec(rng, 60, 10);
  std::vector<Event> support{span_frames(s, 10, 17)};
  auto templates = extract_templates<double>(s, support);
  // paste 3*patch + 2 at frames 40..47
  s.values.block(40, 0, 8, 10) = 3.0 * templates[0].patch.array() + 2.0;
  DetectionCurve curve = xcorr_curve(s, templates[0]);
  CHECK(curve.scores[40] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("xcorr equals the direct per-offset Pearson oracle") {
  SeededRng rng(8);
  Spectrogram s = random_spec(rng, 20, 5);
  std::vector<Event> support{span_frames(s, 3, 7)};
  auto templates = extract_templates<double>(s, support);
  const Template& t = templates[0];
  DetectionCurve curve = xcorr_curve(s, t);
  REQUIRE(curve.scores.size() == 20 - t.n_frames() + 1);
  for (Index tau = 0; tau < curve.scores.size(); ++tau) {
    const double want = pearson(t.patch, s.values.block(tau, 0, t.n_frames(), 5));
    CHECK(curve.scores[tau] == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("xcorr: amplitude invariance and score bounds") {
  SeededRng rng(9);
  Spectrogram s = random_spec(rng, 80, 12);
  std::vector<Event> support{span_frames(s, 20, 30)};
  auto templates = extract_templates<double>(s, support);
  DetectionCurve base = xcorr_curve(s, templates[0]);
  CHECK(base.scores.maxCoeff() <= 1.0 + 1e-9);
  CHECK(base.scores.minCoeff() >= -1.0 - 1e-9);

  // scaling the whole magnitude spectrogram (what a waveform gain does to a
  // magnitude STFT) leaves the curve unchanged
  Spectrogram scaled = s;
  scaled.values *= 7.25;
  std::vector<Event> support2{span_frames(scaled, 20, 30)};
  auto templates2 = extract_templates<double>(scaled, support2);
  DetectionCurve gain = xcorr_curve(scaled, templates2[0]);
  CHECK((gain.scores - base.scores).abs().maxCoeff() < 1e-9);
}

TEST_CASE("xcorr: zero-variance windows score zero") {
  SeededRng rng(10);
  Spectrogram s = random_spec(rng, 40, 6);
  s.values.block(0, 0, 12, 6).setConstant(3.0);  // flat region
  std::vector<Event> support{span_frames(s, 20, 27)};
  auto templates = extract_templates<double>(s, support);
  DetectionCurve curve = xcorr_curve(s, templates[0]);
  CHECK(curve.scores[0] == 0.0);
  CHECK(curve.scores[2] == 0.0);
}

TEST_CASE("xcorr: geometry mismatches throw") {
  SeededRng rng(11);
  Spectrogram s = random_spec(rng, 30, 6);
  std::vector<Event> support{span_frames(s, 5, 9)};
  auto templates = extract_templates<double>(s, support);
  Spectrogram narrow = random_spec(rng, 30, 5);
  CHECK_THROWS_AS(xcorr_curve(narrow, templates[0]), Error);
  Spectrogram shorter = random_spec(rng, 3, 6);
  CHECK_THROWS_AS(xcorr_curve(shorter, templates[0]), Error);
}

namespace {

DetectionCurve curve_from(const std::vector<double>& values, double hop_s = 0.01,
                          double t0_s = 0.0) {
  DetectionCurve c;
  c.scores = Eigen::Map<const Eigen::ArrayXd>(values.data(), (Index)values.size());
  c.hop_s = hop_s;
  c.t0_s = t0_s;
  return c;
}

}  // namespace

TEST_CASE("detect_from_curves: nothing above threshold gives no events") {
  std::vector<DetectionCurve> curves{curve_from({0.1, 0.2, 0.3, 0.1})};
  std::vector<Index> lengths{10};
  CHECK(detect_from_curves(curves, 0.45, lengths, "q").empty());
}

TEST_CASE("detect_from_curves: one isolated frame spans median+1 hops") {
  std::vector<double> values(30, 0.0);
  values[12] = 0.9;
  std::vector<DetectionCurve> curves{curve_from(values)};
  std::vector<Index> lengths{10};
  std::vector<Event> events = detect_from_curves(curves, 0.45, lengths, "q");
  REQUIRE(events.size() == 1);
  CHECK(events[0].onset_s == doctest::Approx(0.12));
  CHECK(events[0].duration_s() == doctest::Approx(11 * 0.01));
}

TEST_CASE("detect_from_curves: fusion is a per-frame maximum") {
  std::vector<double> a(20, 0.0), b(20, 0.0);
  a[5] = 0.8;
  b[15] = 0.7;
  std::vector<DetectionCurve> curves{curve_from(a), curve_from(b)};
  std::vector<Index> lengths{2, 2};
  std::vector<Event> events = detect_from_curves(curves, 0.5, lengths, "q");
  CHECK(events.size() == 2);
}

TEST_CASE("detect_from_curves: raising the threshold never adds events") {
  SeededRng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> values(50);
    for (double& v : values) v = rng.uniform(-1.0, 1.0);
    std::vector<DetectionCurve> curves{curve_from(values)};
    std::vector<Index> lengths{1 + (Index)rng.index(12)};
    const double lo = rng.uniform(-1.0, 0.9);
    const double hi = lo + rng.uniform(0.0, 1.0 - std::max(lo, 0.0));
    const size_t n_lo = detect_from_curves(curves, lo, lengths, "q").size();
    const size_t n_hi = detect_from_curves(curves, hi, lengths, "q").size();
    CHECK(n_hi <= n_lo);
  }
}

TEST_CASE("median template length") {
  std::vector<Index> odd{3, 9, 5};
  CHECK(median_template_length(odd) == 5);
  std::vector<Index> even{4, 10};
  CHECK(median_template_length(even) == 7);
  std::vector<Index> outlier{10, 11, 12, 11, 90};
  CHECK(median_template_length(outlier) == 11);
}
