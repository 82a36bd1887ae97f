// Copyright 2026 The vpgan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "test_support.hpp"
#include "vpgan/corpus.hpp"
#include "vpgan/report.hpp"
#include "vpgan/rng.hpp"

namespace vpgan {
namespace {

const std::size_t kDim = 8;

std::pair<Corpus, Corpus> separable_pair(std::size_t speakers,
                                         std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<std::vector<double>>> enroll(speakers);
  std::vector<std::vector<std::vector<double>>> trial(speakers);
  for (std::size_t s = 0; s < speakers; ++s) {
    std::vector<double> center(kDim);
    for (double& c : center) c = 5.0 * rng.normal();
    enroll[s].assign(2, std::vector<double>(kDim));
    trial[s].assign(3, std::vector<double>(kDim));
    for (auto* side : {&enroll[s], &trial[s]}) {
      for (auto& utt : *side) {
        for (std::size_t k = 0; k < kDim; ++k) {
          utt[k] = center[k] + 0.3 * rng.normal();
        }
      }
    }
  }
  return {testsupport::make_corpus(enroll, "enroll", Split::kEnrollment),
          testsupport::make_corpus(trial, "trial", Split::kTrial)};
}

const AnonymizeFn kIdentity = [](const Corpus& c, std::uint64_t) { return c; };

TEST(ReportTest, IdentityEvaluationAnchorsEveryMetric) {
  const auto [enroll, trial] = separable_pair(6, 1);
  const std::vector<Scenario> scenarios = {Scenario::kIgnorant,
                                           Scenario::kLazyInformed};
  const EvalReport report = evaluate_anonymization(
      enroll, trial, kIdentity, scenarios, 11, 22, "identity", "deadbeef");

  EXPECT_EQ(report.strategy, "identity");
  EXPECT_EQ(report.config_digest, "deadbeef");
  EXPECT_EQ(report.utility_note, kUtilityNote);

  ASSERT_EQ(report.eer_percent.size(), 2u);
  ASSERT_TRUE(report.eer_percent.count("ignorant"));
  ASSERT_TRUE(report.eer_percent.count("lazy-informed"));
  // Identity anonymization makes both scenarios score the original pair.
  const ScenarioEer& ign = report.eer_percent.at("ignorant");
  const ScenarioEer& lazy = report.eer_percent.at("lazy-informed");
  EXPECT_DOUBLE_EQ(ign.pooled, lazy.pooled);
  ASSERT_TRUE(ign.female.has_value());
  ASSERT_TRUE(ign.male.has_value());
  EXPECT_DOUBLE_EQ(ign.pooled, (*ign.female + *ign.male) / 2.0);
  EXPECT_LE(ign.pooled, 10.0);  // untouched well-separated speakers

  // Unchanged vectors leave each speaker's dissimilarity matrix bitwise
  // intact, so every diagonal-dominance gain ratio is exactly 1.
  ASSERT_TRUE(report.gvd_db.count("all"));
  ASSERT_TRUE(report.gvd_db.count("F"));
  ASSERT_TRUE(report.gvd_db.count("M"));
  EXPECT_EQ(report.gvd_db.at("all"), 0.0);
  EXPECT_EQ(report.gvd_db.at("F"), 0.0);
  EXPECT_EQ(report.gvd_db.at("M"), 0.0);

  EXPECT_EQ(report.mmd_sample_count, 6u);  // one vector per speaker
  EXPECT_GT(report.mmd_bandwidth, 0.0);
  EXPECT_TRUE(std::isfinite(report.mmd_value));
}

TEST(ReportTest, SingleSpeakerSexGroupsAreSkippedInGvd) {
  const auto [enroll, trial] = separable_pair(3, 2);
  (void)enroll;
  // Speakers alternate F,M,F: the male group has one speaker, and voice
  // distinctiveness is undefined for a single speaker.
  Corpus lopsided = trial;
  const EvalReport report = evaluate_anonymization(
      lopsided, lopsided, kIdentity, {}, 1, 2, "identity", "0");
  EXPECT_TRUE(report.eer_percent.empty());
  EXPECT_TRUE(report.gvd_db.count("all"));
  EXPECT_TRUE(report.gvd_db.count("F"));
  EXPECT_FALSE(report.gvd_db.count("M"));
}

TEST(ReportTest, JsonCarriesTheCollapseSentinel) {
  EXPECT_EQ(gvd_to_json(-std::numeric_limits<double>::infinity()),
            nlohmann::json("-inf"));
  EXPECT_EQ(gvd_to_json(1.5), nlohmann::json(1.5));
  EXPECT_EQ(gvd_to_json(0.0), nlohmann::json(0.0));
}

TEST(ReportTest, JsonSchemaOmitsAbsentGroupsAndIsByteStable) {
  EvalReport report;
  report.strategy = "pool";
  report.config_digest = "0a1b2c3d";
  ScenarioEer entry;
  entry.pooled = 41.5;
  entry.female = 40.0;  // male absent: unlabeled corpus half
  report.eer_percent["ignorant"] = entry;
  report.gvd_db["all"] = -0.25;
  report.mmd_value = 0.125;
  report.mmd_bandwidth = 2.0;
  report.mmd_sample_count = 64;
  report.utility_note = kUtilityNote;

  const nlohmann::json j = report_to_json(report);
  EXPECT_EQ(j.at("strategy"), "pool");
  EXPECT_EQ(j.at("config_digest"), "0a1b2c3d");
  const nlohmann::json& eer = j.at("eer_percent").at("ignorant");
  EXPECT_DOUBLE_EQ(eer.at("all").get<double>(), 41.5);
  EXPECT_DOUBLE_EQ(eer.at("F").get<double>(), 40.0);
  EXPECT_FALSE(eer.contains("M"));
  EXPECT_DOUBLE_EQ(j.at("gvd_db").at("all").get<double>(), -0.25);
  EXPECT_DOUBLE_EQ(j.at("mmd").at("value").get<double>(), 0.125);
  EXPECT_DOUBLE_EQ(j.at("mmd").at("bandwidth").get<double>(), 2.0);
  EXPECT_EQ(j.at("mmd").at("sample_count").get<std::size_t>(), 64u);
  EXPECT_EQ(j.at("utility_note"), kUtilityNote);

  testsupport::TempDir dir;
  write_report_json(report, dir.path() / "a.json");
  write_report_json(report, dir.path() / "b.json");
  const std::string a = testsupport::read_text(dir.path() / "a.json");
  EXPECT_EQ(a, testsupport::read_text(dir.path() / "b.json"));
  EXPECT_EQ(a.back(), '\n');
  EXPECT_NO_THROW(nlohmann::json::parse(a));
}

TEST(ReportTest, PerSpeakerSampleTakesTheFirstUtteranceInOrder) {
  const auto [enroll, trial] = separable_pair(4, 3);
  (void)enroll;
  const std::vector<double> rows = detail::per_speaker_vectors(trial);
  ASSERT_EQ(rows.size(), 4u * kDim);
  // make_corpus emits speakers in order with utterances contiguous, so the
  // first utterance of each speaker is embeddings[3 * s].
  for (std::size_t s = 0; s < 4; ++s) {
    const auto& expected = trial.embeddings[3 * s].vector;
    for (std::size_t k = 0; k < kDim; ++k) {
      EXPECT_EQ(rows[s * kDim + k], expected[k]) << s << "," << k;
    }
  }
}

}  // namespace
}  // namespace vpgan
