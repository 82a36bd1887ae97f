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
//
// Evaluation report: privacy (equal error rates per attack scenario and
// sex group) and utility (voice distinctiveness, distribution fidelity)
// for one anonymization strategy, serialized as JSON.

#ifndef VPGAN_REPORT_HPP
#define VPGAN_REPORT_HPP

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "vpgan/detail/binary_io.hpp"
#include "vpgan/errors.hpp"
#include "vpgan/metrics.hpp"
#include "vpgan/privacy.hpp"

namespace vpgan {

struct ScenarioEer {
  std::optional<double> female;  // absent when a sex group is empty
  std::optional<double> male;
  double pooled = 0.0;
};

struct EvalReport {
  std::string strategy;
  std::string config_digest;
  std::map<std::string, ScenarioEer> eer_percent;  // by scenario name
  std::map<std::string, double> gvd_db;            // "F", "M", "all"
  double mmd_value = 0.0;
  double mmd_bandwidth = 0.0;
  std::size_t mmd_sample_count = 0;
  std::string utility_note;
};

// Word error rate would need an ASR system and synthesized audio, neither
// of which exists at the embedding level; the report says so explicitly so
// downstream readers are not left guessing why the column is missing.
inline constexpr const char* kUtilityNote =
    "word error rate is not measurable on embeddings; distribution "
    "fidelity (mmd) and voice distinctiveness (gvd) are reported instead";

namespace detail {

// One vector per speaker, taken from that speaker's first utterance in
// corpus order. For anonymized corpora this is exactly the per-speaker
// target; for pass-through corpora it is a thinned real sample.
inline std::vector<double> per_speaker_vectors(const Corpus& c) {
  std::unordered_set<std::string> seen;
  std::vector<double> rows;
  for (const auto& e : c.embeddings) {
    if (seen.insert(e.speaker_id).second) {
      rows.insert(rows.end(), e.vector.begin(), e.vector.end());
    }
  }
  return rows;
}

inline void add_group_gvd(EvalReport& report, const std::string& group,
                          const Corpus& original, const Corpus& anonymized) {
  // Distinctiveness is only defined across >= 2 speakers.
  if (original.speaker_ids().size() < 2) return;
  report.gvd_db[group] = gvd(original, anonymized);
}

}  // namespace detail

// Runs the full evaluation for one anonymization function: every requested
// attack scenario plus the utility metrics, all deterministic in the two
// anonymization seeds. The lazy-informed scenario requires distinct seeds
// so the attacker's enrollment anonymization never reuses the defender's
// target assignment.
inline EvalReport evaluate_anonymization(const Corpus& original_enroll,
                                         const Corpus& original_trial,
                                         const AnonymizeFn& anonymize,
                                         const std::vector<Scenario>& scenarios,
                                         std::uint64_t enroll_seed,
                                         std::uint64_t trial_seed,
                                         const std::string& strategy_name,
                                         const std::string& config_digest) {
  EvalReport report;
  report.strategy = strategy_name;
  report.config_digest = config_digest;
  report.utility_note = kUtilityNote;

  for (const Scenario scenario : scenarios) {
    const AttackReport attack = run_attack(original_enroll, original_trial,
                                           anonymize, scenario, enroll_seed,
                                           trial_seed);
    ScenarioEer entry;
    entry.female = attack.eer_female;
    entry.male = attack.eer_male;
    entry.pooled = attack.eer_pooled;
    report.eer_percent[scenario_name(scenario)] = entry;
  }

  const Corpus anon_trial = anonymize(original_trial, trial_seed);
  detail::add_group_gvd(report, "all", original_trial, anon_trial);
  for (const SexGroup sex : {SexGroup::kFemale, SexGroup::kMale}) {
    const Corpus orig_group = filter_by_sex(original_trial, sex);
    const Corpus anon_group = filter_by_sex(anon_trial, sex);
    detail::add_group_gvd(report, sex == SexGroup::kFemale ? "F" : "M",
                          orig_group, anon_group);
  }

  // Distribution fidelity: one vector per speaker from the anonymized
  // corpus against every real trial utterance, Gaussian kernel at the
  // median pooled pairwise distance.
  const std::vector<double> sample = detail::per_speaker_vectors(anon_trial);
  const std::vector<double> real = corpus_rows(original_trial);
  report.mmd_sample_count = sample.size() / original_trial.dim;
  report.mmd_bandwidth =
      median_pairwise_distance(sample, real, original_trial.dim);
  if (report.mmd_bandwidth <= 0.0) report.mmd_bandwidth = 1.0;
  report.mmd_value = mmd(sample, real, original_trial.dim, report.mmd_bandwidth);
  return report;
}

// JSON cannot carry infinities, so the collapsed-corpus sentinel becomes
// the string "-inf".
inline nlohmann::json gvd_to_json(double value) {
  if (std::isinf(value) && value < 0.0) return "-inf";
  return value;
}

inline nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["strategy"] = report.strategy;
  j["config_digest"] = report.config_digest;
  nlohmann::json eers = nlohmann::json::object();
  for (const auto& [name, entry] : report.eer_percent) {
    nlohmann::json e = nlohmann::json::object();
    if (entry.female) e["F"] = *entry.female;
    if (entry.male) e["M"] = *entry.male;
    e["all"] = entry.pooled;
    eers[name] = e;
  }
  j["eer_percent"] = eers;
  nlohmann::json gvds = nlohmann::json::object();
  for (const auto& [group, value] : report.gvd_db) {
    gvds[group] = gvd_to_json(value);
  }
  j["gvd_db"] = gvds;
  j["mmd"] = {{"value", report.mmd_value},
              {"bandwidth", report.mmd_bandwidth},
              {"sample_count", report.mmd_sample_count}};
  j["utility_note"] = report.utility_note;
  return j;
}

inline void write_report_json(const EvalReport& report,
                              const std::filesystem::path& path) {
  detail::write_file_atomic(path, report_to_json(report).dump(2) + "\n");
}

}  // namespace vpgan

#endif  // VPGAN_REPORT_HPP
