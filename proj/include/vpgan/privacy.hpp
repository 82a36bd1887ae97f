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

#ifndef VPGAN_PRIVACY_HPP
#define VPGAN_PRIVACY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vpgan/corpus.hpp"
#include "vpgan/detail/binary_io.hpp"
#include "vpgan/detail/text.hpp"
#include "vpgan/errors.hpp"
#include "vpgan/metrics.hpp"

namespace vpgan {

enum class Scenario { kIgnorant, kLazyInformed };

inline std::string scenario_name(Scenario s) {
  return s == Scenario::kIgnorant ? "ignorant" : "lazy-informed";
}

struct ScoredTrial {
  std::string enroll_speaker;
  std::string trial_utterance;
  double score = 0.0;
  bool is_target = false;
};

struct TrialScoreSet {
  std::vector<double> target_scores;
  std::vector<double> nontarget_scores;
};

// Cosine scoring: each enrollment speaker is represented by their mean
// embedding; every (enrollment-speaker, trial-utterance) pair is scored.
// A pair is a target trial iff the speaker ids match.
inline std::vector<ScoredTrial> score_trials(const Corpus& enrollment,
                                             const Corpus& trial) {
  if (enrollment.dim != trial.dim) {
    throw DataError("enrollment and trial corpora have different dimensions (" +
                    std::to_string(enrollment.dim) + " vs " +
                    std::to_string(trial.dim) + ")");
  }
  const auto means = enrollment.speaker_means();
  bool overlap = false;
  for (const auto& e : trial.embeddings) {
    if (means.count(e.speaker_id) != 0) {
      overlap = true;
      break;
    }
  }
  if (!overlap) {
    throw EvalError("no speaker overlap between enrollment and trial: no "
                    "target trials exist");
  }
  std::vector<ScoredTrial> scored;
  scored.reserve(means.size() * trial.embeddings.size());
  for (const auto& [speaker, mean] : means) {
    for (const auto& e : trial.embeddings) {
      ScoredTrial t;
      t.enroll_speaker = speaker;
      // Utterance ids repeat across speakers; the composite key is unique.
      t.trial_utterance = e.speaker_id + "/" + e.utterance_id;
      t.score = cosine_similarity(mean, e.vector);
      t.is_target = speaker == e.speaker_id;
      scored.push_back(std::move(t));
    }
  }
  return scored;
}

inline TrialScoreSet to_score_set(const std::vector<ScoredTrial>& trials) {
  TrialScoreSet set;
  for (const auto& t : trials) {
    (t.is_target ? set.target_scores : set.nontarget_scores).push_back(t.score);
  }
  return set;
}

inline TrialScoreSet asv_score(const Corpus& enrollment, const Corpus& trial) {
  return to_score_set(score_trials(enrollment, trial));
}

// Audit export: one row per scored pair.
inline void write_scores_csv(const std::vector<ScoredTrial>& trials,
                             const std::filesystem::path& path) {
  std::string out = "enroll_speaker,trial_utterance,score,is_target\n";
  for (const auto& t : trials) {
    out += t.enroll_speaker;
    out += ',';
    out += t.trial_utterance;
    out += ',';
    out += detail::double_to_string(t.score);
    out += ',';
    out += t.is_target ? '1' : '0';
    out += '\n';
  }
  detail::write_file_atomic(path, out);
}

// Equal error rate in percent: the value where the false-acceptance rate
// (nontargets scored >= threshold) meets the false-rejection rate
// (targets scored < threshold). FAR is non-increasing and FRR
// non-decreasing in the threshold, so the crossing is unique; between
// adjacent operating points the ROC segment is interpolated linearly, and
// an exactly flat bracket resolves to its midpoint.
inline double eer(const TrialScoreSet& scores) {
  if (scores.target_scores.empty() || scores.nontarget_scores.empty()) {
    throw EvalError("equal error rate needs both target and nontarget scores");
  }
  std::vector<double> targets = scores.target_scores;
  std::vector<double> nontargets = scores.nontarget_scores;
  std::sort(targets.begin(), targets.end());
  std::sort(nontargets.begin(), nontargets.end());
  const double nt = static_cast<double>(targets.size());
  const double nn = static_cast<double>(nontargets.size());

  // Candidate thresholds: every distinct score, plus one beyond the top.
  std::vector<double> thresholds;
  thresholds.reserve(targets.size() + nontargets.size() + 1);
  std::merge(targets.begin(), targets.end(), nontargets.begin(),
             nontargets.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  thresholds.push_back(thresholds.back() + 1.0);  // FAR 0, FRR 1 endpoint

  auto far_at = [&](double th) {
    // fraction of nontargets >= th
    const auto it = std::lower_bound(nontargets.begin(), nontargets.end(), th);
    return static_cast<double>(nontargets.end() - it) / nn;
  };
  auto frr_at = [&](double th) {
    // fraction of targets < th
    const auto it = std::lower_bound(targets.begin(), targets.end(), th);
    return static_cast<double>(it - targets.begin()) / nt;
  };

  // At the lowest threshold every score is accepted: FAR 1, FRR 0.
  double prev_far = far_at(thresholds[0]);
  double prev_frr = frr_at(thresholds[0]);
  for (std::size_t k = 1; k < thresholds.size(); ++k) {
    const double far = far_at(thresholds[k]);
    const double frr = frr_at(thresholds[k]);
    if (far <= frr) {
      const double d0 = prev_far - prev_frr;  // > 0
      const double d1 = far - frr;            // <= 0
      const double denom = d0 - d1;
      const double t = denom > 0.0 ? d0 / denom : 0.5;  // flat: midpoint
      const double eer_value = prev_far + t * (far - prev_far);
      return 100.0 * std::clamp(eer_value, 0.0, 1.0);
    }
    prev_far = far;
    prev_frr = frr;
  }
  // Unreachable: the synthetic +1 threshold forces FAR 0 <= FRR 1.
  throw EvalError("equal error rate crossing not found");
}

// ---------------------------------------------------------------------------
// Attack scenarios.

inline Corpus filter_by_sex(const Corpus& corpus, SexGroup sex) {
  Corpus out;
  out.name = corpus.name;
  out.split = corpus.split;
  out.dim = corpus.dim;
  for (const auto& e : corpus.embeddings) {
    if (e.sex == sex) out.embeddings.push_back(e);
  }
  return out;
}

struct AttackReport {
  Scenario scenario = Scenario::kIgnorant;
  std::optional<double> eer_female;
  std::optional<double> eer_male;
  double eer_pooled = 0.0;
};

// Anonymization hook: returns the anonymized version of a corpus for a
// given seed. The two scenario corpora get different seeds so that their
// per-speaker targets differ ("same technique, different targets").
using AnonymizeFn = std::function<Corpus(const Corpus&, std::uint64_t)>;

// ignorant: the attacker enrolls on original data, trials are anonymized.
// lazy-informed: the attacker anonymizes their enrollment data with the
// same technique but (necessarily) different targets.
//
// EER is computed per sex group where both sides have speakers of that
// sex; the pooled figure is the plain mean of the per-sex EERs, falling
// back to scoring all pairs together when no sex labels exist.
inline AttackReport run_attack(const Corpus& original_enroll,
                               const Corpus& original_trial,
                               const AnonymizeFn& anonymize, Scenario scenario,
                               std::uint64_t enroll_seed,
                               std::uint64_t trial_seed) {
  if (scenario == Scenario::kLazyInformed && enroll_seed == trial_seed) {
    throw ConfigError("lazy-informed attack needs distinct enrollment and "
                      "trial anonymization seeds; equal seeds would link the "
                      "two sides through shared targets");
  }
  const Corpus anon_trial = anonymize(original_trial, trial_seed);
  const Corpus* enroll = &original_enroll;
  Corpus anon_enroll;
  if (scenario == Scenario::kLazyInformed) {
    anon_enroll = anonymize(original_enroll, enroll_seed);
    enroll = &anon_enroll;
  }

  AttackReport report;
  report.scenario = scenario;
  std::vector<double> sex_eers;
  for (const SexGroup sex : {SexGroup::kFemale, SexGroup::kMale}) {
    const Corpus e = filter_by_sex(*enroll, sex);
    const Corpus t = filter_by_sex(anon_trial, sex);
    if (e.embeddings.empty() || t.embeddings.empty()) continue;
    const double value = eer(asv_score(e, t));
    (sex == SexGroup::kFemale ? report.eer_female : report.eer_male) = value;
    sex_eers.push_back(value);
  }
  if (!sex_eers.empty()) {
    double total = 0.0;
    for (double v : sex_eers) total += v;
    report.eer_pooled = total / static_cast<double>(sex_eers.size());
  } else {
    report.eer_pooled = eer(asv_score(*enroll, anon_trial));
  }
  return report;
}

}  // namespace vpgan

#endif  // VPGAN_PRIVACY_HPP
