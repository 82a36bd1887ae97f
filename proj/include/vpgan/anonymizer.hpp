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

#ifndef VPGAN_ANONYMIZER_HPP
#define VPGAN_ANONYMIZER_HPP

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vpgan/corpus.hpp"
#include "vpgan/errors.hpp"
#include "vpgan/metrics.hpp"
#include "vpgan/network.hpp"
#include "vpgan/rng.hpp"
#include "vpgan/trainer.hpp"

namespace vpgan {

enum class Strategy { kGan, kPool, kRandom };

inline std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kGan:
      return "gan";
    case Strategy::kPool:
      return "pool";
    default:
      return "random";
  }
}

inline Strategy parse_strategy(const std::string& name) {
  if (name == "gan") return Strategy::kGan;
  if (name == "pool") return Strategy::kPool;
  if (name == "random") return Strategy::kRandom;
  throw DataError("unknown anonymization strategy '" + name + "'");
}

// One anonymous voice per (dataset, speaker): all utterances of that
// speaker in that dataset are replaced by the same target vector.
struct MappingEntry {
  std::string dataset;
  std::string speaker;
  Strategy strategy = Strategy::kGan;
  std::uint64_t seed = 0;
  std::vector<double> vector;

  bool operator==(const MappingEntry&) const = default;
};

struct AnonymizationMapping {
  std::vector<MappingEntry> entries;  // sorted by (dataset, speaker)
  std::string provenance;  // checkpoint or pool path; not persisted in JSONL

  const MappingEntry* find(const std::string& dataset,
                           const std::string& speaker) const {
    for (const auto& e : entries) {
      if (e.dataset == dataset && e.speaker == speaker) return &e;
    }
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Target selection strategies.

// Rejection-samples the generator until the sample's cosine distance from
// the speaker's mean embedding and from every one of the speaker's
// utterances exceeds `threshold`. A healthy generator passes within a few
// draws; exhausting max_attempts signals a collapsed generator, not a
// condition to retry.
inline std::vector<double> gan_select_target(
    std::span<const double> source_mean,
    const std::vector<std::span<const double>>& source_utterances,
    const Network& generator, Rng& rng, double threshold = 0.3,
    std::size_t max_attempts = 100) {
  if (generator.spec().output_dim != source_mean.size()) {
    throw ConfigError("generator output dim " +
                      std::to_string(generator.spec().output_dim) +
                      " does not match source dim " +
                      std::to_string(source_mean.size()));
  }
  if (max_attempts == 0) throw ConfigError("max attempts must be positive");
  const std::size_t noise_dim = generator.spec().input_dim;
  double best = -1.0;
  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    const std::vector<double> z = sample_noise(1, noise_dim, rng);
    std::vector<double> candidate = generator.eval(z, 1);
    double min_distance = cosine_distance(source_mean, candidate);
    for (const auto& utt : source_utterances) {
      min_distance = std::min(min_distance, cosine_distance(utt, candidate));
    }
    if (min_distance > threshold) return candidate;
    best = std::max(best, min_distance);
  }
  throw DivergenceError(
      "target selection failed: no generator sample cleared cosine distance " +
      detail::double_to_string(threshold) + " after " +
      std::to_string(max_attempts) + " attempts (best " +
      detail::double_to_string(best) + ") — generator looks collapsed");
}

struct PoolConfig {
  std::size_t candidates_per_query = 200;  // most-distant set size
  std::size_t averaged_count = 100;
  std::optional<double> norm_target;  // default: mean pool speaker norm
};

// Ranks pool speaker-level embeddings by cosine distance from the source
// (most distant first), picks averaged_count of the top
// candidates_per_query at random, averages them, and rescales the average
// to the target norm.
inline std::vector<double> pool_select_target(
    std::span<const double> source_mean,
    const std::map<std::string, std::vector<double>>& pool_means,
    const PoolConfig& cfg, Rng& rng) {
  if (pool_means.empty()) throw ConfigError("pool corpus has no speakers");
  if (cfg.averaged_count == 0 || cfg.averaged_count > cfg.candidates_per_query) {
    throw ConfigError("averaged count must lie in [1, candidates-per-query]");
  }
  if (cfg.candidates_per_query > pool_means.size()) {
    throw ConfigError("pool has " + std::to_string(pool_means.size()) +
                      " speakers, fewer than candidates-per-query " +
                      std::to_string(cfg.candidates_per_query));
  }
  double norm_target;
  if (cfg.norm_target) {
    norm_target = *cfg.norm_target;
  } else {
    double total = 0.0;
    for (const auto& [id, mean] : pool_means) total += norm(mean);
    norm_target = total / static_cast<double>(pool_means.size());
  }

  // Stable ranking: by distance descending, speaker id breaking ties.
  std::vector<std::pair<double, const std::vector<double>*>> ranked;
  ranked.reserve(pool_means.size());
  for (const auto& [id, mean] : pool_means) {
    ranked.emplace_back(cosine_distance(source_mean, mean), &mean);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  ranked.resize(cfg.candidates_per_query);

  // Partial Fisher-Yates: the first averaged_count slots become a uniform
  // sample without replacement.
  std::vector<std::size_t> order(ranked.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = 0; i < cfg.averaged_count; ++i) {
    const std::size_t j = i + rng.uniform_index(order.size() - i);
    std::swap(order[i], order[j]);
  }

  const std::size_t dim = source_mean.size();
  std::vector<double> target(dim, 0.0);
  for (std::size_t i = 0; i < cfg.averaged_count; ++i) {
    const std::vector<double>& mean = *ranked[order[i]].second;
    for (std::size_t k = 0; k < dim; ++k) target[k] += mean[k];
  }
  for (double& v : target) v /= static_cast<double>(cfg.averaged_count);

  const double current = norm(target);
  if (current == 0.0) {
    throw EvalError("averaged pool embedding has zero norm; cannot rescale");
  }
  for (double& v : target) v *= norm_target / current;
  return target;
}

// Per-coordinate mean and (population) standard deviation of a reference
// corpus — the moments the random baseline matches.
struct ScaleStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

inline ScaleStats compute_scale_stats(const Corpus& corpus) {
  validate_corpus(corpus);
  ScaleStats stats;
  stats.mean.assign(corpus.dim, 0.0);
  stats.stddev.assign(corpus.dim, 0.0);
  const double n = static_cast<double>(corpus.embeddings.size());
  for (const auto& e : corpus.embeddings) {
    for (std::size_t k = 0; k < corpus.dim; ++k) stats.mean[k] += e.vector[k];
  }
  for (double& v : stats.mean) v /= n;
  for (const auto& e : corpus.embeddings) {
    for (std::size_t k = 0; k < corpus.dim; ++k) {
      const double d = e.vector[k] - stats.mean[k];
      stats.stddev[k] += d * d;
    }
  }
  for (double& v : stats.stddev) v = std::sqrt(v / n);
  return stats;
}

inline std::vector<double> random_select_target(std::size_t dim, Rng& rng,
                                                const ScaleStats& stats) {
  if (stats.mean.size() != dim || stats.stddev.size() != dim) {
    throw ConfigError("scale stats dimension does not match target dim " +
                      std::to_string(dim));
  }
  std::vector<double> target(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    target[k] = stats.mean[k] + stats.stddev[k] * rng.normal();
  }
  return target;
}

// ---------------------------------------------------------------------------
// Mapping construction and application.

struct AnonymizerConfig {
  Strategy strategy = Strategy::kGan;
  // gan
  const Network* generator = nullptr;
  double threshold = 0.3;
  std::size_t max_attempts = 100;
  // pool
  const Corpus* pool = nullptr;
  PoolConfig pool_config;
  // random; defaults to the corpus being anonymized
  const Corpus* scale_reference = nullptr;
  std::string provenance;
};

// Selects one target per speaker, in sorted speaker order so a fixed seed
// yields a fixed mapping.
inline AnonymizationMapping build_mapping(const Corpus& corpus,
                                          const AnonymizerConfig& cfg,
                                          std::uint64_t seed) {
  validate_corpus(corpus);
  Rng rng(seed);
  const auto means = corpus.speaker_means();

  std::map<std::string, std::vector<std::span<const double>>> utterances;
  for (const auto& e : corpus.embeddings) {
    utterances[e.speaker_id].push_back(e.vector);
  }

  std::map<std::string, std::vector<double>> pool_means;
  ScaleStats stats;
  if (cfg.strategy == Strategy::kGan) {
    if (cfg.generator == nullptr) {
      throw ConfigError("gan strategy requires a generator");
    }
  } else if (cfg.strategy == Strategy::kPool) {
    if (cfg.pool == nullptr) throw ConfigError("pool strategy requires a pool");
    validate_corpus(*cfg.pool);
    if (cfg.pool->dim != corpus.dim) {
      throw ConfigError("pool dimension " + std::to_string(cfg.pool->dim) +
                        " does not match corpus dimension " +
                        std::to_string(corpus.dim));
    }
    pool_means = cfg.pool->speaker_means();
  } else {
    stats = compute_scale_stats(
        cfg.scale_reference != nullptr ? *cfg.scale_reference : corpus);
    if (stats.mean.size() != corpus.dim) {
      throw ConfigError("scale reference dimension does not match corpus");
    }
  }

  AnonymizationMapping mapping;
  mapping.provenance = cfg.provenance;
  for (const auto& [speaker, mean] : means) {
    MappingEntry entry;
    entry.dataset = corpus.name;
    entry.speaker = speaker;
    entry.strategy = cfg.strategy;
    entry.seed = seed;
    switch (cfg.strategy) {
      case Strategy::kGan:
        entry.vector =
            gan_select_target(mean, utterances.at(speaker), *cfg.generator,
                              rng, cfg.threshold, cfg.max_attempts);
        break;
      case Strategy::kPool:
        entry.vector = pool_select_target(mean, pool_means, cfg.pool_config, rng);
        break;
      case Strategy::kRandom:
        entry.vector = random_select_target(corpus.dim, rng, stats);
        break;
    }
    mapping.entries.push_back(std::move(entry));
  }
  return mapping;
}

// Replaces every utterance's vector with its speaker's target. Ids, sex
// labels, ordering — everything but the vector payload — are preserved.
// A corpus speaker absent from the mapping is an error: silently passing
// the original embedding through would leak the identity.
inline Corpus apply_mapping(const Corpus& corpus,
                            const AnonymizationMapping& mapping) {
  Corpus out = corpus;
  std::map<std::string, const MappingEntry*> lookup;
  for (const auto& e : mapping.entries) {
    if (e.dataset == corpus.name) lookup[e.speaker] = &e;
  }
  for (auto& e : out.embeddings) {
    const auto it = lookup.find(e.speaker_id);
    if (it == lookup.end()) {
      throw DataError("speaker '" + e.speaker_id +
                      "' of dataset '" + corpus.name +
                      "' has no entry in the anonymization mapping");
    }
    if (it->second->vector.size() != corpus.dim) {
      throw DataError("mapping target for speaker '" + e.speaker_id +
                      "' has dimension " +
                      std::to_string(it->second->vector.size()) +
                      ", corpus has " + std::to_string(corpus.dim));
    }
    e.vector = it->second->vector;
  }
  return out;
}

inline std::pair<Corpus, AnonymizationMapping> anonymize_corpus(
    const Corpus& corpus, const AnonymizerConfig& cfg, std::uint64_t seed) {
  AnonymizationMapping mapping = build_mapping(corpus, cfg, seed);
  Corpus anonymized = apply_mapping(corpus, mapping);
  return {std::move(anonymized), std::move(mapping)};
}

// ---------------------------------------------------------------------------
// Mapping file: JSONL of {dataset, seed, speaker, strategy, vector},
// one line per (dataset, speaker), sorted keys and shortest round-trip
// doubles for byte-stable rewrites.

inline void write_mapping(const AnonymizationMapping& mapping,
                          const std::filesystem::path& path) {
  std::string out;
  for (const auto& e : mapping.entries) {
    nlohmann::json line{{"dataset", e.dataset},
                        {"seed", e.seed},
                        {"speaker", e.speaker},
                        {"strategy", strategy_name(e.strategy)},
                        {"vector", e.vector}};
    out += line.dump();
    out += '\n';
  }
  detail::write_file_atomic(path, out);
}

inline AnonymizationMapping read_mapping(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  AnonymizationMapping mapping;
  std::string line;
  std::size_t line_no = 0;
  std::map<std::pair<std::string, std::string>, bool> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      MappingEntry e;
      e.dataset = j.at("dataset").get<std::string>();
      e.speaker = j.at("speaker").get<std::string>();
      e.strategy = parse_strategy(j.at("strategy").get<std::string>());
      e.seed = j.at("seed").get<std::uint64_t>();
      e.vector = j.at("vector").get<std::vector<double>>();
      if (!seen.emplace(std::pair(e.dataset, e.speaker), true).second) {
        throw DataError(path.string() + ":" + std::to_string(line_no) +
                        ": duplicate mapping for (" + e.dataset + ", " +
                        e.speaker + ")");
      }
      mapping.entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": malformed mapping line: " + ex.what());
    }
  }
  return mapping;
}

}  // namespace vpgan

#endif  // VPGAN_ANONYMIZER_HPP
