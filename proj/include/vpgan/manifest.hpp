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

#ifndef VPGAN_MANIFEST_HPP
#define VPGAN_MANIFEST_HPP

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vpgan/anonymizer.hpp"
#include "vpgan/corpus.hpp"
#include "vpgan/detail/binary_io.hpp"
#include "vpgan/errors.hpp"
#include "vpgan/privacy.hpp"
#include "vpgan/projection.hpp"
#include "vpgan/rng.hpp"
#include "vpgan/trainer.hpp"

namespace vpgan {

// Sub-seed streams derived from the manifest's base seed. Every stage
// draws from its own stream so stages can be rerun independently and
// reruns stay byte-identical.
inline constexpr std::uint64_t kCorpusSeedStream = 1;
inline constexpr std::uint64_t kTrainSeedStream = 2;
inline constexpr std::uint64_t kEnrollAnonSeedStream = 3;
inline constexpr std::uint64_t kTrialAnonSeedStream = 4;
inline constexpr std::uint64_t kProjectionSeedStream = 5;
inline constexpr std::uint64_t kEvalSeedStream = 6;
inline constexpr std::uint64_t kAblationSeedStream = 1000;  // + cell index

struct CorpusSource {
  bool synthetic = true;
  SyntheticCorpusSpec spec;  // seed filled from the corpus stream
  std::filesystem::path enrollment_path;
  std::filesystem::path trial_path;
};

struct AnonymizeManifest {
  Strategy strategy = Strategy::kGan;
  double threshold = 0.3;
  std::size_t max_attempts = 100;
  std::filesystem::path checkpoint;  // gan strategy
  std::filesystem::path pool_path;   // pool strategy
  PoolConfig pool_config;
};

struct AblationGrid {
  std::vector<double> gammas = {0.1, 1.0};
  std::vector<std::size_t> noise_dims = {16, 64};
  std::vector<ArchKind> architectures = {ArchKind::kResNet, ArchKind::kMlp};
  std::uint64_t total_iterations = 500;  // per-cell training budget
};

struct ExperimentManifest {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  CorpusSource corpus;
  TrainConfig train;  // seed filled from the train stream; architecture
                      // dims resolved against the corpus dimension via
                      // resolved_train_config
  ArchKind arch_kind = ArchKind::kResNet;
  std::optional<std::size_t> arch_hidden;
  std::optional<std::size_t> arch_depth;
  AnonymizeManifest anonymize;
  std::vector<Scenario> scenarios = {Scenario::kIgnorant,
                                     Scenario::kLazyInformed};
  ProjectionConfig projection;  // seed filled from the projection stream
  std::size_t projection_points_per_side = 400;
  AblationGrid ablation;
  std::string digest;  // crc32 of the manifest file bytes, hex
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j,
                                           const std::string& key,
                                           const std::string& context) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError("manifest: missing required field '" + context + key +
                      "'");
  }
  return *it;
}

template <typename T>
T field_as(const nlohmann::json& j, const std::string& key,
           const std::string& context, T fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("manifest: field '" + context + key +
                      "' has the wrong type");
  }
}

template <typename T>
T field_required(const nlohmann::json& j, const std::string& key,
                 const std::string& context) {
  const nlohmann::json& v = require_field(j, key, context);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("manifest: field '" + context + key +
                      "' has the wrong type");
  }
}

inline void require_path_exists(const std::filesystem::path& p,
                                const std::string& field) {
  if (!std::filesystem::exists(p)) {
    throw ConfigError("manifest: field '" + field + "' references '" +
                      p.string() + "', which does not exist");
  }
}

}  // namespace detail

inline ArchKind parse_arch_kind(const std::string& name,
                                const std::string& field) {
  if (name == "resnet") return ArchKind::kResNet;
  if (name == "mlp") return ArchKind::kMlp;
  throw ConfigError("manifest: field '" + field + "' must be 'resnet' or "
                    "'mlp', got '" + name + "'");
}

inline Scenario parse_scenario(const std::string& name,
                               const std::string& field) {
  if (name == "ignorant") return Scenario::kIgnorant;
  if (name == "lazy-informed") return Scenario::kLazyInformed;
  throw ConfigError("manifest: field '" + field + "' must be 'ignorant' or "
                    "'lazy-informed', got '" + name + "'");
}

// Builds the generator/critic architecture pair for a training section:
// ResNet by default; the MLP variant gets its hidden width matched to the
// ResNet parameter count unless the manifest pins one explicitly.
inline void resolve_architectures(TrainConfig& cfg, std::size_t embedding_dim,
                                  ArchKind kind,
                                  std::optional<std::size_t> hidden,
                                  std::optional<std::size_t> depth) {
  const TrainConfig defaults = default_train_config(embedding_dim);
  cfg.generator_spec = defaults.generator_spec;
  cfg.generator_spec.input_dim = cfg.noise_dim;
  cfg.critic_spec = defaults.critic_spec;
  if (kind == ArchKind::kMlp) {
    cfg.generator_spec = matched_mlp_spec(cfg.generator_spec);
    cfg.critic_spec = matched_mlp_spec(cfg.critic_spec);
  }
  if (depth) {
    cfg.generator_spec.depth = *depth;
    cfg.critic_spec.depth = *depth;
  }
  if (hidden) {
    cfg.generator_spec.hidden_dim = *hidden;
    cfg.critic_spec.hidden_dim = *hidden;
  }
}

inline ExperimentManifest parse_manifest(const nlohmann::json& j,
                                         const std::string& digest,
                                         bool check_paths = true) {
  if (!j.is_object()) throw ConfigError("manifest: top level must be an object");
  ExperimentManifest m;
  m.digest = digest;
  m.seed = detail::field_required<std::uint64_t>(j, "seed", "");
  m.output_dir = detail::field_required<std::string>(j, "output_dir", "");

  // corpus
  const nlohmann::json& jc = detail::require_field(j, "corpus", "");
  const std::string type =
      detail::field_required<std::string>(jc, "type", "corpus.");
  if (type == "synthetic") {
    m.corpus.synthetic = true;
    SyntheticCorpusSpec& s = m.corpus.spec;
    s.speaker_count = detail::field_as<std::size_t>(jc, "speakers", "corpus.",
                                                    s.speaker_count);
    s.utterances_per_speaker = detail::field_as<std::size_t>(
        jc, "utterances_per_speaker", "corpus.", s.utterances_per_speaker);
    s.dim = detail::field_as<std::size_t>(jc, "dim", "corpus.", s.dim);
    s.between_speaker_scale = detail::field_as<double>(
        jc, "between_speaker_scale", "corpus.", s.between_speaker_scale);
    s.within_speaker_scale = detail::field_as<double>(
        jc, "within_speaker_scale", "corpus.", s.within_speaker_scale);
    s.sex_split =
        detail::field_as<double>(jc, "sex_split", "corpus.", s.sex_split);
    s.seed = mix_seed(m.seed, kCorpusSeedStream);
    validate_synthetic_spec(s);
  } else if (type == "files") {
    m.corpus.synthetic = false;
    m.corpus.enrollment_path = detail::field_required<std::string>(
        jc, "enrollment", "corpus.");
    m.corpus.trial_path =
        detail::field_required<std::string>(jc, "trial", "corpus.");
    if (check_paths) {
      detail::require_path_exists(m.corpus.enrollment_path,
                                  "corpus.enrollment");
      detail::require_path_exists(m.corpus.trial_path, "corpus.trial");
    }
  } else {
    throw ConfigError(
        "manifest: field 'corpus.type' must be 'synthetic' or 'files', got '" +
        type + "'");
  }

  // train
  TrainConfig& t = m.train;
  if (const auto it = j.find("train"); it != j.end()) {
    const nlohmann::json& jt = *it;
    t.noise_dim =
        detail::field_as<std::size_t>(jt, "noise_dim", "train.", t.noise_dim);
    t.gamma = detail::field_as<double>(jt, "gamma", "train.", t.gamma);
    t.batch_size = detail::field_as<std::size_t>(jt, "batch_size", "train.",
                                                 t.batch_size);
    t.total_iterations = detail::field_as<std::uint64_t>(
        jt, "total_iterations", "train.", t.total_iterations);
    t.critic_steps = detail::field_as<std::size_t>(jt, "critic_steps",
                                                   "train.", t.critic_steps);
    t.lr = detail::field_as<double>(jt, "learning_rate", "train.", t.lr);
    t.checkpoint_every = detail::field_as<std::uint64_t>(
        jt, "checkpoint_every", "train.", t.checkpoint_every);
    t.mmd_every = detail::field_as<std::uint64_t>(jt, "mmd_every", "train.",
                                                  t.mmd_every);
    t.mmd_sample = detail::field_as<std::size_t>(jt, "mmd_sample", "train.",
                                                 t.mmd_sample);
    if (jt.contains("architecture")) {
      m.arch_kind = parse_arch_kind(
          detail::field_required<std::string>(jt, "architecture", "train."),
          "train.architecture");
    }
    if (jt.contains("hidden_dim")) {
      m.arch_hidden =
          detail::field_required<std::size_t>(jt, "hidden_dim", "train.");
    }
    if (jt.contains("depth")) {
      m.arch_depth = detail::field_required<std::size_t>(jt, "depth", "train.");
    }
  }
  t.seed = mix_seed(m.seed, kTrainSeedStream);

  // anonymize
  if (const auto it = j.find("anonymize"); it != j.end()) {
    const nlohmann::json& ja = *it;
    AnonymizeManifest& a = m.anonymize;
    if (ja.contains("strategy")) {
      const std::string s =
          detail::field_required<std::string>(ja, "strategy", "anonymize.");
      try {
        a.strategy = parse_strategy(s);
      } catch (const DataError&) {
        throw ConfigError("manifest: field 'anonymize.strategy' must be "
                          "'gan', 'pool' or 'random', got '" + s + "'");
      }
    }
    a.threshold =
        detail::field_as<double>(ja, "threshold", "anonymize.", a.threshold);
    a.max_attempts = detail::field_as<std::size_t>(ja, "max_attempts",
                                                   "anonymize.", a.max_attempts);
    if (ja.contains("checkpoint")) {
      a.checkpoint =
          detail::field_required<std::string>(ja, "checkpoint", "anonymize.");
      if (check_paths) {
        detail::require_path_exists(a.checkpoint, "anonymize.checkpoint");
      }
    }
    if (ja.contains("pool")) {
      a.pool_path = detail::field_required<std::string>(ja, "pool", "anonymize.");
      if (check_paths) {
        detail::require_path_exists(a.pool_path, "anonymize.pool");
      }
    }
    a.pool_config.candidates_per_query = detail::field_as<std::size_t>(
        ja, "candidates_per_query", "anonymize.",
        a.pool_config.candidates_per_query);
    a.pool_config.averaged_count = detail::field_as<std::size_t>(
        ja, "averaged_count", "anonymize.", a.pool_config.averaged_count);
    if (ja.contains("norm_target")) {
      a.pool_config.norm_target =
          detail::field_required<double>(ja, "norm_target", "anonymize.");
    }
  }

  // evaluate
  if (const auto it = j.find("evaluate"); it != j.end()) {
    const auto names = detail::field_as<std::vector<std::string>>(
        *it, "scenarios", "evaluate.", {"ignorant", "lazy-informed"});
    m.scenarios.clear();
    for (const std::string& s : names) {
      m.scenarios.push_back(parse_scenario(s, "evaluate.scenarios"));
    }
    if (m.scenarios.empty()) {
      throw ConfigError("manifest: field 'evaluate.scenarios' must name at "
                        "least one scenario");
    }
  }

  // projection
  if (const auto it = j.find("projection"); it != j.end()) {
    const nlohmann::json& jp = *it;
    ProjectionConfig& p = m.projection;
    p.pca_dims =
        detail::field_as<std::size_t>(jp, "pca_dims", "projection.", p.pca_dims);
    p.perplexity =
        detail::field_as<double>(jp, "perplexity", "projection.", p.perplexity);
    p.iterations = detail::field_as<std::size_t>(jp, "iterations",
                                                 "projection.", p.iterations);
    p.early_exaggeration = detail::field_as<double>(
        jp, "early_exaggeration", "projection.", p.early_exaggeration);
    p.learning_rate = detail::field_as<double>(jp, "learning_rate",
                                               "projection.", p.learning_rate);
    m.projection_points_per_side = detail::field_as<std::size_t>(
        jp, "points_per_side", "projection.", m.projection_points_per_side);
  }
  m.projection.seed = mix_seed(m.seed, kProjectionSeedStream);

  // ablate
  if (const auto it = j.find("ablate"); it != j.end()) {
    const nlohmann::json& ja = *it;
    AblationGrid& g = m.ablation;
    g.gammas = detail::field_as<std::vector<double>>(ja, "gammas", "ablate.",
                                                     g.gammas);
    g.noise_dims = detail::field_as<std::vector<std::size_t>>(
        ja, "noise_dims", "ablate.", g.noise_dims);
    if (ja.contains("architectures")) {
      g.architectures.clear();
      for (const std::string& s :
           detail::field_required<std::vector<std::string>>(ja, "architectures",
                                                            "ablate.")) {
        g.architectures.push_back(parse_arch_kind(s, "ablate.architectures"));
      }
    }
    g.total_iterations = detail::field_as<std::uint64_t>(
        ja, "total_iterations", "ablate.", g.total_iterations);
    if (g.gammas.empty() || g.noise_dims.empty() || g.architectures.empty()) {
      throw ConfigError("manifest: ablate grid axes must be non-empty");
    }
  }
  return m;
}

// Finalizes the manifest's train section against the corpus dimension
// (known up front for synthetic corpora, at load time for file corpora).
inline TrainConfig resolved_train_config(const ExperimentManifest& m,
                                         std::size_t embedding_dim) {
  TrainConfig cfg = m.train;
  resolve_architectures(cfg, embedding_dim, m.arch_kind, m.arch_hidden,
                        m.arch_depth);
  validate_train_config(cfg, embedding_dim);
  return cfg;
}

// Loads and validates a manifest file. The output directory may be
// overridden by the VPGAN_OUTPUT_DIR environment variable — the only
// environment the tool reads.
inline ExperimentManifest load_manifest(const std::filesystem::path& path,
                                        bool check_paths = true) {
  const std::vector<unsigned char> bytes = detail::read_file_bytes(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": manifest is not valid JSON: " +
                      e.what());
  }
  char digest[16];
  std::snprintf(digest, sizeof(digest), "%08x",
                detail::crc32(bytes.data(), bytes.size()));
  ExperimentManifest m = parse_manifest(j, digest, check_paths);
  if (const char* env = std::getenv("VPGAN_OUTPUT_DIR");
      env != nullptr && *env != '\0') {
    m.output_dir = env;
  }
  return m;
}

// Stable output layout under the manifest's output directory.
struct OutputLayout {
  std::filesystem::path root;

  std::filesystem::path corpora() const { return root / "corpora"; }
  std::filesystem::path checkpoints() const { return root / "checkpoints"; }
  std::filesystem::path mappings() const { return root / "mappings"; }
  std::filesystem::path reports() const { return root / "reports"; }
  std::filesystem::path figures() const { return root / "figures"; }
  std::filesystem::path logs() const { return root / "logs"; }
};

}  // namespace vpgan

#endif  // VPGAN_MANIFEST_HPP
