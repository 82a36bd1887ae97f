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

#ifndef VPGAN_CORPUS_HPP
#define VPGAN_CORPUS_HPP

#include <json.hpp>

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vpgan/detail/binary_io.hpp"
#include "vpgan/errors.hpp"
#include "vpgan/rng.hpp"
#include "vpgan/tensor.hpp"

namespace vpgan {

enum class SexGroup : std::uint8_t { kUnspecified = 0, kFemale = 1, kMale = 2 };

inline std::string sex_group_name(SexGroup sex) {
  switch (sex) {
    case SexGroup::kFemale:
      return "F";
    case SexGroup::kMale:
      return "M";
    default:
      return "unspecified";
  }
}

inline SexGroup parse_sex_group(const std::string& name) {
  if (name == "F") return SexGroup::kFemale;
  if (name == "M") return SexGroup::kMale;
  if (name == "unspecified") return SexGroup::kUnspecified;
  throw DataError("unknown sex group '" + name + "'");
}

struct SpeakerEmbedding {
  std::string speaker_id;
  std::string utterance_id;
  SexGroup sex = SexGroup::kUnspecified;
  std::vector<double> vector;

  bool operator==(const SpeakerEmbedding&) const = default;
};

enum class Split { kEnrollment, kTrial };

struct Corpus {
  std::string name;
  Split split = Split::kEnrollment;
  std::size_t dim = 0;
  std::vector<SpeakerEmbedding> embeddings;

  // Distinct speaker ids in sorted order — the canonical iteration order
  // for anything that must be reproducible.
  std::vector<std::string> speaker_ids() const {
    std::set<std::string> ids;
    for (const auto& e : embeddings) ids.insert(e.speaker_id);
    return std::vector<std::string>(ids.begin(), ids.end());
  }

  // Mean embedding per speaker (speaker-level representation).
  std::map<std::string, std::vector<double>> speaker_means() const {
    std::map<std::string, std::pair<std::vector<double>, std::size_t>> acc;
    for (const auto& e : embeddings) {
      auto& [sum, count] = acc[e.speaker_id];
      if (sum.empty()) sum.assign(dim, 0.0);
      for (std::size_t i = 0; i < dim; ++i) sum[i] += e.vector[i];
      ++count;
    }
    std::map<std::string, std::vector<double>> means;
    for (auto& [id, entry] : acc) {
      auto& [sum, count] = entry;
      for (double& v : sum) v /= static_cast<double>(count);
      means[id] = std::move(sum);
    }
    return means;
  }
};

// Enforces the corpus invariants shared by every loader and generator:
// non-empty, homogeneous dimension, finite values, unique
// (speaker, utterance) keys. Each violation is a distinct error.
inline void validate_corpus(const Corpus& corpus) {
  if (corpus.embeddings.empty()) {
    throw DataError("corpus '" + corpus.name + "' is empty");
  }
  if (corpus.dim == 0) {
    throw DataError("corpus '" + corpus.name + "' has zero dimension");
  }
  std::set<std::pair<std::string, std::string>> keys;
  for (const auto& e : corpus.embeddings) {
    if (e.vector.size() != corpus.dim) {
      throw DataError("corpus '" + corpus.name + "': embedding " +
                      e.speaker_id + "/" + e.utterance_id + " has dimension " +
                      std::to_string(e.vector.size()) + ", expected " +
                      std::to_string(corpus.dim));
    }
    if (!all_finite(e.vector)) {
      throw DataError("corpus '" + corpus.name + "': embedding " +
                      e.speaker_id + "/" + e.utterance_id +
                      " has non-finite values");
    }
    if (!keys.emplace(e.speaker_id, e.utterance_id).second) {
      throw DataError("corpus '" + corpus.name + "': duplicate key (" +
                      e.speaker_id + ", " + e.utterance_id + ")");
    }
  }
}

// ---------------------------------------------------------------------------
// JSONL format: one {"sex": ..., "speaker": ..., "utterance": ...,
// "vector": [...]} object per line. Keys are emitted sorted and doubles use
// the shortest representation that reparses to the same value, so rewriting
// a loaded corpus is byte-stable.

inline void write_corpus_jsonl(const Corpus& corpus,
                               const std::filesystem::path& path) {
  validate_corpus(corpus);
  std::string out;
  for (const auto& e : corpus.embeddings) {
    nlohmann::json line{{"sex", sex_group_name(e.sex)},
                        {"speaker", e.speaker_id},
                        {"utterance", e.utterance_id},
                        {"vector", e.vector}};
    out += line.dump();
    out += '\n';
  }
  detail::write_file_atomic(path, out);
}

inline Corpus read_corpus_jsonl(const std::filesystem::path& path,
                                const std::string& name, Split split) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  Corpus corpus;
  corpus.name = name;
  corpus.split = split;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": malformed JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("speaker") || !j.contains("utterance") ||
        !j.contains("vector")) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": record needs speaker, utterance and vector fields");
    }
    SpeakerEmbedding e;
    try {
      e.speaker_id = j.at("speaker").get<std::string>();
      e.utterance_id = j.at("utterance").get<std::string>();
      // Extractor dumps without sex labels still load as "unspecified".
      e.sex = j.contains("sex") ? parse_sex_group(j.at("sex").get<std::string>())
                                : SexGroup::kUnspecified;
      e.vector = j.at("vector").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": bad field type: " + ex.what());
    }
    if (corpus.dim == 0) corpus.dim = e.vector.size();
    corpus.embeddings.push_back(std::move(e));
  }
  validate_corpus(corpus);
  return corpus;
}

// ---------------------------------------------------------------------------
// Binary format, all integers little-endian:
//   magic "VPEMB" | version u32 | dim u32 | count u64 | count records
// record: speaker (u16 length + UTF-8) | utterance (u16 length + UTF-8)
//         | sex u8 | dim * f32
// Vectors are stored f32 and promoted to f64 in memory.

inline constexpr char kCorpusMagic[] = "VPEMB";
inline constexpr std::uint32_t kCorpusVersion = 1;

inline void write_corpus_binary(const Corpus& corpus,
                                const std::filesystem::path& path) {
  validate_corpus(corpus);
  detail::ByteWriter w;
  w.raw(kCorpusMagic, 5);
  w.u32(kCorpusVersion);
  w.u32(static_cast<std::uint32_t>(corpus.dim));
  w.u64(corpus.embeddings.size());
  for (const auto& e : corpus.embeddings) {
    w.str_u16(e.speaker_id);
    w.str_u16(e.utterance_id);
    w.u8(static_cast<std::uint8_t>(e.sex));
    for (double v : e.vector) w.f32(static_cast<float>(v));
  }
  detail::write_file_atomic(path, w.bytes());
}

inline Corpus read_corpus_binary(const std::filesystem::path& path,
                                 const std::string& name, Split split) {
  detail::ByteReader r(detail::read_file_bytes(path), path.string());
  r.expect_magic(kCorpusMagic, "embedding corpus");
  const std::uint32_t version = r.u32();
  if (version != kCorpusVersion) {
    throw DataError(path.string() + ": unsupported corpus version " +
                    std::to_string(version));
  }
  Corpus corpus;
  corpus.name = name;
  corpus.split = split;
  corpus.dim = r.u32();
  const std::uint64_t count = r.u64();
  corpus.embeddings.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    SpeakerEmbedding e;
    e.speaker_id = r.str_u16();
    e.utterance_id = r.str_u16();
    const std::uint8_t sex = r.u8();
    if (sex > 2) {
      throw DataError(path.string() + ": bad sex-group code " +
                      std::to_string(sex) + " in record " + std::to_string(i));
    }
    e.sex = static_cast<SexGroup>(sex);
    e.vector.resize(corpus.dim);
    for (std::size_t k = 0; k < corpus.dim; ++k) {
      e.vector[k] = static_cast<double>(r.f32());
    }
    corpus.embeddings.push_back(std::move(e));
  }
  if (r.remaining() != 0) {
    throw DataError(path.string() + ": trailing bytes after last record");
  }
  validate_corpus(corpus);
  return corpus;
}

// Dispatch on extension: ".jsonl" is text, everything else binary.
inline bool is_jsonl_path(const std::filesystem::path& path) {
  return path.extension() == ".jsonl";
}

inline Corpus read_corpus(const std::filesystem::path& path,
                          const std::string& name, Split split) {
  return is_jsonl_path(path) ? read_corpus_jsonl(path, name, split)
                             : read_corpus_binary(path, name, split);
}

inline void write_corpus(const Corpus& corpus,
                         const std::filesystem::path& path) {
  if (is_jsonl_path(path)) {
    write_corpus_jsonl(corpus, path);
  } else {
    write_corpus_binary(corpus, path);
  }
}

// ---------------------------------------------------------------------------
// Synthetic corpus oracle. Speaker means live near a low-rank subspace
// (rank 32) with small full-rank noise — mirroring how real speaker
// embeddings concentrate near a manifold — and utterances scatter around
// their speaker mean. Enrollment and trial share speakers but have
// disjoint utterance sets.

struct SyntheticCorpusSpec {
  std::size_t speaker_count = 200;
  std::size_t utterances_per_speaker = 20;  // total across both splits
  std::size_t dim = 704;
  double between_speaker_scale = 1.0;
  double within_speaker_scale = 0.35;
  double sex_split = 0.5;  // fraction of female speakers
  std::uint64_t seed = 0;
};

inline void validate_synthetic_spec(const SyntheticCorpusSpec& spec) {
  if (spec.speaker_count == 0) {
    throw ConfigError("synthetic corpus: speaker count must be positive");
  }
  if (spec.utterances_per_speaker < 2) {
    throw ConfigError(
        "synthetic corpus: need at least 2 utterances per speaker to fill "
        "both splits");
  }
  if (spec.dim == 0) throw ConfigError("synthetic corpus: zero dimension");
  if (!(spec.between_speaker_scale > spec.within_speaker_scale)) {
    throw ConfigError(
        "synthetic corpus: between-speaker scale must exceed within-speaker "
        "scale");
  }
  if (spec.within_speaker_scale < 0.0) {
    throw ConfigError("synthetic corpus: negative within-speaker scale");
  }
  if (spec.sex_split < 0.0 || spec.sex_split > 1.0) {
    throw ConfigError("synthetic corpus: sex split must lie in [0, 1]");
  }
}

inline std::pair<Corpus, Corpus> generate_synthetic(
    const SyntheticCorpusSpec& spec) {
  validate_synthetic_spec(spec);
  Rng rng(spec.seed);

  const std::size_t rank = std::min<std::size_t>(32, spec.dim);
  // Random Gaussian matrix, orthonormalized, spans the speaker subspace.
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(spec.dim),
                        static_cast<Eigen::Index>(rank));
  for (Eigen::Index i = 0; i < basis.rows(); ++i) {
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
      basis(i, j) = rng.normal();
    }
  }
  const Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(basis).householderQ() *
      Eigen::MatrixXd::Identity(basis.rows(), basis.cols());

  // Per-direction scales inside the subspace decay geometrically, the way
  // principal-component spectra of learned embedding extractors do; the
  // normalization keeps the summed variance equal to an isotropic rank-wide
  // Gaussian so the scale parameters keep their meaning.
  Eigen::VectorXd spectrum(static_cast<Eigen::Index>(rank));
  for (std::size_t k = 0; k < rank; ++k) {
    spectrum(static_cast<Eigen::Index>(k)) = std::pow(0.8, 0.5 * double(k));
  }
  spectrum *= std::sqrt(double(rank)) / spectrum.norm();

  const std::size_t n_female = static_cast<std::size_t>(
      std::llround(spec.sex_split * static_cast<double>(spec.speaker_count)));
  const std::size_t enroll_count = (spec.utterances_per_speaker + 1) / 2;

  Corpus enrollment, trial;
  enrollment.split = Split::kEnrollment;
  trial.split = Split::kTrial;
  enrollment.name = "synthetic-enrollment";
  trial.name = "synthetic-trial";
  enrollment.dim = trial.dim = spec.dim;

  std::vector<double> low(rank), mean(spec.dim);
  char id[16];
  for (std::size_t s = 0; s < spec.speaker_count; ++s) {
    for (std::size_t k = 0; k < rank; ++k) low[k] = rng.normal();
    Eigen::Map<Eigen::VectorXd> mean_vec(mean.data(),
                                         static_cast<Eigen::Index>(spec.dim));
    mean_vec = spec.between_speaker_scale * q *
               (spectrum.array() *
                Eigen::Map<Eigen::VectorXd>(low.data(),
                                            static_cast<Eigen::Index>(rank))
                    .array())
                   .matrix();
    // Small full-rank component keeps means off the exact subspace.
    const double offplane = spec.between_speaker_scale / 40.0;
    for (std::size_t k = 0; k < spec.dim; ++k) mean[k] += offplane * rng.normal();

    std::snprintf(id, sizeof(id), "s%04zu", s);
    const std::string speaker_id(id);
    const SexGroup sex =
        s < n_female ? SexGroup::kFemale : SexGroup::kMale;

    for (std::size_t uidx = 0; uidx < spec.utterances_per_speaker; ++uidx) {
      SpeakerEmbedding e;
      e.speaker_id = speaker_id;
      std::snprintf(id, sizeof(id), "u%04zu", uidx);
      e.utterance_id = id;
      e.sex = sex;
      e.vector.resize(spec.dim);
      // Within-speaker variation lives in the same low-rank subspace (and
      // follows the same spectrum) as the speaker means: embeddings
      // concentrate near a manifold instead of fuzzing every ambient
      // direction, so utterance clouds of neighboring speakers connect into
      // one continuous low-rank distribution.
      for (std::size_t k = 0; k < rank; ++k) low[k] = rng.normal();
      Eigen::Map<Eigen::VectorXd> out(e.vector.data(),
                                      static_cast<Eigen::Index>(spec.dim));
      out = Eigen::Map<const Eigen::VectorXd>(mean.data(),
                                              static_cast<Eigen::Index>(
                                                  spec.dim)) +
            spec.within_speaker_scale *
                (q * (spectrum.array() *
                      Eigen::Map<const Eigen::VectorXd>(
                          low.data(), static_cast<Eigen::Index>(rank))
                          .array())
                         .matrix());
      (uidx < enroll_count ? enrollment : trial).embeddings.push_back(
          std::move(e));
    }
  }
  validate_corpus(enrollment);
  validate_corpus(trial);
  return {std::move(enrollment), std::move(trial)};
}

}  // namespace vpgan

#endif  // VPGAN_CORPUS_HPP
