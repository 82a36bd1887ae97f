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

#ifndef VPGAN_METRICS_HPP
#define VPGAN_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vpgan/corpus.hpp"
#include "vpgan/detail/text.hpp"
#include "vpgan/errors.hpp"
#include "vpgan/tensor.hpp"

namespace vpgan {

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ConfigError("dot: length mismatch (" + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()) + ")");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double cosine_similarity(std::span<const double> a,
                                std::span<const double> b) {
  const double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw EvalError("cosine similarity undefined for zero-norm vector");
  }
  return dot(a, b) / (na * nb);
}

inline double cosine_distance(std::span<const double> a,
                              std::span<const double> b) {
  return 1.0 - cosine_similarity(a, b);
}

// ---------------------------------------------------------------------------
// Speaker-by-speaker similarity matrix.

struct SimilarityMatrix {
  std::vector<std::string> speakers;
  std::vector<double> entries;  // row-major speakers.size()^2

  std::size_t n() const { return speakers.size(); }
  double at(std::size_t i, std::size_t j) const {
    return entries[i * speakers.size() + j];
  }
};

// M[i][j] = mean cosine similarity between utterance embeddings of speaker
// i in `a` and speaker j in `b`. When both arguments are the same corpus
// object, diagonal entries exclude the self-pairs (an utterance against
// itself); a speaker with a single utterance falls back to 1.0 there.
inline SimilarityMatrix similarity_matrix(const Corpus& a, const Corpus& b) {
  const auto speakers_a = a.speaker_ids();
  const auto speakers_b = b.speaker_ids();
  if (speakers_a != speakers_b) {
    throw EvalError("similarity matrix requires identical speaker sets (" +
                    std::to_string(speakers_a.size()) + " vs " +
                    std::to_string(speakers_b.size()) + " speakers)");
  }
  const bool self = &a == &b;
  if (!self && a.dim != b.dim) {
    throw EvalError("similarity matrix: corpora dimensions differ (" +
                    std::to_string(a.dim) + " vs " + std::to_string(b.dim) +
                    ")");
  }
  const std::size_t n = speakers_a.size();

  // Mean-of-dots over a pair of utterance sets equals the dot of the two
  // normalized-sum vectors divided by the pair count, so each speaker is
  // reduced to (sum of unit vectors, count) once.
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[speakers_a[i]] = i;
  auto reduce = [&](const Corpus& c) {
    std::vector<std::vector<double>> sums(n, std::vector<double>(c.dim, 0.0));
    std::vector<std::size_t> counts(n, 0);
    for (const auto& e : c.embeddings) {
      const double en = norm(e.vector);
      if (en == 0.0) {
        throw EvalError("zero-norm embedding " + e.speaker_id + "/" +
                        e.utterance_id);
      }
      const std::size_t i = index.at(e.speaker_id);
      for (std::size_t k = 0; k < c.dim; ++k) {
        sums[i][k] += e.vector[k] / en;
      }
      ++counts[i];
    }
    return std::pair(std::move(sums), std::move(counts));
  };
  const auto [sums_a, counts_a] = reduce(a);
  const auto [sums_b, counts_b] = self ? reduce(a) : reduce(b);

  SimilarityMatrix m;
  m.speakers = speakers_a;
  m.entries.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double pairs =
          static_cast<double>(counts_a[i]) * static_cast<double>(counts_b[j]);
      double total = dot(sums_a[i], sums_b[j]);
      if (self && i == j) {
        // Drop the count_i self-pairs, each contributing exactly 1.
        const double ni = static_cast<double>(counts_a[i]);
        if (counts_a[i] < 2) {
          m.entries[i * n + j] = 1.0;
          continue;
        }
        m.entries[i * n + j] = (total - ni) / (ni * (ni - 1.0));
      } else {
        m.entries[i * n + j] = total / pairs;
      }
    }
  }
  return m;
}

// |mean diagonal - mean off-diagonal|: how much more similar a speaker is
// to themselves than to everyone else.
inline double diag_dominance(const SimilarityMatrix& m) {
  const std::size_t n = m.n();
  if (n < 2) {
    throw EvalError("diagonal dominance needs at least 2 speakers, got " +
                    std::to_string(n));
  }
  double diag = 0.0, off = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      (i == j ? diag : off) += m.at(i, j);
    }
  }
  diag /= static_cast<double>(n);
  off /= static_cast<double>(n * (n - 1));
  return std::abs(diag - off);
}

// Gain of voice distinctiveness in decibels. 0 means anonymization left
// speaker distinctiveness unchanged; negative means voices became harder
// to tell apart. Total collapse (zero anonymized dominance) is reported
// as -infinity rather than an error.
inline double gvd(const Corpus& original, const Corpus& anonymized) {
  // Dominance values at the cancellation-noise scale of the cosine sums
  // (~1e-14 for O(1) entries) are semantically zero.
  constexpr double kDominanceFloor = 1e-12;
  const double dd_orig = diag_dominance(similarity_matrix(original, original));
  const double dd_anon =
      diag_dominance(similarity_matrix(anonymized, anonymized));
  if (dd_orig <= kDominanceFloor) {
    throw EvalError("voice distinctiveness gain undefined: original corpus "
                    "has zero diagonal dominance");
  }
  if (dd_anon <= kDominanceFloor) {
    return -std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(dd_anon / dd_orig);
}

// ---------------------------------------------------------------------------
// Maximum mean discrepancy with a Gaussian kernel.

// k(x, y) = exp(-||x - y||^2 / (2 * bandwidth^2))
inline double gaussian_kernel(std::span<const double> x,
                              std::span<const double> y, double bandwidth) {
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sq += d * d;
  }
  return std::exp(-sq / (2.0 * bandwidth * bandwidth));
}

// Median pairwise Euclidean distance over the pooled sample — the standard
// bandwidth heuristic. Even-sized medians average the two middle values.
inline double median_pairwise_distance(std::span<const double> a,
                                       std::span<const double> b,
                                       std::size_t dim) {
  if (dim == 0) throw ConfigError("median distance: zero dimension");
  if (a.size() % dim != 0 || b.size() % dim != 0) {
    throw ConfigError("median distance: buffers not a multiple of dim");
  }
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size() / dim;
  if (n < 2) throw ConfigError("median distance: need at least 2 points");
  std::vector<double> dists;
  dists.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = pooled[i * dim + k] - pooled[j * dim + k];
        sq += d * d;
      }
      dists.push_back(std::sqrt(sq));
    }
  }
  std::sort(dists.begin(), dists.end());
  const std::size_t mid = dists.size() / 2;
  return dists.size() % 2 == 1 ? dists[mid]
                               : 0.5 * (dists[mid - 1] + dists[mid]);
}

// Unbiased estimate of squared MMD between two samples (row-major buffers,
// same dim). May be slightly negative under the null — that is the
// unbiased U-statistic, not a bug.
inline double mmd(std::span<const double> a, std::span<const double> b,
                  std::size_t dim, double bandwidth) {
  if (bandwidth <= 0.0) {
    throw ConfigError("mmd: bandwidth must be positive, got " +
                      detail::double_to_string(bandwidth));
  }
  if (dim == 0) throw ConfigError("mmd: zero dimension");
  if (a.size() % dim != 0 || b.size() % dim != 0) {
    throw ConfigError("mmd: buffers not a multiple of dim");
  }
  const std::size_t m = a.size() / dim;
  const std::size_t n = b.size() / dim;
  if (m < 2 || n < 2) {
    throw ConfigError("mmd: need at least 2 points per sample");
  }
  auto row = [dim](std::span<const double> buf, std::size_t i) {
    return buf.subspan(i * dim, dim);
  };
  double kaa = 0.0, kbb = 0.0, kab = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      kaa += gaussian_kernel(row(a, i), row(a, j), bandwidth);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      kbb += gaussian_kernel(row(b, i), row(b, j), bandwidth);
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      kab += gaussian_kernel(row(a, i), row(b, j), bandwidth);
    }
  }
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  return 2.0 * kaa / (md * (md - 1.0)) + 2.0 * kbb / (nd * (nd - 1.0)) -
         2.0 * kab / (md * nd);
}

// Corpus convenience: flattens utterance vectors in corpus order.
inline std::vector<double> corpus_rows(const Corpus& c) {
  std::vector<double> rows;
  rows.reserve(c.embeddings.size() * c.dim);
  for (const auto& e : c.embeddings) {
    rows.insert(rows.end(), e.vector.begin(), e.vector.end());
  }
  return rows;
}

}  // namespace vpgan

#endif  // VPGAN_METRICS_HPP
