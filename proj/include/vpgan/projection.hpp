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

#ifndef VPGAN_PROJECTION_HPP
#define VPGAN_PROJECTION_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "vpgan/detail/text.hpp"
#include "vpgan/errors.hpp"
#include "vpgan/rng.hpp"
#include "vpgan/tensor.hpp"

namespace vpgan {

struct ProjectionConfig {
  std::size_t pca_dims = 50;
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  double early_exaggeration = 12.0;        // applied to the first
  std::size_t exaggeration_iterations = 250;  // this many iterations
  double learning_rate = 200.0;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// PCA pre-reduction.

struct PcaResult {
  std::size_t out_dims = 0;
  std::vector<double> reduced;      // n x out_dims, row-major
  std::vector<double> components;   // out_dims x dim, row-major, orthonormal
  std::vector<double> mean;         // dim
  std::vector<double> eigenvalues;  // out_dims, descending
  double total_variance = 0.0;      // trace of the sample covariance

  double explained_fraction() const {
    double top = 0.0;
    for (double v : eigenvalues) top += v;
    return top / total_variance;
  }
};

// Projects centered data onto the top principal components of the sample
// covariance (1/(n-1) convention). Component signs are canonicalized so
// the entry of largest magnitude is positive, making output deterministic.
inline PcaResult pca(std::span<const double> points, std::size_t n,
                     std::size_t dim, std::size_t out_dims) {
  if (n < 2) throw ConfigError("pca: need at least 2 points");
  if (out_dims == 0 || out_dims > dim) {
    throw ConfigError("pca: output dims must lie in [1, " +
                      std::to_string(dim) + "], got " +
                      std::to_string(out_dims));
  }
  if (points.size() != n * dim) {
    throw ConfigError("pca: buffer is not n x dim");
  }
  ConstMatrixMap x(points.data(), static_cast<Eigen::Index>(n),
                   static_cast<Eigen::Index>(dim));
  Eigen::RowVectorXd mean = x.colwise().mean();
  Matrix centered = x.rowwise() - mean;
  Eigen::MatrixXd cov = (centered.transpose() * centered) /
                        static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw EvalError("pca: eigendecomposition failed");
  }
  const double total = cov.trace();
  if (total <= 0.0) {
    throw EvalError("pca: degenerate input (all points identical)");
  }

  PcaResult result;
  result.out_dims = out_dims;
  result.mean.assign(mean.data(), mean.data() + dim);
  result.total_variance = total;
  result.eigenvalues.resize(out_dims);
  Eigen::MatrixXd comps(static_cast<Eigen::Index>(dim),
                        static_cast<Eigen::Index>(out_dims));
  for (std::size_t k = 0; k < out_dims; ++k) {
    // Eigen sorts eigenvalues ascending; take from the top.
    const Eigen::Index src = static_cast<Eigen::Index>(dim - 1 - k);
    result.eigenvalues[k] = solver.eigenvalues()[src];
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0.0) v = -v;
    comps.col(static_cast<Eigen::Index>(k)) = v;
  }
  Matrix reduced = centered * comps;
  result.reduced.assign(reduced.data(), reduced.data() + n * out_dims);
  result.components.resize(out_dims * dim);
  for (std::size_t k = 0; k < out_dims; ++k) {
    for (std::size_t j = 0; j < dim; ++j) {
      result.components[k * dim + j] =
          comps(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Exact t-SNE.

struct InputAffinities {
  std::size_t n = 0;
  std::vector<double> conditional;  // p(j|i), rows sum to 1, zero diagonal
  std::vector<double> joint;        // symmetrized, sums to 1
  std::vector<double> beta;         // per-point Gaussian precision
};

// Binary-searches each point's Gaussian bandwidth until the conditional
// distribution's entropy matches log(perplexity), then symmetrizes:
// P_ij = (p(j|i) + p(i|j)) / (2n).
inline InputAffinities compute_input_affinities(std::span<const double> points,
                                                std::size_t n, std::size_t dim,
                                                double perplexity) {
  if (points.size() != n * dim) {
    throw ConfigError("affinities: buffer is not n x dim");
  }
  if (!(perplexity >= 1.0) ||
      perplexity >= (static_cast<double>(n) - 1.0) / 3.0) {
    throw ConfigError("perplexity " + detail::double_to_string(perplexity) +
                      " infeasible for " + std::to_string(n) +
                      " points (need 1 <= perplexity < (n-1)/3)");
  }
  // Pairwise squared distances.
  std::vector<double> d2(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = points[i * dim + k] - points[j * dim + k];
        s += d * d;
      }
      d2[i * n + j] = s;
      d2[j * n + i] = s;
    }
  }

  InputAffinities aff;
  aff.n = n;
  aff.conditional.assign(n * n, 0.0);
  aff.beta.assign(n, 1.0);
  const double target_entropy = std::log(perplexity);
  for (std::size_t i = 0; i < n; ++i) {
    double beta = 1.0;
    double beta_lo = -std::numeric_limits<double>::infinity();
    double beta_hi = std::numeric_limits<double>::infinity();
    double* row = aff.conditional.data() + i * n;
    for (int iter = 0; iter < 200; ++iter) {
      double sum = DBL_MIN;
      for (std::size_t j = 0; j < n; ++j) {
        row[j] = j == i ? 0.0 : std::exp(-beta * d2[i * n + j]);
        sum += row[j];
      }
      double h = 0.0;
      for (std::size_t j = 0; j < n; ++j) h += beta * d2[i * n + j] * row[j];
      h = h / sum + std::log(sum);
      const double diff = h - target_entropy;
      if (std::abs(diff) < 1e-5) break;
      if (diff > 0.0) {
        beta_lo = beta;
        beta = std::isinf(beta_hi) ? beta * 2.0 : (beta + beta_hi) / 2.0;
      } else {
        beta_hi = beta;
        beta = std::isinf(beta_lo) ? beta / 2.0 : (beta + beta_lo) / 2.0;
      }
    }
    double sum = DBL_MIN;
    for (std::size_t j = 0; j < n; ++j) sum += row[j];
    for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
    aff.beta[i] = beta;
  }

  aff.joint.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      aff.joint[i * n + j] = (aff.conditional[i * n + j] +
                              aff.conditional[j * n + i]) /
                             (2.0 * static_cast<double>(n));
    }
  }
  return aff;
}

enum class PointLabel : std::uint8_t { kReal = 0, kGenerated = 1 };

struct Projection2D {
  std::size_t n = 0;
  std::vector<double> xy;             // n x 2
  std::vector<PointLabel> labels;     // n
  std::vector<double> kl_history;     // one entry per gradient iteration
};

// Standard exact t-SNE: Student-t output kernel, gradient descent with
// per-coordinate gains, momentum 0.5 switching to 0.8 when the early
// exaggeration of the input affinities ends.
inline Projection2D tsne(std::span<const double> points, std::size_t n,
                         std::size_t dim, std::span<const PointLabel> labels,
                         const ProjectionConfig& cfg) {
  if (labels.size() != n) {
    throw ConfigError("tsne: label count does not match point count");
  }
  if (cfg.iterations == 0) throw ConfigError("tsne: need at least 1 iteration");
  if (cfg.learning_rate <= 0.0) {
    throw ConfigError("tsne: learning rate must be positive");
  }
  if (cfg.early_exaggeration < 1.0) {
    throw ConfigError("tsne: exaggeration factor must be at least 1");
  }
  InputAffinities aff = compute_input_affinities(points, n, dim, cfg.perplexity);
  std::vector<double>& p = aff.joint;
  const std::size_t stop_exaggeration =
      std::min<std::size_t>(cfg.exaggeration_iterations, cfg.iterations);
  for (double& v : p) v *= cfg.early_exaggeration;

  Projection2D proj;
  proj.n = n;
  proj.labels.assign(labels.begin(), labels.end());
  proj.xy.resize(n * 2);
  Rng rng(cfg.seed);
  for (double& v : proj.xy) v = 0.0001 * rng.normal();

  std::vector<double> grad(n * 2), inc(n * 2, 0.0), gains(n * 2, 1.0);
  std::vector<double> q(n * n);
  proj.kl_history.reserve(cfg.iterations);
  for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
    if (iter == stop_exaggeration) {
      for (double& v : p) v /= cfg.early_exaggeration;
    }
    const double momentum = iter < stop_exaggeration ? 0.5 : 0.8;

    // Unnormalized Student-t kernel and its normalizer.
    double sum_q = DBL_MIN;
    for (std::size_t i = 0; i < n; ++i) {
      q[i * n + i] = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = proj.xy[i * 2] - proj.xy[j * 2];
        const double dy = proj.xy[i * 2 + 1] - proj.xy[j * 2 + 1];
        const double v = 1.0 / (1.0 + dx * dx + dy * dy);
        q[i * n + j] = v;
        q[j * n + i] = v;
        sum_q += 2.0 * v;
      }
    }

    std::fill(grad.begin(), grad.end(), 0.0);
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double pij = p[i * n + j];
        const double qij = q[i * n + j];
        const double mult = (pij - qij / sum_q) * qij;
        grad[i * 2] += (proj.xy[i * 2] - proj.xy[j * 2]) * mult;
        grad[i * 2 + 1] += (proj.xy[i * 2 + 1] - proj.xy[j * 2 + 1]) * mult;
        kl += pij * std::log((pij + FLT_MIN) / (qij / sum_q + FLT_MIN));
      }
    }
    proj.kl_history.push_back(kl);

    for (std::size_t k = 0; k < n * 2; ++k) {
      gains[k] = (grad[k] > 0.0) != (inc[k] > 0.0) ? gains[k] + 0.2
                                                   : gains[k] * 0.8;
      if (gains[k] < 0.01) gains[k] = 0.01;
      inc[k] = momentum * inc[k] - cfg.learning_rate * gains[k] * grad[k];
      proj.xy[k] += inc[k];
    }
    // Keep the embedding centered.
    double cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cx += proj.xy[i * 2];
      cy += proj.xy[i * 2 + 1];
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      proj.xy[i * 2] -= cx;
      proj.xy[i * 2 + 1] -= cy;
    }
  }
  for (double v : proj.xy) {
    if (!std::isfinite(v)) {
      throw EvalError("tsne: embedding diverged to non-finite coordinates");
    }
  }
  return proj;
}

// Leave-one-out 1-nearest-neighbor error of the real/generated labels in
// projection space, in percent. 50% means the projection cannot tell the
// two sets apart; 0% means they are fully separated.
inline double knn_label_error_percent(const Projection2D& proj) {
  const std::size_t n = proj.n;
  if (n < 2) throw EvalError("1-NN label error needs at least 2 points");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = proj.xy[i * 2] - proj.xy[j * 2];
      const double dy = proj.xy[i * 2 + 1] - proj.xy[j * 2 + 1];
      const double d = dx * dx + dy * dy;
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    if (proj.labels[best_j] != proj.labels[i]) ++wrong;
  }
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(n);
}

// Convenience pipeline mirroring the overlap figures: label real and
// generated rows, PCA to cfg.pca_dims when that reduces the dimension,
// then t-SNE to 2-D.
inline Projection2D project_overlap(std::span<const double> real,
                                    std::size_t n_real,
                                    std::span<const double> generated,
                                    std::size_t n_gen, std::size_t dim,
                                    const ProjectionConfig& cfg) {
  if (n_real + n_gen == 0) throw ConfigError("projection: no points");
  std::vector<double> combined(real.begin(), real.end());
  combined.insert(combined.end(), generated.begin(), generated.end());
  std::vector<PointLabel> labels(n_real, PointLabel::kReal);
  labels.insert(labels.end(), n_gen, PointLabel::kGenerated);

  const std::size_t n = n_real + n_gen;
  if (cfg.pca_dims > 0 && cfg.pca_dims < dim) {
    PcaResult reduced = pca(combined, n, dim, cfg.pca_dims);
    return tsne(reduced.reduced, n, cfg.pca_dims, labels, cfg);
  }
  return tsne(combined, n, dim, labels, cfg);
}

}  // namespace vpgan

#endif  // VPGAN_PROJECTION_HPP
