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

#ifndef VPGAN_OT_HPP
#define VPGAN_OT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "vpgan/errors.hpp"
#include "vpgan/tensor.hpp"

namespace vpgan {

// n x n transport costs between two equal-size batches, row-major.
struct CostMatrix {
  std::size_t n = 0;
  std::vector<double> entries;

  double at(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
};

// Optimal coupling between uniform marginals of equal size (always a
// permutation), plus the Kantorovich dual potentials.
struct TransportPlan {
  std::vector<std::size_t> assignment;  // row i of X pairs with Y row assignment[i]
  double total_cost = 0.0;              // (1/n) * sum_i c[i][assignment[i]]
  std::vector<double> phi;              // dual potential on the X batch
  std::vector<double> psi;              // dual potential on the Y batch
};

// c[i][j] = ||x_i - y_j||^2 / (2 * dim). The 1/(2*dim) normalization keeps
// costs O(1) regardless of embedding dimension, so regularizer weights
// calibrated on low-dimensional problems transfer to 704-dimensional ones.
inline CostMatrix quadratic_cost(std::span<const double> x,
                                 std::span<const double> y, std::size_t n,
                                 std::size_t dim) {
  if (n == 0) throw ConfigError("quadratic_cost: empty batch");
  if (dim == 0) throw ConfigError("quadratic_cost: zero dimension");
  if (x.size() != n * dim || y.size() != n * dim) {
    throw ConfigError("quadratic_cost: batch buffers must both be " +
                      std::to_string(n) + " x " + std::to_string(dim));
  }
  CostMatrix cost;
  cost.n = n;
  cost.entries.resize(n * n);
  const double scale = 1.0 / (2.0 * static_cast<double>(dim));
  // Explicit difference form rather than the Gram expansion: identical
  // rows cost exactly zero and no entry can go negative by cancellation.
  // Scalar fixed-order accumulation: a vectorized reduction's rounding
  // depends on buffer alignment, breaking bitwise reproducibility.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = x[i * dim + k] - y[j * dim + k];
        sq += d * d;
      }
      cost.entries[i * n + j] = scale * sq;
    }
  }
  return cost;
}

// Exact assignment solve via shortest augmenting paths with dual
// potentials maintained natively (O(n^3)). The duals are exactly what the
// critic regression needs, so nothing is recovered post hoc.
//
// Returned potentials satisfy, up to 1e-9:
//   phi[i] + psi[j] <= c[i][j]                  (feasibility)
//   phi[i] + psi[assignment[i]] = c[i][assignment[i]]  (slackness)
//   sum(phi) = sum(psi)                          (gauge fixing)
//   (1/n) * (sum(phi) + sum(psi)) = total_cost   (strong duality)
inline TransportPlan solve_ot(const CostMatrix& cost) {
  const std::size_t n = cost.n;
  if (n == 0) throw ConfigError("solve_ot: empty cost matrix");
  if (cost.entries.size() != n * n) {
    throw ConfigError("solve_ot: expected " + std::to_string(n) + " x " +
                      std::to_string(n) + " entries, got " +
                      std::to_string(cost.entries.size()));
  }
  for (double c : cost.entries) {
    if (!std::isfinite(c)) {
      throw ConfigError("solve_ot: cost matrix has non-finite entries");
    }
  }

  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; index 0 is the virtual start column of each phase.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1, 0);
  auto a = [&](std::size_t i, std::size_t j) {
    return cost.entries[(i - 1) * n + (j - 1)];
  };

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      std::size_t j1 = 0;
      double delta = inf;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  TransportPlan plan;
  plan.assignment.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    plan.assignment[p[j] - 1] = j - 1;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += cost.at(i, plan.assignment[i]);
  }
  plan.total_cost = sum / static_cast<double>(n);

  plan.phi.assign(u.begin() + 1, u.end());
  plan.psi.assign(v.begin() + 1, v.end());
  // Duals are only defined up to phi+t, psi-t; pin the gauge by balancing
  // the two sums so the critic's regression targets are reproducible.
  double sum_phi = 0.0, sum_psi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_phi += plan.phi[i];
    sum_psi += plan.psi[i];
  }
  const double shift = (sum_psi - sum_phi) / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    plan.phi[i] += shift;
    plan.psi[i] -= shift;
  }
  return plan;
}

}  // namespace vpgan

#endif  // VPGAN_OT_HPP
