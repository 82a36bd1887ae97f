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

#ifndef VPGAN_ADAM_HPP
#define VPGAN_ADAM_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vpgan/errors.hpp"

namespace vpgan {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. The moment buffers and step counter are
// exposed so a training checkpoint can restore the optimizer exactly.
class Adam {
 public:
  Adam(std::size_t dim, const AdamConfig& config = {})
      : config_(config), m_(dim, 0.0), v_(dim, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
      throw ConfigError("adam step: expected " + std::to_string(m_.size()) +
                        " parameters, got " + std::to_string(params.size()) +
                        " / gradient " + std::to_string(grad.size()));
    }
    for (std::size_t i = 0; i < grad.size(); ++i) {
      if (!std::isfinite(grad[i])) {
        throw DivergenceError("non-finite gradient at parameter " +
                              std::to_string(i));
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < m_.size(); ++i) {
      m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grad[i];
      v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
      const double m_hat = m_[i] / bc1;
      const double v_hat = v_[i] / bc2;
      params[i] -=
          config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }

  const AdamConfig& config() const { return config_; }
  std::uint64_t step_count() const { return t_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }

  // Restores optimizer state saved by a checkpoint.
  void restore(std::uint64_t step_count, std::vector<double> first_moment,
               std::vector<double> second_moment) {
    if (first_moment.size() != m_.size() ||
        second_moment.size() != v_.size()) {
      throw DataError("adam restore: moment buffers have wrong length");
    }
    t_ = step_count;
    m_ = std::move(first_moment);
    v_ = std::move(second_moment);
  }

 private:
  AdamConfig config_;
  std::uint64_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace vpgan

#endif  // VPGAN_ADAM_HPP
