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

#ifndef VPGAN_NETWORK_HPP
#define VPGAN_NETWORK_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vpgan/detail/text.hpp"
#include "vpgan/errors.hpp"
#include "vpgan/rng.hpp"
#include "vpgan/tensor.hpp"

namespace vpgan {

enum class ArchKind { kResNet, kMlp };

// Fully-connected architectures used for both generator and critic.
//
// kResNet: stem linear + activation, `depth` residual blocks
//   h <- h + W2 * act(W1 * h + b1) + b2, then a linear head.
// kMlp: `depth` linear layers with activations between them (none after
//   the last). depth counts linear layers, so depth=4 is a four-layer MLP.
struct ArchitectureSpec {
  ArchKind kind = ArchKind::kResNet;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t depth = 3;
  double leaky_slope = 0.2;
};

// Default hidden widths put both networks within 5% of 150k parameters
// for the 704-dimensional embedding space.
inline constexpr std::size_t kDefaultResNetHidden = 109;
inline constexpr std::size_t kDefaultResNetDepth = 3;
inline constexpr std::size_t kDefaultMlpDepth = 4;

// (fan_in, fan_out) of every linear layer in parameter-layout order.
inline std::vector<std::pair<std::size_t, std::size_t>> linear_shapes(
    const ArchitectureSpec& spec) {
  if (spec.input_dim == 0 || spec.output_dim == 0 || spec.hidden_dim == 0) {
    throw ConfigError("architecture dimensions must be positive");
  }
  std::vector<std::pair<std::size_t, std::size_t>> shapes;
  if (spec.kind == ArchKind::kResNet) {
    shapes.emplace_back(spec.input_dim, spec.hidden_dim);
    for (std::size_t d = 0; d < spec.depth; ++d) {
      shapes.emplace_back(spec.hidden_dim, spec.hidden_dim);
      shapes.emplace_back(spec.hidden_dim, spec.hidden_dim);
    }
    shapes.emplace_back(spec.hidden_dim, spec.output_dim);
  } else {
    if (spec.depth < 2) {
      throw ConfigError("mlp depth must be at least 2 linear layers");
    }
    shapes.emplace_back(spec.input_dim, spec.hidden_dim);
    for (std::size_t d = 0; d + 2 < spec.depth; ++d) {
      shapes.emplace_back(spec.hidden_dim, spec.hidden_dim);
    }
    shapes.emplace_back(spec.hidden_dim, spec.output_dim);
  }
  return shapes;
}

inline std::size_t param_count(const ArchitectureSpec& spec) {
  std::size_t n = 0;
  for (const auto& [fan_in, fan_out] : linear_shapes(spec)) {
    n += fan_in * fan_out + fan_out;
  }
  return n;
}

// Four-layer MLP with the hidden width whose parameter count is closest
// to the reference architecture's (ties broken toward the narrower net).
inline ArchitectureSpec matched_mlp_spec(const ArchitectureSpec& reference) {
  const std::size_t target = param_count(reference);
  ArchitectureSpec mlp;
  mlp.kind = ArchKind::kMlp;
  mlp.input_dim = reference.input_dim;
  mlp.output_dim = reference.output_dim;
  mlp.depth = kDefaultMlpDepth;
  mlp.leaky_slope = reference.leaky_slope;

  // params(h) = 2h^2 + (input + output + 3)h + output for depth 4;
  // solve for h, then refine around the real root.
  const double a = 2.0;
  const double b = static_cast<double>(mlp.input_dim + mlp.output_dim + 3);
  const double c =
      static_cast<double>(mlp.output_dim) - static_cast<double>(target);
  const double root = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
  const long long center = std::llround(root);

  std::size_t best_hidden = 0;
  std::size_t best_diff = static_cast<std::size_t>(-1);
  for (long long h = center - 3; h <= center + 3; ++h) {
    if (h < 1) continue;
    mlp.hidden_dim = static_cast<std::size_t>(h);
    const std::size_t n = param_count(mlp);
    const std::size_t diff = n > target ? n - target : target - n;
    if (diff < best_diff) {
      best_diff = diff;
      best_hidden = mlp.hidden_dim;
    }
  }
  mlp.hidden_dim = best_hidden;
  return mlp;
}

inline std::string_view arch_kind_name(ArchKind kind) {
  return kind == ArchKind::kResNet ? "resnet" : "mlp";
}

// Canonical one-line description, e.g.
//   "resnet input=16 output=704 hidden=109 depth=3 slope=0.2"
// Round-trips exactly through parse_arch_text (slope uses the shortest
// representation that restores the same double).
inline std::string arch_to_text(const ArchitectureSpec& spec) {
  std::string s(arch_kind_name(spec.kind));
  s += " input=" + std::to_string(spec.input_dim);
  s += " output=" + std::to_string(spec.output_dim);
  s += " hidden=" + std::to_string(spec.hidden_dim);
  s += " depth=" + std::to_string(spec.depth);
  s += " slope=" + detail::double_to_string(spec.leaky_slope);
  return s;
}

inline ArchitectureSpec parse_arch_text(std::string_view text) {
  const auto tokens = detail::split_ws(text);
  if (tokens.empty()) throw DataError("empty architecture description");
  ArchitectureSpec spec;
  if (tokens[0] == "resnet") {
    spec.kind = ArchKind::kResNet;
  } else if (tokens[0] == "mlp") {
    spec.kind = ArchKind::kMlp;
  } else {
    throw DataError("unknown architecture kind '" + std::string(tokens[0]) +
                    "'");
  }
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const std::string_view tok = tokens[i];
    const std::size_t eq = tok.find('=');
    if (eq == std::string_view::npos) {
      throw DataError("malformed architecture field '" + std::string(tok) +
                      "'");
    }
    const std::string_view key = tok.substr(0, eq);
    const std::string_view val = tok.substr(eq + 1);
    if (key == "input") {
      spec.input_dim = detail::string_to_u64(val);
    } else if (key == "output") {
      spec.output_dim = detail::string_to_u64(val);
    } else if (key == "hidden") {
      spec.hidden_dim = detail::string_to_u64(val);
    } else if (key == "depth") {
      spec.depth = detail::string_to_u64(val);
    } else if (key == "slope") {
      spec.leaky_slope = detail::string_to_double(val);
    } else {
      throw DataError("unknown architecture field '" + std::string(key) +
                      "'");
    }
  }
  if (spec.input_dim == 0 || spec.output_dim == 0 || spec.hidden_dim == 0) {
    throw DataError("architecture description is missing dimensions");
  }
  return spec;
}

struct ForwardResult {
  Tensor output;
  // Parameter leaves in layout order (weight, bias per linear); empty
  // when the forward pass was built with trainable=false.
  std::vector<Tensor> param_leaves;
};

// A fully-connected network with a flat parameter vector. Layout is the
// concatenation over linear_shapes() of the row-major (fan_in x fan_out)
// weight followed by the bias.
class Network {
 public:
  explicit Network(const ArchitectureSpec& spec)
      : spec_(spec), params_(param_count(spec), 0.0) {}

  // He-style uniform initialization: weights ~ U[-sqrt(3/fan_in),
  // sqrt(3/fan_in)), biases zero.
  static Network random_init(const ArchitectureSpec& spec, Rng& rng) {
    Network net(spec);
    std::size_t offset = 0;
    for (const auto& [fan_in, fan_out] : linear_shapes(spec)) {
      const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
      for (std::size_t i = 0; i < fan_in * fan_out; ++i) {
        net.params_[offset + i] = bound * (2.0 * rng.uniform() - 1.0);
      }
      offset += fan_in * fan_out + fan_out;  // biases stay zero
    }
    return net;
  }

  const ArchitectureSpec& spec() const { return spec_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t size() const { return params_.size(); }

  // Builds the forward graph on the tape. input is (batch x input_dim).
  // With trainable=true the parameters become gradient-carrying leaves
  // (returned in layout order); with trainable=false they are constants,
  // which keeps e.g. the critic frozen during a generator step.
  ForwardResult forward(Tape& tape, Tensor input, bool trainable) const {
    if (input.cols() != spec_.input_dim) {
      throw ConfigError("network expects input width " +
                        std::to_string(spec_.input_dim) + ", got " +
                        std::to_string(input.cols()));
    }
    ForwardResult result;
    std::size_t offset = 0;
    auto linear = [&](Tensor h, std::size_t fan_in,
                      std::size_t fan_out) -> Tensor {
      std::span<const double> w(params_.data() + offset, fan_in * fan_out);
      std::span<const double> b(params_.data() + offset + fan_in * fan_out,
                                fan_out);
      offset += fan_in * fan_out + fan_out;
      Tensor wt = tape.leaf(fan_in, fan_out, w, trainable);
      Tensor bt = tape.leaf(1, fan_out, b, trainable);
      if (trainable) {
        result.param_leaves.push_back(wt);
        result.param_leaves.push_back(bt);
      }
      return tape.add_row(tape.matmul(h, wt), bt);
    };
    auto act = [&](Tensor h) {
      return tape.leaky_relu(h, spec_.leaky_slope);
    };

    Tensor h = input;
    if (spec_.kind == ArchKind::kResNet) {
      h = act(linear(h, spec_.input_dim, spec_.hidden_dim));
      for (std::size_t d = 0; d < spec_.depth; ++d) {
        Tensor inner = act(linear(h, spec_.hidden_dim, spec_.hidden_dim));
        Tensor residual = linear(inner, spec_.hidden_dim, spec_.hidden_dim);
        h = tape.add(h, residual);
      }
      h = linear(h, spec_.hidden_dim, spec_.output_dim);
    } else {
      const auto shapes = linear_shapes(spec_);
      for (std::size_t i = 0; i < shapes.size(); ++i) {
        h = linear(h, shapes[i].first, shapes[i].second);
        if (i + 1 < shapes.size()) h = act(h);
      }
    }
    result.output = h;
    return result;
  }

  // Gradient w.r.t. the flat parameter vector, gathered from the leaves
  // of a trainable forward pass after Tape::backward.
  std::vector<double> collect_grad(const ForwardResult& result) const {
    if (result.param_leaves.empty()) {
      throw ConfigError("collect_grad requires a trainable forward pass");
    }
    std::vector<double> grad;
    grad.reserve(params_.size());
    for (const Tensor& leaf : result.param_leaves) {
      const std::vector<double>& g = leaf.grad();
      grad.insert(grad.end(), g.begin(), g.end());
    }
    if (grad.size() != params_.size()) {
      throw ConfigError("collected gradient has wrong length");
    }
    return grad;
  }

  // Tape-free convenience: feeds a (batch x input_dim) row-major buffer
  // through the same graph-building code and returns the output values.
  std::vector<double> eval(std::span<const double> input,
                           std::size_t batch) const {
    Tape tape;
    Tensor x = tape.constant(batch, spec_.input_dim, input);
    ForwardResult r = forward(tape, x, /*trainable=*/false);
    return r.output.value();
  }

 private:
  ArchitectureSpec spec_;
  std::vector<double> params_;
};

}  // namespace vpgan

#endif  // VPGAN_NETWORK_HPP
