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

#ifndef VPGAN_TRAINER_HPP
#define VPGAN_TRAINER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vpgan/adam.hpp"
#include "vpgan/checkpoint.hpp"
#include "vpgan/corpus.hpp"
#include "vpgan/detail/text.hpp"
#include "vpgan/errors.hpp"
#include "vpgan/metrics.hpp"
#include "vpgan/network.hpp"
#include "vpgan/ot.hpp"
#include "vpgan/rng.hpp"
#include "vpgan/tensor.hpp"

namespace vpgan {

struct TrainConfig {
  std::size_t noise_dim = 16;
  double gamma = 1.0;
  std::size_t batch_size = 64;
  std::uint64_t total_iterations = 0;
  std::size_t critic_steps = 1;  // critic updates per generator update
  double lr = 1e-4;
  std::uint64_t seed = 0;
  ArchitectureSpec generator_spec;
  ArchitectureSpec critic_spec;
  std::uint64_t checkpoint_every = 5000;
  std::uint64_t mmd_every = 500;   // cadence of the sample-mmd diagnostic
  std::size_t mmd_sample = 256;    // points per side for that diagnostic
};

// Generator and critic specs sized for the embedding dimension: three
// residual blocks and a hidden width that lands each network within 5%
// of 150k parameters at dim=704.
inline TrainConfig default_train_config(std::size_t embedding_dim) {
  TrainConfig cfg;
  cfg.generator_spec = {ArchKind::kResNet, cfg.noise_dim, embedding_dim,
                        kDefaultResNetHidden, kDefaultResNetDepth, 0.2};
  cfg.critic_spec = {ArchKind::kResNet, embedding_dim, 1, kDefaultResNetHidden,
                     kDefaultResNetDepth, 0.2};
  return cfg;
}

inline void validate_train_config(const TrainConfig& cfg,
                                  std::size_t corpus_dim) {
  if (cfg.batch_size < 2) {
    throw ConfigError("training batch size must be at least 2");
  }
  if (cfg.noise_dim == 0) throw ConfigError("noise dimension must be positive");
  if (cfg.critic_steps == 0) {
    throw ConfigError("need at least one critic step per iteration");
  }
  if (cfg.lr <= 0.0) throw ConfigError("learning rate must be positive");
  if (cfg.gamma < 0.0) throw ConfigError("gamma must be non-negative");
  if (cfg.generator_spec.input_dim != cfg.noise_dim) {
    throw ConfigError("generator input dim " +
                      std::to_string(cfg.generator_spec.input_dim) +
                      " must equal noise dim " + std::to_string(cfg.noise_dim));
  }
  if (cfg.generator_spec.output_dim != corpus_dim) {
    throw ConfigError("generator output dim " +
                      std::to_string(cfg.generator_spec.output_dim) +
                      " must equal corpus dim " + std::to_string(corpus_dim));
  }
  if (cfg.critic_spec.input_dim != corpus_dim) {
    throw ConfigError("critic input dim " +
                      std::to_string(cfg.critic_spec.input_dim) +
                      " must equal corpus dim " + std::to_string(corpus_dim));
  }
  if (cfg.critic_spec.output_dim != 1) {
    throw ConfigError("critic must output a scalar per sample");
  }
}

// i.i.d. standard-normal noise batch, row-major n x dim.
inline std::vector<double> sample_noise(std::size_t n, std::size_t dim,
                                        Rng& rng) {
  if (n == 0 || dim == 0) {
    throw ConfigError("noise batch dimensions must be positive");
  }
  std::vector<double> z(n * dim);
  for (double& v : z) v = rng.normal();
  return z;
}

struct StepDiagnostics {
  std::uint64_t iteration = 0;
  double ot_estimate = 0.0;            // batch transport cost from solve_ot
  double critic_regression_loss = 0.0; // unscaled dual-regression terms
  double generator_loss = 0.0;
  std::optional<double> sample_mmd;
};

// File layout produced by Trainer::run under a run directory.
struct TrainRunPaths {
  std::filesystem::path checkpoint_dir;  // empty: no checkpoints written
  std::filesystem::path diagnostics_csv; // empty: no log written
};

inline std::string checkpoint_stem(std::uint64_t iteration) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%08llu",
                static_cast<unsigned long long>(iteration));
  return buf;
}

inline constexpr char kDiagnosticsHeader[] =
    "iteration,ot_estimate,critic_regression_loss,generator_loss,sample_mmd";

// WGAN-QC training loop. One iteration = critic_steps critic updates
// followed by one generator update. The critic is trained to regress the
// batch-level optimal-transport dual potentials; the generator maximizes
// the critic's score on its samples.
class Trainer {
 public:
  Trainer(const Corpus& corpus, const TrainConfig& config)
      : cfg_(config),
        dim_(corpus.dim),
        real_rows_(corpus_rows(corpus)),
        real_count_(corpus.embeddings.size()),
        rng_(config.seed),
        generator_(Network(config.generator_spec)),
        critic_(Network(config.critic_spec)),
        gen_opt_(0),
        critic_opt_(0) {
    validate_corpus(corpus);
    validate_train_config(config, dim_);
    AdamConfig adam;
    adam.learning_rate = cfg_.lr;
    generator_ = Network::random_init(cfg_.generator_spec, rng_);
    critic_ = Network::random_init(cfg_.critic_spec, rng_);
    gen_opt_ = Adam(generator_.size(), adam);
    critic_opt_ = Adam(critic_.size(), adam);
  }

  const Network& generator() const { return generator_; }
  const Network& critic() const { return critic_; }
  Rng& rng() { return rng_; }
  std::uint64_t iteration() const { return iteration_; }

  // n rows drawn uniformly with replacement from the training corpus.
  std::vector<double> sample_real(std::size_t n) {
    std::vector<double> batch(n * dim_);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t pick = rng_.uniform_index(real_count_);
      std::copy_n(real_rows_.begin() + pick * dim_, dim_,
                  batch.begin() + i * dim_);
    }
    return batch;
  }

  std::vector<double> generate(std::span<const double> noise,
                               std::size_t n) const {
    return generator_.eval(noise, n);
  }

  // One critic update on a (real, fake) batch pair:
  //   L_C = mean_j D(y_j) - mean_i D(x_i)
  //         + gamma * [ mean_i (D(x_i) - phi_i)^2 + mean_j (D(y_j) + psi_j)^2 ]
  // with (phi, psi) the dual potentials of the batch transport problem.
  // Returns the loss; fills ot_estimate and critic_regression_loss.
  double critic_step(std::span<const double> real,
                     std::span<const double> fake, StepDiagnostics& diag) {
    const std::size_t n = cfg_.batch_size;
    if (real.size() != n * dim_ || fake.size() != n * dim_) {
      throw ConfigError("critic step: batch buffers must be " +
                        std::to_string(n) + " x " + std::to_string(dim_));
    }
    // A non-finite fake batch is a diverged generator, not a usage error.
    if (!all_finite(fake)) {
      throw DivergenceError("generator produced non-finite samples at "
                            "iteration " + std::to_string(iteration_));
    }
    const TransportPlan plan = solve_ot(quadratic_cost(real, fake, n, dim_));
    diag.ot_estimate = plan.total_cost;

    Tape tape;
    std::vector<double> both(real.begin(), real.end());
    both.insert(both.end(), fake.begin(), fake.end());
    Tensor x = tape.constant(2 * n, dim_, both);
    ForwardResult fr = critic_.forward(tape, x, /*trainable=*/true);
    Tensor d_real = tape.slice_rows(fr.output, 0, n);
    Tensor d_fake = tape.slice_rows(fr.output, n, n);

    Tensor phi = tape.constant(n, 1, plan.phi);
    Tensor psi = tape.constant(n, 1, plan.psi);
    Tensor reg_real = tape.mean_all(tape.square(tape.sub(d_real, phi)));
    Tensor reg_fake = tape.mean_all(tape.square(tape.add(d_fake, psi)));
    Tensor regression = tape.add(reg_real, reg_fake);
    Tensor loss =
        tape.add(tape.sub(tape.mean_all(d_fake), tape.mean_all(d_real)),
                 tape.scale(regression, cfg_.gamma));

    diag.critic_regression_loss = regression.value()[0];
    const double loss_value = loss.value()[0];
    if (!std::isfinite(loss_value)) {
      throw DivergenceError("critic loss is not finite at iteration " +
                            std::to_string(iteration_));
    }
    tape.backward(loss);
    critic_opt_.step(critic_.params(), critic_.collect_grad(fr));
    return loss_value;
  }

  // One generator update against a frozen critic: L_G = -mean_j D(G(z_j)).
  double generator_step(std::span<const double> noise,
                        StepDiagnostics& diag) {
    const std::size_t n = cfg_.batch_size;
    if (noise.size() != n * cfg_.noise_dim) {
      throw ConfigError("generator step: noise buffer must be " +
                        std::to_string(n) + " x " +
                        std::to_string(cfg_.noise_dim));
    }
    Tape tape;
    Tensor z = tape.constant(n, cfg_.noise_dim, noise);
    ForwardResult gen = generator_.forward(tape, z, /*trainable=*/true);
    // Critic parameters enter as constants: its weights cannot drift here.
    ForwardResult crit = critic_.forward(tape, gen.output,
                                         /*trainable=*/false);
    Tensor loss = tape.scale(tape.mean_all(crit.output), -1.0);

    const double loss_value = loss.value()[0];
    if (!std::isfinite(loss_value)) {
      throw DivergenceError("generator loss is not finite at iteration " +
                            std::to_string(iteration_));
    }
    tape.backward(loss);
    gen_opt_.step(generator_.params(), generator_.collect_grad(gen));
    diag.generator_loss = loss_value;
    return loss_value;
  }

  // Runs critic_steps critic updates and one generator update, advancing
  // the iteration counter. Draws are strictly ordered (per critic step:
  // real batch then noise; then the generator's noise) so a fixed seed
  // reproduces the exact trajectory.
  StepDiagnostics iterate() {
    StepDiagnostics diag;
    for (std::size_t s = 0; s < cfg_.critic_steps; ++s) {
      const std::vector<double> real = sample_real(cfg_.batch_size);
      const std::vector<double> noise =
          sample_noise(cfg_.batch_size, cfg_.noise_dim, rng_);
      const std::vector<double> fake = generate(noise, cfg_.batch_size);
      critic_step(real, fake, diag);
    }
    const std::vector<double> noise =
        sample_noise(cfg_.batch_size, cfg_.noise_dim, rng_);
    generator_step(noise, diag);
    ++iteration_;
    diag.iteration = iteration_;
    if (cfg_.mmd_every > 0 && iteration_ % cfg_.mmd_every == 0 &&
        real_count_ >= 2) {
      diag.sample_mmd = diagnostic_mmd();
    }
    return diag;
  }

  // MMD between fresh generator samples and corpus rows, on an RNG stream
  // derived from (seed, iteration) so diagnostics never perturb training.
  double diagnostic_mmd() {
    const std::size_t n =
        std::min<std::size_t>(std::max<std::size_t>(cfg_.mmd_sample, 2),
                              real_count_);
    Rng local(mix_seed(mix_seed(cfg_.seed, 0x6d6d64), iteration_));
    std::vector<double> noise = sample_noise(n, cfg_.noise_dim, local);
    std::vector<double> fake = generate(noise, n);
    std::vector<double> real(n * dim_);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t pick = local.uniform_index(real_count_);
      std::copy_n(real_rows_.begin() + pick * dim_, dim_,
                  real.begin() + i * dim_);
    }
    const double bw = median_pairwise_distance(fake, real, dim_);
    return mmd(fake, real, dim_, bw > 0.0 ? bw : 1.0);
  }

  void save_checkpoints(const std::filesystem::path& dir) const {
    const std::string stem = checkpoint_stem(iteration_);
    save_checkpoint(dir / ("generator-" + stem + ".ckpt"),
                    cfg_.generator_spec, generator_.params());
    save_checkpoint(dir / ("critic-" + stem + ".ckpt"), cfg_.critic_spec,
                    critic_.params());
    TrainState state;
    state.iteration = iteration_;
    state.generator_opt = {gen_opt_.step_count(), gen_opt_.first_moment(),
                           gen_opt_.second_moment()};
    state.critic_opt = {critic_opt_.step_count(), critic_opt_.first_moment(),
                        critic_opt_.second_moment()};
    std::ostringstream rs;
    rng_.save(rs);
    state.rng_state = rs.str();
    save_train_state(dir / ("state-" + stem + ".bin"), state);
  }

  // Restores networks, optimizers, RNG and iteration counter from the
  // files written by save_checkpoints at `iteration`.
  void restore(const std::filesystem::path& dir, std::uint64_t iteration) {
    const std::string stem = checkpoint_stem(iteration);
    CheckpointData gen = load_checkpoint(dir / ("generator-" + stem + ".ckpt"));
    CheckpointData crit = load_checkpoint(dir / ("critic-" + stem + ".ckpt"));
    if (arch_to_text(gen.arch) != arch_to_text(cfg_.generator_spec) ||
        arch_to_text(crit.arch) != arch_to_text(cfg_.critic_spec)) {
      throw DataError("checkpoint architecture does not match configuration");
    }
    TrainState state = load_train_state(dir / ("state-" + stem + ".bin"));
    if (state.iteration != iteration) {
      throw DataError("training state iteration " +
                      std::to_string(state.iteration) +
                      " does not match requested " + std::to_string(iteration));
    }
    generator_.params() = std::move(gen.params);
    critic_.params() = std::move(crit.params);
    gen_opt_.restore(state.generator_opt.step_count,
                     std::move(state.generator_opt.first_moment),
                     std::move(state.generator_opt.second_moment));
    critic_opt_.restore(state.critic_opt.step_count,
                        std::move(state.critic_opt.first_moment),
                        std::move(state.critic_opt.second_moment));
    std::istringstream rs(state.rng_state);
    rng_.load(rs);
    iteration_ = iteration;
  }

  // Full training loop with checkpoints and an append-only diagnostics
  // log. Runs from the current iteration to min(until, total_iterations);
  // `until` lets callers stop cleanly partway and resume later. On a
  // non-finite loss the current state is dumped with an "-aborted" stem
  // and the divergence error is rethrown.
  void run(const TrainRunPaths& paths,
           std::optional<std::uint64_t> until = {}) {
    const std::uint64_t target =
        std::min(until.value_or(cfg_.total_iterations), cfg_.total_iterations);
    std::ofstream log;
    if (!paths.diagnostics_csv.empty()) {
      log = open_log(paths.diagnostics_csv);
    }
    const bool ckpt = !paths.checkpoint_dir.empty();
    if (ckpt && iteration_ == 0) save_checkpoints(paths.checkpoint_dir);
    try {
      while (iteration_ < target) {
        const StepDiagnostics diag = iterate();
        if (log.is_open()) append_log(log, diag);
        if (ckpt && (iteration_ % cfg_.checkpoint_every == 0 ||
                     iteration_ == cfg_.total_iterations)) {
          save_checkpoints(paths.checkpoint_dir);
          log.flush();
        }
      }
      if (ckpt && iteration_ == target &&
          !(iteration_ % cfg_.checkpoint_every == 0 ||
            iteration_ == cfg_.total_iterations || iteration_ == 0)) {
        save_checkpoints(paths.checkpoint_dir);  // clean stop mid-cadence
      }
    } catch (const DivergenceError&) {
      if (ckpt) dump_aborted(paths.checkpoint_dir);
      throw;
    }
  }

 private:
  // Opens the diagnostics CSV for appending. If it already has rows past
  // the current iteration (a run that died after its last checkpoint),
  // those rows are dropped so the log and the restored state agree.
  std::ofstream open_log(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::string kept;
    bool fresh = true;
    if (fs::exists(path)) {
      std::ifstream in(path);
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
          if (line != kDiagnosticsHeader) {
            throw DataError(path.string() + ": unrecognized diagnostics header");
          }
          kept += line;
          kept += '\n';
          continue;
        }
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        const std::uint64_t it =
            detail::string_to_u64(line.substr(0, comma));
        if (it > iteration_) break;
        kept += line;
        kept += '\n';
      }
      fresh = false;
      detail::write_file_atomic(path, kept);
    }
    std::ofstream out(path, std::ios::app);
    if (!out) throw DataError("cannot write " + path.string());
    if (fresh) out << kDiagnosticsHeader << '\n';
    return out;
  }

  static void append_log(std::ofstream& log, const StepDiagnostics& diag) {
    log << diag.iteration << ',' << detail::double_to_string(diag.ot_estimate)
        << ',' << detail::double_to_string(diag.critic_regression_loss) << ','
        << detail::double_to_string(diag.generator_loss) << ',';
    if (diag.sample_mmd) log << detail::double_to_string(*diag.sample_mmd);
    log << '\n';
  }

  void dump_aborted(const std::filesystem::path& dir) const {
    try {
      save_checkpoint(dir / "generator-aborted.ckpt", cfg_.generator_spec,
                      generator_.params());
      save_checkpoint(dir / "critic-aborted.ckpt", cfg_.critic_spec,
                      critic_.params());
    } catch (const Error&) {
      // The divergence error is the primary failure; dumping is best-effort.
    }
  }

  TrainConfig cfg_;
  std::size_t dim_;
  std::vector<double> real_rows_;
  std::size_t real_count_;
  Rng rng_;
  Network generator_;
  Network critic_;
  Adam gen_opt_;
  Adam critic_opt_;
  std::uint64_t iteration_ = 0;
};

}  // namespace vpgan

#endif  // VPGAN_TRAINER_HPP
