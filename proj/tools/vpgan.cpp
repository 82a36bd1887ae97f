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
//
// vpgan command line. Every run is a pure function of its config file,
// flags and seed: rerunning a command with the same inputs rewrites
// byte-identical outputs. Exit codes: 0 success, 1 configuration error,
// 2 data error, 3 divergence, 4 evaluation error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "vpgan/vpgan.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CorpusPaths {
  fs::path enrollment;
  fs::path trial;
};

void ensure_layout_dirs(const vpgan::OutputLayout& layout) {
  fs::create_directories(layout.corpora());
  fs::create_directories(layout.checkpoints());
  fs::create_directories(layout.mappings());
  fs::create_directories(layout.reports());
  fs::create_directories(layout.figures());
  fs::create_directories(layout.logs());
}

// Synthetic corpora are materialized to disk once and loaded back, so
// every stage (training, anonymization, evaluation) consumes the exact
// same float32 bytes instead of a private in-memory copy.
CorpusPaths ensure_corpora(const vpgan::ExperimentManifest& m,
                           const vpgan::OutputLayout& layout,
                           bool force = false) {
  if (!m.corpus.synthetic) {
    return {m.corpus.enrollment_path, m.corpus.trial_path};
  }
  fs::create_directories(layout.corpora());
  CorpusPaths paths{layout.corpora() / "enrollment.vpemb",
                    layout.corpora() / "trial.vpemb"};
  if (force || !fs::exists(paths.enrollment) || !fs::exists(paths.trial)) {
    auto [enrollment, trial] = vpgan::generate_synthetic(m.corpus.spec);
    vpgan::write_corpus(enrollment, paths.enrollment);
    vpgan::write_corpus(trial, paths.trial);
  }
  return paths;
}

vpgan::Corpus load_enrollment(const CorpusPaths& paths) {
  return vpgan::read_corpus(paths.enrollment, "enrollment",
                            vpgan::Split::kEnrollment);
}

vpgan::Corpus load_trial(const CorpusPaths& paths) {
  return vpgan::read_corpus(paths.trial, "trial", vpgan::Split::kTrial);
}

// Highest iteration with a complete checkpoint triple in the directory.
std::optional<std::uint64_t> latest_checkpoint(const fs::path& dir) {
  std::optional<std::uint64_t> best;
  if (!fs::is_directory(dir)) return best;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    const std::string prefix = "state-";
    if (name.rfind(prefix, 0) != 0 || entry.path().extension() != ".bin") {
      continue;
    }
    const std::string digits =
        entry.path().stem().string().substr(prefix.size());
    try {
      const std::uint64_t it = vpgan::detail::string_to_u64(digits);
      if (!best || it > *best) best = it;
    } catch (const vpgan::DataError&) {
      continue;  // foreign file, not one of ours
    }
  }
  return best;
}

vpgan::Network load_network(const fs::path& checkpoint) {
  vpgan::CheckpointData data = vpgan::load_checkpoint(checkpoint);
  vpgan::Network net(data.arch);
  net.params() = std::move(data.params);
  return net;
}

// Artifacts referenced by an anonymizer config must outlive it.
struct StrategyArtifacts {
  std::optional<vpgan::Network> generator;
  std::optional<vpgan::Corpus> pool;
};

vpgan::AnonymizerConfig make_anonymizer(const vpgan::ExperimentManifest& m,
                                        const vpgan::OutputLayout& layout,
                                        const fs::path& checkpoint_override,
                                        StrategyArtifacts& artifacts) {
  vpgan::AnonymizerConfig cfg;
  cfg.strategy = m.anonymize.strategy;
  cfg.threshold = m.anonymize.threshold;
  cfg.max_attempts = m.anonymize.max_attempts;
  cfg.pool_config = m.anonymize.pool_config;
  switch (cfg.strategy) {
    case vpgan::Strategy::kGan: {
      fs::path ckpt =
          checkpoint_override.empty() ? m.anonymize.checkpoint
                                      : checkpoint_override;
      if (ckpt.empty()) {
        const auto it = latest_checkpoint(layout.checkpoints());
        if (!it) {
          throw vpgan::ConfigError(
              "gan strategy needs a generator: set 'anonymize.checkpoint', "
              "pass --checkpoint, or train first (no checkpoints under " +
              layout.checkpoints().string() + ")");
        }
        ckpt = layout.checkpoints() /
               ("generator-" + vpgan::checkpoint_stem(*it) + ".ckpt");
      }
      artifacts.generator = load_network(ckpt);
      cfg.generator = &*artifacts.generator;
      break;
    }
    case vpgan::Strategy::kPool: {
      if (m.anonymize.pool_path.empty()) {
        throw vpgan::ConfigError(
            "manifest: field 'anonymize.pool' is required for the pool "
            "strategy");
      }
      artifacts.pool = vpgan::read_corpus(m.anonymize.pool_path, "pool",
                                          vpgan::Split::kEnrollment);
      cfg.pool = &*artifacts.pool;
      break;
    }
    case vpgan::Strategy::kRandom:
      break;  // scale reference defaults to the corpus being anonymized
  }
  return cfg;
}

// "identity" is an evaluation-only null strategy: it passes embeddings
// through untouched and anchors the report (original EER, GVD exactly 0).
vpgan::AnonymizeFn make_anonymize_fn(const std::string& strategy,
                                     const vpgan::AnonymizerConfig& cfg) {
  if (strategy == "identity") {
    return [](const vpgan::Corpus& c, std::uint64_t) { return c; };
  }
  return [&cfg](const vpgan::Corpus& c, std::uint64_t seed) {
    return vpgan::anonymize_corpus(c, cfg, seed).first;
  };
}

std::string fmt(double v) { return vpgan::detail::double_to_string(v); }

// ---------------------------------------------------------------------------
// Subcommands. Each takes the already-parsed flag values and throws the
// library error taxonomy; main() maps exceptions to exit codes.

void cmd_corpus_gen(const std::string& config, bool force) {
  const auto m = vpgan::load_manifest(config);
  if (!m.corpus.synthetic) {
    throw vpgan::ConfigError(
        "corpus-gen requires 'corpus.type' = 'synthetic' (manifest uses "
        "files)");
  }
  const vpgan::OutputLayout layout{m.output_dir};
  const CorpusPaths paths = ensure_corpora(m, layout, force);
  std::cout << "enrollment: " << paths.enrollment.string() << "\n"
            << "trial: " << paths.trial.string() << "\n";
}

void cmd_corpus_convert(const std::string& input, const std::string& output) {
  const vpgan::Corpus corpus = vpgan::read_corpus(
      input, fs::path(input).stem().string(), vpgan::Split::kTrial);
  if (!output.empty() && fs::path(output).has_parent_path()) {
    fs::create_directories(fs::path(output).parent_path());
  }
  vpgan::write_corpus(corpus, output);
  std::cout << "wrote " << corpus.embeddings.size() << " embeddings (dim "
            << corpus.dim << ") to " << output << "\n";
}

void cmd_train(const std::string& config, bool resume, std::int64_t until) {
  const auto m = vpgan::load_manifest(config);
  const vpgan::OutputLayout layout{m.output_dir};
  ensure_layout_dirs(layout);
  const CorpusPaths paths = ensure_corpora(m, layout);
  const vpgan::Corpus enrollment = load_enrollment(paths);
  const vpgan::TrainConfig cfg = vpgan::resolved_train_config(m, enrollment.dim);

  vpgan::Trainer trainer(enrollment, cfg);
  if (resume) {
    const auto it = latest_checkpoint(layout.checkpoints());
    if (!it) {
      throw vpgan::DataError("--resume: no training state found under " +
                             layout.checkpoints().string());
    }
    trainer.restore(layout.checkpoints(), *it);
  }
  vpgan::TrainRunPaths run_paths{layout.checkpoints(),
                                 layout.logs() / "train-diagnostics.csv"};
  std::optional<std::uint64_t> stop;
  if (until >= 0) stop = static_cast<std::uint64_t>(until);
  trainer.run(run_paths, stop);
  std::cout << "trained to iteration " << trainer.iteration() << " ("
            << vpgan::arch_kind_name(cfg.generator_spec.kind)
            << " generator, gamma " << fmt(cfg.gamma) << ")\n"
            << "checkpoints: " << layout.checkpoints().string() << "\n"
            << "diagnostics: "
            << (layout.logs() / "train-diagnostics.csv").string() << "\n";
}

void cmd_anonymize(const std::string& config, const std::string& corpus_path,
                   const std::string& output_path,
                   const std::string& mapping_path,
                   const std::string& checkpoint_override,
                   std::optional<std::uint64_t> seed_flag,
                   bool overwrite_mapping) {
  const auto m = vpgan::load_manifest(config);
  const vpgan::OutputLayout layout{m.output_dir};
  ensure_layout_dirs(layout);
  const CorpusPaths paths = ensure_corpora(m, layout);

  const fs::path in = corpus_path.empty() ? paths.trial : fs::path(corpus_path);
  const vpgan::Corpus corpus = vpgan::read_corpus(
      in, in.stem().string(), vpgan::Split::kTrial);

  const std::uint64_t seed =
      seed_flag.value_or(vpgan::mix_seed(m.seed, vpgan::kTrialAnonSeedStream));
  const fs::path mapping_out =
      mapping_path.empty() ? layout.mappings() / "mapping.jsonl"
                           : fs::path(mapping_path);
  // A mapping pins speaker identities to targets; silently replacing one
  // could split a speaker across two identities in downstream corpora.
  if (fs::exists(mapping_out) && !overwrite_mapping) {
    throw vpgan::ConfigError("mapping file " + mapping_out.string() +
                             " already exists; pass --overwrite-mapping to "
                             "replace it");
  }

  StrategyArtifacts artifacts;
  const vpgan::AnonymizerConfig cfg =
      make_anonymizer(m, layout, checkpoint_override, artifacts);
  auto [anonymized, mapping] = vpgan::anonymize_corpus(corpus, cfg, seed);

  const fs::path out = output_path.empty()
                           ? layout.corpora() / "anonymized-trial.vpemb"
                           : fs::path(output_path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  vpgan::write_corpus(anonymized, out);
  vpgan::write_mapping(mapping, mapping_out);
  std::cout << "anonymized " << corpus.speaker_ids().size() << " speakers ("
            << vpgan::strategy_name(cfg.strategy) << ", seed " << seed
            << ")\ncorpus: " << out.string()
            << "\nmapping: " << mapping_out.string() << "\n";
}

void cmd_evaluate(const std::string& config, const std::string& strategy_flag,
                  const std::string& checkpoint_override,
                  const std::string& report_path) {
  const auto m = vpgan::load_manifest(config);
  const vpgan::OutputLayout layout{m.output_dir};
  ensure_layout_dirs(layout);
  const CorpusPaths paths = ensure_corpora(m, layout);
  const vpgan::Corpus enrollment = load_enrollment(paths);
  const vpgan::Corpus trial = load_trial(paths);

  const std::string strategy =
      strategy_flag.empty() ? std::string(vpgan::strategy_name(
                                  m.anonymize.strategy))
                            : strategy_flag;
  StrategyArtifacts artifacts;
  vpgan::AnonymizerConfig cfg;
  if (strategy != "identity") {
    vpgan::ExperimentManifest adjusted = m;
    try {
      adjusted.anonymize.strategy = vpgan::parse_strategy(strategy);
    } catch (const vpgan::DataError&) {
      throw vpgan::ConfigError("--strategy must be gan, pool, random or "
                               "identity, got '" + strategy + "'");
    }
    cfg = make_anonymizer(adjusted, layout, checkpoint_override, artifacts);
  }
  const vpgan::AnonymizeFn fn = make_anonymize_fn(strategy, cfg);

  const std::uint64_t enroll_seed =
      vpgan::mix_seed(m.seed, vpgan::kEnrollAnonSeedStream);
  const std::uint64_t trial_seed =
      vpgan::mix_seed(m.seed, vpgan::kTrialAnonSeedStream);
  const vpgan::EvalReport report = vpgan::evaluate_anonymization(
      enrollment, trial, fn, m.scenarios, enroll_seed, trial_seed, strategy,
      m.digest);

  const fs::path out = report_path.empty()
                           ? layout.reports() / "evaluation.json"
                           : fs::path(report_path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  vpgan::write_report_json(report, out);

  // Raw trial scores per scenario, for external calibration or plotting.
  for (const vpgan::Scenario scenario : m.scenarios) {
    const vpgan::Corpus anon_trial = fn(trial, trial_seed);
    const vpgan::Corpus* enroll_side = &enrollment;
    vpgan::Corpus anon_enroll;
    if (scenario == vpgan::Scenario::kLazyInformed) {
      anon_enroll = fn(enrollment, enroll_seed);
      enroll_side = &anon_enroll;
    }
    const auto trials = vpgan::score_trials(*enroll_side, anon_trial);
    vpgan::write_scores_csv(
        trials, layout.reports() /
                    ("scores-" + std::string(vpgan::scenario_name(scenario)) +
                     ".csv"));
  }

  std::cout << "report: " << out.string() << "\n";
  for (const auto& [name, entry] : report.eer_percent) {
    std::cout << "eer[" << name << "] pooled " << fmt(entry.pooled) << "%";
    if (entry.female) std::cout << " F " << fmt(*entry.female) << "%";
    if (entry.male) std::cout << " M " << fmt(*entry.male) << "%";
    std::cout << "\n";
  }
  if (const auto it = report.gvd_db.find("all"); it != report.gvd_db.end()) {
    std::cout << "gvd[all] " << fmt(it->second) << " dB\n";
  }
  std::cout << "mmd " << fmt(report.mmd_value) << " (bandwidth "
            << fmt(report.mmd_bandwidth) << ")\n";
}

void cmd_ablate(const std::string& config) {
  const auto m = vpgan::load_manifest(config);
  const vpgan::OutputLayout layout{m.output_dir};
  ensure_layout_dirs(layout);
  const CorpusPaths paths = ensure_corpora(m, layout);
  const vpgan::Corpus enrollment = load_enrollment(paths);
  const vpgan::Corpus trial = load_trial(paths);
  const vpgan::AblationGrid& grid = m.ablation;

  json cells = json::array();
  std::size_t index = 0;
  // Cell order is architecture-major, then noise dimension, then gamma —
  // fixed so cell seeds are stable across runs.
  for (const vpgan::ArchKind arch : grid.architectures) {
    for (const std::size_t noise_dim : grid.noise_dims) {
      for (const double gamma : grid.gammas) {
        vpgan::TrainConfig cfg = m.train;
        cfg.noise_dim = noise_dim;
        cfg.gamma = gamma;
        cfg.total_iterations = grid.total_iterations;
        cfg.checkpoint_every = std::max<std::uint64_t>(grid.total_iterations, 1);
        vpgan::resolve_architectures(cfg, enrollment.dim, arch, m.arch_hidden,
                                     m.arch_depth);
        cfg.seed = vpgan::mix_seed(m.seed, vpgan::kAblationSeedStream + index);
        vpgan::validate_train_config(cfg, enrollment.dim);

        json row;
        row["cell"] = index;
        row["architecture"] = vpgan::arch_kind_name(arch);
        row["noise_dim"] = noise_dim;
        row["gamma"] = gamma;
        row["seed"] = cfg.seed;
        row["generator_params"] = vpgan::param_count(cfg.generator_spec);

        char cell_log[32];
        std::snprintf(cell_log, sizeof(cell_log), "ablate-cell-%02zu.csv",
                      index);
        vpgan::Trainer trainer(enrollment, cfg);
        vpgan::TrainRunPaths run_paths{fs::path(), layout.logs() / cell_log};
        bool diverged = false;
        try {
          trainer.run(run_paths);
        } catch (const vpgan::DivergenceError& e) {
          diverged = true;
          row["error"] = e.what();
        }
        row["diverged"] = diverged;
        row["iterations"] = trainer.iteration();

        if (!diverged) {
          // Held-out distribution fidelity at the end of the budget.
          const std::size_t n =
              std::min(cfg.mmd_sample, trial.embeddings.size());
          vpgan::Rng rng(vpgan::mix_seed(cfg.seed, 0xe7a1));
          const std::vector<double> noise =
              vpgan::sample_noise(n, cfg.noise_dim, rng);
          const std::vector<double> fake =
              trainer.generator().eval(noise, n);
          std::vector<double> real(n * trial.dim);
          for (std::size_t i = 0; i < n; ++i) {
            const auto& v =
                trial.embeddings[rng.uniform_index(trial.embeddings.size())]
                    .vector;
            std::copy(v.begin(), v.end(), real.begin() + i * trial.dim);
          }
          double bw = vpgan::median_pairwise_distance(fake, real, trial.dim);
          if (bw <= 0.0) bw = 1.0;
          row["final_mmd"] = vpgan::mmd(fake, real, trial.dim, bw);

          vpgan::AnonymizerConfig acfg;
          acfg.strategy = vpgan::Strategy::kGan;
          acfg.generator = &trainer.generator();
          acfg.threshold = m.anonymize.threshold;
          acfg.max_attempts = m.anonymize.max_attempts;
          try {
            const vpgan::AnonymizeFn fn = make_anonymize_fn("gan", acfg);
            const std::uint64_t es =
                vpgan::mix_seed(cfg.seed, vpgan::kEnrollAnonSeedStream);
            const std::uint64_t ts =
                vpgan::mix_seed(cfg.seed, vpgan::kTrialAnonSeedStream);
            const auto ignorant =
                vpgan::run_attack(enrollment, trial, fn,
                                  vpgan::Scenario::kIgnorant, es, ts);
            const auto lazy =
                vpgan::run_attack(enrollment, trial, fn,
                                  vpgan::Scenario::kLazyInformed, es, ts);
            row["eer_ignorant"] = ignorant.eer_pooled;
            row["eer_lazy_informed"] = lazy.eer_pooled;
            row["gvd_db"] = vpgan::gvd_to_json(vpgan::gvd(trial, fn(trial, ts)));
          } catch (const vpgan::Error& e) {
            // A generator this small can still collapse below the target
            // selection threshold; the cell keeps its training metrics.
            row["anonymization_error"] = e.what();
          }
        }
        cells.push_back(row);
        ++index;
      }
    }
  }

  json table;
  table["base_seed"] = m.seed;
  table["config_digest"] = m.digest;
  table["iterations_per_cell"] = grid.total_iterations;
  table["cells"] = cells;
  const fs::path out = layout.reports() / "ablation.json";
  vpgan::detail::write_file_atomic(out, table.dump(2) + "\n");
  std::cout << "ablation table (" << cells.size() << " cells): "
            << out.string() << "\n";
}

void cmd_visualize(const std::string& config,
                   std::vector<std::string> checkpoints,
                   const std::string& corpus_path) {
  const auto m = vpgan::load_manifest(config);
  const vpgan::OutputLayout layout{m.output_dir};
  ensure_layout_dirs(layout);
  const CorpusPaths paths = ensure_corpora(m, layout);
  const fs::path in = corpus_path.empty() ? paths.trial : fs::path(corpus_path);
  const vpgan::Corpus corpus =
      vpgan::read_corpus(in, in.stem().string(), vpgan::Split::kTrial);

  if (checkpoints.empty()) {
    for (const auto& entry : fs::directory_iterator(layout.checkpoints())) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("generator-", 0) == 0 &&
          entry.path().extension() == ".ckpt") {
        checkpoints.push_back(entry.path().string());
      }
    }
    std::sort(checkpoints.begin(), checkpoints.end());
  }
  if (checkpoints.empty()) {
    throw vpgan::ConfigError("visualize: no generator checkpoints given and "
                             "none found under " +
                             layout.checkpoints().string());
  }

  const std::size_t n =
      std::min(m.projection_points_per_side, corpus.embeddings.size());
  if (n < 4) {
    throw vpgan::ConfigError("visualize: need at least 4 points per side");
  }
  vpgan::ProjectionConfig pcfg = m.projection;

  // The real subset and the noise batch are fixed across checkpoints so
  // successive figures differ only through the generator.
  vpgan::Rng sample_rng(vpgan::mix_seed(pcfg.seed, 1));
  std::vector<std::size_t> order(corpus.embeddings.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(order[i], order[i + sample_rng.uniform_index(order.size() - i)]);
  }
  std::vector<double> real(n * corpus.dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = corpus.embeddings[order[i]].vector;
    std::copy(v.begin(), v.end(), real.begin() + i * corpus.dim);
  }

  json entries = json::array();
  for (const std::string& ckpt : checkpoints) {
    const vpgan::Network generator = load_network(ckpt);
    if (generator.spec().output_dim != corpus.dim) {
      throw vpgan::DataError("checkpoint " + ckpt + " generates dimension " +
                             std::to_string(generator.spec().output_dim) +
                             ", corpus has " + std::to_string(corpus.dim));
    }
    vpgan::Rng noise_rng(vpgan::mix_seed(pcfg.seed, 2));
    const std::vector<double> noise =
        vpgan::sample_noise(n, generator.spec().input_dim, noise_rng);
    const std::vector<double> fake = generator.eval(noise, n);

    const vpgan::Projection2D proj =
        vpgan::project_overlap(real, n, fake, n, corpus.dim, pcfg);
    const std::string stem = fs::path(ckpt).stem().string();
    const fs::path svg = layout.figures() / ("overlap-" + stem + ".svg");
    const fs::path csv = layout.figures() / ("overlap-" + stem + ".csv");
    vpgan::render_overlap(proj, svg);
    vpgan::write_projection_csv(proj, csv);

    // Artifact names only: the summary must not depend on where the
    // output tree happens to live.
    json entry;
    entry["checkpoint"] = fs::path(ckpt).filename().string();
    entry["svg"] = svg.filename().string();
    entry["csv"] = csv.filename().string();
    entry["points_per_side"] = n;
    entry["knn_label_error_percent"] = vpgan::knn_label_error_percent(proj);
    entry["final_kl"] = proj.kl_history.back();
    entries.push_back(entry);
    std::cout << stem << ": 1-nn label error "
              << fmt(entry["knn_label_error_percent"].get<double>())
              << "% -> " << svg.string() << "\n";
  }

  json summary;
  summary["config_digest"] = m.digest;
  summary["entries"] = entries;
  vpgan::detail::write_file_atomic(layout.figures() / "visualization.json",
                                   summary.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"embedding-space speaker anonymization: Wasserstein GAN "
               "training, target selection, privacy and utility evaluation"};
  app.require_subcommand(1);

  std::string config, corpus_path, output_path, mapping_path, report_path;
  std::string input_path, strategy_flag, checkpoint_override;
  std::vector<std::string> checkpoint_list;
  bool resume = false, force = false, overwrite_mapping = false;
  std::int64_t until = -1;
  std::optional<std::uint64_t> seed_flag;

  auto* gen = app.add_subcommand("corpus-gen",
                                 "generate the synthetic corpus pair");
  gen->add_option("--config", config, "experiment manifest (JSON)")
      ->required();
  gen->add_flag("--force", force, "regenerate even if the files exist");

  auto* conv = app.add_subcommand("corpus-convert",
                                  "convert a corpus between the binary and "
                                  "JSONL formats (by extension)");
  conv->add_option("--input", input_path, "source corpus")->required();
  conv->add_option("--output", output_path, "destination corpus")->required();

  auto* train = app.add_subcommand("train", "train the WGAN on the "
                                            "enrollment corpus");
  train->add_option("--config", config, "experiment manifest (JSON)")
      ->required();
  train->add_flag("--resume", resume,
                  "continue from the latest checkpoint triple");
  train->add_option("--until", until,
                    "stop after this iteration (for staged runs)");

  auto* anon = app.add_subcommand("anonymize",
                                  "assign every speaker an anonymous target "
                                  "and rewrite the corpus");
  anon->add_option("--config", config, "experiment manifest (JSON)")
      ->required();
  anon->add_option("--corpus", corpus_path,
                   "corpus to anonymize (default: the trial corpus)");
  anon->add_option("--output", output_path, "anonymized corpus path");
  anon->add_option("--mapping", mapping_path, "mapping file path");
  anon->add_option("--checkpoint", checkpoint_override,
                   "generator checkpoint (gan strategy)");
  anon->add_option("--seed", seed_flag, "anonymization seed override");
  anon->add_flag("--overwrite-mapping", overwrite_mapping,
                 "allow replacing an existing mapping file");

  auto* eval = app.add_subcommand("evaluate",
                                  "run the configured attack scenarios and "
                                  "utility metrics, write the report");
  eval->add_option("--config", config, "experiment manifest (JSON)")
      ->required();
  eval->add_option("--strategy", strategy_flag,
                   "gan, pool, random or identity (default: manifest)");
  eval->add_option("--checkpoint", checkpoint_override,
                   "generator checkpoint (gan strategy)");
  eval->add_option("--report", report_path, "report path (JSON)");

  auto* ablate = app.add_subcommand("ablate",
                                    "train every grid cell (architecture x "
                                    "noise dim x gamma) and tabulate metrics");
  ablate->add_option("--config", config, "experiment manifest (JSON)")
      ->required();

  auto* viz = app.add_subcommand("visualize",
                                 "overlap real and generated embeddings in "
                                 "2-D for each checkpoint");
  viz->add_option("--config", config, "experiment manifest (JSON)")
      ->required();
  viz->add_option("--checkpoint", checkpoint_list,
                  "generator checkpoints (default: all in the run)");
  viz->add_option("--corpus", corpus_path,
                  "real corpus to overlap (default: the trial corpus)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) cmd_corpus_gen(config, force);
    if (conv->parsed()) cmd_corpus_convert(input_path, output_path);
    if (train->parsed()) cmd_train(config, resume, until);
    if (anon->parsed()) {
      cmd_anonymize(config, corpus_path, output_path, mapping_path,
                    checkpoint_override, seed_flag, overwrite_mapping);
    }
    if (eval->parsed()) {
      cmd_evaluate(config, strategy_flag, checkpoint_override, report_path);
    }
    if (ablate->parsed()) cmd_ablate(config);
    if (viz->parsed()) cmd_visualize(config, checkpoint_list, corpus_path);
  } catch (const vpgan::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const vpgan::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const vpgan::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const vpgan::EvalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
