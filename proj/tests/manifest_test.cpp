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

#include <cstdlib>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "test_support.hpp"
#include "vpgan/errors.hpp"
#include "vpgan/manifest.hpp"

namespace vpgan {
namespace {

nlohmann::json minimal_manifest() {
  return nlohmann::json{{"seed", 7},
                        {"output_dir", "out"},
                        {"corpus", {{"type", "synthetic"}}}};
}

// Asserts that parsing fails with a ConfigError whose message names the
// offending field.
void expect_rejected(const nlohmann::json& j, const std::string& fragment) {
  try {
    parse_manifest(j, "00000000", /*check_paths=*/false);
    ADD_FAILURE() << "expected rejection mentioning '" << fragment << "'";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos)
        << e.what();
  }
}

TEST(ManifestTest, MinimalManifestFillsEveryDefault) {
  const ExperimentManifest m =
      parse_manifest(minimal_manifest(), "cafef00d");
  EXPECT_EQ(m.seed, 7u);
  EXPECT_EQ(m.output_dir, "out");
  EXPECT_EQ(m.digest, "cafef00d");

  EXPECT_TRUE(m.corpus.synthetic);
  EXPECT_EQ(m.corpus.spec.speaker_count, 200u);
  EXPECT_EQ(m.corpus.spec.utterances_per_speaker, 20u);
  EXPECT_EQ(m.corpus.spec.dim, 704u);
  EXPECT_DOUBLE_EQ(m.corpus.spec.sex_split, 0.5);

  EXPECT_EQ(m.arch_kind, ArchKind::kResNet);
  EXPECT_FALSE(m.arch_hidden.has_value());
  EXPECT_FALSE(m.arch_depth.has_value());

  EXPECT_EQ(m.anonymize.strategy, Strategy::kGan);
  EXPECT_DOUBLE_EQ(m.anonymize.threshold, 0.3);
  EXPECT_EQ(m.anonymize.max_attempts, 100u);

  ASSERT_EQ(m.scenarios.size(), 2u);
  EXPECT_EQ(m.scenarios[0], Scenario::kIgnorant);
  EXPECT_EQ(m.scenarios[1], Scenario::kLazyInformed);

  EXPECT_EQ(m.ablation.gammas, (std::vector<double>{0.1, 1.0}));
  EXPECT_EQ(m.ablation.noise_dims, (std::vector<std::size_t>{16, 64}));
  ASSERT_EQ(m.ablation.architectures.size(), 2u);
  EXPECT_EQ(m.ablation.architectures[0], ArchKind::kResNet);
  EXPECT_EQ(m.ablation.architectures[1], ArchKind::kMlp);
  EXPECT_EQ(m.ablation.total_iterations, 500u);

  EXPECT_EQ(m.projection_points_per_side, 400u);
}

TEST(ManifestTest, StageSeedsComeFromIndependentStreams) {
  const ExperimentManifest m = parse_manifest(minimal_manifest(), "0");
  EXPECT_EQ(m.corpus.spec.seed, mix_seed(7, kCorpusSeedStream));
  EXPECT_EQ(m.train.seed, mix_seed(7, kTrainSeedStream));
  EXPECT_EQ(m.projection.seed, mix_seed(7, kProjectionSeedStream));
  // Streams are distinct, so no stage accidentally shares randomness.
  EXPECT_NE(m.corpus.spec.seed, m.train.seed);
  EXPECT_NE(m.train.seed, m.projection.seed);
}

TEST(ManifestTest, MissingRequiredFieldsAreNamed) {
  nlohmann::json j = minimal_manifest();
  j.erase("seed");
  expect_rejected(j, "'seed'");
  j = minimal_manifest();
  j.erase("output_dir");
  expect_rejected(j, "'output_dir'");
  j = minimal_manifest();
  j.erase("corpus");
  expect_rejected(j, "'corpus'");
  j = minimal_manifest();
  j["corpus"].erase("type");
  expect_rejected(j, "'corpus.type'");
  expect_rejected(nlohmann::json::array(), "object");
}

TEST(ManifestTest, WrongTypesAreNamed) {
  nlohmann::json j = minimal_manifest();
  j["seed"] = "not a number";
  expect_rejected(j, "'seed'");
  j = minimal_manifest();
  j["train"] = {{"gamma", "strong"}};
  expect_rejected(j, "'train.gamma'");
  j = minimal_manifest();
  j["corpus"]["speakers"] = "many";
  expect_rejected(j, "'corpus.speakers'");
  j = minimal_manifest();
  j["anonymize"] = {{"max_attempts", "many"}};
  expect_rejected(j, "'anonymize.max_attempts'");
}

TEST(ManifestTest, UnknownEnumValuesAreRejected) {
  nlohmann::json j = minimal_manifest();
  j["corpus"]["type"] = "weird";
  expect_rejected(j, "'corpus.type'");
  j = minimal_manifest();
  j["train"] = {{"architecture", "cnn"}};
  expect_rejected(j, "'train.architecture'");
  j = minimal_manifest();
  j["anonymize"] = {{"strategy", "swap"}};
  expect_rejected(j, "'anonymize.strategy'");
  j = minimal_manifest();
  j["evaluate"] = {{"scenarios", {"bogus"}}};
  expect_rejected(j, "'evaluate.scenarios'");
  j = minimal_manifest();
  j["ablate"] = {{"architectures", {"transformer"}}};
  expect_rejected(j, "'ablate.architectures'");
}

TEST(ManifestTest, TrainSectionOverridesDefaults) {
  nlohmann::json j = minimal_manifest();
  j["train"] = {{"noise_dim", 32},    {"gamma", 0.25},
                {"batch_size", 16},   {"total_iterations", 1234},
                {"critic_steps", 3},  {"learning_rate", 0.002},
                {"checkpoint_every", 100}, {"mmd_every", 50},
                {"mmd_sample", 64},   {"architecture", "mlp"},
                {"hidden_dim", 48},   {"depth", 2}};
  const ExperimentManifest m = parse_manifest(j, "0");
  EXPECT_EQ(m.train.noise_dim, 32u);
  EXPECT_DOUBLE_EQ(m.train.gamma, 0.25);
  EXPECT_EQ(m.train.batch_size, 16u);
  EXPECT_EQ(m.train.total_iterations, 1234u);
  EXPECT_EQ(m.train.critic_steps, 3u);
  EXPECT_DOUBLE_EQ(m.train.lr, 0.002);
  EXPECT_EQ(m.train.checkpoint_every, 100u);
  EXPECT_EQ(m.train.mmd_every, 50u);
  EXPECT_EQ(m.train.mmd_sample, 64u);
  EXPECT_EQ(m.arch_kind, ArchKind::kMlp);
  EXPECT_EQ(m.arch_hidden, std::optional<std::size_t>(48));
  EXPECT_EQ(m.arch_depth, std::optional<std::size_t>(2));
}

TEST(ManifestTest, FileCorpusPathsAreCheckedOnlyWhenAsked) {
  testsupport::TempDir dir;
  const auto enroll = dir.path() / "enroll.vpemb";
  const auto trial = dir.path() / "trial.vpemb";
  nlohmann::json j = minimal_manifest();
  j["corpus"] = {{"type", "files"},
                 {"enrollment", enroll.string()},
                 {"trial", trial.string()}};

  // Neither file exists yet.
  try {
    parse_manifest(j, "0", /*check_paths=*/true);
    ADD_FAILURE() << "expected missing-path rejection";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("corpus.enrollment"), std::string::npos) << msg;
    EXPECT_NE(msg.find(enroll.string()), std::string::npos) << msg;
  }
  const ExperimentManifest lax = parse_manifest(j, "0", /*check_paths=*/false);
  EXPECT_FALSE(lax.corpus.synthetic);
  EXPECT_EQ(lax.corpus.enrollment_path, enroll);
  EXPECT_EQ(lax.corpus.trial_path, trial);

  testsupport::write_text(enroll, "");
  testsupport::write_text(trial, "");
  EXPECT_NO_THROW(parse_manifest(j, "0", /*check_paths=*/true));

  j["corpus"].erase("trial");
  expect_rejected(j, "'corpus.trial'");
}

TEST(ManifestTest, AnonymizeSectionParsesAndChecksArtifactPaths) {
  testsupport::TempDir dir;
  const auto ckpt = dir.path() / "generator.ckpt";
  nlohmann::json j = minimal_manifest();
  j["anonymize"] = {{"strategy", "gan"},
                    {"threshold", 0.4},
                    {"max_attempts", 9},
                    {"checkpoint", ckpt.string()}};
  try {
    parse_manifest(j, "0", /*check_paths=*/true);
    ADD_FAILURE() << "expected missing-path rejection";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("anonymize.checkpoint"),
              std::string::npos)
        << e.what();
  }
  testsupport::write_text(ckpt, "");
  const ExperimentManifest m = parse_manifest(j, "0");
  EXPECT_EQ(m.anonymize.strategy, Strategy::kGan);
  EXPECT_DOUBLE_EQ(m.anonymize.threshold, 0.4);
  EXPECT_EQ(m.anonymize.max_attempts, 9u);
  EXPECT_EQ(m.anonymize.checkpoint, ckpt);

  nlohmann::json p = minimal_manifest();
  p["anonymize"] = {{"strategy", "pool"},
                    {"pool", (dir.path() / "missing.vpemb").string()},
                    {"candidates_per_query", 10},
                    {"averaged_count", 4},
                    {"norm_target", 2.5}};
  try {
    parse_manifest(p, "0", /*check_paths=*/true);
    ADD_FAILURE() << "expected missing-path rejection";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("anonymize.pool"), std::string::npos)
        << e.what();
  }
  const ExperimentManifest lax = parse_manifest(p, "0", /*check_paths=*/false);
  EXPECT_EQ(lax.anonymize.strategy, Strategy::kPool);
  EXPECT_EQ(lax.anonymize.pool_config.candidates_per_query, 10u);
  EXPECT_EQ(lax.anonymize.pool_config.averaged_count, 4u);
  ASSERT_TRUE(lax.anonymize.pool_config.norm_target.has_value());
  EXPECT_DOUBLE_EQ(*lax.anonymize.pool_config.norm_target, 2.5);
}

TEST(ManifestTest, ScenarioListParsesAndRejectsEmpty) {
  nlohmann::json j = minimal_manifest();
  j["evaluate"] = {{"scenarios", {"lazy-informed"}}};
  const ExperimentManifest m = parse_manifest(j, "0");
  ASSERT_EQ(m.scenarios.size(), 1u);
  EXPECT_EQ(m.scenarios[0], Scenario::kLazyInformed);

  j["evaluate"]["scenarios"] = nlohmann::json::array();
  expect_rejected(j, "evaluate.scenarios");
}

TEST(ManifestTest, AblationGridParsesAndRejectsEmptyAxes) {
  nlohmann::json j = minimal_manifest();
  j["ablate"] = {{"gammas", {0.5}},
                 {"noise_dims", {8}},
                 {"architectures", {"mlp"}},
                 {"total_iterations", 100}};
  const ExperimentManifest m = parse_manifest(j, "0");
  EXPECT_EQ(m.ablation.gammas, std::vector<double>{0.5});
  EXPECT_EQ(m.ablation.noise_dims, std::vector<std::size_t>{8});
  ASSERT_EQ(m.ablation.architectures.size(), 1u);
  EXPECT_EQ(m.ablation.architectures[0], ArchKind::kMlp);
  EXPECT_EQ(m.ablation.total_iterations, 100u);

  j["ablate"]["gammas"] = nlohmann::json::array();
  expect_rejected(j, "ablate");
}

TEST(ManifestTest, ResolvedTrainConfigBuildsBothArchitectures) {
  nlohmann::json j = minimal_manifest();
  j["train"] = {{"noise_dim", 8}};
  const ExperimentManifest resnet = parse_manifest(j, "0");
  const TrainConfig rc = resolved_train_config(resnet, 24);
  EXPECT_EQ(rc.generator_spec.kind, ArchKind::kResNet);
  EXPECT_EQ(rc.generator_spec.input_dim, 8u);
  EXPECT_EQ(rc.generator_spec.output_dim, 24u);
  EXPECT_EQ(rc.critic_spec.input_dim, 24u);
  EXPECT_EQ(rc.critic_spec.output_dim, 1u);

  j["train"]["architecture"] = "mlp";
  const ExperimentManifest mlp = parse_manifest(j, "0");
  const TrainConfig mc = resolved_train_config(mlp, 24);
  EXPECT_EQ(mc.generator_spec.kind, ArchKind::kMlp);
  EXPECT_EQ(mc.critic_spec.kind, ArchKind::kMlp);
  // The MLP variant is budget-matched against the ResNet it replaces: the
  // counts agree to within one hidden-width step of the MLP's size curve.
  const std::size_t mlp_params = param_count(mc.critic_spec);
  const std::size_t resnet_params = param_count(rc.critic_spec);
  const std::size_t step = 4 * mc.critic_spec.hidden_dim +
                           mc.critic_spec.input_dim +
                           mc.critic_spec.output_dim + 3;
  const std::size_t diff = mlp_params > resnet_params
                               ? mlp_params - resnet_params
                               : resnet_params - mlp_params;
  EXPECT_LE(diff, step);

  j["train"]["hidden_dim"] = 10;
  j["train"]["depth"] = 2;
  const TrainConfig pinned =
      resolved_train_config(parse_manifest(j, "0"), 24);
  EXPECT_EQ(pinned.generator_spec.hidden_dim, 10u);
  EXPECT_EQ(pinned.generator_spec.depth, 2u);
  EXPECT_EQ(pinned.critic_spec.hidden_dim, 10u);
  EXPECT_EQ(pinned.critic_spec.depth, 2u);

  j["train"]["noise_dim"] = 0;
  EXPECT_THROW(resolved_train_config(parse_manifest(j, "0"), 24), ConfigError);
}

TEST(ManifestTest, LoadComputesTheFileDigest) {
  // CRC-32 known-answer: the standard check value pins the polynomial.
  const unsigned char check[] = {'1', '2', '3', '4', '5', '6', '7', '8', '9'};
  EXPECT_EQ(detail::crc32(check, sizeof(check)), 0xcbf43926u);

  testsupport::TempDir dir;
  const auto path = dir.path() / "manifest.json";
  testsupport::write_text(path, minimal_manifest().dump(2));
  const ExperimentManifest a = load_manifest(path);
  const ExperimentManifest b = load_manifest(path);
  EXPECT_EQ(a.digest, b.digest);
  ASSERT_EQ(a.digest.size(), 8u);
  for (char c : a.digest) EXPECT_TRUE(std::isxdigit(static_cast<unsigned char>(c)));

  nlohmann::json changed = minimal_manifest();
  changed["seed"] = 8;
  testsupport::write_text(path, changed.dump(2));
  EXPECT_NE(load_manifest(path).digest, a.digest);

  testsupport::write_text(path, "{not json");
  EXPECT_THROW(load_manifest(path), ConfigError);
  EXPECT_THROW(load_manifest(dir.path() / "absent.json"), DataError);
}

TEST(ManifestTest, EnvironmentVariableOverridesTheOutputDir) {
  testsupport::TempDir dir;
  const auto path = dir.path() / "manifest.json";
  testsupport::write_text(path, minimal_manifest().dump());

  ::setenv("VPGAN_OUTPUT_DIR", "/elsewhere/run1", 1);
  EXPECT_EQ(load_manifest(path).output_dir, "/elsewhere/run1");
  ::setenv("VPGAN_OUTPUT_DIR", "", 1);  // empty means unset
  EXPECT_EQ(load_manifest(path).output_dir, "out");
  ::unsetenv("VPGAN_OUTPUT_DIR");
  EXPECT_EQ(load_manifest(path).output_dir, "out");
}

TEST(ManifestTest, ParserHelpersRoundTripNames) {
  EXPECT_EQ(parse_scenario("ignorant", "f"), Scenario::kIgnorant);
  EXPECT_EQ(parse_scenario("lazy-informed", "f"), Scenario::kLazyInformed);
  EXPECT_THROW(parse_scenario("casual", "f"), ConfigError);
  EXPECT_EQ(parse_arch_kind("resnet", "f"), ArchKind::kResNet);
  EXPECT_EQ(parse_arch_kind("mlp", "f"), ArchKind::kMlp);
  try {
    parse_arch_kind("cnn", "some.field");
    ADD_FAILURE() << "expected rejection";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("some.field"), std::string::npos);
  }
}

TEST(ManifestTest, OutputLayoutIsStable) {
  const OutputLayout layout{"run"};
  EXPECT_EQ(layout.corpora(), std::filesystem::path("run") / "corpora");
  EXPECT_EQ(layout.checkpoints(), std::filesystem::path("run") / "checkpoints");
  EXPECT_EQ(layout.mappings(), std::filesystem::path("run") / "mappings");
  EXPECT_EQ(layout.reports(), std::filesystem::path("run") / "reports");
  EXPECT_EQ(layout.figures(), std::filesystem::path("run") / "figures");
  EXPECT_EQ(layout.logs(), std::filesystem::path("run") / "logs");
}

TEST(ManifestTest, ProjectionSectionOverrides) {
  nlohmann::json j = minimal_manifest();
  j["projection"] = {{"pca_dims", 20},      {"perplexity", 15.0},
                     {"iterations", 300},   {"early_exaggeration", 4.0},
                     {"learning_rate", 50.0}, {"points_per_side", 100}};
  const ExperimentManifest m = parse_manifest(j, "0");
  EXPECT_EQ(m.projection.pca_dims, 20u);
  EXPECT_DOUBLE_EQ(m.projection.perplexity, 15.0);
  EXPECT_EQ(m.projection.iterations, 300u);
  EXPECT_DOUBLE_EQ(m.projection.early_exaggeration, 4.0);
  EXPECT_DOUBLE_EQ(m.projection.learning_rate, 50.0);
  EXPECT_EQ(m.projection_points_per_side, 100u);
}

}  // namespace
}  // namespace vpgan
