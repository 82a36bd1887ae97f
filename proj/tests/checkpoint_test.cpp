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

#include "vpgan/checkpoint.hpp"

#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vpgan/errors.hpp"
#include "vpgan/network.hpp"
#include "vpgan/rng.hpp"

namespace vpgan {
namespace {

using testsupport::TempDir;

ArchitectureSpec small_spec() {
  ArchitectureSpec spec;
  spec.kind = ArchKind::kResNet;
  spec.input_dim = 4;
  spec.output_dim = 3;
  spec.hidden_dim = 5;
  spec.depth = 2;
  return spec;
}

TEST(CheckpointTest, RoundTripIsBitwiseExact) {
  TempDir dir;
  const auto path = dir / "net.ckpt";
  Rng rng(31);
  Network net = Network::random_init(small_spec(), rng);
  save_checkpoint(path, net.spec(), net.params());

  CheckpointData data = load_checkpoint(path);
  EXPECT_EQ(data.arch.kind, net.spec().kind);
  EXPECT_EQ(data.arch.input_dim, net.spec().input_dim);
  EXPECT_EQ(data.arch.output_dim, net.spec().output_dim);
  EXPECT_EQ(data.arch.hidden_dim, net.spec().hidden_dim);
  EXPECT_EQ(data.arch.depth, net.spec().depth);
  EXPECT_EQ(data.params, net.params());
}

TEST(CheckpointTest, SecondSaveIsByteIdentical) {
  TempDir dir;
  Rng rng(32);
  Network net = Network::random_init(small_spec(), rng);
  save_checkpoint(dir / "a.ckpt", net.spec(), net.params());
  save_checkpoint(dir / "b.ckpt", net.spec(), net.params());
  EXPECT_EQ(testsupport::read_text(dir / "a.ckpt"),
            testsupport::read_text(dir / "b.ckpt"));
}

TEST(CheckpointTest, ParamLengthMismatchIsConfigError) {
  TempDir dir;
  std::vector<double> wrong(7, 0.0);
  EXPECT_THROW(save_checkpoint(dir / "x.ckpt", small_spec(), wrong),
               ConfigError);
}

TEST(CheckpointTest, CorruptedByteFailsChecksum) {
  TempDir dir;
  const auto path = dir / "net.ckpt";
  Rng rng(33);
  Network net = Network::random_init(small_spec(), rng);
  save_checkpoint(path, net.spec(), net.params());

  std::string bytes = testsupport::read_text(path);
  bytes[bytes.size() / 2] ^= 0x40;  // flip one bit mid-file
  testsupport::write_text(path, bytes);
  try {
    load_checkpoint(path);
    FAIL() << "corrupted checkpoint loaded without error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos)
        << e.what();
  }
}

// A physically shortened file fails the checksum first.
TEST(CheckpointTest, CutFileFailsChecksum) {
  TempDir dir;
  const auto path = dir / "net.ckpt";
  Rng rng(34);
  Network net = Network::random_init(small_spec(), rng);
  save_checkpoint(path, net.spec(), net.params());

  std::string bytes = testsupport::read_text(path);
  bytes.resize(bytes.size() / 2);
  testsupport::write_text(path, bytes);
  EXPECT_THROW(load_checkpoint(path), DataError);
}

// A structurally truncated record (valid checksum over too little data)
// is reported with the byte offset where parsing ran out.
TEST(CheckpointTest, TruncationNamesByteOffset) {
  TempDir dir;
  const auto path = dir / "net.ckpt";
  Network net(small_spec());
  detail::ByteWriter w;
  w.raw(kCheckpointMagic, 8);
  w.u32(kCheckpointVersion);
  w.str_u32(arch_to_text(net.spec()));
  for (std::size_t i = 0; i < net.size() / 2; ++i) w.f64(0.0);
  w.append_crc32();
  detail::write_file_atomic(path, w.bytes());
  try {
    load_checkpoint(path);
    FAIL() << "truncated checkpoint loaded without error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos)
        << e.what();
  }
}

TEST(CheckpointTest, WrongMagicIsRejected) {
  TempDir dir;
  const auto path = dir / "net.ckpt";
  detail::ByteWriter w;
  w.raw("NOTVPGAN", 8);
  w.u32(kCheckpointVersion);
  w.append_crc32();
  detail::write_file_atomic(path, w.bytes());
  try {
    load_checkpoint(path);
    FAIL() << "bad magic accepted";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
  }
}

TEST(CheckpointTest, UnsupportedVersionIsRejected) {
  TempDir dir;
  const auto path = dir / "net.ckpt";
  detail::ByteWriter w;
  w.raw(kCheckpointMagic, 8);
  w.u32(kCheckpointVersion + 9);
  w.str_u32(arch_to_text(small_spec()));
  w.append_crc32();
  detail::write_file_atomic(path, w.bytes());
  try {
    load_checkpoint(path);
    FAIL() << "future version accepted";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(CheckpointTest, TrailingBytesAreRejected) {
  TempDir dir;
  const auto path = dir / "net.ckpt";
  Network net(small_spec());
  detail::ByteWriter w;
  w.raw(kCheckpointMagic, 8);
  w.u32(kCheckpointVersion);
  w.str_u32(arch_to_text(net.spec()));
  for (double p : net.params()) w.f64(p);
  w.f64(123.0);  // stray extra value
  w.append_crc32();
  detail::write_file_atomic(path, w.bytes());
  try {
    load_checkpoint(path);
    FAIL() << "trailing bytes accepted";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("trailing"), std::string::npos);
  }
}

TEST(CheckpointTest, MissingFileIsDataError) {
  EXPECT_THROW(load_checkpoint("/nonexistent/never/net.ckpt"), DataError);
}

TEST(TrainStateTest, RoundTripPreservesEverything) {
  TempDir dir;
  const auto path = dir / "state.bin";

  Rng rng(35);
  for (int i = 0; i < 7; ++i) rng.normal();  // advance to a nontrivial state
  std::ostringstream rng_text;
  rng.save(rng_text);

  TrainState state;
  state.iteration = 12345;
  state.generator_opt.step_count = 77;
  state.generator_opt.first_moment = {0.1, -0.2, 0.3};
  state.generator_opt.second_moment = {0.01, 0.02, 0.03};
  state.critic_opt.step_count = 78;
  state.critic_opt.first_moment = {1.5, 2.5};
  state.critic_opt.second_moment = {0.5, 0.25};
  state.rng_state = rng_text.str();

  save_train_state(path, state);
  TrainState loaded = load_train_state(path);
  EXPECT_EQ(loaded.iteration, state.iteration);
  EXPECT_EQ(loaded.generator_opt.step_count, state.generator_opt.step_count);
  EXPECT_EQ(loaded.generator_opt.first_moment,
            state.generator_opt.first_moment);
  EXPECT_EQ(loaded.generator_opt.second_moment,
            state.generator_opt.second_moment);
  EXPECT_EQ(loaded.critic_opt.step_count, state.critic_opt.step_count);
  EXPECT_EQ(loaded.critic_opt.first_moment, state.critic_opt.first_moment);
  EXPECT_EQ(loaded.critic_opt.second_moment, state.critic_opt.second_moment);
  EXPECT_EQ(loaded.rng_state, state.rng_state);

  // The restored RNG continues the original stream exactly.
  std::istringstream in(loaded.rng_state);
  Rng restored(0);
  restored.load(in);
  EXPECT_EQ(restored, rng);
  EXPECT_DOUBLE_EQ(restored.normal(), rng.normal());
}

TEST(TrainStateTest, MismatchedMomentBuffersRejectedOnSave) {
  TempDir dir;
  TrainState state;
  state.generator_opt.first_moment = {1.0, 2.0};
  state.generator_opt.second_moment = {1.0};
  EXPECT_THROW(save_train_state(dir / "state.bin", state), ConfigError);
}

}  // namespace
}  // namespace vpgan
