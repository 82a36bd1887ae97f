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

#ifndef VPGAN_CHECKPOINT_HPP
#define VPGAN_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vpgan/detail/binary_io.hpp"
#include "vpgan/errors.hpp"
#include "vpgan/network.hpp"

namespace vpgan {

// Network checkpoint layout:
//   magic "VPGANCKP" | version u32 | arch text (u32 length + UTF-8)
//   | f64 parameter block (count implied by the arch) | CRC32
// All integers and floats little-endian; CRC32 covers everything before it.
inline constexpr char kCheckpointMagic[] = "VPGANCKP";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointData {
  ArchitectureSpec arch;
  std::vector<double> params;
};

inline void save_checkpoint(const std::filesystem::path& path,
                            const ArchitectureSpec& arch,
                            const std::vector<double>& params) {
  if (params.size() != param_count(arch)) {
    throw ConfigError("checkpoint: parameter vector length " +
                      std::to_string(params.size()) +
                      " does not match architecture (" +
                      std::to_string(param_count(arch)) + ")");
  }
  detail::ByteWriter w;
  w.raw(kCheckpointMagic, 8);
  w.u32(kCheckpointVersion);
  w.str_u32(arch_to_text(arch));
  for (double p : params) w.f64(p);
  w.append_crc32();
  detail::write_file_atomic(path, w.bytes());
}

inline CheckpointData load_checkpoint(const std::filesystem::path& path) {
  detail::ByteReader r(detail::read_file_bytes(path), path.string());
  r.check_trailing_crc32();
  r.expect_magic(kCheckpointMagic, "network checkpoint");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw DataError(path.string() + ": unsupported checkpoint version " +
                    std::to_string(version));
  }
  CheckpointData data;
  data.arch = parse_arch_text(r.str_u32());
  const std::size_t count = param_count(data.arch);
  data.params.resize(count);
  for (std::size_t i = 0; i < count; ++i) data.params[i] = r.f64();
  if (r.remaining() != 4) {  // only the CRC should be left
    throw DataError(path.string() + ": trailing bytes after parameter block");
  }
  return data;
}

// Mutable trainer state saved next to a checkpoint so a run can resume
// exactly: iteration counter, optimizer moments for both networks, and
// the serialized RNG. Static configuration lives in the run manifest,
// not here.
inline constexpr char kTrainStateMagic[] = "VPGANTST";
inline constexpr std::uint32_t kTrainStateVersion = 1;

struct OptimizerState {
  std::uint64_t step_count = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
};

struct TrainState {
  std::uint64_t iteration = 0;
  OptimizerState generator_opt;
  OptimizerState critic_opt;
  std::string rng_state;
};

namespace detail {

inline void write_optimizer_state(ByteWriter& w, const OptimizerState& s) {
  if (s.first_moment.size() != s.second_moment.size()) {
    throw ConfigError("optimizer state: moment buffers differ in length");
  }
  w.u64(s.step_count);
  w.u64(s.first_moment.size());
  for (double m : s.first_moment) w.f64(m);
  for (double v : s.second_moment) w.f64(v);
}

inline OptimizerState read_optimizer_state(ByteReader& r) {
  OptimizerState s;
  s.step_count = r.u64();
  const std::uint64_t count = r.u64();
  s.first_moment.resize(count);
  s.second_moment.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) s.first_moment[i] = r.f64();
  for (std::uint64_t i = 0; i < count; ++i) s.second_moment[i] = r.f64();
  return s;
}

}  // namespace detail

inline void save_train_state(const std::filesystem::path& path,
                             const TrainState& state) {
  detail::ByteWriter w;
  w.raw(kTrainStateMagic, 8);
  w.u32(kTrainStateVersion);
  w.u64(state.iteration);
  detail::write_optimizer_state(w, state.generator_opt);
  detail::write_optimizer_state(w, state.critic_opt);
  w.str_u32(state.rng_state);
  w.append_crc32();
  detail::write_file_atomic(path, w.bytes());
}

inline TrainState load_train_state(const std::filesystem::path& path) {
  detail::ByteReader r(detail::read_file_bytes(path), path.string());
  r.check_trailing_crc32();
  r.expect_magic(kTrainStateMagic, "training state");
  const std::uint32_t version = r.u32();
  if (version != kTrainStateVersion) {
    throw DataError(path.string() + ": unsupported training-state version " +
                    std::to_string(version));
  }
  TrainState state;
  state.iteration = r.u64();
  state.generator_opt = detail::read_optimizer_state(r);
  state.critic_opt = detail::read_optimizer_state(r);
  state.rng_state = r.str_u32();
  if (r.remaining() != 4) {
    throw DataError(path.string() + ": trailing bytes after training state");
  }
  return state;
}

}  // namespace vpgan

#endif  // VPGAN_CHECKPOINT_HPP
