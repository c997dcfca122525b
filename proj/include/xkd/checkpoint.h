// Copyright 2026 The XKD Authors.
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

#ifndef XKD_CHECKPOINT_H_
#define XKD_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "xkd/segmodel.h"

namespace xkd {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TrainingMeta {
  int epoch = 0;
  std::optional<double> val_metric;
  std::string mode;
  double sample_rate = 0.0;
  std::string class_scheme;
};

struct Checkpoint {
  SegModel model;
  TrainingMeta meta;
};

// Layout (little-endian):
//   "XKDC" | u32 version | u64 n | n bytes of JSON {model_config,
//   training_meta} | u32 count | count x (u32 name_len | name | u8 trainable
//   | u32 ndim | i32 dims[ndim] | u64 size | f64 values[size]) | u64 FNV-1a
//   of all preceding bytes.
void save_checkpoint(const SegModel& model, const TrainingMeta& meta,
                     const std::filesystem::path& path);

// Throws CheckpointError for unreadable, truncated or corrupt files, version
// mismatches, and parameter sets that do not rebuild the configured model.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// FNV-1a over every parameter name and value (running statistics included).
std::uint64_t parameter_checksum(const SegModel& model);

}  // namespace xkd

#endif  // XKD_CHECKPOINT_H_
