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

#ifndef XKD_DATASET_IO_H_
#define XKD_DATASET_IO_H_

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xkd/distill.h"
#include "xkd/synth.h"

namespace xkd {

// A prepared dataset directory:
//   manifest.json            sample rate, split, subject file names, failures
//   <id>.eeg.xkd, <id>.ecg.xkd   RAWBIN records at the canonical rate
//   <id>.csv                 30 s RAW_RK annotations
//   <id>.<SCHEME>.csv        merged annotations (written by `prepare`)
struct ManifestEntry {
  std::string id;
  std::string eeg;
  std::string ecg;
  std::string annotations;
};

struct Manifest {
  double sample_rate = kCanonicalRate;
  std::string scheme;  // merged scheme written next to the raw annotations
  DatasetSplit split;
  std::vector<ManifestEntry> subjects;
  std::vector<std::pair<std::string, std::string>> failures;  // id, reason
};

inline constexpr char kManifestName[] = "manifest.json";

void write_manifest(const std::filesystem::path& dir, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& dir);

// Loads every subject of the manifest with its RAW_RK hypnogram.
Dataset load_dataset(const std::filesystem::path& dir);

// Writes synthetic subjects in the prepared layout and returns the manifest.
Manifest write_synth_dataset(const std::filesystem::path& dir,
                             std::span<const SynthSubject> subjects,
                             std::uint64_t split_seed);

}  // namespace xkd

#endif  // XKD_DATASET_IO_H_
