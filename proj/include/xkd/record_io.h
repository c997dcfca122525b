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

#ifndef XKD_RECORD_IO_H_
#define XKD_RECORD_IO_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "xkd/records.h"

namespace xkd {

enum class RecordFormat { kEdf, kRawBin };

// ".edf" -> kEdf, ".xkd"/".rawbin"/".bin" -> kRawBin; IngestError otherwise.
RecordFormat format_from_path(const std::filesystem::path& path);

// Reads one channel. For RAWBIN the container holds a single channel and
// `channel`, when given, must match its name. For EDF `channel` selects the
// signal by label and is required.
SignalRecord load_record(const std::filesystem::path& path,
                         RecordFormat format,
                         std::optional<std::string_view> channel = {},
                         std::string subject_id = {});

// RAWBIN container, little-endian:
//   "XKD1" | u32 sample_rate | u32 name_len | name | u64 count | f32[count]
// The sample rate must be integral.
void write_rawbin(const std::filesystem::path& path,
                  const SignalRecord& record);

// Annotation sidecar: `epoch_index,onset_seconds,duration_seconds,stage`
// per line. A header line is skipped on read and not written.
Hypnogram read_annotations(const std::filesystem::path& path,
                           std::string subject_id,
                           StageSchema schema = StageSchema::kRawRK);
void write_annotations(const std::filesystem::path& path,
                       const Hypnogram& hypnogram);

}  // namespace xkd

#endif  // XKD_RECORD_IO_H_
