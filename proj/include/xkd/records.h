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

#ifndef XKD_RECORDS_H_
#define XKD_RECORDS_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xkd {

// Canonical sampling rate every record is brought to before modeling.
inline constexpr double kCanonicalRate = 200.0;

// One subject's single-channel waveform.
struct SignalRecord {
  std::string subject_id;
  std::string channel;
  double sample_rate = 0.0;
  std::vector<double> samples;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

// Throws IngestError when sample_rate is not positive or a sample is not
// finite.
void validate(const SignalRecord& record);

enum class Stage : std::uint8_t {
  kW,
  kN1,
  kN2,
  kN3,
  kN4,
  kREM,
  kUnscored,
  kLight,
  kDeep,
  kNrem,
  kR,
};

enum class StageSchema : std::uint8_t { kRawRK, kFourClass, kThreeClass };

std::string_view stage_token(Stage stage);
// Accepts the annotation tokens (W, N1..N4, REM, UNS) and the merged tokens
// (L, D, N, R). Throws SchemaError otherwise.
Stage parse_stage(std::string_view token);

std::string_view schema_name(StageSchema schema);
StageSchema parse_schema(std::string_view name);

// Number of classes of a merged schema (4 or 3). SchemaError for kRawRK.
int class_count(StageSchema schema);
StageSchema schema_for_classes(int k);
bool stage_in_schema(Stage stage, StageSchema schema);
// Dense class index of a merged-schema stage: W=0, then L,D,R or N,R.
int class_index(Stage stage, StageSchema schema);
Stage class_stage(int index, StageSchema schema);
std::vector<std::string> class_names(StageSchema schema);

// Per-epoch stage labels. Epoch k covers the record span starting at
// offset_seconds + epoch_slots[k] * epoch_duration. Slots are contiguous
// (0..n-1) until unscored epochs are dropped by merge_stages().
struct Hypnogram {
  std::string subject_id;
  double epoch_duration = 30.0;
  double offset_seconds = 0.0;
  StageSchema schema = StageSchema::kRawRK;
  std::vector<Stage> stages;
  std::vector<std::size_t> epoch_slots;

  std::size_t size() const { return stages.size(); }
};

// Builds a hypnogram with contiguous slots.
Hypnogram make_hypnogram(std::string subject_id, double epoch_duration,
                         StageSchema schema, std::vector<Stage> stages);

// Throws SchemaError if a stage is outside the schema alphabet or the slot
// map is inconsistent, AlignmentError for an unsupported epoch duration.
void validate(const Hypnogram& hypnogram);

// T connected epochs of i samples each, flattened row-major into `inputs`.
// Positions with mask == 0 are padding and must be ignored by losses and
// metrics.
struct SegmentBatch {
  std::string subject_id;
  int window_index = 0;
  int epochs = 0;             // T
  int samples_per_epoch = 0;  // i
  int num_classes = 0;        // K
  double frequency = 0.0;     // e, labels per second
  std::vector<double> inputs;
  std::vector<int> labels;
  std::vector<std::uint8_t> mask;
};

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
};

struct ClassWeights {
  std::vector<double> weights;
};

// Band-limited resampling to `target_rate` (see resample.cc for the
// method). Returns the input unchanged when the rates already match.
SignalRecord resample(const SignalRecord& record, double target_rate);

// Turns 20 s annotations into 30 s epochs by widening each epoch with the
// 5 s of signal on both sides. Epochs lacking a full margin are dropped. The
// returned record is the concatenation of the widened windows, so output
// epoch k occupies [30k, 30k + 30) seconds of it.
std::pair<Hypnogram, SignalRecord> convert_epoch_duration(
    const Hypnogram& hypnogram, const SignalRecord& record);

// Maps RAW_RK stages to the 4-class (W,L,D,R) or 3-class (W,N,R) alphabet.
// Unscored epochs are removed; epoch_slots keeps their positions.
Hypnogram merge_stages(const Hypnogram& hypnogram, StageSchema scheme);

// Subject-wise 80:10:10 split. Validation and test each receive
// max(1, floor(n / 10)) subjects; the remainder goes to training.
DatasetSplit split_subjects(std::span<const std::string> subject_ids,
                            std::uint64_t seed);

// Cuts the record into consecutive windows of `epochs_per_window` scored
// epochs. The trailing window is zero-padded and masked.
std::vector<SegmentBatch> segment(const SignalRecord& record,
                                  const Hypnogram& hypnogram,
                                  int epochs_per_window);

// Inverse-frequency weights w_c = N / (K * N_c).
ClassWeights class_weights(std::span<const int> labels, int num_classes);

}  // namespace xkd

#endif  // XKD_RECORDS_H_
