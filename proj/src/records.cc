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

#include "xkd/records.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

#include "xkd/errors.h"

namespace xkd {

namespace {

constexpr std::array<std::string_view, 11> kStageTokens = {
    "W", "N1", "N2", "N3", "N4", "REM", "UNS", "L", "D", "N", "R"};

// Returns round(seconds * rate) if it is integral to within 1e-6 samples.
bool integral_samples(double seconds, double rate, std::size_t* out) {
  const double exact = seconds * rate;
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-6 || rounded < 0) return false;
  *out = static_cast<std::size_t>(rounded);
  return true;
}

}  // namespace

void validate(const SignalRecord& record) {
  if (!(record.sample_rate > 0) || !std::isfinite(record.sample_rate)) {
    throw IngestError("record '" + record.subject_id +
                      "': sample rate must be positive");
  }
  for (double v : record.samples) {
    if (!std::isfinite(v)) {
      throw IngestError("record '" + record.subject_id +
                        "': non-finite sample");
    }
  }
}

std::string_view stage_token(Stage stage) {
  return kStageTokens[static_cast<std::size_t>(stage)];
}

Stage parse_stage(std::string_view token) {
  for (std::size_t i = 0; i < kStageTokens.size(); ++i) {
    if (kStageTokens[i] == token) return static_cast<Stage>(i);
  }
  if (token == "UNSCORED" || token == "?") return Stage::kUnscored;
  throw SchemaError("unknown stage token '" + std::string(token) + "'");
}

std::string_view schema_name(StageSchema schema) {
  switch (schema) {
    case StageSchema::kRawRK:
      return "RAW_RK";
    case StageSchema::kFourClass:
      return "FOUR_CLASS";
    case StageSchema::kThreeClass:
      return "THREE_CLASS";
  }
  return "?";
}

StageSchema parse_schema(std::string_view name) {
  if (name == "RAW_RK") return StageSchema::kRawRK;
  if (name == "FOUR_CLASS") return StageSchema::kFourClass;
  if (name == "THREE_CLASS") return StageSchema::kThreeClass;
  throw SchemaError("unknown stage schema '" + std::string(name) + "'");
}

int class_count(StageSchema schema) {
  switch (schema) {
    case StageSchema::kFourClass:
      return 4;
    case StageSchema::kThreeClass:
      return 3;
    case StageSchema::kRawRK:
      break;
  }
  throw SchemaError("RAW_RK stages are not class labels; merge them first");
}

StageSchema schema_for_classes(int k) {
  if (k == 4) return StageSchema::kFourClass;
  if (k == 3) return StageSchema::kThreeClass;
  throw SchemaError("no stage schema with " + std::to_string(k) + " classes");
}

bool stage_in_schema(Stage stage, StageSchema schema) {
  switch (schema) {
    case StageSchema::kRawRK:
      return stage <= Stage::kUnscored;
    case StageSchema::kFourClass:
      return stage == Stage::kW || stage == Stage::kLight ||
             stage == Stage::kDeep || stage == Stage::kR;
    case StageSchema::kThreeClass:
      return stage == Stage::kW || stage == Stage::kNrem || stage == Stage::kR;
  }
  return false;
}

int class_index(Stage stage, StageSchema schema) {
  if (schema == StageSchema::kFourClass) {
    switch (stage) {
      case Stage::kW: return 0;
      case Stage::kLight: return 1;
      case Stage::kDeep: return 2;
      case Stage::kR: return 3;
      default: break;
    }
  } else if (schema == StageSchema::kThreeClass) {
    switch (stage) {
      case Stage::kW: return 0;
      case Stage::kNrem: return 1;
      case Stage::kR: return 2;
      default: break;
    }
  }
  throw SchemaError("stage '" + std::string(stage_token(stage)) +
                    "' has no class index in " +
                    std::string(schema_name(schema)));
}

Stage class_stage(int index, StageSchema schema) {
  static constexpr std::array<Stage, 4> kFour = {Stage::kW, Stage::kLight,
                                                 Stage::kDeep, Stage::kR};
  static constexpr std::array<Stage, 3> kThree = {Stage::kW, Stage::kNrem,
                                                  Stage::kR};
  const int k = class_count(schema);
  if (index < 0 || index >= k) {
    throw SchemaError("class index " + std::to_string(index) +
                      " out of range");
  }
  return schema == StageSchema::kFourClass ? kFour[index] : kThree[index];
}

std::vector<std::string> class_names(StageSchema schema) {
  std::vector<std::string> names;
  for (int c = 0; c < class_count(schema); ++c) {
    names.emplace_back(stage_token(class_stage(c, schema)));
  }
  return names;
}

Hypnogram make_hypnogram(std::string subject_id, double epoch_duration,
                         StageSchema schema, std::vector<Stage> stages) {
  Hypnogram h;
  h.subject_id = std::move(subject_id);
  h.epoch_duration = epoch_duration;
  h.schema = schema;
  h.stages = std::move(stages);
  h.epoch_slots.resize(h.stages.size());
  for (std::size_t k = 0; k < h.epoch_slots.size(); ++k) h.epoch_slots[k] = k;
  return h;
}

void validate(const Hypnogram& hypnogram) {
  if (hypnogram.epoch_duration != 20.0 && hypnogram.epoch_duration != 30.0) {
    throw AlignmentError("epoch duration must be 20 or 30 seconds");
  }
  if (hypnogram.epoch_slots.size() != hypnogram.stages.size()) {
    throw SchemaError("hypnogram slot map does not match its stages");
  }
  for (std::size_t k = 0; k < hypnogram.stages.size(); ++k) {
    if (!stage_in_schema(hypnogram.stages[k], hypnogram.schema)) {
      throw SchemaError("stage '" +
                        std::string(stage_token(hypnogram.stages[k])) +
                        "' not in " +
                        std::string(schema_name(hypnogram.schema)));
    }
    if (k > 0 && hypnogram.epoch_slots[k] <= hypnogram.epoch_slots[k - 1]) {
      throw SchemaError("hypnogram slots must be strictly increasing");
    }
  }
}

std::pair<Hypnogram, SignalRecord> convert_epoch_duration(
    const Hypnogram& hypnogram, const SignalRecord& record) {
  if (hypnogram.epoch_duration != 20.0) {
    throw AlignmentError("epoch conversion expects 20 s annotations");
  }
  validate(record);
  const double rate = record.sample_rate;
  std::size_t epoch_n = 0, margin = 0, offset = 0;
  if (!integral_samples(20.0, rate, &epoch_n) ||
      !integral_samples(5.0, rate, &margin) ||
      !integral_samples(hypnogram.offset_seconds, rate, &offset)) {
    throw AlignmentError("sample rate does not divide the 5 s margin");
  }
  const std::size_t n_total = record.samples.size();
  if (!hypnogram.stages.empty()) {
    const std::size_t span_end =
        offset + (hypnogram.epoch_slots.back() + 1) * epoch_n;
    if (span_end > n_total) {
      throw AlignmentError("record '" + record.subject_id +
                           "' is shorter than its annotation span");
    }
  }

  SignalRecord out_record;
  out_record.subject_id = record.subject_id;
  out_record.channel = record.channel;
  out_record.sample_rate = rate;
  std::vector<Stage> stages;
  for (std::size_t k = 0; k < hypnogram.stages.size(); ++k) {
    const std::size_t start = offset + hypnogram.epoch_slots[k] * epoch_n;
    if (start < margin || start + epoch_n + margin > n_total) continue;
    const auto first = record.samples.begin() +
                       static_cast<std::ptrdiff_t>(start - margin);
    out_record.samples.insert(
        out_record.samples.end(), first,
        first + static_cast<std::ptrdiff_t>(epoch_n + 2 * margin));
    stages.push_back(hypnogram.stages[k]);
  }
  Hypnogram out = make_hypnogram(hypnogram.subject_id, 30.0, hypnogram.schema,
                                 std::move(stages));
  return {std::move(out), std::move(out_record)};
}

Hypnogram merge_stages(const Hypnogram& hypnogram, StageSchema scheme) {
  if (hypnogram.schema != StageSchema::kRawRK) {
    throw SchemaError("merge_stages expects a RAW_RK hypnogram");
  }
  if (scheme == StageSchema::kRawRK) {
    throw SchemaError("merge target must be FOUR_CLASS or THREE_CLASS");
  }
  const bool four = scheme == StageSchema::kFourClass;
  Hypnogram out;
  out.subject_id = hypnogram.subject_id;
  out.epoch_duration = hypnogram.epoch_duration;
  out.offset_seconds = hypnogram.offset_seconds;
  out.schema = scheme;
  for (std::size_t k = 0; k < hypnogram.stages.size(); ++k) {
    Stage mapped;
    switch (hypnogram.stages[k]) {
      case Stage::kW:
        mapped = Stage::kW;
        break;
      case Stage::kN1:
      case Stage::kN2:
        mapped = four ? Stage::kLight : Stage::kNrem;
        break;
      case Stage::kN3:
      case Stage::kN4:
        mapped = four ? Stage::kDeep : Stage::kNrem;
        break;
      case Stage::kREM:
        mapped = Stage::kR;
        break;
      case Stage::kUnscored:
        continue;
      default:
        throw SchemaError("stage '" +
                          std::string(stage_token(hypnogram.stages[k])) +
                          "' is not a RAW_RK stage");
    }
    out.stages.push_back(mapped);
    out.epoch_slots.push_back(hypnogram.epoch_slots[k]);
  }
  return out;
}

DatasetSplit split_subjects(std::span<const std::string> subject_ids,
                            std::uint64_t seed) {
  std::vector<std::string> ids(subject_ids.begin(), subject_ids.end());
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw SplitError("duplicate subject ids");
  }
  if (ids.size() < 3) {
    throw SplitError("need at least 3 subjects to split, got " +
                     std::to_string(ids.size()));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);

  const std::size_t n = ids.size();
  const std::size_t held = std::max<std::size_t>(1, n / 10);
  DatasetSplit split;
  split.seed = seed;
  split.test.assign(ids.begin(), ids.begin() + held);
  split.val.assign(ids.begin() + held, ids.begin() + 2 * held);
  split.train.assign(ids.begin() + 2 * held, ids.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<SegmentBatch> segment(const SignalRecord& record,
                                  const Hypnogram& hypnogram,
                                  int epochs_per_window) {
  if (epochs_per_window < 1) {
    throw AlignmentError("window must hold at least one epoch");
  }
  const int k_classes = class_count(hypnogram.schema);
  std::size_t per_epoch = 0, offset = 0;
  if (!integral_samples(hypnogram.epoch_duration, record.sample_rate,
                        &per_epoch) ||
      per_epoch == 0 ||
      !integral_samples(hypnogram.offset_seconds, record.sample_rate,
                        &offset)) {
    throw AlignmentError("sample rate x epoch duration is not integral");
  }
  if (!hypnogram.stages.empty() &&
      offset + (hypnogram.epoch_slots.back() + 1) * per_epoch >
          record.samples.size()) {
    throw AlignmentError("record '" + record.subject_id +
                         "' does not cover its hypnogram");
  }

  const std::size_t n = hypnogram.stages.size();
  const std::size_t t = static_cast<std::size_t>(epochs_per_window);
  std::vector<SegmentBatch> out;
  for (std::size_t first = 0; first < n; first += t) {
    SegmentBatch b;
    b.subject_id = hypnogram.subject_id;
    b.window_index = static_cast<int>(out.size());
    b.epochs = epochs_per_window;
    b.samples_per_epoch = static_cast<int>(per_epoch);
    b.num_classes = k_classes;
    b.frequency = 1.0 / hypnogram.epoch_duration;
    b.inputs.assign(t * per_epoch, 0.0);
    b.labels.assign(t, 0);
    b.mask.assign(t, 0);
    for (std::size_t j = 0; j < t && first + j < n; ++j) {
      const std::size_t src = offset + hypnogram.epoch_slots[first + j] * per_epoch;
      std::copy_n(record.samples.begin() + static_cast<std::ptrdiff_t>(src),
                  per_epoch,
                  b.inputs.begin() + static_cast<std::ptrdiff_t>(j * per_epoch));
      b.labels[j] = class_index(hypnogram.stages[first + j], hypnogram.schema);
      b.mask[j] = 1;
    }
    out.push_back(std::move(b));
  }
  return out;
}

ClassWeights class_weights(std::span<const int> labels, int num_classes) {
  if (num_classes < 1) throw WeightError("class count must be positive");
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw WeightError("label " + std::to_string(y) + " out of range");
    }
    ++counts[static_cast<std::size_t>(y)];
  }
  ClassWeights w;
  const double total = static_cast<double>(labels.size());
  for (int c = 0; c < num_classes; ++c) {
    const auto nc = counts[static_cast<std::size_t>(c)];
    if (nc == 0) {
      throw WeightError("class " + std::to_string(c) +
                        " has no training samples");
    }
    w.weights.push_back(total / (num_classes * static_cast<double>(nc)));
  }
  return w;
}

}  // namespace xkd
