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

#ifndef XKD_DISTILL_H_
#define XKD_DISTILL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "xkd/losses.h"
#include "xkd/metrics.h"
#include "xkd/records.h"
#include "xkd/segmodel.h"

namespace xkd {

enum class ExperimentMode { kEegBaseline, kEcgBaseline, kSdCl, kAtCl, kAtSdCl };
enum class Modality { kEeg, kEcg };

std::string_view mode_name(ExperimentMode mode);
ExperimentMode parse_mode(std::string_view name);

// Every knob of a run. Two runs with equal configs and datasets produce
// identical logs and checkpoints.
struct DistillConfig {
  ExperimentMode mode = ExperimentMode::kAtSdCl;
  double alpha = 0.5;
  double temperature = 1.0;
  int epochs = 150;
  double learning_rate = 1e-3;
  int batch_size = 12;
  std::uint64_t seed = 0;
  StageSchema class_scheme = StageSchema::kFourClass;
  ModelConfig model;
  ATConfig at;
  int epochs_per_window = 35;
  double sample_rate = kCanonicalRate;
  // Feature-training (Step 1) budget and plateau stop on the AT loss.
  int step1_epochs = 50;
  int step1_patience = 10;
  double step1_min_delta = 1e-4;
};

nlohmann::json to_json(const DistillConfig& config);
// Missing keys keep their defaults. ConfigError on malformed values.
DistillConfig distill_config_from_json(const nlohmann::json& j);
void validate(const DistillConfig& config);

// What a mode actually runs. Modes with equal plans train identically.
struct ExecutionPlan {
  Modality student_modality = Modality::kEcg;
  bool needs_teacher = false;
  bool feature_step = false;
  double alpha = 0.0;

  bool operator==(const ExecutionPlan&) const = default;
};
ExecutionPlan canonical_plan(const DistillConfig& config);

struct SubjectData {
  std::string id;
  SignalRecord eeg;
  SignalRecord ecg;
  Hypnogram hypnogram;  // RAW_RK, or already merged to the run's scheme
};

struct Dataset {
  std::vector<SubjectData> subjects;
  DatasetSplit split;
};

// Time-aligned windows of the two modalities; labels and masks are shared.
struct WindowPair {
  SegmentBatch eeg;
  SegmentBatch ecg;
};

std::vector<WindowPair> make_windows(const Dataset& dataset,
                                     std::span<const std::string> subject_ids,
                                     StageSchema scheme, int epochs_per_window);

struct LogRow {
  int epoch = 0;
  std::string split;
  double loss_wce = 0.0;
  double loss_at = 0.0;
  double loss_kd = 0.0;
  std::optional<double> weighted_f1;
  std::optional<double> accuracy;
};

struct TrainLog {
  std::vector<LogRow> rows;

  // `epoch,split,loss_wce,loss_at,loss_kd,weighted_f1,accuracy`; metrics
  // that were not computed are left empty.
  std::string csv() const;
};

struct TrainResult {
  SegModel model;  // parameters at the best validation epoch
  TrainLog log;
  std::optional<double> best_val_f1;
  double best_val_accuracy = 0.0;
  int best_epoch = 0;  // 0 when no epoch ran
};

ConfusionMatrix evaluate(const SegModel& model,
                         std::span<const WindowPair> windows,
                         Modality modality, StageSchema scheme);

// Supervised WCE training of a fresh model on the EEG windows.
TrainResult train_teacher(const DistillConfig& config,
                          std::span<const WindowPair> train,
                          std::span<const WindowPair> val);

// Step 1: the student (on ECG) is fitted to the frozen teacher's (on EEG)
// attention maps. Returns the student after the last epoch run.
struct FeatureTrainResult {
  SegModel model;
  TrainLog log;
};
FeatureTrainResult feature_train(const SegModel& student,
                                 const SegModel& teacher,
                                 std::span<const WindowPair> train,
                                 const DistillConfig& config);

// Step 2: the student minimizes (1 - alpha) WCE + alpha T^2 KD against the
// frozen teacher. With alpha == 0 the teacher is not consulted.
TrainResult final_train(const SegModel& student, const SegModel* teacher,
                        std::span<const WindowPair> train,
                        std::span<const WindowPair> val,
                        const DistillWeights& weights,
                        const DistillConfig& config);

struct ExperimentReport {
  DistillConfig config;
  ModeResult result;
  ConfusionMatrix test_confusion;
  std::optional<double> best_val_f1;
  int best_epoch = 0;
  TrainLog feature_log;
  TrainLog log;
  SegModel model;

  nlohmann::json to_json() const;
};

// Runs one row of the experiment matrix and evaluates the selected
// checkpoint on the test subjects. ConfigError if a distillation mode gets no
// teacher or a teacher with a different model configuration.
ExperimentReport run_experiment(const DistillConfig& config,
                                const Dataset& dataset,
                                const SegModel* teacher = nullptr);

struct FeatureRow {
  std::string model_tag;
  std::string subject;
  int window_index = 0;
  std::vector<int> predicted;
  std::vector<int> truth;
  std::vector<double> values;  // bottleneck channels x length, row-major
};

// One row per window with the bottleneck activations and the scored
// epochs' predicted and true labels.
std::vector<FeatureRow> export_bottleneck_features(
    const SegModel& model, std::span<const WindowPair> windows,
    Modality modality, std::string_view model_tag);
std::string feature_csv(std::span<const FeatureRow> rows, StageSchema scheme);

}  // namespace xkd

#endif  // XKD_DISTILL_H_
