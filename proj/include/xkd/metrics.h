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

#ifndef XKD_METRICS_H_
#define XKD_METRICS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace xkd {

// counts[true * K + predicted].
struct ConfusionMatrix {
  int num_classes = 0;
  std::vector<std::string> class_names;
  std::vector<std::int64_t> counts;

  std::int64_t at(int truth, int predicted) const {
    return counts[static_cast<std::size_t>(truth * num_classes + predicted)];
  }
  std::int64_t total() const;
};

ConfusionMatrix empty_confusion(int num_classes,
                                std::vector<std::string> class_names = {});

// Positions with mask == 0 are skipped (an empty mask keeps everything).
// LabelError for labels outside [0, K) or mismatched lengths.
void accumulate(ConfusionMatrix& cm, std::span<const int> truth,
                std::span<const int> predicted,
                std::span<const std::uint8_t> mask = {});
ConfusionMatrix confusion(std::span<const int> truth,
                          std::span<const int> predicted, int num_classes,
                          std::span<const std::uint8_t> mask = {});

// The three metrics throw MetricError on an empty matrix. F1 is 0 for a
// class whose precision and recall are both 0/0 or 0.
double accuracy(const ConfusionMatrix& cm);
std::vector<double> per_class_f1(const ConfusionMatrix& cm);
// Support-weighted mean of the per-class F1 scores.
double weighted_f1(const ConfusionMatrix& cm);

struct ModeResult {
  std::string mode;
  std::vector<std::string> class_names;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
  std::vector<double> per_class_f1;
};

ModeResult summarize(std::string mode, const ConfusionMatrix& cm);

// Mode x {weighted F1, accuracy}, grouped by class scheme.
std::string format_summary_table(std::span<const ModeResult> results);
// Mode x per-class F1, one column block per class scheme.
std::string format_classwise_table(std::span<const ModeResult> results);

// `mode,classes,weighted_f1,accuracy,f1_<class>...` with 4 decimals. A new
// header line starts whenever the class alphabet changes.
std::string report_csv(std::span<const ModeResult> results);
std::vector<ModeResult> parse_report_csv(const std::string& text);

}  // namespace xkd

#endif  // XKD_METRICS_H_
