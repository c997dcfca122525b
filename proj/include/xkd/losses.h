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

#ifndef XKD_LOSSES_H_
#define XKD_LOSSES_H_

#include <cstdint>
#include <span>
#include <vector>

#include "xkd/records.h"
#include "xkd/segmodel.h"

namespace xkd {

struct ATConfig {
  int power = 2;
  // Tap indices to distill. Empty selects every tap.
  std::vector<int> layers;
};

struct DistillWeights {
  double alpha = 0.5;
  double temperature = 1.0;
};

// ConfigError unless alpha is in [0, 1] and temperature > 0.
void validate(const DistillWeights& dw);

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);
Eigen::VectorXd tempered_log_softmax(const Eigen::VectorXd& logits,
                                     double temperature);

// Weighted mean of the per-position negative log-likelihoods,
//   sum_t w[y_t] * nll_t / sum_t w[y_t],
// over positions with mask != 0 (an empty mask means all positions). When
// `grad` is given it receives d loss / d logits. LossError if every position
// is masked or a label is out of range.
double wce(const Matrix& logits, std::span<const int> labels,
           const ClassWeights& weights, std::span<const std::uint8_t> mask,
           Matrix* grad = nullptr);

// Channel-collapsed spatial attention: Q_l = sum_c |A_cl|^p.
Eigen::VectorXd attention_map(const Matrix& activations, int power);

// sum over selected taps of || Qs/|Qs| - Qt/|Qt| ||_2. A zero attention
// vector normalizes to zero. `grad` (optional) is filled per student tap;
// taps outside the selection get empty matrices. ShapeError when a selected
// pair differs in length or a tap index is out of range.
double at_loss(const FeatureTaps& student, const FeatureTaps& teacher,
               const ATConfig& config, std::vector<Matrix>* grad = nullptr);

// Mean over unmasked positions of KL(teacher || student) between the
// temperature-softened distributions. `grad` is d loss / d student logits.
double kd_loss(const Matrix& student_logits, const Matrix& teacher_logits,
               double temperature, std::span<const std::uint8_t> mask = {},
               Matrix* grad = nullptr);

struct LossTerms {
  double total = 0.0;
  double wce = 0.0;
  double kd = 0.0;
};

// (1 - alpha) * wce + alpha * T^2 * kd. The kd term is skipped (reported as
// 0) when alpha == 0 and no teacher logits are given.
LossTerms combined_loss(const Matrix& student_logits,
                        const Matrix& teacher_logits,
                        std::span<const int> labels,
                        const ClassWeights& weights, const DistillWeights& dw,
                        std::span<const std::uint8_t> mask,
                        Matrix* grad = nullptr);

}  // namespace xkd

#endif  // XKD_LOSSES_H_
