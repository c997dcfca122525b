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

#ifndef XKD_OPTIMIZER_H_
#define XKD_OPTIMIZER_H_

#include <vector>

#include "xkd/segmodel.h"

namespace xkd {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam over the trainable parameters of one model. Non-trainable entries
// (running statistics) are left alone.
class Adam {
 public:
  Adam(const SegModel& model, AdamOptions options);

  void step(SegModel& model, const Gradients& grads);
  long steps() const { return t_; }

 private:
  AdamOptions options_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long t_ = 0;
};

}  // namespace xkd

#endif  // XKD_OPTIMIZER_H_
