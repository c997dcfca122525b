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

#include "xkd/optimizer.h"

#include <cmath>

#include "xkd/errors.h"

namespace xkd {

Adam::Adam(const SegModel& model, AdamOptions options) : options_(options) {
  if (!(options_.learning_rate > 0)) {
    throw ConfigError("learning rate must be positive");
  }
  m_ = model.zero_gradients();
  v_ = model.zero_gradients();
}

void Adam::step(SegModel& model, const Gradients& grads) {
  auto& params = model.parameters();
  if (grads.size() != params.size()) {
    throw ShapeError("gradient set does not match the model");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!params[p].trainable) continue;
    auto& value = params[p].value;
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grads[p][i];
      m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * g;
      v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * g * g;
      value[i] -= options_.learning_rate * (m[i] / c1) /
                  (std::sqrt(v[i] / c2) + options_.epsilon);
    }
  }
}

}  // namespace xkd
