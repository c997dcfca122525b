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

#include "xkd/losses.h"

#include <cmath>
#include <string>

#include "xkd/errors.h"

namespace xkd {

namespace {

bool active(std::span<const std::uint8_t> mask, Eigen::Index t) {
  return mask.empty() || mask[static_cast<std::size_t>(t)] != 0;
}

void check_mask(std::span<const std::uint8_t> mask, Eigen::Index rows) {
  if (!mask.empty() && static_cast<Eigen::Index>(mask.size()) != rows) {
    throw ShapeError("mask length does not match the logits");
  }
}

}  // namespace

void validate(const DistillWeights& dw) {
  if (!(dw.alpha >= 0.0 && dw.alpha <= 1.0)) {
    throw ConfigError("alpha must lie in [0, 1]");
  }
  if (!(dw.temperature > 0.0) || !std::isfinite(dw.temperature)) {
    throw ConfigError("temperature must be positive");
  }
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  const Eigen::ArrayXd shifted = logits.array() - m;
  return (shifted - std::log(shifted.exp().sum())).matrix();
}

Eigen::VectorXd tempered_log_softmax(const Eigen::VectorXd& logits,
                                     double temperature) {
  return log_softmax(logits / temperature);
}

double wce(const Matrix& logits, std::span<const int> labels,
           const ClassWeights& weights, std::span<const std::uint8_t> mask,
           Matrix* grad) {
  const Eigen::Index rows = logits.rows();
  const Eigen::Index k = logits.cols();
  if (static_cast<Eigen::Index>(labels.size()) != rows) {
    throw ShapeError("label count does not match the logits");
  }
  if (static_cast<Eigen::Index>(weights.weights.size()) != k) {
    throw ShapeError("class weight count does not match the logits");
  }
  check_mask(mask, rows);

  double weighted_nll = 0.0;
  double weight_sum = 0.0;
  std::vector<Eigen::VectorXd> logp(static_cast<std::size_t>(rows));
  for (Eigen::Index t = 0; t < rows; ++t) {
    if (!active(mask, t)) continue;
    const int y = labels[static_cast<std::size_t>(t)];
    if (y < 0 || y >= k) {
      throw LossError("label " + std::to_string(y) + " out of range");
    }
    logp[t] = log_softmax(logits.row(t).transpose());
    const double w = weights.weights[static_cast<std::size_t>(y)];
    weighted_nll += w * -logp[t](y);
    weight_sum += w;
  }
  if (weight_sum == 0.0) throw LossError("every position is masked");

  if (grad != nullptr) {
    grad->setZero(rows, k);
    for (Eigen::Index t = 0; t < rows; ++t) {
      if (!active(mask, t)) continue;
      const int y = labels[static_cast<std::size_t>(t)];
      const double scale = weights.weights[static_cast<std::size_t>(y)] / weight_sum;
      Eigen::VectorXd g = logp[t].array().exp().matrix();
      g(y) -= 1.0;
      grad->row(t) = scale * g.transpose();
    }
  }
  return weighted_nll / weight_sum;
}

Eigen::VectorXd attention_map(const Matrix& activations, int power) {
  if (power == 1) return activations.cwiseAbs().colwise().sum().transpose();
  if (power == 2) return activations.colwise().squaredNorm().transpose();
  return activations.array().abs().pow(power).colwise().sum().matrix().transpose();
}

double at_loss(const FeatureTaps& student, const FeatureTaps& teacher,
               const ATConfig& config, std::vector<Matrix>* grad) {
  if (config.power < 1) throw ConfigError("attention power must be >= 1");
  if (student.size() != teacher.size()) {
    throw ShapeError("student and teacher tap counts differ");
  }
  std::vector<int> layers = config.layers;
  if (layers.empty()) {
    for (std::size_t j = 0; j < student.size(); ++j) {
      layers.push_back(static_cast<int>(j));
    }
  }
  if (grad != nullptr) grad->assign(student.size(), Matrix());

  const int p = config.power;
  double total = 0.0;
  for (int j : layers) {
    if (j < 0 || j >= static_cast<int>(student.size())) {
      throw ShapeError("attention layer index " + std::to_string(j) +
                       " out of range");
    }
    const Matrix& as = student[j].map;
    const Matrix& at = teacher[j].map;
    if (as.cols() != at.cols()) {
      throw ShapeError("tap '" + student[j].layer_id +
                       "' spatial lengths differ between student and teacher");
    }
    const Eigen::VectorXd qs = attention_map(as, p);
    const Eigen::VectorXd qt = attention_map(at, p);
    const double ns = qs.norm();
    const double nt = qt.norm();
    const Eigen::VectorXd us = ns > 0 ? Eigen::VectorXd(qs / ns)
                                      : Eigen::VectorXd::Zero(qs.size());
    const Eigen::VectorXd ut = nt > 0 ? Eigen::VectorXd(qt / nt)
                                      : Eigen::VectorXd::Zero(qt.size());
    const Eigen::VectorXd diff = us - ut;
    const double dist = diff.norm();
    total += dist;

    if (grad == nullptr) continue;
    Matrix& g = (*grad)[j];
    g.setZero(as.rows(), as.cols());
    if (dist == 0.0 || ns == 0.0) continue;
    const Eigen::VectorXd gu = diff / dist;
    const Eigen::VectorXd gq = (gu - us * us.dot(gu)) / ns;
    // dQ_l / dA_cl = p |A|^(p-1) sign(A)
    for (Eigen::Index l = 0; l < as.cols(); ++l) {
      for (Eigen::Index c = 0; c < as.rows(); ++c) {
        const double a = as(c, l);
        double d;
        if (p == 1) {
          d = a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0);
        } else if (p == 2) {
          d = 2.0 * a;
        } else {
          d = p * std::pow(std::abs(a), p - 1) * (a < 0 ? -1.0 : 1.0);
        }
        g(c, l) = gq(l) * d;
      }
    }
  }
  return total;
}

double kd_loss(const Matrix& student_logits, const Matrix& teacher_logits,
               double temperature, std::span<const std::uint8_t> mask,
               Matrix* grad) {
  if (student_logits.rows() != teacher_logits.rows() ||
      student_logits.cols() != teacher_logits.cols()) {
    throw ShapeError("student and teacher logits differ in shape");
  }
  if (!(temperature > 0)) throw ConfigError("temperature must be positive");
  const Eigen::Index rows = student_logits.rows();
  check_mask(mask, rows);

  std::size_t count = 0;
  for (Eigen::Index t = 0; t < rows; ++t) count += active(mask, t) ? 1 : 0;
  if (count == 0) throw LossError("every position is masked");

  if (grad != nullptr) grad->setZero(rows, student_logits.cols());
  double total = 0.0;
  for (Eigen::Index t = 0; t < rows; ++t) {
    if (!active(mask, t)) continue;
    const Eigen::VectorXd ls =
        tempered_log_softmax(student_logits.row(t).transpose(), temperature);
    const Eigen::VectorXd lt =
        tempered_log_softmax(teacher_logits.row(t).transpose(), temperature);
    const Eigen::ArrayXd qt = lt.array().exp();
    total += (qt * (lt - ls).array()).sum();
    if (grad != nullptr) {
      const Eigen::ArrayXd qs = ls.array().exp();
      grad->row(t) = ((qs - qt) / (temperature * static_cast<double>(count)))
                         .matrix()
                         .transpose();
    }
  }
  return total / static_cast<double>(count);
}

LossTerms combined_loss(const Matrix& student_logits,
                        const Matrix& teacher_logits,
                        std::span<const int> labels,
                        const ClassWeights& weights, const DistillWeights& dw,
                        std::span<const std::uint8_t> mask, Matrix* grad) {
  validate(dw);
  LossTerms terms;
  Matrix g_wce, g_kd;
  terms.wce = wce(student_logits, labels, weights, mask,
                  grad != nullptr ? &g_wce : nullptr);
  const bool with_kd = dw.alpha > 0.0 || teacher_logits.size() > 0;
  if (with_kd) {
    terms.kd = kd_loss(student_logits, teacher_logits, dw.temperature, mask,
                       grad != nullptr ? &g_kd : nullptr);
  }
  const double t2 = dw.temperature * dw.temperature;
  terms.total = (1.0 - dw.alpha) * terms.wce + dw.alpha * t2 * terms.kd;
  if (grad != nullptr) {
    *grad = (1.0 - dw.alpha) * g_wce;
    if (with_kd) *grad += (dw.alpha * t2) * g_kd;
  }
  return terms;
}

}  // namespace xkd
