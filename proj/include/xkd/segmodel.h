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

#ifndef XKD_SEGMODEL_H_
#define XKD_SEGMODEL_H_

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "xkd/records.h"

namespace xkd {

// Activations are channels x length, column-major.
using Matrix = Eigen::MatrixXd;

enum class Activation { kRelu, kElu };
enum class Norm { kBatch, kNone };

struct ModelConfig {
  int depth = 5;
  std::vector<int> filters_per_stage = {16, 32, 64, 128, 256};
  int kernel_size = 5;
  std::vector<int> pool_sizes = {10, 5, 5, 4, 3};
  int num_classes = 4;
  int samples_per_epoch = 6000;
  int dilation = 1;
  Activation activation = Activation::kRelu;
  Norm norm = Norm::kBatch;

  int bottleneck_filters() const { return 2 * filters_per_stage.back(); }
  long pool_product() const;

  bool operator==(const ModelConfig&) const = default;
};

// Throws ConfigError unless: depth >= 1, one filter count and one pool size
// per stage, odd kernel, positive dilation, K >= 2, and the pool product
// divides samples_per_epoch.
void validate(const ModelConfig& config);

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

struct Parameter {
  std::string name;
  std::vector<int> shape;
  std::vector<double> value;
  // Batch-norm running statistics are stored alongside the weights but are
  // never touched by the optimizer.
  bool trainable = true;
};

// One entry per parameter, aligned with SegModel::parameters().
using Gradients = std::vector<std::vector<double>>;

struct FeatureTap {
  std::string layer_id;
  Matrix map;  // channels x length
};
using FeatureTaps = std::vector<FeatureTap>;

enum class Mode { kTrain, kEval };

// Everything backward() needs, plus the outputs. Produced by
// SegModel::forward() and owned by the caller.
struct ForwardPass {
  struct Block {
    std::vector<Matrix> input;
    std::vector<Matrix> normalized;
    std::vector<Matrix> output;
    Eigen::VectorXd batch_mean;
    Eigen::VectorXd batch_var;
    Eigen::VectorXd inv_std;
  };
  struct Pool {
    std::vector<Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>> argmax;
  };

  Mode mode = Mode::kEval;
  std::vector<int> epochs;       // T per item
  std::vector<Block> blocks;     // execution order
  std::vector<Pool> pools;       // one per encoder stage
  std::vector<Matrix> dense;     // K x L per-sample class scores
  std::vector<Matrix> logits;    // T x K
  std::vector<FeatureTaps> taps;  // per item, 2 * depth + 1 maps
};

// U-Time style fully convolutional encoder-decoder over a single channel.
//
// Encoder stage s: two (conv -> norm -> activation) blocks, then max-pool by
// pool_sizes[s]. The bottleneck holds two more blocks. Decoder stage s
// upsamples (nearest neighbor) by pool_sizes[s], applies one block,
// concatenates the encoder skip of the same stage and applies two blocks. A
// 1x1 convolution gives K dense scores per sample; averaging those over each
// epoch's samples yields the [T, K] logits.
//
// Feature taps are the outputs of every encoder stage (before pooling), the
// bottleneck and every decoder stage, in that order.
class SegModel {
 public:
  explicit SegModel(ModelConfig config, std::uint64_t seed = 0);

  const ModelConfig& config() const { return config_; }
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }

  // Each input holds a whole number of epochs (ShapeError otherwise).
  ForwardPass forward(std::span<const std::span<const double>> inputs,
                      Mode mode) const;
  ForwardPass forward(std::span<const double> input, Mode mode) const;

  // Back-propagates logit gradients and, optionally, gradients on the feature
  // taps (same nesting as ForwardPass::taps). Returns parameter gradients.
  Gradients backward(const ForwardPass& pass,
                     std::span<const Matrix> dlogits,
                     const std::vector<std::vector<Matrix>>* dtaps = nullptr) const;

  // Folds the batch statistics of a training-mode pass into the running
  // averages used in eval mode.
  void update_running_stats(const ForwardPass& pass, double momentum = 0.1);

  Gradients zero_gradients() const;

  // Dense per-sample scores for an input whose length is a multiple of the
  // pool product (not necessarily of samples_per_epoch).
  Matrix dense_scores(std::span<const double> input) const;

  static constexpr double kNormEpsilon = 1e-5;

 private:
  struct Conv {
    int weight = -1;
    int bias = -1;
    int in = 0;
    int out = 0;
    int kernel = 1;
    int dilation = 1;
  };
  struct Block {
    Conv conv;
    int gamma = -1;
    int beta = -1;
    int running_mean = -1;
    int running_var = -1;
  };

  int add_param(std::string name, std::vector<int> shape, bool trainable);
  Block make_block(const std::string& prefix, int in, int out, int kernel);
  ForwardPass run(std::span<const std::span<const double>> inputs, Mode mode,
                  bool check_epochs) const;
  void block_forward(const Block& b, std::vector<Matrix> input, Mode mode,
                     ForwardPass::Block* trace) const;
  std::vector<Matrix> block_backward(const Block& b,
                                     const ForwardPass::Block& trace,
                                     std::vector<Matrix> dout, Mode mode,
                                     Gradients* grads) const;
  void conv_forward(const Conv& c, const Matrix& x, Matrix* y) const;
  void conv_backward(const Conv& c, const Matrix& x, const Matrix& dy,
                     Matrix* dx, Gradients* grads) const;

  ModelConfig config_;
  std::vector<Parameter> params_;
  std::vector<std::array<Block, 2>> encoder_;
  std::array<Block, 2> bottleneck_;
  std::vector<std::array<Block, 3>> decoder_;  // up, then two; index = stage
  Conv head_;
};

// Labels at a segmentation period different from the training epoch: the
// dense scores are averaged over segments of sample_rate * period_seconds
// samples and arg-maxed. Returns ceil(duration / period) labels; the last
// segment may be partial. ConfigError if the segment length is not an
// integral number of samples.
std::vector<int> predict_at_frequency(const SegModel& model,
                                      const SignalRecord& signal,
                                      double period_seconds);

}  // namespace xkd

#endif  // XKD_SEGMODEL_H_
