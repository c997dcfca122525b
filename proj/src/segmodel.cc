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

#include "xkd/segmodel.h"

#include <cmath>
#include <numeric>
#include <random>

#include "xkd/errors.h"

namespace xkd {

namespace {

std::string_view activation_name(Activation a) {
  return a == Activation::kRelu ? "relu" : "elu";
}

std::string_view norm_name(Norm n) {
  return n == Norm::kBatch ? "batch" : "none";
}

Matrix activate(const Matrix& z, Activation a) {
  if (a == Activation::kRelu) return z.cwiseMax(0.0);
  return z.unaryExpr([](double v) { return v > 0 ? v : std::expm1(v); });
}

// Derivative expressed through the activation output.
Matrix activation_grad(const Matrix& y, const Matrix& dy, Activation a) {
  if (a == Activation::kRelu) {
    return dy.binaryExpr(y, [](double g, double v) { return v > 0 ? g : 0.0; });
  }
  return dy.binaryExpr(y,
                       [](double g, double v) { return v > 0 ? g : g * (v + 1.0); });
}

Matrix upsample(const Matrix& x, int factor) {
  Matrix y(x.rows(), x.cols() * factor);
  for (Eigen::Index m = 0; m < x.cols(); ++m) {
    for (int j = 0; j < factor; ++j) y.col(m * factor + j) = x.col(m);
  }
  return y;
}

Matrix upsample_backward(const Matrix& dy, int factor) {
  Matrix dx = Matrix::Zero(dy.rows(), dy.cols() / factor);
  for (Eigen::Index m = 0; m < dx.cols(); ++m) {
    for (int j = 0; j < factor; ++j) dx.col(m) += dy.col(m * factor + j);
  }
  return dx;
}

}  // namespace

long ModelConfig::pool_product() const {
  return std::accumulate(pool_sizes.begin(), pool_sizes.end(), 1L,
                         std::multiplies<>());
}

void validate(const ModelConfig& c) {
  if (c.depth < 1) throw ConfigError("depth must be at least 1");
  if (static_cast<int>(c.filters_per_stage.size()) != c.depth) {
    throw ConfigError("need one filter count per encoder stage");
  }
  if (static_cast<int>(c.pool_sizes.size()) != c.depth) {
    throw ConfigError("need one pool size per encoder stage");
  }
  for (int f : c.filters_per_stage) {
    if (f < 1) throw ConfigError("filter counts must be positive");
  }
  for (int p : c.pool_sizes) {
    if (p < 1) throw ConfigError("pool sizes must be positive");
  }
  if (c.kernel_size < 1 || c.kernel_size % 2 == 0) {
    throw ConfigError("kernel size must be odd for same padding");
  }
  if (c.dilation < 1) throw ConfigError("dilation must be positive");
  if (c.num_classes < 2) throw ConfigError("need at least 2 classes");
  if (c.samples_per_epoch < 1 || c.samples_per_epoch % c.pool_product() != 0) {
    throw ConfigError("pool product " + std::to_string(c.pool_product()) +
                      " does not divide samples per epoch " +
                      std::to_string(c.samples_per_epoch));
  }
}

nlohmann::json to_json(const ModelConfig& c) {
  return {
      {"depth", c.depth},
      {"filters_per_stage", c.filters_per_stage},
      {"kernel_size", c.kernel_size},
      {"pool_sizes", c.pool_sizes},
      {"num_classes", c.num_classes},
      {"samples_per_epoch", c.samples_per_epoch},
      {"dilation", c.dilation},
      {"activation", activation_name(c.activation)},
      {"norm", norm_name(c.norm)},
  };
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.depth = j.value("depth", c.depth);
    c.filters_per_stage = j.value("filters_per_stage", c.filters_per_stage);
    c.kernel_size = j.value("kernel_size", c.kernel_size);
    c.pool_sizes = j.value("pool_sizes", c.pool_sizes);
    c.num_classes = j.value("num_classes", c.num_classes);
    c.samples_per_epoch = j.value("samples_per_epoch", c.samples_per_epoch);
    c.dilation = j.value("dilation", c.dilation);
    const std::string act = j.value("activation", std::string("relu"));
    if (act == "relu") {
      c.activation = Activation::kRelu;
    } else if (act == "elu") {
      c.activation = Activation::kElu;
    } else {
      throw ConfigError("unknown activation '" + act + "'");
    }
    const std::string norm = j.value("norm", std::string("batch"));
    if (norm == "batch") {
      c.norm = Norm::kBatch;
    } else if (norm == "none") {
      c.norm = Norm::kNone;
    } else {
      throw ConfigError("unknown norm '" + norm + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  return c;
}

SegModel::SegModel(ModelConfig config, std::uint64_t seed)
    : config_(std::move(config)) {
  validate(config_);
  const int k = config_.kernel_size;
  int channels = 1;
  for (int s = 0; s < config_.depth; ++s) {
    const int f = config_.filters_per_stage[s];
    const std::string prefix = "enc" + std::to_string(s);
    encoder_.push_back({make_block(prefix + ".0", channels, f, k),
                        make_block(prefix + ".1", f, f, k)});
    channels = f;
  }
  const int fb = config_.bottleneck_filters();
  bottleneck_ = {make_block("bottleneck.0", channels, fb, k),
                 make_block("bottleneck.1", fb, fb, k)};
  channels = fb;
  decoder_.resize(config_.depth);
  for (int s = config_.depth - 1; s >= 0; --s) {
    const int f = config_.filters_per_stage[s];
    const std::string prefix = "dec" + std::to_string(s);
    decoder_[s] = {make_block(prefix + ".up", channels, f, k),
                   make_block(prefix + ".0", 2 * f, f, k),
                   make_block(prefix + ".1", f, f, k)};
    channels = f;
  }
  head_.in = channels;
  head_.out = config_.num_classes;
  head_.kernel = 1;
  head_.weight = add_param("head.weight", {head_.out, head_.in, 1}, true);
  head_.bias = add_param("head.bias", {head_.out}, true);

  // He-normal weights, zero biases, identity normalization.
  std::mt19937_64 rng(seed);
  for (auto& p : params_) {
    const auto& n = p.name;
    if (n.ends_with(".weight")) {
      const double fan_in = static_cast<double>(p.shape[1]) * p.shape[2];
      std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
      for (auto& v : p.value) v = dist(rng);
    } else if (n.ends_with(".gamma") || n.ends_with(".running_var")) {
      std::fill(p.value.begin(), p.value.end(), 1.0);
    }
  }
}

int SegModel::add_param(std::string name, std::vector<int> shape,
                        bool trainable) {
  const auto size = std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                                    std::multiplies<>());
  params_.push_back(
      {std::move(name), std::move(shape), std::vector<double>(size, 0.0), trainable});
  return static_cast<int>(params_.size()) - 1;
}

SegModel::Block SegModel::make_block(const std::string& prefix, int in, int out,
                                     int kernel) {
  Block b;
  b.conv.in = in;
  b.conv.out = out;
  b.conv.kernel = kernel;
  b.conv.dilation = config_.dilation;
  b.conv.weight = add_param(prefix + ".conv.weight", {out, in, kernel}, true);
  b.conv.bias = add_param(prefix + ".conv.bias", {out}, true);
  if (config_.norm == Norm::kBatch) {
    b.gamma = add_param(prefix + ".norm.gamma", {out}, true);
    b.beta = add_param(prefix + ".norm.beta", {out}, true);
    b.running_mean = add_param(prefix + ".norm.running_mean", {out}, false);
    b.running_var = add_param(prefix + ".norm.running_var", {out}, false);
  }
  return b;
}

Gradients SegModel::zero_gradients() const {
  Gradients g;
  g.reserve(params_.size());
  for (const auto& p : params_) g.emplace_back(p.value.size(), 0.0);
  return g;
}

void SegModel::conv_forward(const Conv& c, const Matrix& x, Matrix* y) const {
  const Eigen::Index len = x.cols();
  const auto& w = params_[c.weight].value;
  const auto& b = params_[c.bias].value;
  y->resize(c.out, len);
  y->colwise() = Eigen::Map<const Eigen::VectorXd>(b.data(), c.out);
  Matrix wk(c.out, c.in);
  const int half = (c.kernel - 1) / 2;
  for (int k = 0; k < c.kernel; ++k) {
    for (int o = 0; o < c.out; ++o) {
      for (int i = 0; i < c.in; ++i) {
        wk(o, i) = w[(static_cast<std::size_t>(o) * c.in + i) * c.kernel + k];
      }
    }
    const Eigen::Index shift = static_cast<Eigen::Index>(k - half) * c.dilation;
    const Eigen::Index t0 = std::max<Eigen::Index>(0, -shift);
    const Eigen::Index t1 = std::min<Eigen::Index>(len, len - shift);
    if (t1 <= t0) continue;
    y->middleCols(t0, t1 - t0).noalias() +=
        wk * x.middleCols(t0 + shift, t1 - t0);
  }
}

void SegModel::conv_backward(const Conv& c, const Matrix& x, const Matrix& dy,
                             Matrix* dx, Gradients* grads) const {
  const Eigen::Index len = x.cols();
  const auto& w = params_[c.weight].value;
  auto& gw = (*grads)[c.weight];
  auto& gb = (*grads)[c.bias];
  const Eigen::VectorXd db = dy.rowwise().sum();
  for (int o = 0; o < c.out; ++o) gb[o] += db(o);

  dx->setZero(c.in, len);
  Matrix wk(c.out, c.in);
  const int half = (c.kernel - 1) / 2;
  for (int k = 0; k < c.kernel; ++k) {
    for (int o = 0; o < c.out; ++o) {
      for (int i = 0; i < c.in; ++i) {
        wk(o, i) = w[(static_cast<std::size_t>(o) * c.in + i) * c.kernel + k];
      }
    }
    const Eigen::Index shift = static_cast<Eigen::Index>(k - half) * c.dilation;
    const Eigen::Index t0 = std::max<Eigen::Index>(0, -shift);
    const Eigen::Index t1 = std::min<Eigen::Index>(len, len - shift);
    if (t1 <= t0) continue;
    const auto dy_k = dy.middleCols(t0, t1 - t0);
    const Matrix dwk = dy_k * x.middleCols(t0 + shift, t1 - t0).transpose();
    for (int o = 0; o < c.out; ++o) {
      for (int i = 0; i < c.in; ++i) {
        gw[(static_cast<std::size_t>(o) * c.in + i) * c.kernel + k] += dwk(o, i);
      }
    }
    dx->middleCols(t0 + shift, t1 - t0).noalias() += wk.transpose() * dy_k;
  }
}

void SegModel::block_forward(const Block& b, std::vector<Matrix> input,
                             Mode mode, ForwardPass::Block* trace) const {
  const std::size_t n = input.size();
  std::vector<Matrix> z(n);
  for (std::size_t j = 0; j < n; ++j) conv_forward(b.conv, input[j], &z[j]);
  trace->input = std::move(input);
  trace->output.resize(n);

  if (b.gamma < 0) {
    for (std::size_t j = 0; j < n; ++j) {
      trace->output[j] = activate(z[j], config_.activation);
    }
    return;
  }

  const int ch = b.conv.out;
  Eigen::VectorXd mean, inv_std;
  if (mode == Mode::kTrain) {
    double count = 0;
    mean = Eigen::VectorXd::Zero(ch);
    for (const auto& m : z) {
      mean += m.rowwise().sum();
      count += static_cast<double>(m.cols());
    }
    mean /= count;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(ch);
    for (const auto& m : z) {
      var += (m.colwise() - mean).rowwise().squaredNorm();
    }
    var /= count;
    inv_std = (var.array() + kNormEpsilon).rsqrt();
    trace->batch_mean = mean;
    trace->batch_var = var;
  } else {
    mean = Eigen::Map<const Eigen::VectorXd>(
        params_[b.running_mean].value.data(), ch);
    inv_std = (Eigen::Map<const Eigen::ArrayXd>(
                   params_[b.running_var].value.data(), ch) +
               kNormEpsilon)
                  .rsqrt();
  }
  trace->inv_std = inv_std;
  const Eigen::Map<const Eigen::ArrayXd> gamma(params_[b.gamma].value.data(), ch);
  const Eigen::Map<const Eigen::ArrayXd> beta(params_[b.beta].value.data(), ch);
  trace->normalized.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    Matrix xhat = ((z[j].colwise() - mean).array().colwise() * inv_std.array())
                      .matrix();
    Matrix pre = ((xhat.array().colwise() * gamma).colwise() + beta).matrix();
    trace->output[j] = activate(pre, config_.activation);
    trace->normalized[j] = std::move(xhat);
  }
}

std::vector<Matrix> SegModel::block_backward(const Block& b,
                                             const ForwardPass::Block& trace,
                                             std::vector<Matrix> dout,
                                             Mode mode,
                                             Gradients* grads) const {
  const std::size_t n = dout.size();
  std::vector<Matrix> dz(n);
  for (std::size_t j = 0; j < n; ++j) {
    dz[j] = activation_grad(trace.output[j], dout[j], config_.activation);
  }

  if (b.gamma >= 0) {
    const int ch = b.conv.out;
    const Eigen::Map<const Eigen::ArrayXd> gamma(params_[b.gamma].value.data(),
                                                 ch);
    Eigen::ArrayXd sum_dy = Eigen::ArrayXd::Zero(ch);
    Eigen::ArrayXd sum_dy_xhat = Eigen::ArrayXd::Zero(ch);
    double count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      sum_dy += dz[j].rowwise().sum().array();
      sum_dy_xhat +=
          (dz[j].array() * trace.normalized[j].array()).rowwise().sum();
      count += static_cast<double>(dz[j].cols());
    }
    auto& gg = (*grads)[b.gamma];
    auto& gbeta = (*grads)[b.beta];
    for (int c = 0; c < ch; ++c) {
      gg[c] += sum_dy_xhat(c);
      gbeta[c] += sum_dy(c);
    }
    const Eigen::ArrayXd scale = gamma * trace.inv_std.array();
    for (std::size_t j = 0; j < n; ++j) {
      if (mode == Mode::kTrain) {
        // dx = gamma * inv_std * (dy - mean(dy) - xhat * mean(dy * xhat))
        const Eigen::ArrayXd mean_dy = sum_dy / count;
        const Eigen::ArrayXd mean_dy_xhat = sum_dy_xhat / count;
        Eigen::ArrayXXd centered =
            (dz[j].array().colwise() - mean_dy) -
            trace.normalized[j].array().colwise() * mean_dy_xhat;
        dz[j] = (centered.colwise() * scale).matrix();
      } else {
        dz[j] = (dz[j].array().colwise() * scale).matrix();
      }
    }
  }

  std::vector<Matrix> dx(n);
  for (std::size_t j = 0; j < n; ++j) {
    conv_backward(b.conv, trace.input[j], dz[j], &dx[j], grads);
  }
  return dx;
}

ForwardPass SegModel::forward(std::span<const std::span<const double>> inputs,
                              Mode mode) const {
  return run(inputs, mode, true);
}

ForwardPass SegModel::forward(std::span<const double> input, Mode mode) const {
  const std::span<const double> one[] = {input};
  return run(one, mode, true);
}

Matrix SegModel::dense_scores(std::span<const double> input) const {
  const std::span<const double> one[] = {input};
  return std::move(run(one, Mode::kEval, false).dense.front());
}

ForwardPass SegModel::run(std::span<const std::span<const double>> inputs,
                          Mode mode, bool check_epochs) const {
  const int depth = config_.depth;
  const long unit = check_epochs ? config_.samples_per_epoch
                                 : config_.pool_product();
  const std::size_t n = inputs.size();
  ForwardPass pass;
  pass.mode = mode;
  pass.blocks.resize(static_cast<std::size_t>(5 * depth + 2));
  pass.pools.resize(static_cast<std::size_t>(depth));
  pass.taps.resize(n);

  std::vector<Matrix> x(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto len = static_cast<long>(inputs[j].size());
    if (len == 0 || len % unit != 0) {
      throw ShapeError("input length " + std::to_string(len) +
                       " is not a positive multiple of " + std::to_string(unit));
    }
    x[j] = Eigen::Map<const Eigen::RowVectorXd>(inputs[j].data(), len);
    pass.epochs.push_back(static_cast<int>(len / config_.samples_per_epoch));
  }

  auto block = [&](const Block& b, std::size_t slot) -> const std::vector<Matrix>& {
    block_forward(b, std::move(x), mode, &pass.blocks[slot]);
    x = pass.blocks[slot].output;
    return pass.blocks[slot].output;
  };
  auto tap = [&](const std::string& id) {
    for (std::size_t j = 0; j < n; ++j) pass.taps[j].push_back({id, x[j]});
  };

  for (int s = 0; s < depth; ++s) {
    block(encoder_[s][0], 2 * s);
    block(encoder_[s][1], 2 * s + 1);
    tap("enc" + std::to_string(s));
    const int p = config_.pool_sizes[s];
    auto& argmax = pass.pools[s].argmax;
    argmax.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const Matrix& in = x[j];
      Matrix out(in.rows(), in.cols() / p);
      argmax[j].resize(in.rows(), out.cols());
      for (Eigen::Index m = 0; m < out.cols(); ++m) {
        for (Eigen::Index c = 0; c < in.rows(); ++c) {
          Eigen::Index best = m * p;
          for (Eigen::Index t = m * p + 1; t < (m + 1) * p; ++t) {
            if (in(c, t) > in(c, best)) best = t;
          }
          out(c, m) = in(c, best);
          argmax[j](c, m) = static_cast<int>(best);
        }
      }
      x[j] = std::move(out);
    }
  }
  block(bottleneck_[0], 2 * depth);
  block(bottleneck_[1], 2 * depth + 1);
  tap("bottleneck");
  for (int s = depth - 1; s >= 0; --s) {
    const std::size_t base = 2 * depth + 2 + 3 * (depth - 1 - s);
    for (auto& m : x) m = upsample(m, config_.pool_sizes[s]);
    block(decoder_[s][0], base);
    const auto& skip = pass.blocks[2 * s + 1].output;
    for (std::size_t j = 0; j < n; ++j) {
      Matrix cat(x[j].rows() + skip[j].rows(), x[j].cols());
      cat << x[j], skip[j];
      x[j] = std::move(cat);
    }
    block(decoder_[s][1], base + 1);
    block(decoder_[s][2], base + 2);
    tap("dec" + std::to_string(s));
  }

  pass.dense.resize(n);
  pass.logits.resize(n);
  const int per = config_.samples_per_epoch;
  for (std::size_t j = 0; j < n; ++j) {
    conv_forward(head_, x[j], &pass.dense[j]);
    if (!check_epochs) continue;
    const int t_epochs = pass.epochs[j];
    Matrix logits(t_epochs, config_.num_classes);
    for (int t = 0; t < t_epochs; ++t) {
      logits.row(t) =
          pass.dense[j].middleCols(static_cast<Eigen::Index>(t) * per, per)
              .rowwise()
              .mean()
              .transpose();
    }
    pass.logits[j] = std::move(logits);
  }
  return pass;
}

Gradients SegModel::backward(const ForwardPass& pass,
                             std::span<const Matrix> dlogits,
                             const std::vector<std::vector<Matrix>>* dtaps) const {
  const int depth = config_.depth;
  const std::size_t n = pass.logits.size();
  if (dlogits.size() != n) {
    throw ShapeError("backward: logit gradient count does not match the batch");
  }
  Gradients grads = zero_gradients();
  const int per = config_.samples_per_epoch;

  auto add_tap = [&](std::vector<Matrix>& d, std::size_t tap_index) {
    if (dtaps == nullptr) return;
    for (std::size_t j = 0; j < n; ++j) {
      const auto& g = (*dtaps)[j];
      if (tap_index < g.size() && g[tap_index].size() > 0) d[j] += g[tap_index];
    }
  };

  // Head: mean-pool then 1x1 convolution.
  const auto& last = pass.blocks[2 * depth + 2 + 3 * (depth - 1) + 2].output;
  std::vector<Matrix> dx(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Matrix& dl = dlogits[j];
    Matrix ddense(config_.num_classes, pass.dense[j].cols());
    for (Eigen::Index t = 0; t < dl.rows(); ++t) {
      ddense.middleCols(t * per, per).colwise() =
          dl.row(t).transpose() / static_cast<double>(per);
    }
    conv_backward(head_, last[j], ddense, &dx[j], &grads);
  }

  const std::size_t n_enc_taps = static_cast<std::size_t>(depth);
  std::vector<std::vector<Matrix>> dskip(depth);
  for (int s = 0; s < depth; ++s) {
    const std::size_t base = 2 * depth + 2 + 3 * (depth - 1 - s);
    add_tap(dx, n_enc_taps + 1 + static_cast<std::size_t>(depth - 1 - s));
    dx = block_backward(decoder_[s][2], pass.blocks[base + 2], std::move(dx),
                        pass.mode, &grads);
    dx = block_backward(decoder_[s][1], pass.blocks[base + 1], std::move(dx),
                        pass.mode, &grads);
    const int f = config_.filters_per_stage[s];
    dskip[s].resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      dskip[s][j] = dx[j].bottomRows(f);
      Matrix top = dx[j].topRows(f);
      dx[j] = std::move(top);
    }
    dx = block_backward(decoder_[s][0], pass.blocks[base], std::move(dx),
                        pass.mode, &grads);
    for (auto& m : dx) m = upsample_backward(m, config_.pool_sizes[s]);
  }

  add_tap(dx, n_enc_taps);
  dx = block_backward(bottleneck_[1], pass.blocks[2 * depth + 1], std::move(dx),
                      pass.mode, &grads);
  dx = block_backward(bottleneck_[0], pass.blocks[2 * depth], std::move(dx),
                      pass.mode, &grads);

  for (int s = depth - 1; s >= 0; --s) {
    const auto& argmax = pass.pools[s].argmax;
    std::vector<Matrix> d(n);
    for (std::size_t j = 0; j < n; ++j) {
      d[j] = std::move(dskip[s][j]);
      for (Eigen::Index m = 0; m < argmax[j].cols(); ++m) {
        for (Eigen::Index c = 0; c < argmax[j].rows(); ++c) {
          d[j](c, argmax[j](c, m)) += dx[j](c, m);
        }
      }
    }
    add_tap(d, static_cast<std::size_t>(s));
    d = block_backward(encoder_[s][1], pass.blocks[2 * s + 1], std::move(d),
                       pass.mode, &grads);
    dx = block_backward(encoder_[s][0], pass.blocks[2 * s], std::move(d),
                        pass.mode, &grads);
  }
  return grads;
}

void SegModel::update_running_stats(const ForwardPass& pass, double momentum) {
  if (pass.mode != Mode::kTrain || config_.norm != Norm::kBatch) return;
  auto update = [&](const Block& b, const ForwardPass::Block& trace) {
    double count = 0;
    for (const auto& m : trace.output) count += static_cast<double>(m.cols());
    const double unbias = count > 1 ? count / (count - 1) : 1.0;
    auto& rm = params_[b.running_mean].value;
    auto& rv = params_[b.running_var].value;
    for (int c = 0; c < b.conv.out; ++c) {
      rm[c] = (1 - momentum) * rm[c] + momentum * trace.batch_mean(c);
      rv[c] = (1 - momentum) * rv[c] + momentum * trace.batch_var(c) * unbias;
    }
  };
  const int depth = config_.depth;
  for (int s = 0; s < depth; ++s) {
    update(encoder_[s][0], pass.blocks[2 * s]);
    update(encoder_[s][1], pass.blocks[2 * s + 1]);
    const std::size_t base = 2 * depth + 2 + 3 * (depth - 1 - s);
    for (int k = 0; k < 3; ++k) update(decoder_[s][k], pass.blocks[base + k]);
  }
  update(bottleneck_[0], pass.blocks[2 * depth]);
  update(bottleneck_[1], pass.blocks[2 * depth + 1]);
}

std::vector<int> predict_at_frequency(const SegModel& model,
                                      const SignalRecord& signal,
                                      double period_seconds) {
  if (!(period_seconds > 0)) throw ConfigError("period must be positive");
  const double exact = signal.sample_rate * period_seconds;
  if (std::abs(exact - std::round(exact)) > 1e-9 || std::round(exact) < 1) {
    throw ConfigError("sample rate x segment period is not integral");
  }
  const auto seg = static_cast<std::size_t>(std::round(exact));
  const std::size_t total = signal.samples.size();
  if (total == 0) return {};
  const auto per = static_cast<std::size_t>(model.config().samples_per_epoch);
  std::vector<double> padded(signal.samples);
  padded.resize((total + per - 1) / per * per, 0.0);
  const Matrix dense = model.dense_scores(padded);

  std::vector<int> labels;
  for (std::size_t start = 0; start < total; start += seg) {
    const std::size_t len = std::min(seg, total - start);
    const Eigen::VectorXd score =
        dense.middleCols(static_cast<Eigen::Index>(start),
                         static_cast<Eigen::Index>(len))
            .rowwise()
            .mean();
    Eigen::Index best = 0;
    score.maxCoeff(&best);
    labels.push_back(static_cast<int>(best));
  }
  return labels;
}

}  // namespace xkd
