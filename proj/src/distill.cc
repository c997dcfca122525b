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

#include "xkd/distill.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "xkd/errors.h"
#include "xkd/optimizer.h"

namespace xkd {

namespace {

// Independent RNG streams so that skipping a stage never shifts another.
constexpr std::uint64_t kFeatureStream = 0x5354455031ULL;
constexpr std::uint64_t kSupervisedStream = 0x5354455032ULL;

const SegmentBatch& view(const WindowPair& w, Modality m) {
  return m == Modality::kEeg ? w.eeg : w.ecg;
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<std::span<const double>> inputs_of(
    std::span<const WindowPair> windows, std::span<const std::size_t> idx,
    Modality m) {
  std::vector<std::span<const double>> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.emplace_back(view(windows[i], m).inputs);
  return out;
}

Matrix stack(const std::vector<Matrix>& parts) {
  Eigen::Index rows = 0;
  for (const auto& p : parts) rows += p.rows();
  Matrix out(rows, parts.empty() ? 0 : parts.front().cols());
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p;
    r += p.rows();
  }
  return out;
}

std::vector<int> argmax_rows(const Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    Eigen::Index best = 0;
    logits.row(t).maxCoeff(&best);
    out[static_cast<std::size_t>(t)] = static_cast<int>(best);
  }
  return out;
}

std::vector<Matrix> eval_logits(const SegModel& model,
                                std::span<const WindowPair> windows,
                                Modality modality) {
  std::vector<Matrix> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    out.push_back(
        std::move(model.forward(view(w, modality).inputs, Mode::kEval).logits.front()));
  }
  return out;
}

struct Targets {
  std::vector<int> labels;
  std::vector<std::uint8_t> mask;
};

Targets targets_of(std::span<const WindowPair> windows,
                   std::span<const std::size_t> idx) {
  Targets t;
  for (std::size_t i : idx) {
    const auto& b = windows[i].ecg;
    t.labels.insert(t.labels.end(), b.labels.begin(), b.labels.end());
    t.mask.insert(t.mask.end(), b.mask.begin(), b.mask.end());
  }
  return t;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

void check_model_matches(const SegModel& model,
                         std::span<const WindowPair> windows) {
  for (const auto& w : windows) {
    if (w.eeg.samples_per_epoch != model.config().samples_per_epoch ||
        w.eeg.num_classes != model.config().num_classes) {
      throw ConfigError("window layout (" + std::to_string(w.eeg.samples_per_epoch) +
                        " samples/epoch, K=" + std::to_string(w.eeg.num_classes) +
                        ") does not match the model configuration");
    }
  }
}

TrainResult fit(SegModel student, const SegModel* teacher,
                std::span<const WindowPair> train,
                std::span<const WindowPair> val, Modality modality,
                const DistillWeights& dw, const DistillConfig& config) {
  validate(dw);
  if (train.empty()) throw ConfigError("training split has no windows");
  if (val.empty()) throw ConfigError("validation split has no windows");
  check_model_matches(student, train);
  check_model_matches(student, val);
  const int k = class_count(config.class_scheme);
  const auto names = class_names(config.class_scheme);

  const auto train_idx = all_indices(train.size());
  const Targets all_train = targets_of(train, train_idx);
  std::vector<int> scored;
  for (std::size_t i = 0; i < all_train.labels.size(); ++i) {
    if (all_train.mask[i]) scored.push_back(all_train.labels[i]);
  }
  const ClassWeights weights = class_weights(scored, k);
  const bool use_teacher = teacher != nullptr && dw.alpha > 0.0;

  const auto val_idx = all_indices(val.size());
  const Targets val_targets = targets_of(val, val_idx);

  Adam adam(student, {.learning_rate = config.learning_rate});
  std::mt19937_64 rng(config.seed ^ kSupervisedStream);
  std::vector<std::size_t> order = train_idx;
  const auto batch = static_cast<std::size_t>(config.batch_size);

  TrainResult result{student, {}, std::nullopt, 0.0, 0};
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    ConfusionMatrix cm = empty_confusion(k, names);
    double sum_wce = 0.0, sum_kd = 0.0;
    int batches = 0;
    for (std::size_t first = 0; first < order.size(); first += batch) {
      const std::span<const std::size_t> idx(
          order.data() + first, std::min(batch, order.size() - first));
      const auto inputs = inputs_of(train, idx, modality);
      const ForwardPass pass = student.forward(inputs, Mode::kTrain);
      const Matrix logits = stack(pass.logits);
      const Targets tg = targets_of(train, idx);
      Matrix teacher_logits;
      if (use_teacher) {
        teacher_logits =
            stack(teacher->forward(inputs_of(train, idx, Modality::kEeg), Mode::kEval)
                      .logits);
      }
      Matrix grad;
      const LossTerms terms = combined_loss(logits, teacher_logits, tg.labels,
                                            weights, dw, tg.mask, &grad);
      if (!std::isfinite(terms.total)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch));
      }
      std::vector<Matrix> dlogits;
      Eigen::Index row = 0;
      for (const auto& l : pass.logits) {
        dlogits.push_back(grad.middleRows(row, l.rows()));
        row += l.rows();
      }
      adam.step(student, student.backward(pass, dlogits));
      student.update_running_stats(pass);

      accumulate(cm, tg.labels, argmax_rows(logits), tg.mask);
      sum_wce += terms.wce;
      sum_kd += terms.kd;
      ++batches;
    }
    result.log.rows.push_back({epoch, "train", sum_wce / batches, 0.0,
                               sum_kd / batches, weighted_f1(cm), accuracy(cm)});

    const std::vector<Matrix> vl = eval_logits(student, val, modality);
    const Matrix val_logits = stack(vl);
    const double val_wce = wce(val_logits, val_targets.labels, weights, val_targets.mask);
    double val_kd = 0.0;
    if (use_teacher) {
      val_kd = kd_loss(val_logits, stack(eval_logits(*teacher, val, Modality::kEeg)),
                       dw.temperature, val_targets.mask);
    }
    ConfusionMatrix vcm = empty_confusion(k, names);
    accumulate(vcm, val_targets.labels, argmax_rows(val_logits), val_targets.mask);
    const double vf1 = weighted_f1(vcm);
    const double vacc = accuracy(vcm);
    result.log.rows.push_back({epoch, "val", val_wce, 0.0, val_kd, vf1, vacc});

    if (!result.best_val_f1 || vf1 > *result.best_val_f1 ||
        (vf1 == *result.best_val_f1 && vacc > result.best_val_accuracy)) {
      result.best_val_f1 = vf1;
      result.best_val_accuracy = vacc;
      result.best_epoch = epoch;
      result.model = student;
    }
  }
  return result;
}

}  // namespace

std::string_view mode_name(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::kEegBaseline: return "EEG_BASELINE";
    case ExperimentMode::kEcgBaseline: return "ECG_BASELINE";
    case ExperimentMode::kSdCl: return "SD_CL";
    case ExperimentMode::kAtCl: return "AT_CL";
    case ExperimentMode::kAtSdCl: return "AT_SD_CL";
  }
  return "?";
}

ExperimentMode parse_mode(std::string_view name) {
  for (auto m : {ExperimentMode::kEegBaseline, ExperimentMode::kEcgBaseline,
                 ExperimentMode::kSdCl, ExperimentMode::kAtCl,
                 ExperimentMode::kAtSdCl}) {
    if (mode_name(m) == name) return m;
  }
  throw ConfigError("unknown experiment mode '" + std::string(name) + "'");
}

nlohmann::json to_json(const DistillConfig& c) {
  return {
      {"mode", mode_name(c.mode)},
      {"alpha", c.alpha},
      {"temperature", c.temperature},
      {"epochs", c.epochs},
      {"learning_rate", c.learning_rate},
      {"batch_size", c.batch_size},
      {"seed", c.seed},
      {"class_scheme", schema_name(c.class_scheme)},
      {"model", to_json(c.model)},
      {"at", {{"power", c.at.power}, {"layers", c.at.layers}}},
      {"epochs_per_window", c.epochs_per_window},
      {"sample_rate", c.sample_rate},
      {"step1_epochs", c.step1_epochs},
      {"step1_patience", c.step1_patience},
      {"step1_min_delta", c.step1_min_delta},
  };
}

DistillConfig distill_config_from_json(const nlohmann::json& j) {
  DistillConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("mode")) c.mode = parse_mode(j["mode"].get<std::string>());
    c.alpha = j.value("alpha", c.alpha);
    c.temperature = j.value("temperature", c.temperature);
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    if (j.contains("class_scheme")) {
      c.class_scheme = parse_schema(j["class_scheme"].get<std::string>());
    }
    if (j.contains("model")) c.model = model_config_from_json(j["model"]);
    if (j.contains("at")) {
      c.at.power = j["at"].value("power", c.at.power);
      c.at.layers = j["at"].value("layers", c.at.layers);
    }
    c.epochs_per_window = j.value("epochs_per_window", c.epochs_per_window);
    c.sample_rate = j.value("sample_rate", c.sample_rate);
    c.step1_epochs = j.value("step1_epochs", c.step1_epochs);
    c.step1_patience = j.value("step1_patience", c.step1_patience);
    c.step1_min_delta = j.value("step1_min_delta", c.step1_min_delta);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const SchemaError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

void validate(const DistillConfig& c) {
  validate(c.model);
  validate(DistillWeights{c.alpha, c.temperature});
  if (c.class_scheme == StageSchema::kRawRK) {
    throw ConfigError("class scheme must be FOUR_CLASS or THREE_CLASS");
  }
  if (c.model.num_classes != class_count(c.class_scheme)) {
    throw ConfigError("model has " + std::to_string(c.model.num_classes) +
                      " classes but " + std::string(schema_name(c.class_scheme)) +
                      " needs " + std::to_string(class_count(c.class_scheme)));
  }
  if (c.epochs < 0 || c.step1_epochs < 0) {
    throw ConfigError("epoch counts must be non-negative");
  }
  if (c.batch_size < 1) throw ConfigError("batch size must be positive");
  if (!(c.learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (c.epochs_per_window < 1) {
    throw ConfigError("epochs per window must be positive");
  }
  if (c.step1_patience < 1) throw ConfigError("patience must be positive");
  if (c.at.power < 1) throw ConfigError("attention power must be >= 1");
  if (!(c.sample_rate > 0)) throw ConfigError("sample rate must be positive");
  if (static_cast<double>(c.model.samples_per_epoch) != c.sample_rate * 30.0) {
    throw ConfigError("samples_per_epoch must equal sample_rate x 30 s");
  }
}

ExecutionPlan canonical_plan(const DistillConfig& c) {
  switch (c.mode) {
    case ExperimentMode::kEegBaseline:
      return {Modality::kEeg, false, false, 0.0};
    case ExperimentMode::kEcgBaseline:
      return {Modality::kEcg, false, false, 0.0};
    case ExperimentMode::kSdCl:
      return {Modality::kEcg, true, false, c.alpha};
    case ExperimentMode::kAtCl:
      return {Modality::kEcg, true, true, 0.0};
    case ExperimentMode::kAtSdCl:
      return {Modality::kEcg, true, true, c.alpha};
  }
  throw ConfigError("unknown mode");
}

std::vector<WindowPair> make_windows(const Dataset& dataset,
                                     std::span<const std::string> subject_ids,
                                     StageSchema scheme, int epochs_per_window) {
  std::vector<WindowPair> out;
  for (const auto& id : subject_ids) {
    const auto it = std::find_if(dataset.subjects.begin(), dataset.subjects.end(),
                                 [&](const SubjectData& s) { return s.id == id; });
    if (it == dataset.subjects.end()) {
      throw ConfigError("split names unknown subject '" + id + "'");
    }
    Hypnogram hyp;
    if (it->hypnogram.schema == StageSchema::kRawRK) {
      hyp = merge_stages(it->hypnogram, scheme);
    } else if (it->hypnogram.schema == scheme) {
      hyp = it->hypnogram;
    } else {
      throw SchemaError("subject '" + id + "' is labeled in " +
                        std::string(schema_name(it->hypnogram.schema)));
    }
    auto eeg = segment(it->eeg, hyp, epochs_per_window);
    auto ecg = segment(it->ecg, hyp, epochs_per_window);
    if (eeg.size() != ecg.size()) {
      throw AlignmentError("subject '" + id + "': modalities are not aligned");
    }
    for (std::size_t w = 0; w < eeg.size(); ++w) {
      out.push_back({std::move(eeg[w]), std::move(ecg[w])});
    }
  }
  return out;
}

std::string TrainLog::csv() const {
  std::string out = "epoch,split,loss_wce,loss_at,loss_kd,weighted_f1,accuracy\n";
  for (const auto& r : rows) {
    out += std::to_string(r.epoch) + ',' + r.split + ',' + number(r.loss_wce) +
           ',' + number(r.loss_at) + ',' + number(r.loss_kd) + ',' +
           (r.weighted_f1 ? number(*r.weighted_f1) : "") + ',' +
           (r.accuracy ? number(*r.accuracy) : "") + '\n';
  }
  return out;
}

ConfusionMatrix evaluate(const SegModel& model,
                         std::span<const WindowPair> windows,
                         Modality modality, StageSchema scheme) {
  ConfusionMatrix cm = empty_confusion(class_count(scheme), class_names(scheme));
  const auto logits = eval_logits(model, windows, modality);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& b = view(windows[i], modality);
    accumulate(cm, b.labels, argmax_rows(logits[i]), b.mask);
  }
  return cm;
}

TrainResult train_teacher(const DistillConfig& config,
                          std::span<const WindowPair> train,
                          std::span<const WindowPair> val) {
  validate(config);
  return fit(SegModel(config.model, config.seed), nullptr, train, val,
             Modality::kEeg, {0.0, config.temperature}, config);
}

FeatureTrainResult feature_train(const SegModel& student,
                                 const SegModel& teacher,
                                 std::span<const WindowPair> train,
                                 const DistillConfig& config) {
  if (!(student.config() == teacher.config())) {
    throw ConfigError("attention transfer needs identical teacher and student configs");
  }
  if (config.at.power < 1) throw ConfigError("attention power must be >= 1");
  FeatureTrainResult result{student, {}};
  if (config.step1_epochs == 0) return result;
  if (train.empty()) throw ConfigError("training split has no windows");
  check_model_matches(student, train);

  SegModel& s = result.model;
  Adam adam(s, {.learning_rate = config.learning_rate});
  std::mt19937_64 rng(config.seed ^ kFeatureStream);
  std::vector<std::size_t> order = all_indices(train.size());
  const auto batch = static_cast<std::size_t>(config.batch_size);
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 1; epoch <= config.step1_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    for (std::size_t first = 0; first < order.size(); first += batch) {
      const std::span<const std::size_t> idx(
          order.data() + first, std::min(batch, order.size() - first));
      const ForwardPass sp = s.forward(inputs_of(train, idx, Modality::kEcg), Mode::kTrain);
      const ForwardPass tp =
          teacher.forward(inputs_of(train, idx, Modality::kEeg), Mode::kEval);
      std::vector<std::vector<Matrix>> dtaps(idx.size());
      std::vector<Matrix> dlogits;
      const double scale = 1.0 / static_cast<double>(idx.size());
      double batch_loss = 0.0;
      for (std::size_t j = 0; j < idx.size(); ++j) {
        batch_loss += at_loss(sp.taps[j], tp.taps[j], config.at, &dtaps[j]);
        for (auto& g : dtaps[j]) g *= scale;
        dlogits.push_back(Matrix::Zero(sp.logits[j].rows(), sp.logits[j].cols()));
      }
      if (!std::isfinite(batch_loss)) {
        throw TrainingError("non-finite attention loss at epoch " +
                            std::to_string(epoch));
      }
      sum += batch_loss;
      adam.step(s, s.backward(sp, dlogits, &dtaps));
      s.update_running_stats(sp);
    }
    const double mean = sum / static_cast<double>(train.size());
    result.log.rows.push_back({epoch, "train", 0.0, mean, 0.0, std::nullopt,
                               std::nullopt});
    if (mean < best - config.step1_min_delta) {
      best = mean;
      stale = 0;
    } else if (++stale >= config.step1_patience) {
      break;
    }
  }
  return result;
}

TrainResult final_train(const SegModel& student, const SegModel* teacher,
                        std::span<const WindowPair> train,
                        std::span<const WindowPair> val,
                        const DistillWeights& weights,
                        const DistillConfig& config) {
  if (weights.alpha > 0.0 && teacher == nullptr) {
    throw ConfigError("softmax distillation needs a teacher");
  }
  if (teacher != nullptr && !(teacher->config() == student.config())) {
    throw ConfigError("teacher and student model configs differ");
  }
  return fit(student, teacher, train, val, Modality::kEcg, weights, config);
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json cm = nlohmann::json::array();
  for (int t = 0; t < test_confusion.num_classes; ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (int p = 0; p < test_confusion.num_classes; ++p) {
      row.push_back(test_confusion.at(t, p));
    }
    cm.push_back(row);
  }
  nlohmann::json per_class = nlohmann::json::object();
  for (std::size_t c = 0; c < result.class_names.size(); ++c) {
    per_class[result.class_names[c]] = result.per_class_f1[c];
  }
  return {
      {"header",
       {{"mode", mode_name(config.mode)},
        {"class_scheme", schema_name(config.class_scheme)},
        {"epochs", config.epochs},
        {"learning_rate", config.learning_rate},
        {"alpha", canonical_plan(config).alpha},
        {"temperature", config.temperature},
        {"seed", config.seed}}},
      {"config", xkd::to_json(config)},
      {"classes", result.class_names},
      {"weighted_f1", result.weighted_f1},
      {"accuracy", result.accuracy},
      {"per_class_f1", per_class},
      {"confusion_matrix", cm},
      {"best_epoch", best_epoch},
      {"best_val_weighted_f1",
       best_val_f1 ? nlohmann::json(*best_val_f1) : nlohmann::json()},
  };
}

ExperimentReport run_experiment(const DistillConfig& config,
                                const Dataset& dataset,
                                const SegModel* teacher) {
  validate(config);
  const ExecutionPlan plan = canonical_plan(config);
  if (plan.needs_teacher) {
    if (teacher == nullptr) {
      throw ConfigError("mode " + std::string(mode_name(config.mode)) +
                        " requires a teacher checkpoint");
    }
    if (!(teacher->config() == config.model)) {
      throw ConfigError("teacher model config differs from the student's");
    }
  }
  const auto scheme = config.class_scheme;
  const int t = config.epochs_per_window;
  const auto train = make_windows(dataset, dataset.split.train, scheme, t);
  const auto val = make_windows(dataset, dataset.split.val, scheme, t);
  const auto test = make_windows(dataset, dataset.split.test, scheme, t);

  SegModel student(config.model, config.seed);
  TrainLog feature_log;
  if (plan.feature_step) {
    auto fr = feature_train(student, *teacher, train, config);
    student = std::move(fr.model);
    feature_log = std::move(fr.log);
  }
  TrainResult tr = fit(std::move(student), plan.needs_teacher ? teacher : nullptr,
                       train, val, plan.student_modality,
                       {plan.alpha, config.temperature}, config);

  const ConfusionMatrix cm =
      evaluate(tr.model, test, plan.student_modality, scheme);
  return ExperimentReport{config,
                          summarize(std::string(mode_name(config.mode)), cm),
                          cm,
                          tr.best_val_f1,
                          tr.best_epoch,
                          std::move(feature_log),
                          std::move(tr.log),
                          std::move(tr.model)};
}

std::vector<FeatureRow> export_bottleneck_features(
    const SegModel& model, std::span<const WindowPair> windows,
    Modality modality, std::string_view model_tag) {
  const auto bottleneck = static_cast<std::size_t>(model.config().depth);
  std::vector<FeatureRow> rows;
  for (const auto& w : windows) {
    const auto& b = view(w, modality);
    const ForwardPass pass = model.forward(b.inputs, Mode::kEval);
    const Matrix& map = pass.taps.front()[bottleneck].map;
    FeatureRow row;
    row.model_tag = model_tag;
    row.subject = b.subject_id;
    row.window_index = b.window_index;
    const auto pred = argmax_rows(pass.logits.front());
    for (std::size_t t = 0; t < b.labels.size(); ++t) {
      if (!b.mask[t]) continue;
      row.predicted.push_back(pred[t]);
      row.truth.push_back(b.labels[t]);
    }
    row.values.reserve(static_cast<std::size_t>(map.size()));
    for (Eigen::Index c = 0; c < map.rows(); ++c) {
      for (Eigen::Index l = 0; l < map.cols(); ++l) row.values.push_back(map(c, l));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string feature_csv(std::span<const FeatureRow> rows, StageSchema scheme) {
  auto tokens = [&](const std::vector<int>& labels) {
    std::string s;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i) s += '|';
      s += stage_token(class_stage(labels[i], scheme));
    }
    return s;
  };
  std::ostringstream out;
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.values.size());
  out << "model,subject,window,predicted,true";
  for (std::size_t i = 0; i < width; ++i) out << ",f" << i;
  out << '\n';
  for (const auto& r : rows) {
    out << r.model_tag << ',' << r.subject << ',' << r.window_index << ','
        << tokens(r.predicted) << ',' << tokens(r.truth);
    for (double v : r.values) out << ',' << number(v);
    out << '\n';
  }
  return out.str();
}

}  // namespace xkd
