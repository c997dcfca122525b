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

#include "xkd/cli.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "xkd/checkpoint.h"
#include "xkd/dataset_io.h"
#include "xkd/distill.h"
#include "xkd/errors.h"
#include "xkd/metrics.h"
#include "xkd/record_io.h"
#include "xkd/synth.h"

namespace xkd {

namespace {

namespace fs = std::filesystem;

class UsageError : public Error {
 public:
  using Error::Error;
};

class RunError : public Error {
 public:
  using Error::Error;
};

constexpr char kLockName[] = ".xkd.lock";

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  bool force = false;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

void add_common(CLI::App* app, Common* c, const std::string& out_help) {
  app->add_option("--config", c->config,
                  "Experiment config (JSON); flags override its values")
      ->check(CLI::ExistingFile);
  c->seed_opt = app->add_option("--seed", c->seed, "Random seed");
  c->out_opt = app->add_option("--out", c->out, out_help);
  app->add_flag("--force", c->force, "Overwrite existing outputs");
}

std::string require(const std::string& value, const std::string& what) {
  if (value.empty()) throw UsageError(what);
  return value;
}

// Creates (or, with force, empties) a run directory and holds a lock file in
// it until destruction.
class OutputDir {
 public:
  OutputDir(fs::path dir, bool force) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
    lock_ = dir_ / kLockName;
    fd_ = ::open(lock_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      throw RunError(errno == EEXIST
                         ? "'" + dir_.string() + "' is locked by another invocation (" +
                               lock_.string() + ")"
                         : "cannot create '" + lock_.string() + "'");
    }
    std::vector<fs::path> existing;
    for (const auto& e : fs::directory_iterator(dir_)) {
      if (e.path().filename() != kLockName) existing.push_back(e.path());
    }
    if (!existing.empty()) {
      if (!force) {
        release();
        throw RunError("refusing to overwrite '" + dir_.string() + "' (use --force)");
      }
      for (const auto& p : existing) fs::remove_all(p);
    }
  }
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;
  ~OutputDir() { release(); }

  const fs::path& path() const { return dir_; }

 private:
  void release() {
    if (fd_ < 0) return;
    ::close(fd_);
    std::error_code ec;
    fs::remove(lock_, ec);
    fd_ = -1;
  }

  fs::path dir_;
  fs::path lock_;
  int fd_ = -1;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw RunError("cannot write '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw RunError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Standard output when `path` is empty.
void emit(const std::string& path, const std::string& text, bool force,
          std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  if (fs::exists(path) && !force) {
    throw RunError("refusing to overwrite '" + path + "' (use --force)");
  }
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  write_text(path, text);
}

std::string run_id(const std::string& material) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : material) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json read_config_file(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

bool model_sets(const nlohmann::json& file, const char* key) {
  return file.contains("model") && file["model"].is_object() &&
         file["model"].contains(key);
}

const std::vector<std::string>& split_ids(const DatasetSplit& split,
                                          const std::string& name) {
  if (name == "train") return split.train;
  if (name == "val") return split.val;
  return split.test;
}

Modality checkpoint_modality(const Checkpoint& ck, const std::string& flag) {
  if (flag == "eeg") return Modality::kEeg;
  if (flag == "ecg") return Modality::kEcg;
  return ck.meta.mode == mode_name(ExperimentMode::kEegBaseline) ? Modality::kEeg
                                                                 : Modality::kEcg;
}

std::vector<WindowPair> checkpoint_windows(const Checkpoint& ck,
                                           const std::string& data,
                                           const std::string& split,
                                           int window) {
  const Manifest manifest = read_manifest(data);
  if (manifest.sample_rate != ck.meta.sample_rate) {
    throw ConfigError("dataset is sampled at " + std::to_string(manifest.sample_rate) +
                      " Hz but the checkpoint expects " +
                      std::to_string(ck.meta.sample_rate) + " Hz");
  }
  const Dataset ds = load_dataset(data);
  return make_windows(ds, split_ids(ds.split, split),
                      parse_schema(ck.meta.class_scheme), window);
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  Common common;
  SynthParams params;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SynthParams p = a.params;
  p.seed = a.common.seed;
  const auto subjects = synth_dataset(p);
  OutputDir dir(require(a.common.out, "synth needs --out or XKD_DATA_DIR"),
                a.common.force);
  const Manifest m = write_synth_dataset(dir.path(), subjects, p.seed);
  out << "wrote " << m.subjects.size() << " subjects to " << dir.path().string()
      << " (train " << m.split.train.size() << ", val " << m.split.val.size()
      << ", test " << m.split.test.size() << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------- prepare

struct PrepareArgs {
  Common common;
  std::string raw;
  std::string scheme = "FOUR_CLASS";
  double rate = kCanonicalRate;
  std::string eeg_channel = "C3-A2";
  std::string ecg_channel = "ECG-Lead1";
  CLI::Option* eeg_opt = nullptr;
  CLI::Option* ecg_opt = nullptr;
};

fs::path find_signal(const fs::path& raw, const std::string& id,
                     const std::string& modality) {
  for (const char* ext : {".xkd", ".rawbin", ".bin", ".edf"}) {
    const fs::path p = raw / (id + "." + modality + ext);
    if (fs::exists(p)) return p;
  }
  const fs::path shared = raw / (id + ".edf");
  if (fs::exists(shared)) return shared;
  throw IngestError("no " + modality + " signal file for subject '" + id + "'");
}

SignalRecord load_signal(const fs::path& path, const std::string& id,
                         const std::string& channel, bool channel_given) {
  const RecordFormat format = format_from_path(path);
  std::optional<std::string_view> ch;
  if (format == RecordFormat::kEdf || channel_given) ch = channel;
  return load_record(path, format, ch, id);
}

void prepare_subject(const PrepareArgs& a, const fs::path& raw,
                     const fs::path& out, const std::string& id,
                     StageSchema scheme) {
  Hypnogram hyp = read_annotations(raw / (id + ".csv"), id);
  SignalRecord eeg = resample(
      load_signal(find_signal(raw, id, "eeg"), id, a.eeg_channel, a.eeg_opt->count() > 0),
      a.rate);
  SignalRecord ecg = resample(
      load_signal(find_signal(raw, id, "ecg"), id, a.ecg_channel, a.ecg_opt->count() > 0),
      a.rate);
  const std::size_t n = std::min(eeg.samples.size(), ecg.samples.size());
  if (std::max(eeg.samples.size(), ecg.samples.size()) - n >
      static_cast<std::size_t>(a.rate)) {
    throw AlignmentError("EEG and ECG durations of '" + id + "' differ");
  }
  eeg.samples.resize(n);
  ecg.samples.resize(n);
  if (hyp.epoch_duration == 20.0) {
    auto [h, e] = convert_epoch_duration(hyp, eeg);
    auto [h2, c] = convert_epoch_duration(hyp, ecg);
    hyp = std::move(h);
    eeg = std::move(e);
    ecg = std::move(c);
  }
  if (!hyp.stages.empty()) {
    const double end = hyp.offset_seconds +
                       static_cast<double>(hyp.epoch_slots.back() + 1) * hyp.epoch_duration;
    if (std::llround(end * a.rate) > static_cast<long long>(eeg.samples.size())) {
      throw AlignmentError("annotations of '" + id + "' extend past the signal");
    }
  }
  const Hypnogram merged = merge_stages(hyp, scheme);
  write_rawbin(out / (id + ".eeg.xkd"), eeg);
  write_rawbin(out / (id + ".ecg.xkd"), ecg);
  write_annotations(out / (id + ".csv"), hyp);
  write_annotations(out / (id + "." + std::string(schema_name(scheme)) + ".csv"), merged);
}

int cmd_prepare(const PrepareArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path raw = a.raw;
  if (!fs::is_directory(raw)) throw RunError("'" + a.raw + "' is not a directory");
  const StageSchema scheme = parse_schema(a.scheme);
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(raw)) {
    if (e.path().extension() == ".csv") ids.push_back(e.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) throw RunError("no annotation files in '" + a.raw + "'");

  OutputDir dir(require(a.common.out, "prepare needs --out or XKD_DATA_DIR"),
                a.common.force);
  Manifest m;
  m.sample_rate = a.rate;
  m.scheme = schema_name(scheme);
  std::vector<std::string> prepared;
  for (const auto& id : ids) {
    try {
      prepare_subject(a, raw, dir.path(), id, scheme);
      m.subjects.push_back({id, id + ".eeg.xkd", id + ".ecg.xkd", id + ".csv"});
      prepared.push_back(id);
    } catch (const Error& e) {
      m.failures.emplace_back(id, e.what());
      err << "prepare: " << id << ": " << e.what() << '\n';
    }
  }
  try {
    m.split = split_subjects(prepared, a.common.seed);
  } catch (const SplitError& e) {
    m.failures.emplace_back("<split>", e.what());
    err << "prepare: " << e.what() << '\n';
  }
  m.split.seed = a.common.seed;
  write_manifest(dir.path(), m);
  out << "prepared " << prepared.size() << " of " << ids.size() << " subjects into "
      << dir.path().string() << '\n';
  return m.failures.empty() ? kExitOk : kExitRuntime;
}

// ---------------------------------------------------------------- train / distill

struct RunArgs {
  Common common;
  std::string data;
  std::string mode;
  std::string teacher;
  std::string scheme;
  int epochs = 0;
  int batch_size = 0;
  double learning_rate = 0.0;
  double alpha = 0.0;
  double temperature = 0.0;
  int step1_epochs = 0;
  int window = 0;
  CLI::Option* mode_opt = nullptr;
  CLI::Option* scheme_opt = nullptr;
  CLI::Option* epochs_opt = nullptr;
  CLI::Option* batch_opt = nullptr;
  CLI::Option* lr_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* temperature_opt = nullptr;
  CLI::Option* step1_opt = nullptr;
  CLI::Option* window_opt = nullptr;
};

void add_run_options(CLI::App* app, RunArgs* a, bool distill) {
  add_common(app, &a->common, "Run directory (created; must not exist unless --force)");
  app->add_option("--data", a->data, "Prepared dataset directory")->envname("XKD_DATA_DIR");
  std::vector<std::string> modes;
  for (auto m : {ExperimentMode::kEegBaseline, ExperimentMode::kEcgBaseline,
                 ExperimentMode::kSdCl, ExperimentMode::kAtCl, ExperimentMode::kAtSdCl}) {
    if (distill || m == ExperimentMode::kEegBaseline || m == ExperimentMode::kEcgBaseline) {
      modes.emplace_back(mode_name(m));
    }
  }
  a->mode_opt = app->add_option("--mode", a->mode,
                                distill ? "Experiment mode (default AT_SD_CL)"
                                        : "Baseline mode (default EEG_BASELINE)")
                    ->check(CLI::IsMember(modes));
  a->scheme_opt = app->add_option("--scheme", a->scheme, "Class scheme")
                      ->check(CLI::IsMember({"FOUR_CLASS", "THREE_CLASS"}));
  a->epochs_opt = app->add_option("--epochs", a->epochs, "Training epochs")
                      ->check(CLI::NonNegativeNumber);
  a->batch_opt = app->add_option("--batch-size", a->batch_size, "Windows per batch")
                     ->check(CLI::PositiveNumber);
  a->lr_opt = app->add_option("--lr", a->learning_rate, "Adam learning rate")
                  ->check(CLI::PositiveNumber);
  a->window_opt = app->add_option("--window", a->window, "Epochs per window (T)")
                      ->check(CLI::PositiveNumber);
  if (distill) {
    app->add_option("--teacher", a->teacher, "Teacher checkpoint (EEG_BASELINE run)")
        ->check(CLI::ExistingFile);
    a->alpha_opt = app->add_option("--alpha", a->alpha, "Distillation weight")
                       ->check(CLI::Range(0.0, 1.0));
    a->temperature_opt = app->add_option("--temperature", a->temperature,
                                         "Softmax temperature")
                             ->check(CLI::PositiveNumber);
    a->step1_opt = app->add_option("--step1-epochs", a->step1_epochs,
                                   "Feature-training epoch budget")
                       ->check(CLI::NonNegativeNumber);
  }
}

int cmd_run(const RunArgs& a, bool distill, std::ostream& out) {
  const nlohmann::json file = read_config_file(a.common.config);
  DistillConfig config = distill_config_from_json(file);
  if (a.mode_opt->count()) {
    config.mode = parse_mode(a.mode);
  } else if (!file.contains("mode")) {
    config.mode = distill ? ExperimentMode::kAtSdCl : ExperimentMode::kEegBaseline;
  }
  const ExecutionPlan plan = canonical_plan(config);
  if (!distill && plan.needs_teacher) {
    throw UsageError("train runs the baselines; use distill for " +
                     std::string(mode_name(config.mode)));
  }
  if (plan.needs_teacher && a.teacher.empty()) {
    throw UsageError("mode " + std::string(mode_name(config.mode)) + " requires --teacher");
  }
  const std::string data = require(a.data, "no dataset given (--data or XKD_DATA_DIR)");
  const std::string out_dir = require(a.common.out, "missing --out run directory");

  std::optional<Checkpoint> teacher;
  if (!a.teacher.empty()) {
    teacher = load_checkpoint(a.teacher);
    if (!file.contains("model")) config.model = teacher->model.config();
    if (!file.contains("class_scheme")) {
      config.class_scheme = parse_schema(teacher->meta.class_scheme);
    }
    if (!file.contains("sample_rate")) config.sample_rate = teacher->meta.sample_rate;
  }
  const Manifest manifest = read_manifest(data);
  const bool model_from_teacher = teacher && !file.contains("model");
  if (!teacher && !file.contains("sample_rate")) {
    config.sample_rate = manifest.sample_rate;
    if (!model_sets(file, "samples_per_epoch")) {
      config.model.samples_per_epoch = static_cast<int>(std::lround(manifest.sample_rate * 30));
    }
  }
  if (a.scheme_opt->count()) config.class_scheme = parse_schema(a.scheme);
  if (!model_from_teacher && !model_sets(file, "num_classes")) {
    config.model.num_classes = class_count(config.class_scheme);
  }
  if (a.common.seed_opt->count()) config.seed = a.common.seed;
  if (a.epochs_opt->count()) config.epochs = a.epochs;
  if (a.batch_opt->count()) config.batch_size = a.batch_size;
  if (a.lr_opt->count()) config.learning_rate = a.learning_rate;
  if (a.window_opt->count()) config.epochs_per_window = a.window;
  if (distill) {
    if (a.alpha_opt->count()) config.alpha = a.alpha;
    if (a.temperature_opt->count()) config.temperature = a.temperature;
    if (a.step1_opt->count()) config.step1_epochs = a.step1_epochs;
  }
  validate(config);
  if (manifest.sample_rate != config.sample_rate) {
    throw ConfigError("dataset is sampled at " + std::to_string(manifest.sample_rate) +
                      " Hz but the config expects " + std::to_string(config.sample_rate) +
                      " Hz");
  }
  const Dataset dataset = load_dataset(data);

  const std::string config_text = to_json(config).dump(2) + "\n";
  std::string material = config_text + read_text(fs::path(data) / kManifestName);
  if (teacher) material += std::to_string(parameter_checksum(teacher->model));
  const std::string id = run_id(material);

  OutputDir dir(out_dir, a.common.force);
  write_text(dir.path() / "config.json", config_text);
  write_text(dir.path() / "run_id", id + "\n");
  const ExperimentReport report =
      run_experiment(config, dataset, teacher ? &teacher->model : nullptr);
  if (plan.feature_step) write_text(dir.path() / "step1_log.csv", report.feature_log.csv());
  write_text(dir.path() / "train_log.csv", report.log.csv());
  save_checkpoint(report.model,
                  {report.best_epoch, report.best_val_f1, std::string(mode_name(config.mode)),
                   config.sample_rate, std::string(schema_name(config.class_scheme))},
                  dir.path() / "best.ckpt");
  nlohmann::json rj = report.to_json();
  rj["run_id"] = id;
  write_text(dir.path() / "report.json", rj.dump(2) + "\n");
  const std::vector<ModeResult> rows{report.result};
  write_text(dir.path() / "report.csv", report_csv(rows));
  out << "run " << id << ' ' << mode_name(config.mode) << ' '
      << schema_name(config.class_scheme) << ": test weighted_f1 " << std::fixed
      << std::setprecision(4) << report.result.weighted_f1 << ", accuracy "
      << report.result.accuracy << " (best epoch " << report.best_epoch << ")\n"
      << format_summary_table(rows);
  return kExitOk;
}

// ---------------------------------------------------------------- eval / export

struct CheckpointArgs {
  Common common;
  std::string checkpoint;
  std::string data;
  std::string split = "test";
  std::string modality;
  std::string tag;
  int window = 35;
};

void add_checkpoint_options(CLI::App* app, CheckpointArgs* a, const std::string& out_help) {
  add_common(app, &a->common, out_help);
  app->add_option("--checkpoint", a->checkpoint, "Model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  app->add_option("--data", a->data, "Prepared dataset directory")->envname("XKD_DATA_DIR");
  app->add_option("--split", a->split, "Dataset split")->capture_default_str()
      ->check(CLI::IsMember({"train", "val", "test"}));
  app->add_option("--modality", a->modality,
                  "Input modality (default: eeg for EEG_BASELINE checkpoints, else ecg)")
      ->check(CLI::IsMember({"eeg", "ecg"}));
  app->add_option("--window", a->window, "Epochs per window (T)")->capture_default_str()
      ->check(CLI::PositiveNumber);
}

int cmd_eval(const CheckpointArgs& a, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const auto windows = checkpoint_windows(
      ck, require(a.data, "no dataset given (--data or XKD_DATA_DIR)"), a.split, a.window);
  const StageSchema scheme = parse_schema(ck.meta.class_scheme);
  const ConfusionMatrix cm =
      evaluate(ck.model, windows, checkpoint_modality(ck, a.modality), scheme);
  const ModeResult r = summarize(ck.meta.mode, cm);
  nlohmann::json matrix = nlohmann::json::array();
  for (int t = 0; t < cm.num_classes; ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (int p = 0; p < cm.num_classes; ++p) row.push_back(cm.at(t, p));
    matrix.push_back(row);
  }
  nlohmann::json per_class = nlohmann::json::object();
  for (std::size_t c = 0; c < r.class_names.size(); ++c) {
    per_class[r.class_names[c]] = r.per_class_f1[c];
  }
  const nlohmann::json j = {{"mode", r.mode},
                            {"class_scheme", ck.meta.class_scheme},
                            {"split", a.split},
                            {"scored_epochs", cm.total()},
                            {"classes", r.class_names},
                            {"weighted_f1", r.weighted_f1},
                            {"accuracy", r.accuracy},
                            {"per_class_f1", per_class},
                            {"confusion_matrix", matrix}};
  emit(a.common.out, j.dump(2) + "\n", a.common.force, out);
  return kExitOk;
}

int cmd_export(const CheckpointArgs& a, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const auto windows = checkpoint_windows(
      ck, require(a.data, "no dataset given (--data or XKD_DATA_DIR)"), a.split, a.window);
  const std::string tag = a.tag.empty() ? fs::path(a.checkpoint).stem().string() : a.tag;
  const auto rows =
      export_bottleneck_features(ck.model, windows, checkpoint_modality(ck, a.modality), tag);
  emit(a.common.out, feature_csv(rows, parse_schema(ck.meta.class_scheme)), a.common.force,
       out);
  return kExitOk;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  Common common;
  std::string checkpoint;
  std::string record;
  std::string channel;
  double period = 30.0;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const fs::path path = a.record;
  std::optional<std::string_view> channel;
  if (!a.channel.empty()) channel = a.channel;
  SignalRecord record =
      load_record(path, format_from_path(path), channel, path.stem().string());
  if (record.sample_rate != ck.meta.sample_rate) {
    record = resample(record, ck.meta.sample_rate);
  }
  const std::vector<int> labels = predict_at_frequency(ck.model, record, a.period);
  const StageSchema scheme = parse_schema(ck.meta.class_scheme);
  std::ostringstream csv;
  csv << std::setprecision(12);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    csv << k << ',' << static_cast<double>(k) * a.period << ',' << a.period << ','
        << stage_token(class_stage(labels[k], scheme)) << '\n';
  }
  emit(a.common.out, csv.str(), a.common.force, out);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-modal EEG-to-ECG knowledge distillation for sleep staging", "xkd"};
  app.require_subcommand(1);

  PrepareArgs prep;
  auto* prepare = app.add_subcommand(
      "prepare", "Resample, convert and merge raw recordings into a dataset");
  add_common(prepare, &prep.common, "Dataset directory to create");
  prep.common.out_opt->envname("XKD_DATA_DIR");
  prepare->add_option("--raw", prep.raw,
                      "Directory of <id>.csv annotations with <id>.eeg.*/<id>.ecg.* "
                      "or <id>.edf signals")
      ->required();
  prepare->add_option("--scheme", prep.scheme, "Merged class scheme")->capture_default_str()
      ->check(CLI::IsMember({"FOUR_CLASS", "THREE_CLASS"}));
  prepare->add_option("--rate", prep.rate, "Target sample rate (Hz)")->capture_default_str()
      ->check(CLI::PositiveNumber);
  prep.eeg_opt = prepare->add_option("--eeg-channel", prep.eeg_channel,
                                     "EEG channel label")->capture_default_str();
  prep.ecg_opt = prepare->add_option("--ecg-channel", prep.ecg_channel,
                                     "ECG channel label")->capture_default_str();

  SynthArgs syn;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic two-modality dataset");
  add_common(synth, &syn.common, "Dataset directory to create");
  syn.common.out_opt->envname("XKD_DATA_DIR");
  synth->add_option("--subjects", syn.params.n_subjects, "Number of subjects")->capture_default_str()
      ->check(CLI::Range(3, 100000));
  synth->add_option("--epochs-per-subject", syn.params.epochs_per_subject,
                    "30 s epochs per subject")->capture_default_str()
      ->check(CLI::PositiveNumber);
  synth->add_option("--classes", syn.params.num_classes, "Class count (3 or 4)")->capture_default_str()
      ->check(CLI::IsMember({3, 4}));
  synth->add_option("--rate", syn.params.sample_rate, "Sample rate (Hz)")->capture_default_str()
      ->check(CLI::PositiveNumber);

  RunArgs tr;
  auto* train = app.add_subcommand("train", "Train a baseline (teacher or ECG) model");
  add_run_options(train, &tr, false);

  RunArgs ds;
  auto* distill = app.add_subcommand("distill", "Train an ECG student against a teacher");
  add_run_options(distill, &ds, true);

  CheckpointArgs ev;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  add_checkpoint_options(eval, &ev, "Report file (default: standard output)");

  PredictArgs pr;
  auto* predict = app.add_subcommand("predict", "Stage one record at a chosen label period");
  add_common(predict, &pr.common, "Hypnogram CSV file (default: standard output)");
  predict->add_option("--checkpoint", pr.checkpoint, "Model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  predict->add_option("--record", pr.record, "Signal file (.xkd or .edf)")
      ->required()
      ->check(CLI::ExistingFile);
  predict->add_option("--channel", pr.channel, "Channel label (required for EDF)");
  predict->add_option("--period", pr.period, "Seconds per output label")->capture_default_str()
      ->check(CLI::PositiveNumber);

  CheckpointArgs ex;
  auto* exp = app.add_subcommand("export-features", "Export bottleneck activations as CSV");
  add_checkpoint_options(exp, &ex, "Feature CSV file (default: standard output)");
  exp->add_option("--tag", ex.tag, "Model tag column (default: checkpoint file stem)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*prepare) return cmd_prepare(prep, out, err);
    if (*synth) return cmd_synth(syn, out);
    if (*train) return cmd_run(tr, false, out);
    if (*distill) return cmd_run(ds, true, out);
    if (*eval) return cmd_eval(ev, out);
    if (*predict) return cmd_predict(pr, out);
    if (*exp) return cmd_export(ex, out);
  } catch (const UsageError& e) {
    err << "xkd: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "xkd: error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace xkd
