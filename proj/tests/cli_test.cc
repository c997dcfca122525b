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

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "support.h"
#include "xkd/cli.h"
#include "xkd/dataset_io.h"
#include "xkd/record_io.h"
#include "xkd/synth.h"

namespace xkd {
namespace {

using testing::slurp;
using testing::spit;
using testing::TempDir;
namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result xkd(std::vector<std::string> args) {
  args.insert(args.begin(), "xkd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string small_config_file(const TempDir& dir) {
  const auto path = (dir / "small.json").string();
  nlohmann::json j = to_json(testing::small_config());
  j.erase("mode");
  j.erase("class_scheme");
  j["model"].erase("num_classes");
  spit(path, j.dump(2));
  return path;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

TEST_CASE("help and usage errors") {
  const Result top = xkd({"--help"});
  CHECK(top.code == kExitOk);
  for (const char* sub : {"prepare", "synth", "train", "distill", "eval", "predict", "export-features"}) {
    CHECK(top.out.find(sub) != std::string::npos);
    const Result r = xkd({sub, "--help"});
    CHECK(r.code == kExitOk);
    for (const char* flag : {"--config", "--seed", "--out", "--force"}) {
      INFO(sub, " ", flag);
      CHECK(r.out.find(flag) != std::string::npos);
    }
  }
  CHECK(xkd({}).code == kExitUsage);
  CHECK(xkd({"frobnicate"}).code == kExitUsage);
  CHECK(xkd({"train", "--bogus"}).code == kExitUsage);
  CHECK(xkd({"train", "--mode", "SD_CL", "--out", "x"}).code == kExitUsage);
  CHECK(xkd({"eval"}).code == kExitUsage);
}

TEST_CASE("synth, train, distill, eval, predict and export") {
  TempDir dir;
  const std::string data = (dir / "data").string();
  const std::string cfg = small_config_file(dir);
  REQUIRE(xkd({"synth", "--out", data, "--subjects", "4", "--epochs-per-subject", "35", "--rate", "20",
               "--seed", "11"}).code == kExitOk);
  CHECK(fs::exists(fs::path(data) / "manifest.json"));
  const Result again = xkd({"synth", "--out", data, "--rate", "20"});
  CHECK(again.code == kExitRuntime);
  CHECK(again.err.find("--force") != std::string::npos);

  const std::string run1 = (dir / "runs/teacher").string();
  const Result t = xkd({"train", "--config", cfg, "--data", data, "--out", run1});
  REQUIRE(t.code == kExitOk);
  for (const char* f : {"config.json", "run_id", "train_log.csv", "best.ckpt", "report.json", "report.csv"}) {
    CHECK(fs::exists(fs::path(run1) / f));
  }
  CHECK_FALSE(fs::exists(fs::path(run1) / ".xkd.lock"));
  CHECK(slurp(fs::path(run1) / "report.csv").rfind("mode,classes,weighted_f1,accuracy,f1_W,f1_L,f1_D,f1_R\nEEG_BASELINE,", 0) == 0);
  CHECK(lines(slurp(fs::path(run1) / "train_log.csv")) == 7);
  CHECK(slurp(fs::path(run1) / "run_id").size() == 17);

  CHECK(xkd({"train", "--config", cfg, "--data", data, "--out", run1}).code == kExitRuntime);
  const std::string run2 = (dir / "runs/again").string();
  REQUIRE(xkd({"train", "--config", cfg, "--data", data, "--out", run2}).code == kExitOk);
  for (const char* f : {"config.json", "run_id", "train_log.csv", "best.ckpt", "report.json", "report.csv"}) {
    INFO(f);
    CHECK(slurp(fs::path(run1) / f) == slurp(fs::path(run2) / f));
  }
  REQUIRE(xkd({"train", "--config", cfg, "--data", data, "--out", run2, "--force", "--seed", "9"}).code == kExitOk);
  CHECK(slurp(fs::path(run1) / "run_id") != slurp(fs::path(run2) / "run_id"));

  const std::string ckpt = (fs::path(run1) / "best.ckpt").string();
  const Result ev = xkd({"eval", "--checkpoint", ckpt, "--data", data});
  REQUIRE(ev.code == kExitOk);
  const auto report = nlohmann::json::parse(ev.out);
  CHECK(report.contains("weighted_f1"));
  CHECK(report["mode"] == "EEG_BASELINE");
  CHECK(report["scored_epochs"] == 35);
  const std::string ev_path = (dir / "eval.json").string();
  CHECK(xkd({"eval", "--checkpoint", ckpt, "--data", data, "--split", "val", "--out", ev_path}).code == kExitOk);
  CHECK(nlohmann::json::parse(slurp(ev_path))["split"] == "val");
  CHECK(xkd({"eval", "--checkpoint", ckpt, "--data", data, "--out", ev_path}).code == kExitRuntime);

  const Result no_teacher = xkd({"distill", "--config", cfg, "--data", data, "--out", (dir / "runs/s").string()});
  CHECK(no_teacher.code == kExitUsage);
  CHECK(no_teacher.err.find("--teacher") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "runs/s"));
  const std::string run3 = (dir / "runs/student").string();
  const Result d = xkd({"distill", "--config", cfg, "--data", data, "--out", run3, "--teacher", ckpt});
  REQUIRE(d.code == kExitOk);
  CHECK(fs::exists(fs::path(run3) / "step1_log.csv"));
  const auto dj = nlohmann::json::parse(slurp(fs::path(run3) / "report.json"));
  CHECK(dj["header"]["mode"] == "AT_SD_CL");
  const Result sd = xkd({"distill", "--config", cfg, "--data", data, "--out", (dir / "runs/sd").string(),
                         "--teacher", ckpt, "--mode", "SD_CL", "--alpha", "0.25"});
  REQUIRE(sd.code == kExitOk);
  CHECK_FALSE(fs::exists(dir / "runs/sd/step1_log.csv"));
  CHECK(nlohmann::json::parse(slurp(dir / "runs/sd/report.json"))["header"]["alpha"] == 0.25);

  TempDir rec;
  const auto subs = synth_dataset({3, 10, 4, 1, 20, 30});
  write_rawbin(rec / "night.xkd", subs[0].ecg);
  const Result p = xkd({"predict", "--checkpoint", ckpt, "--record", (rec / "night.xkd").string(), "--period", "20"});
  REQUIRE(p.code == kExitOk);
  CHECK(lines(p.out) == 15);
  CHECK(p.out.rfind("0,0,20,", 0) == 0);
  const Result p30 = xkd({"predict", "--checkpoint", ckpt, "--record", (rec / "night.xkd").string()});
  CHECK(lines(p30.out) == 10);
  CHECK(xkd({"predict", "--checkpoint", ckpt, "--record", (rec / "night.xkd").string(), "--period", "0.01"}).code ==
        kExitRuntime);

  const Result ex = xkd({"export-features", "--checkpoint", ckpt, "--data", data, "--tag", "teacher"});
  REQUIRE(ex.code == kExitOk);
  CHECK(ex.out.rfind("model,subject,window,predicted,true,f0,", 0) == 0);
  CHECK(lines(ex.out) == 2);
  CHECK(ex.out.find("\nteacher,") != std::string::npos);

  ::setenv("XKD_DATA_DIR", data.c_str(), 1);
  const Result env = xkd({"eval", "--checkpoint", ckpt});
  ::unsetenv("XKD_DATA_DIR");
  CHECK(env.code == kExitOk);
  CHECK(env.out == ev.out);
}

TEST_CASE("run directories are locked") {
  TempDir dir;
  fs::create_directories(dir / "busy");
  spit(dir / "busy/.xkd.lock", "");
  const Result r = xkd({"synth", "--out", (dir / "busy").string(), "--force", "--rate", "20"});
  CHECK(r.code == kExitRuntime);
  CHECK(r.err.find("locked") != std::string::npos);
}

TEST_CASE("prepare aggregates per-subject failures") {
  TempDir dir;
  const fs::path raw = dir / "raw";
  fs::create_directories(raw);
  const auto subs = synth_dataset({3, 10, 4, 5, 256, 30});

  // Subject a: one EDF with both channels and 20 s annotations.
  testing::write_edf(raw / "a.edf", {{"C3-A2", subs[0].eeg.samples}, {"ECG-Lead1", subs[0].ecg.samples}}, 256);
  std::vector<Stage> st;
  for (int k = 0; k < 15; ++k) st.push_back(static_cast<Stage>(k % 6));
  write_annotations(raw / "a.csv", make_hypnogram("a", 20, StageSchema::kRawRK, st));
  for (int s : {1, 2}) {
    const std::string id = s == 1 ? "b" : "c";
    write_rawbin(raw / (id + ".eeg.xkd"), subs[static_cast<std::size_t>(s)].eeg);
    write_rawbin(raw / (id + ".ecg.xkd"), subs[static_cast<std::size_t>(s)].ecg);
    write_annotations(raw / (id + ".csv"), subs[static_cast<std::size_t>(s)].raw);
  }

  const fs::path out = dir / "prepared";
  const Result ok = xkd({"prepare", "--raw", raw.string(), "--out", out.string(), "--rate", "20"});
  INFO(ok.err);
  REQUIRE(ok.code == kExitOk);
  const Manifest m = read_manifest(out);
  CHECK(m.subjects.size() == 3);
  CHECK(m.failures.empty());
  CHECK(m.split.train.size() + m.split.val.size() + m.split.test.size() == 3);
  CHECK(m.sample_rate == 20);
  const Dataset ds = load_dataset(out);
  REQUIRE(ds.subjects.size() == 3);
  CHECK(ds.subjects[0].hypnogram.size() == 13);
  CHECK(ds.subjects[0].hypnogram.epoch_duration == 30);
  CHECK(ds.subjects[0].eeg.samples.size() == 13 * 600);
  CHECK(ds.subjects[1].eeg.samples.size() == 10 * 600);
  CHECK(fs::exists(out / "b.FOUR_CLASS.csv"));
  CHECK(read_annotations(out / "a.FOUR_CLASS.csv", "a", StageSchema::kFourClass).size() == 13);

  const Result refused = xkd({"prepare", "--raw", raw.string(), "--out", out.string(), "--rate", "20"});
  CHECK(refused.code == kExitRuntime);
  CHECK(refused.err.find("refusing") != std::string::npos);

  const std::string bytes = slurp(raw / "c.ecg.xkd");
  spit(raw / "c.ecg.xkd", bytes.substr(0, bytes.size() / 2));
  const Result bad = xkd({"prepare", "--raw", raw.string(), "--out", out.string(), "--rate", "20", "--force"});
  CHECK(bad.code != kExitOk);
  CHECK(bad.err.find("c:") != std::string::npos);
  const Manifest mb = read_manifest(out);
  CHECK(mb.subjects.size() == 2);
  REQUIRE_FALSE(mb.failures.empty());
  CHECK(mb.failures.front().first == "c");
  CHECK_FALSE(fs::exists(out / "c.eeg.xkd"));
}

}  // namespace
}  // namespace xkd
