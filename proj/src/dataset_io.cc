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

#include "xkd/dataset_io.h"

#include <fstream>

#include "xkd/errors.h"
#include "xkd/record_io.h"

namespace xkd {

namespace {

nlohmann::json split_json(const DatasetSplit& s) {
  return {{"seed", s.seed}, {"train", s.train}, {"val", s.val}, {"test", s.test}};
}

}  // namespace

void write_manifest(const std::filesystem::path& dir, const Manifest& m) {
  nlohmann::json subjects = nlohmann::json::array();
  for (const auto& e : m.subjects) {
    subjects.push_back({{"id", e.id},
                        {"eeg", e.eeg},
                        {"ecg", e.ecg},
                        {"annotations", e.annotations}});
  }
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& [id, reason] : m.failures) {
    failures.push_back({{"id", id}, {"error", reason}});
  }
  const nlohmann::json j = {{"sample_rate", m.sample_rate},
                            {"epoch_seconds", 30.0},
                            {"scheme", m.scheme},
                            {"split", split_json(m.split)},
                            {"subjects", subjects},
                            {"failures", failures}};
  std::ofstream out(dir / kManifestName, std::ios::trunc);
  if (!out) throw IngestError("cannot write manifest in '" + dir.string() + "'");
  out << j.dump(2) << '\n';
}

Manifest read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / kManifestName);
  if (!in) throw IngestError("no manifest in '" + dir.string() + "'");
  Manifest m;
  try {
    const auto j = nlohmann::json::parse(in);
    m.sample_rate = j.at("sample_rate").get<double>();
    m.scheme = j.value("scheme", std::string());
    const auto& s = j.at("split");
    m.split.seed = s.at("seed").get<std::uint64_t>();
    m.split.train = s.at("train").get<std::vector<std::string>>();
    m.split.val = s.at("val").get<std::vector<std::string>>();
    m.split.test = s.at("test").get<std::vector<std::string>>();
    for (const auto& e : j.at("subjects")) {
      m.subjects.push_back({e.at("id").get<std::string>(), e.at("eeg").get<std::string>(),
                            e.at("ecg").get<std::string>(),
                            e.at("annotations").get<std::string>()});
    }
    for (const auto& f : j.value("failures", nlohmann::json::array())) {
      m.failures.emplace_back(f.at("id").get<std::string>(),
                              f.at("error").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw IngestError("bad manifest in '" + dir.string() + "': " + e.what());
  }
  return m;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const Manifest m = read_manifest(dir);
  Dataset ds;
  ds.split = m.split;
  for (const auto& e : m.subjects) {
    SubjectData s;
    s.id = e.id;
    s.eeg = load_record(dir / e.eeg, RecordFormat::kRawBin, {}, e.id);
    s.ecg = load_record(dir / e.ecg, RecordFormat::kRawBin, {}, e.id);
    s.hypnogram = read_annotations(dir / e.annotations, e.id);
    if (s.eeg.sample_rate != m.sample_rate || s.ecg.sample_rate != m.sample_rate) {
      throw IngestError("subject '" + e.id + "' is not at the manifest rate");
    }
    ds.subjects.push_back(std::move(s));
  }
  return ds;
}

Manifest write_synth_dataset(const std::filesystem::path& dir,
                             std::span<const SynthSubject> subjects,
                             std::uint64_t split_seed) {
  Manifest m;
  std::vector<std::string> ids;
  for (const auto& s : subjects) {
    ManifestEntry e{s.id, s.id + ".eeg.xkd", s.id + ".ecg.xkd", s.id + ".csv"};
    write_rawbin(dir / e.eeg, s.eeg);
    write_rawbin(dir / e.ecg, s.ecg);
    write_annotations(dir / e.annotations, s.raw);
    m.sample_rate = s.eeg.sample_rate;
    m.subjects.push_back(std::move(e));
    ids.push_back(s.id);
  }
  m.split = split_subjects(ids, split_seed);
  write_manifest(dir, m);
  return m;
}

}  // namespace xkd
