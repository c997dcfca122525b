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

#include "xkd/checkpoint.h"

#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "xkd/errors.h"

namespace xkd {

namespace {

constexpr char kMagic[4] = {'X', 'K', 'D', 'C'};
constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(const void* data, std::size_t n,
                    std::uint64_t h = kFnvOffset) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const char*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::vector<char>& bytes() { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  Reader(const char* data, std::size_t size) : data_(data), size_(size) {}

  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  const char* take(std::size_t n) {
    if (size_ - pos_ < n) throw CheckpointError("checkpoint is truncated");
    const char* p = data_ + pos_;
    pos_ += n;
    return p;
  }
  bool done() const { return pos_ == size_; }

 private:
  const char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

nlohmann::json meta_to_json(const TrainingMeta& m) {
  nlohmann::json j = {{"epoch", m.epoch},
                      {"mode", m.mode},
                      {"sample_rate", m.sample_rate},
                      {"class_scheme", m.class_scheme}};
  j["val_metric"] = m.val_metric ? nlohmann::json(*m.val_metric) : nlohmann::json();
  return j;
}

TrainingMeta meta_from_json(const nlohmann::json& j) {
  TrainingMeta m;
  m.epoch = j.value("epoch", 0);
  m.mode = j.value("mode", std::string());
  m.sample_rate = j.value("sample_rate", 0.0);
  m.class_scheme = j.value("class_scheme", std::string());
  if (j.contains("val_metric") && !j["val_metric"].is_null()) {
    m.val_metric = j["val_metric"].get<double>();
  }
  return m;
}

}  // namespace

void save_checkpoint(const SegModel& model, const TrainingMeta& meta,
                     const std::filesystem::path& path) {
  Writer w;
  w.put_bytes(kMagic, 4);
  w.put(kCheckpointVersion);
  const std::string header =
      nlohmann::json{{"model_config", to_json(model.config())},
                     {"training_meta", meta_to_json(meta)}}
          .dump();
  w.put(static_cast<std::uint64_t>(header.size()));
  w.put_bytes(header.data(), header.size());
  const auto& params = model.parameters();
  w.put(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    w.put(static_cast<std::uint32_t>(p.name.size()));
    w.put_bytes(p.name.data(), p.name.size());
    w.put(static_cast<std::uint8_t>(p.trainable ? 1 : 0));
    w.put(static_cast<std::uint32_t>(p.shape.size()));
    for (int d : p.shape) w.put(static_cast<std::int32_t>(d));
    w.put(static_cast<std::uint64_t>(p.value.size()));
    w.put_bytes(p.value.data(), p.value.size() * sizeof(double));
  }
  w.put(fnv1a(w.bytes().data(), w.bytes().size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write '" + path.string() + "'");
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw CheckpointError("short write to '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open '" + path.string() + "'");
  const std::vector<char> bytes(std::istreambuf_iterator<char>(in), {});
  if (bytes.size() < 4 + 4 + 8) throw CheckpointError("checkpoint is truncated");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CheckpointError("not a checkpoint (bad magic)");
  }
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + 4, 4);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const std::size_t body = bytes.size() - 8;
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body, 8);
  if (stored != fnv1a(bytes.data(), body)) {
    throw CheckpointError("checkpoint checksum mismatch (truncated or corrupt)");
  }

  Reader r(bytes.data() + 8, body - 8);
  const auto header_len = r.get<std::uint64_t>();
  const char* header = r.take(header_len);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(header, header + header_len);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }

  std::optional<SegModel> model;
  TrainingMeta meta;
  try {
    model.emplace(model_config_from_json(j.at("model_config")), 0);
    meta = meta_from_json(j.at("training_meta"));
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }

  auto& params = model->parameters();
  const auto count = r.get<std::uint32_t>();
  if (count != params.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(count) +
                          " parameters, model expects " +
                          std::to_string(params.size()));
  }
  for (auto& p : params) {
    const auto name_len = r.get<std::uint32_t>();
    const std::string name(r.take(name_len), name_len);
    const bool trainable = r.get<std::uint8_t>() != 0;
    const auto ndim = r.get<std::uint32_t>();
    std::vector<int> shape(ndim);
    for (auto& d : shape) d = r.get<std::int32_t>();
    const auto size = r.get<std::uint64_t>();
    if (name != p.name || shape != p.shape || trainable != p.trainable ||
        size != p.value.size()) {
      throw CheckpointError("parameter '" + name +
                            "' does not match the model layout");
    }
    std::memcpy(p.value.data(), r.take(size * sizeof(double)),
                size * sizeof(double));
  }
  if (!r.done()) throw CheckpointError("trailing bytes in checkpoint");
  return {std::move(*model), std::move(meta)};
}

std::uint64_t parameter_checksum(const SegModel& model) {
  std::uint64_t h = kFnvOffset;
  for (const auto& p : model.parameters()) {
    h = fnv1a(p.name.data(), p.name.size(), h);
    h = fnv1a(p.value.data(), p.value.size() * sizeof(double), h);
  }
  return h;
}

}  // namespace xkd
