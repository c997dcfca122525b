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

#include "xkd/record_io.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <vector>

#include "xkd/errors.h"

namespace xkd {

namespace {

static_assert(std::endian::native == std::endian::little,
              "RAWBIN and EDF readers assume a little-endian host");

constexpr char kRawBinMagic[4] = {'X', 'K', 'D', '1'};

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path.string() + "'");
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

class ByteReader {
 public:
  ByteReader(const std::vector<char>& bytes, std::string what)
      : bytes_(bytes), what_(std::move(what)) {}

  template <typename T>
  T read() {
    T v;
    need(sizeof(T));
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string read_string(std::size_t n) {
    need(n);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  const char* cursor() const { return bytes_.data() + pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw IngestError(what_ + ": truncated file");
    }
  }

  const std::vector<char>& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(std::string_view field, const std::string& what) {
  const std::string t = trim(field);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw IngestError(what + ": bad number '" + t + "'");
  }
}

SignalRecord load_rawbin(const std::filesystem::path& path,
                         std::optional<std::string_view> channel) {
  const auto bytes = read_file(path);
  const std::string what = "RAWBIN '" + path.string() + "'";
  ByteReader r(bytes, what);
  if (r.read_string(4) != std::string_view(kRawBinMagic, 4)) {
    throw IngestError(what + ": bad magic");
  }
  SignalRecord rec;
  rec.sample_rate = r.read<std::uint32_t>();
  const auto name_len = r.read<std::uint32_t>();
  rec.channel = r.read_string(name_len);
  const auto count = r.read<std::uint64_t>();
  if (r.remaining() != count * sizeof(float)) {
    throw IngestError(what + ": header promises " + std::to_string(count) +
                      " samples, payload holds " +
                      std::to_string(r.remaining() / sizeof(float)));
  }
  if (channel && *channel != rec.channel) {
    throw ChannelNotFound(what + ": channel '" + std::string(*channel) +
                          "' absent (file holds '" + rec.channel + "')");
  }
  rec.samples.resize(count);
  for (auto& s : rec.samples) s = r.read<float>();
  return rec;
}

SignalRecord load_edf(const std::filesystem::path& path,
                      std::optional<std::string_view> channel) {
  const auto bytes = read_file(path);
  const std::string what = "EDF '" + path.string() + "'";
  if (!channel) throw ChannelNotFound(what + ": no channel label requested");
  ByteReader r(bytes, what);
  r.read_string(184);  // version, patient, recording, date, time
  const auto header_bytes =
      static_cast<std::size_t>(parse_number(r.read_string(8), what));
  r.read_string(44);
  long n_records = std::lround(parse_number(r.read_string(8), what));
  const double record_seconds = parse_number(r.read_string(8), what);
  const auto ns = static_cast<std::size_t>(parse_number(r.read_string(4), what));
  if (ns == 0 || header_bytes != 256 * (ns + 1) || !(record_seconds > 0)) {
    throw IngestError(what + ": inconsistent header");
  }

  auto field = [&](std::size_t width) {
    std::vector<std::string> v(ns);
    for (auto& s : v) s = trim(r.read_string(width));
    return v;
  };
  const auto labels = field(16);
  field(80);  // transducer
  field(8);   // physical dimension
  const auto phys_min = field(8);
  const auto phys_max = field(8);
  const auto dig_min = field(8);
  const auto dig_max = field(8);
  field(80);  // prefilter
  const auto spr = field(8);
  field(32);

  std::vector<std::size_t> per_record(ns);
  std::size_t record_len = 0;
  for (std::size_t s = 0; s < ns; ++s) {
    per_record[s] = static_cast<std::size_t>(parse_number(spr[s], what));
    record_len += per_record[s];
  }
  if (record_len == 0) throw IngestError(what + ": empty data records");
  const std::size_t data_bytes = r.remaining();
  if (n_records < 0) {
    n_records = static_cast<long>(data_bytes / (2 * record_len));
  }
  if (data_bytes < static_cast<std::size_t>(n_records) * 2 * record_len) {
    throw IngestError(what + ": truncated data records");
  }

  const auto it = std::find(labels.begin(), labels.end(), *channel);
  if (it == labels.end()) {
    throw ChannelNotFound(what + ": channel '" + std::string(*channel) +
                          "' absent");
  }
  const auto sig = static_cast<std::size_t>(it - labels.begin());
  const double pmin = parse_number(phys_min[sig], what);
  const double pmax = parse_number(phys_max[sig], what);
  const double dmin = parse_number(dig_min[sig], what);
  const double dmax = parse_number(dig_max[sig], what);
  if (dmax == dmin) throw IngestError(what + ": degenerate digital range");
  const double gain = (pmax - pmin) / (dmax - dmin);

  std::size_t sig_offset = 0;
  for (std::size_t s = 0; s < sig; ++s) sig_offset += per_record[s];

  SignalRecord rec;
  rec.channel = *channel;
  rec.sample_rate = static_cast<double>(per_record[sig]) / record_seconds;
  rec.samples.reserve(static_cast<std::size_t>(n_records) * per_record[sig]);
  const char* data = r.cursor();
  for (long rec_i = 0; rec_i < n_records; ++rec_i) {
    const char* block =
        data + 2 * (static_cast<std::size_t>(rec_i) * record_len + sig_offset);
    for (std::size_t j = 0; j < per_record[sig]; ++j) {
      std::int16_t d;
      std::memcpy(&d, block + 2 * j, 2);
      rec.samples.push_back(pmin + (d - dmin) * gain);
    }
  }
  return rec;
}

}  // namespace

RecordFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".edf") return RecordFormat::kEdf;
  if (ext == ".xkd" || ext == ".rawbin" || ext == ".bin") {
    return RecordFormat::kRawBin;
  }
  throw IngestError("unrecognized record extension '" + ext + "'");
}

SignalRecord load_record(const std::filesystem::path& path,
                         RecordFormat format,
                         std::optional<std::string_view> channel,
                         std::string subject_id) {
  SignalRecord rec = format == RecordFormat::kEdf ? load_edf(path, channel)
                                                  : load_rawbin(path, channel);
  rec.subject_id =
      subject_id.empty() ? path.stem().string() : std::move(subject_id);
  validate(rec);
  return rec;
}

void write_rawbin(const std::filesystem::path& path,
                  const SignalRecord& record) {
  const double rate = std::round(record.sample_rate);
  if (rate != record.sample_rate || rate <= 0 || rate > 4294967295.0) {
    throw IngestError("RAWBIN needs a positive integral sample rate");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IngestError("cannot write '" + path.string() + "'");
  auto put = [&](const auto& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  out.write(kRawBinMagic, 4);
  put(static_cast<std::uint32_t>(rate));
  put(static_cast<std::uint32_t>(record.channel.size()));
  out.write(record.channel.data(),
            static_cast<std::streamsize>(record.channel.size()));
  put(static_cast<std::uint64_t>(record.samples.size()));
  for (double s : record.samples) put(static_cast<float>(s));
  if (!out) throw IngestError("short write to '" + path.string() + "'");
}

Hypnogram read_annotations(const std::filesystem::path& path,
                           std::string subject_id, StageSchema schema) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open '" + path.string() + "'");
  const std::string what = "annotations '" + path.string() + "'";

  Hypnogram h;
  h.subject_id = std::move(subject_id);
  h.schema = schema;
  std::vector<double> onsets;
  double duration = 0.0;
  std::string line;
  bool first_line = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(trim(c));
    if (first_line && !cols.empty() && cols[0] == "epoch_index") {
      first_line = false;
      continue;
    }
    first_line = false;
    if (cols.size() != 4) throw IngestError(what + ": expected 4 columns");
    const double onset = parse_number(cols[1], what);
    const double dur = parse_number(cols[2], what);
    if (onsets.empty()) {
      duration = dur;
    } else if (dur != duration) {
      throw AlignmentError(what + ": mixed epoch durations");
    }
    onsets.push_back(onset);
    h.stages.push_back(parse_stage(cols[3]));
  }
  h.epoch_duration = onsets.empty() ? 30.0 : duration;
  h.offset_seconds = onsets.empty() ? 0.0 : onsets.front();
  for (double onset : onsets) {
    const double slot = (onset - h.offset_seconds) / h.epoch_duration;
    if (std::abs(slot - std::round(slot)) > 1e-6) {
      throw AlignmentError(what + ": onset " + std::to_string(onset) +
                           " is off the epoch grid");
    }
    h.epoch_slots.push_back(static_cast<std::size_t>(std::llround(slot)));
  }
  validate(h);
  return h;
}

void write_annotations(const std::filesystem::path& path,
                       const Hypnogram& hypnogram) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IngestError("cannot write '" + path.string() + "'");
  out << std::setprecision(12);
  for (std::size_t k = 0; k < hypnogram.stages.size(); ++k) {
    const double onset = hypnogram.offset_seconds +
                         static_cast<double>(hypnogram.epoch_slots[k]) *
                             hypnogram.epoch_duration;
    out << k << ',' << onset << ',' << hypnogram.epoch_duration << ','
        << stage_token(hypnogram.stages[k]) << '\n';
  }
}

}  // namespace xkd
