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

#ifndef XKD_TESTS_SUPPORT_H_
#define XKD_TESTS_SUPPORT_H_

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "xkd/distill.h"
#include "xkd/records.h"
#include "xkd/segmodel.h"
#include "xkd/synth.h"

namespace xkd::testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("xkd_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void spit(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << text;
}

// Minimal EDF writer: one-second data records, int16 samples mapped linearly
// from [phys_min, phys_max] onto [-32768, 32767].
struct EdfSignal {
  std::string label;
  std::vector<double> samples;  // rate * seconds values
};

inline void write_edf(const fs::path& path, const std::vector<EdfSignal>& signals,
                      int rate, double phys_min = -10.0, double phys_max = 10.0) {
  auto pad = [](std::string s, std::size_t w) {
    s.resize(w, ' ');
    return s;
  };
  const std::size_t ns = signals.size();
  const std::size_t n_records = signals.front().samples.size() / static_cast<std::size_t>(rate);
  std::string h;
  h += pad("0", 8);
  h += pad("X X X X", 80);
  h += pad("Startdate X X X X", 80);
  h += pad("01.01.26", 8);
  h += pad("00.00.00", 8);
  h += pad(std::to_string(256 * (ns + 1)), 8);
  h += pad("", 44);
  h += pad(std::to_string(n_records), 8);
  h += pad("1", 8);
  h += pad(std::to_string(ns), 4);
  auto each = [&](auto fn, std::size_t w) {
    for (const auto& s : signals) h += pad(fn(s), w);
  };
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%g", v);
    return std::string(buf);
  };
  each([](const EdfSignal& s) { return s.label; }, 16);
  each([](const EdfSignal&) { return std::string(); }, 80);
  each([](const EdfSignal&) { return std::string("uV"); }, 8);
  each([&](const EdfSignal&) { return num(phys_min); }, 8);
  each([&](const EdfSignal&) { return num(phys_max); }, 8);
  each([](const EdfSignal&) { return std::string("-32768"); }, 8);
  each([](const EdfSignal&) { return std::string("32767"); }, 8);
  each([](const EdfSignal&) { return std::string(); }, 80);
  each([&](const EdfSignal&) { return std::to_string(rate); }, 8);
  each([](const EdfSignal&) { return std::string(); }, 32);
  const double gain = (phys_max - phys_min) / 65535.0;
  for (std::size_t r = 0; r < n_records; ++r) {
    for (const auto& s : signals) {
      for (int j = 0; j < rate; ++j) {
        const double v = s.samples[r * static_cast<std::size_t>(rate) + static_cast<std::size_t>(j)];
        const auto d = static_cast<std::int16_t>(std::lround((v - phys_min) / gain - 32768.0));
        h.append(reinterpret_cast<const char*>(&d), 2);
      }
    }
  }
  spit(path, h);
}

// Magnitude spectrum by direct summation; frequency of the largest bin above
// `min_hz`.
inline double dft_peak(const std::vector<double>& x, double rate, double min_hz = 0.5) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> twiddle(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double ph = -2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n);
    twiddle[t] = {std::cos(ph), std::sin(ph)};
  }
  double best = -1.0, best_f = 0.0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) * rate / static_cast<double>(n);
    if (f < min_hz) continue;
    std::complex<double> acc = 0.0;
    std::size_t idx = 0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += x[t] * twiddle[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    if (std::abs(acc) > best) {
      best = std::abs(acc);
      best_f = f;
    }
  }
  return best_f;
}

inline std::vector<double> sine(double freq, double rate, double seconds,
                                double amplitude = 1.0, double phase = 0.0) {
  std::vector<double> v(static_cast<std::size_t>(std::llround(rate * seconds)));
  for (std::size_t t = 0; t < v.size(); ++t) {
    v[t] = amplitude * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(t) / rate + phase);
  }
  return v;
}

// depth 2, 4 filters, i = 60.
inline ModelConfig tiny_model(int classes = 4, Norm norm = Norm::kBatch) {
  ModelConfig c;
  c.depth = 2;
  c.filters_per_stage = {4, 4};
  c.kernel_size = 3;
  c.pool_sizes = {3, 2};
  c.num_classes = classes;
  c.samples_per_epoch = 60;
  c.norm = norm;
  return c;
}

// A small configuration at 20 Hz (600 samples per 30 s epoch).
inline DistillConfig small_config(StageSchema scheme = StageSchema::kFourClass) {
  DistillConfig c;
  c.class_scheme = scheme;
  c.sample_rate = 20.0;
  c.model.depth = 2;
  c.model.filters_per_stage = {4, 8};
  c.model.pool_sizes = {5, 4};
  c.model.samples_per_epoch = 600;
  c.model.num_classes = class_count(scheme);
  c.epochs = 3;
  c.batch_size = 2;
  c.epochs_per_window = 35;
  c.step1_epochs = 3;
  c.seed = 5;
  return c;
}

inline Dataset synth_as_dataset(const SynthParams& params, std::uint64_t split_seed) {
  Dataset ds;
  std::vector<std::string> ids;
  for (auto& s : synth_dataset(params)) {
    ids.push_back(s.id);
    ds.subjects.push_back({s.id, std::move(s.eeg), std::move(s.ecg), std::move(s.raw)});
  }
  ds.split = split_subjects(ids, split_seed);
  return ds;
}

inline Dataset small_dataset(int subjects = 4, int epochs = 35, std::uint64_t seed = 11) {
  return synth_as_dataset({subjects, epochs, 4, seed, 20.0, 30.0}, 1);
}

inline double rel_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

}  // namespace xkd::testing

#endif  // XKD_TESTS_SUPPORT_H_
