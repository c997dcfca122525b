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

#include "xkd/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "xkd/errors.h"

namespace xkd {

namespace {

constexpr double kEegAmplitude = 1.0;
constexpr double kEegNoise = 0.3;
constexpr double kEcgAmplitude = 0.5;
constexpr double kEcgNoise = 0.6;
constexpr double kStayProbability = 0.8;

Stage raw_stage(int c, int k, std::mt19937_64& rng) {
  std::bernoulli_distribution alt(0.3);
  if (c == 0) return Stage::kW;
  if (c == k - 1) return Stage::kREM;
  if (k == 3) return alt(rng) ? Stage::kN1 : Stage::kN2;
  return c == 1 ? (alt(rng) ? Stage::kN1 : Stage::kN2)
                : (alt(rng) ? Stage::kN4 : Stage::kN3);
}

}  // namespace

double synth_class_frequency(int c) { return 1.5 + 2.0 * c; }

std::vector<SynthSubject> synth_dataset(const SynthParams& params) {
  const int k = params.num_classes;
  if (params.n_subjects < 3) {
    throw ConfigError("synthetic dataset needs at least 3 subjects");
  }
  if (k != 3 && k != 4) throw ConfigError("synthetic K must be 3 or 4");
  if (params.epochs_per_subject < 0) {
    throw ConfigError("epochs per subject must be non-negative");
  }
  if (params.sample_rate / 2.0 <= synth_class_frequency(k - 1) + 1.0) {
    throw ConfigError("sample rate too low for the synthetic class tones");
  }
  const double per_epoch_exact = params.sample_rate * params.epoch_seconds;
  if (per_epoch_exact != std::round(per_epoch_exact)) {
    throw ConfigError("sample rate x epoch length must be integral");
  }
  const auto per_epoch = static_cast<std::size_t>(per_epoch_exact);
  const StageSchema schema = schema_for_classes(k);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;

  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> any_class(0, k - 1);

  std::vector<SynthSubject> out;
  for (int s = 0; s < params.n_subjects; ++s) {
    const auto n_epochs = static_cast<std::size_t>(params.epochs_per_subject);
    std::vector<int> latent(n_epochs);
    int current = any_class(rng);
    for (auto& c : latent) {
      if (unit(rng) > kStayProbability) current = any_class(rng);
      c = current;
    }
    // Every class appears at least once per subject when there is room.
    if (n_epochs >= static_cast<std::size_t>(k)) {
      for (int c = 0; c < k; ++c) {
        if (std::find(latent.begin(), latent.end(), c) == latent.end()) {
          std::uniform_int_distribution<std::size_t> pos(0, n_epochs - 1);
          std::size_t p = pos(rng);
          while (std::count(latent.begin(), latent.end(), latent[p]) == 1) {
            p = pos(rng);
          }
          latent[p] = c;
        }
      }
    }

    SynthSubject subj;
    char id[32];
    std::snprintf(id, sizeof(id), "synth%03d", s);
    subj.id = id;
    subj.eeg = {subj.id, "EEG-synth", params.sample_rate, {}};
    subj.ecg = {subj.id, "ECG-synth", params.sample_rate, {}};
    subj.eeg.samples.reserve(n_epochs * per_epoch);
    subj.ecg.samples.reserve(n_epochs * per_epoch);

    const double heart_rate = 0.9 + 0.4 * unit(rng);
    double beat_phase = unit(rng);
    std::vector<Stage> raw;
    for (std::size_t e = 0; e < n_epochs; ++e) {
      const int c = latent[e];
      raw.push_back(raw_stage(c, k, rng));
      const double f = synth_class_frequency(c);
      const double eeg_amp = kEegAmplitude * (0.8 + 0.4 * unit(rng));
      const double eeg_phase = kTwoPi * unit(rng);
      const double ecg_phase = kTwoPi * unit(rng);
      for (std::size_t j = 0; j < per_epoch; ++j) {
        const double t = static_cast<double>(j) / params.sample_rate;
        subj.eeg.samples.push_back(eeg_amp * std::sin(kTwoPi * f * t + eeg_phase) +
                                   kEegNoise * gauss(rng));
        beat_phase += heart_rate / params.sample_rate;
        beat_phase -= std::floor(beat_phase);
        const double d = (beat_phase - 0.5) * 12.0;
        subj.ecg.samples.push_back(std::exp(-d * d) +
                                   kEcgAmplitude * std::sin(kTwoPi * f * t + ecg_phase) +
                                   kEcgNoise * gauss(rng));
      }
    }
    subj.raw = make_hypnogram(subj.id, params.epoch_seconds,
                              StageSchema::kRawRK, std::move(raw));
    subj.hypnogram = merge_stages(subj.raw, schema);
    out.push_back(std::move(subj));
  }
  return out;
}

}  // namespace xkd
