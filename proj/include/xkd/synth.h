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

#ifndef XKD_SYNTH_H_
#define XKD_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "xkd/records.h"

namespace xkd {

struct SynthParams {
  int n_subjects = 8;
  int epochs_per_subject = 70;
  int num_classes = 4;
  std::uint64_t seed = 0;
  double sample_rate = kCanonicalRate;
  double epoch_seconds = 30.0;
};

// Two time-aligned pseudo-modalities driven by one latent stage sequence.
struct SynthSubject {
  std::string id;
  SignalRecord eeg;
  SignalRecord ecg;
  Hypnogram raw;        // RAW_RK stages
  Hypnogram hypnogram;  // merged to the schema matching num_classes
};

// Dominant frequency (Hz) that marks latent class `c` in both modalities.
double synth_class_frequency(int c);

// Latent class c is rendered as a sinusoid at synth_class_frequency(c):
// strong and clean in the pseudo-EEG, weak and buried in noise plus a
// heartbeat-like pulse train in the pseudo-ECG. Deterministic given seed.
// Throws ConfigError for fewer than 3 subjects, K outside {3, 4}, or a
// sample rate too low to carry the class frequencies.
std::vector<SynthSubject> synth_dataset(const SynthParams& params);

}  // namespace xkd

#endif  // XKD_SYNTH_H_
