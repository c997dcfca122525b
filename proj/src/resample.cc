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

// Frequency-domain resampling. The record is treated as one period of a
// band-limited signal: its real spectrum is truncated (downsampling) or
// zero-extended (upsampling) to the target length and inverted. Components
// above the new Nyquist frequency are discarded, so no separate anti-alias
// filter is needed. Non-periodic content rings near the two record edges.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>

#include "xkd/errors.h"
#include "xkd/records.h"

namespace xkd {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

void execute(fftw_plan plan) {
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace

SignalRecord resample(const SignalRecord& record, double target_rate) {
  if (!(target_rate > 0) || !std::isfinite(target_rate)) {
    throw ConfigError("target rate must be positive");
  }
  validate(record);
  if (record.sample_rate == target_rate) return record;

  const std::size_t n_in = record.samples.size();
  const auto n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_in) * target_rate / record.sample_rate));

  SignalRecord out;
  out.subject_id = record.subject_id;
  out.channel = record.channel;
  out.sample_rate = target_rate;
  if (n_in == 0 || n_out == 0) {
    out.samples.assign(n_out, 0.0);
    return out;
  }

  const std::size_t bins_in = n_in / 2 + 1;
  const std::size_t bins_out = n_out / 2 + 1;
  auto time_in = fftw_buffer<double>(n_in);
  auto spec_in = fftw_buffer<fftw_complex>(bins_in);
  auto spec_out = fftw_buffer<fftw_complex>(bins_out);
  auto time_out = fftw_buffer<double>(n_out);

  std::copy(record.samples.begin(), record.samples.end(), time_in.get());
  fftw_plan forward;
  fftw_plan inverse;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(n_in), time_in.get(),
                                   spec_in.get(), FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n_out), spec_out.get(),
                                   time_out.get(), FFTW_ESTIMATE);
  }
  execute(forward);

  for (std::size_t k = 0; k < bins_out; ++k) {
    spec_out[k][0] = 0.0;
    spec_out[k][1] = 0.0;
  }
  const std::size_t n_min = std::min(n_in, n_out);
  const std::size_t shared = n_min / 2 + 1;
  for (std::size_t k = 0; k < shared; ++k) {
    spec_out[k][0] = spec_in[k][0];
    spec_out[k][1] = spec_in[k][1];
  }
  // The Nyquist bin of an even-length spectrum stands for both signs of
  // that frequency; rescale it when it changes role.
  if (n_min % 2 == 0) {
    const double factor = n_out < n_in ? 2.0 : 0.5;
    spec_out[n_min / 2][0] *= factor;
    spec_out[n_min / 2][1] *= factor;
  }
  execute(inverse);

  // c2r is unnormalized; the combined scale is 1/n_in.
  const double scale = 1.0 / static_cast<double>(n_in);
  out.samples.resize(n_out);
  for (std::size_t j = 0; j < n_out; ++j) out.samples[j] = time_out[j] * scale;
  return out;
}

}  // namespace xkd
