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

#include "xkd/metrics.h"

#include <cstdio>
#include <numeric>
#include <sstream>

#include "xkd/errors.h"

namespace xkd {

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

void require_nonempty(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw MetricError("confusion matrix is empty");
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ConfusionMatrix empty_confusion(int num_classes,
                                std::vector<std::string> class_names) {
  if (num_classes < 1) throw LabelError("class count must be positive");
  ConfusionMatrix cm;
  cm.num_classes = num_classes;
  if (class_names.empty()) {
    for (int c = 0; c < num_classes; ++c) class_names.push_back(std::to_string(c));
  }
  cm.class_names = std::move(class_names);
  cm.counts.assign(static_cast<std::size_t>(num_classes * num_classes), 0);
  return cm;
}

void accumulate(ConfusionMatrix& cm, std::span<const int> truth,
                std::span<const int> predicted,
                std::span<const std::uint8_t> mask) {
  if (truth.size() != predicted.size() ||
      (!mask.empty() && mask.size() != truth.size())) {
    throw LabelError("label sequences differ in length");
  }
  const int k = cm.num_classes;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!mask.empty() && mask[i] == 0) continue;
    const int a = truth[i];
    const int b = predicted[i];
    if (a < 0 || a >= k || b < 0 || b >= k) {
      throw LabelError("label out of range [0, " + std::to_string(k) + ")");
    }
    ++cm.counts[static_cast<std::size_t>(a * k + b)];
  }
}

ConfusionMatrix confusion(std::span<const int> truth,
                          std::span<const int> predicted, int num_classes,
                          std::span<const std::uint8_t> mask) {
  ConfusionMatrix cm = empty_confusion(num_classes);
  accumulate(cm, truth, predicted, mask);
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  require_nonempty(cm);
  std::int64_t trace = 0;
  for (int c = 0; c < cm.num_classes; ++c) trace += cm.at(c, c);
  return static_cast<double>(trace) / static_cast<double>(cm.total());
}

std::vector<double> per_class_f1(const ConfusionMatrix& cm) {
  require_nonempty(cm);
  const int k = cm.num_classes;
  std::vector<double> f1(static_cast<std::size_t>(k), 0.0);
  for (int c = 0; c < k; ++c) {
    std::int64_t predicted = 0, support = 0;
    for (int o = 0; o < k; ++o) {
      predicted += cm.at(o, c);
      support += cm.at(c, o);
    }
    const double tp = static_cast<double>(cm.at(c, c));
    const double precision = predicted > 0 ? tp / static_cast<double>(predicted) : 0.0;
    const double recall = support > 0 ? tp / static_cast<double>(support) : 0.0;
    if (precision + recall > 0) {
      f1[static_cast<std::size_t>(c)] = 2 * precision * recall / (precision + recall);
    }
  }
  return f1;
}

double weighted_f1(const ConfusionMatrix& cm) {
  const auto f1 = per_class_f1(cm);
  double num = 0.0, den = 0.0;
  for (int c = 0; c < cm.num_classes; ++c) {
    std::int64_t support = 0;
    for (int o = 0; o < cm.num_classes; ++o) support += cm.at(c, o);
    num += static_cast<double>(support) * f1[static_cast<std::size_t>(c)];
    den += static_cast<double>(support);
  }
  return num / den;
}

ModeResult summarize(std::string mode, const ConfusionMatrix& cm) {
  return {std::move(mode), cm.class_names, weighted_f1(cm), accuracy(cm),
          per_class_f1(cm)};
}

std::string format_summary_table(std::span<const ModeResult> results) {
  std::ostringstream out;
  out << pad("Classes", 10) << pad("Experiment", 16) << pad("Weighted F1", 13)
      << "Accuracy\n";
  std::vector<std::string> previous;
  for (const auto& r : results) {
    const std::string classes =
        r.class_names == previous ? "" : join(r.class_names, "-");
    previous = r.class_names;
    out << pad(classes, 10) << pad(r.mode, 16) << pad(fixed4(r.weighted_f1), 13)
        << fixed4(r.accuracy) << '\n';
  }
  return out.str();
}

std::string format_classwise_table(std::span<const ModeResult> results) {
  std::ostringstream out;
  std::vector<std::string> previous;
  for (const auto& r : results) {
    if (r.class_names != previous) {
      if (!previous.empty()) out << '\n';
      out << pad(std::to_string(r.class_names.size()) + " class F1", 16);
      for (const auto& name : r.class_names) out << pad(name, 8);
      out << '\n';
      previous = r.class_names;
    }
    out << pad(r.mode, 16);
    for (double v : r.per_class_f1) out << pad(fixed4(v), 8);
    out << '\n';
  }
  return out.str();
}

std::string report_csv(std::span<const ModeResult> results) {
  std::ostringstream out;
  std::vector<std::string> previous;
  for (const auto& r : results) {
    if (r.class_names != previous) {
      out << "mode,classes,weighted_f1,accuracy";
      for (const auto& name : r.class_names) out << ",f1_" << name;
      out << '\n';
      previous = r.class_names;
    }
    out << r.mode << ',' << join(r.class_names, "-") << ','
        << fixed4(r.weighted_f1) << ',' << fixed4(r.accuracy);
    for (double v : r.per_class_f1) out << ',' << fixed4(v);
    out << '\n';
  }
  return out.str();
}

std::vector<ModeResult> parse_report_csv(const std::string& text) {
  std::vector<ModeResult> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.starts_with("mode,")) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    if (cols.size() < 4) throw MetricError("malformed report row: " + line);
    ModeResult r;
    r.mode = cols[0];
    std::stringstream names(cols[1]);
    for (std::string n; std::getline(names, n, '-');) r.class_names.push_back(n);
    if (cols.size() != 4 + r.class_names.size()) {
      throw MetricError("report row has the wrong column count: " + line);
    }
    r.weighted_f1 = std::stod(cols[2]);
    r.accuracy = std::stod(cols[3]);
    for (std::size_t i = 4; i < cols.size(); ++i) {
      r.per_class_f1.push_back(std::stod(cols[i]));
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace xkd
