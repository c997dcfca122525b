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

#ifndef XKD_ERRORS_H_
#define XKD_ERRORS_H_

#include <stdexcept>
#include <string>

namespace xkd {

// Root of every error thrown by the library. Subclasses name the failing
// stage so callers (and the CLI) can report them distinctly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define XKD_DEFINE_ERROR(Name)              \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

XKD_DEFINE_ERROR(IngestError);
XKD_DEFINE_ERROR(ChannelNotFound);
XKD_DEFINE_ERROR(AlignmentError);
XKD_DEFINE_ERROR(SchemaError);
XKD_DEFINE_ERROR(SplitError);
XKD_DEFINE_ERROR(WeightError);
XKD_DEFINE_ERROR(ConfigError);
XKD_DEFINE_ERROR(ShapeError);
XKD_DEFINE_ERROR(CheckpointError);
XKD_DEFINE_ERROR(LossError);
XKD_DEFINE_ERROR(TrainingError);
XKD_DEFINE_ERROR(LabelError);
XKD_DEFINE_ERROR(MetricError);

#undef XKD_DEFINE_ERROR

}  // namespace xkd

#endif  // XKD_ERRORS_H_
