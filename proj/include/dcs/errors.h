// Copyright 2026 The DCS Authors.
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

#ifndef DCS_ERRORS_H_
#define DCS_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dcs {

// Base class for every error raised by the library. Callers that only need
// to distinguish "our" failures from std:: ones can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DCS_DEFINE_ERROR(Name)                \
  class Name : public Error {                 \
   public:                                    \
    explicit Name(const std::string& what)    \
        : Error(std::string(#Name ": ") + what) {} \
  }

// metagraph
DCS_DEFINE_ERROR(EmptyDerivation);
DCS_DEFINE_ERROR(BudgetTooSmall);
DCS_DEFINE_ERROR(UnknownPreset);
// isomorphism
DCS_DEFINE_ERROR(InvalidPermutation);
DCS_DEFINE_ERROR(ShapeMismatch);
// predictor
DCS_DEFINE_ERROR(EmptyDataset);
DCS_DEFINE_ERROR(DimensionMismatch);
// search
DCS_DEFINE_ERROR(OracleFailure);
// mcmc
DCS_DEFINE_ERROR(NonPositiveTemperature);
DCS_DEFINE_ERROR(DisconnectedSpace);
// pipeline
DCS_DEFINE_ERROR(SamplingExhausted);
DCS_DEFINE_ERROR(SpaceTooLarge);
DCS_DEFINE_ERROR(ExternalProtocolError);
DCS_DEFINE_ERROR(IoError);

#undef DCS_DEFINE_ERROR

// Pearson/Kendall are undefined on a constant vector; the MSE is still
// meaningful and travels with the error.
class DegenerateVariance : public Error {
 public:
  DegenerateVariance(const std::string& what, double mse)
      : Error("DegenerateVariance: " + what), mse_(mse) {}
  double mse() const { return mse_; }

 private:
  double mse_;
};

// Malformed persisted document. `line` is 1-based, 0 when not line-oriented.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? "SchemaError: " + what
                        : "SchemaError: line " + std::to_string(line) + ": " +
                              what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace dcs

#endif  // DCS_ERRORS_H_
