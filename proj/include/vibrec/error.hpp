// Copyright 2026 The vibrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace vibrec {

// Base of every exception thrown by the library. `kind()` is the stable
// machine-readable name the CLI reports in its error JSON.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "Error"; }
};

#define VIBREC_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(what) {}         \
    const char* kind() const noexcept override { return #Name; }    \
  };

VIBREC_DEFINE_ERROR(InvalidSignal)
VIBREC_DEFINE_ERROR(ShapeMismatch)
VIBREC_DEFINE_ERROR(InvalidBand)
VIBREC_DEFINE_ERROR(InvalidWindow)
VIBREC_DEFINE_ERROR(ZeroSignal)
VIBREC_DEFINE_ERROR(AliasError)
VIBREC_DEFINE_ERROR(DegenerateReference)
VIBREC_DEFINE_ERROR(IndexError)
VIBREC_DEFINE_ERROR(UnsupportedFormat)
VIBREC_DEFINE_ERROR(CorruptFile)
VIBREC_DEFINE_ERROR(ConfigError)
VIBREC_DEFINE_ERROR(IoError)

#undef VIBREC_DEFINE_ERROR

}  // namespace vibrec
