/*
 * Copyright 2026 The fdnc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <stdexcept>
#include <string>

namespace fdnc {

enum class ErrorKind {
  kConfig,
  kInput,
  kFormat,
  kProtocol,
  kNumeric,
  kDegenerateReference,
  kContract,
  kIo,
};

const char* to_string(ErrorKind kind);

// Process exit code for the CLI: 2 config, 3 numeric, 4 I/O.
int exit_code_for(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define FDNC_DEFINE_ERROR(Name, Kind)                                \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(Kind, what) {}    \
  };

FDNC_DEFINE_ERROR(ConfigError, ErrorKind::kConfig)
FDNC_DEFINE_ERROR(InputError, ErrorKind::kInput)
FDNC_DEFINE_ERROR(FormatError, ErrorKind::kFormat)
FDNC_DEFINE_ERROR(ProtocolError, ErrorKind::kProtocol)
FDNC_DEFINE_ERROR(NumericError, ErrorKind::kNumeric)
FDNC_DEFINE_ERROR(DegenerateReferenceError, ErrorKind::kDegenerateReference)
FDNC_DEFINE_ERROR(ContractError, ErrorKind::kContract)
FDNC_DEFINE_ERROR(IoError, ErrorKind::kIo)

#undef FDNC_DEFINE_ERROR

// Throws the concrete error type for kind.
[[noreturn]] void throw_error(ErrorKind kind, const std::string& what);

}  // namespace fdnc
