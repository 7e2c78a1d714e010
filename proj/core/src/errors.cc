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


#include "fdnc/errors.h"

namespace fdnc {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kInput: return "input error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kProtocol: return "protocol error";
    case ErrorKind::kNumeric: return "numeric error";
    case ErrorKind::kDegenerateReference: return "degenerate reference";
    case ErrorKind::kContract: return "contract violation";
    case ErrorKind::kIo: return "I/O error";
  }
  return "error";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNumeric:
    case ErrorKind::kDegenerateReference:
      return 3;
    case ErrorKind::kIo:
    case ErrorKind::kFormat:
      return 4;
    default:
      return 2;
  }
}

[[noreturn]] void throw_error(ErrorKind kind, const std::string& what) {
  switch (kind) {
    case ErrorKind::kConfig: throw ConfigError(what);
    case ErrorKind::kInput: throw InputError(what);
    case ErrorKind::kFormat: throw FormatError(what);
    case ErrorKind::kProtocol: throw ProtocolError(what);
    case ErrorKind::kNumeric: throw NumericError(what);
    case ErrorKind::kDegenerateReference: throw DegenerateReferenceError(what);
    case ErrorKind::kContract: throw ContractError(what);
    case ErrorKind::kIo: throw IoError(what);
  }
  throw Error(kind, what);
}

}  // namespace fdnc
