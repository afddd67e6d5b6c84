// Copyright 2026 The FedGAT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FEDGAT_STATUS_H_
#define FEDGAT_STATUS_H_

#include "absl/strings/string_view.h"

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"

namespace fedgat {

// Error taxonomy used across the library. Each kind maps onto one absl
// status code so callers (notably the CLI) can branch on the code alone:
//
//   shape / argument / config  -> kInvalidArgument   (CLI exit 2)
//   structure / contract       -> kFailedPrecondition
//   numerical / divergence     -> kInternal          (CLI exit 3)
//   I/O                        -> kUnavailable       (CLI exit 4)
inline absl::Status ShapeError(absl::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat("shape error: ", what));
}
inline absl::Status ArgumentError(absl::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat("argument error: ", what));
}
inline absl::Status ConfigError(absl::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat("config error: ", what));
}
inline absl::Status StructureError(absl::string_view what) {
  return absl::FailedPreconditionError(
      absl::StrCat("structure error: ", what));
}
inline absl::Status ContractError(absl::string_view what) {
  return absl::FailedPreconditionError(absl::StrCat("contract error: ", what));
}
inline absl::Status ProtocolError(absl::string_view what) {
  return absl::FailedPreconditionError(absl::StrCat("protocol error: ", what));
}
inline absl::Status NumericalError(absl::string_view what) {
  return absl::InternalError(absl::StrCat("numerical error: ", what));
}
inline absl::Status DivergenceError(absl::string_view what) {
  return absl::InternalError(absl::StrCat("divergence: ", what));
}
inline absl::Status IoError(absl::string_view what) {
  return absl::UnavailableError(absl::StrCat("I/O error: ", what));
}

}  // namespace fedgat

#define FEDGAT_STATUS_CONCAT_INNER_(a, b) a##b
#define FEDGAT_STATUS_CONCAT_(a, b) FEDGAT_STATUS_CONCAT_INNER_(a, b)

#define FEDGAT_RETURN_IF_ERROR(expr)          \
  do {                                        \
    absl::Status fedgat_status_ = (expr);     \
    if (!fedgat_status_.ok()) {               \
      return fedgat_status_;                  \
    }                                         \
  } while (0)

#define FEDGAT_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, rexpr) \
  auto tmp = (rexpr);                                  \
  if (!tmp.ok()) {                                     \
    return std::move(tmp).status();                    \
  }                                                    \
  lhs = std::move(tmp).value()

#define FEDGAT_ASSIGN_OR_RETURN(lhs, rexpr) \
  FEDGAT_ASSIGN_OR_RETURN_IMPL_(            \
      FEDGAT_STATUS_CONCAT_(fedgat_statusor_, __LINE__), lhs, rexpr)

#endif  // FEDGAT_STATUS_H_
