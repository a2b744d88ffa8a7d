// Copyright 2026 The floss Authors
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

#ifndef FLOSS_STATUS_MACROS_H_
#define FLOSS_STATUS_MACROS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define FLOSS_RETURN_IF_ERROR(expr)              \
  do {                                           \
    const absl::Status floss_status_ = (expr);   \
    if (!floss_status_.ok()) return floss_status_; \
  } while (0)

#define FLOSS_CONCAT_INNER_(a, b) a##b
#define FLOSS_CONCAT_(a, b) FLOSS_CONCAT_INNER_(a, b)

#define FLOSS_ASSIGN_OR_RETURN_IMPL_(statusor, lhs, rexpr) \
  auto statusor = (rexpr);                                 \
  if (!statusor.ok()) return statusor.status();            \
  lhs = *std::move(statusor)

// Evaluates an expression returning absl::StatusOr<T>; on success assigns the
// value to `lhs`, otherwise returns the error from the enclosing function.
#define FLOSS_ASSIGN_OR_RETURN(lhs, rexpr) \
  FLOSS_ASSIGN_OR_RETURN_IMPL_(            \
      FLOSS_CONCAT_(floss_statusor_, __LINE__), lhs, rexpr)

#endif  // FLOSS_STATUS_MACROS_H_
