// Copyright 2026 The qsvd Authors
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

#ifndef QSVD_ERRORS_HPP
#define QSVD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qsvd {

/// Base class of every error raised by the library. `kind()` is a short
/// machine-readable tag used by the CLI error records.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define QSVD_DEFINE_ERROR(Name, tag)                                   \
    class Name : public Error {                                         \
    public:                                                             \
        explicit Name(const std::string& what) : Error(tag, what) {}    \
    }

QSVD_DEFINE_ERROR(FormatError, "format");
QSVD_DEFINE_ERROR(StructuralError, "structural");
QSVD_DEFINE_ERROR(IoError, "io");
QSVD_DEFINE_ERROR(DivideByZeroError, "divide_by_zero");
QSVD_DEFINE_ERROR(EmptyVocabularyError, "empty_vocabulary");
QSVD_DEFINE_ERROR(DegenerateTableError, "degenerate_table");
QSVD_DEFINE_ERROR(NumericError, "numeric");
QSVD_DEFINE_ERROR(ResolutionError, "resolution");
QSVD_DEFINE_ERROR(NormalizationError, "normalization");
QSVD_DEFINE_ERROR(UndefinedStateError, "undefined_state");
QSVD_DEFINE_ERROR(UnreachableTargetError, "unreachable_target");
QSVD_DEFINE_ERROR(EmptyRetentionError, "empty_retention");
QSVD_DEFINE_ERROR(PreconditionError, "precondition");
QSVD_DEFINE_ERROR(ShapeError, "shape");
QSVD_DEFINE_ERROR(StratificationError, "stratification");
QSVD_DEFINE_ERROR(InfeasibleBudgetError, "infeasible_budget");
QSVD_DEFINE_ERROR(IncompleteParamsError, "incomplete_params");
QSVD_DEFINE_ERROR(UsageError, "usage");

#undef QSVD_DEFINE_ERROR

}  // namespace qsvd

#endif  // QSVD_ERRORS_HPP
