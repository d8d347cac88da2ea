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

#ifndef QSVD_COST_HPP
#define QSVD_COST_HPP

#include <string>
#include <vector>

#include "qsvd/io.hpp"

namespace qsvd {

/// One evaluated cost expression. Constants are 1; values are only meant
/// for comparing trends.
struct CostRecord {
    std::string routine;
    std::string expression;
    std::string substituted;
    double value = 0.0;

    std::string line() const {
        return routine + ": " + expression + " = " + substituted + " = " + format_double(value);
    }
};

struct CostLedger {
    std::vector<CostRecord> records;

    void add(CostRecord r) { records.push_back(std::move(r)); }

    void append(const CostLedger& other) {
        records.insert(records.end(), other.records.begin(), other.records.end());
    }

    std::string text() const {
        std::string out;
        for (const auto& r : records) out += r.line() + "\n";
        return out;
    }
};

inline std::string sub(std::initializer_list<std::pair<const char*, double>> vars) {
    std::string out;
    for (const auto& [name, v] : vars) {
        if (!out.empty()) out += ", ";
        out += name;
        out += "=";
        out += format_double(v);
    }
    return out;
}

}  // namespace qsvd

#endif  // QSVD_COST_HPP
