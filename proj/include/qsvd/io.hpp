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

#ifndef QSVD_IO_HPP
#define QSVD_IO_HPP

#include <Eigen/Dense>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "qsvd/errors.hpp"

namespace qsvd {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Shortest round-trippable decimal form, so CSV bytes are reproducible.
inline std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

/// Accumulates CSV text; one call to `row` per line.
class CsvWriter {
public:
    explicit CsvWriter(std::initializer_list<std::string_view> header) {
        row_strings(std::vector<std::string>(header.begin(), header.end()));
    }
    explicit CsvWriter(const std::vector<std::string>& header) { row_strings(header); }

    template <class... Ts>
    CsvWriter& row(const Ts&... cells) {
        bool first = true;
        ((append_cell(first, cells)), ...);
        out_ << '\n';
        return *this;
    }

    CsvWriter& row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
        return *this;
    }

    std::string str() const { return out_.str(); }

    void save(const std::filesystem::path& path) const { write_text(path, out_.str()); }

    static void write_text(const std::filesystem::path& path, const std::string& text) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot open " + path.string() + " for writing");
        f << text;
        if (!f) throw IoError("write failed for " + path.string());
    }

private:
    template <class T>
    void append_cell(bool& first, const T& v) {
        if (!first) out_ << ',';
        first = false;
        if constexpr (std::is_floating_point_v<T>) {
            out_ << format_double(static_cast<double>(v));
        } else {
            out_ << v;
        }
    }

    std::ostringstream out_;
};

/// Writes a matrix as CSV with a c1..cm header row, or header-less when
/// `header` is false (the form the csv loader reads without --header).
template <class Derived>
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixBase<Derived>& m,
                      bool header = true) {
    std::string text;
    for (Eigen::Index j = 0; header && j < m.cols(); ++j) {
        if (j) text += ',';
        text += 'c' + std::to_string(j + 1);
    }
    if (header) text += '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) text += ',';
            text += format_double(m(i, j));
        }
        text += '\n';
    }
    CsvWriter::write_text(path, text);
}

}  // namespace qsvd

#endif  // QSVD_IO_HPP
