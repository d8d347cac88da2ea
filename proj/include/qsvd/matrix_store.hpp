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

#ifndef QSVD_MATRIX_STORE_HPP
#define QSVD_MATRIX_STORE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "qsvd/errors.hpp"
#include "qsvd/io.hpp"
#include "qsvd/stopwords.hpp"

namespace qsvd {

struct Provenance {
    bool row_mean_centered = false;
    bool spectral_normalized = false;
};

/// Dense n x m data matrix together with the metadata a quantum-access data
/// structure exposes: the l2 norm of every row and the Frobenius norm.
/// Metadata is computed on construction and the object is immutable.
class DataMatrix {
public:
    DataMatrix() = default;

    explicit DataMatrix(Matrix values, Provenance provenance = {})
        : values_(std::move(values)), provenance_(provenance) {
        row_norms_ = values_.rowwise().norm();
        frobenius_ = std::sqrt(row_norms_.squaredNorm());
        nnz_ = static_cast<std::size_t>((values_.array() != 0.0).count());
    }

    const Matrix& values() const { return values_; }
    const Vector& row_norms() const { return row_norms_; }
    double frobenius() const { return frobenius_; }
    const Provenance& provenance() const { return provenance_; }
    std::size_t nnz() const { return nnz_; }
    Eigen::Index rows() const { return values_.rows(); }
    Eigen::Index cols() const { return values_.cols(); }
    bool empty() const { return values_.size() == 0; }

private:
    Matrix values_;
    Vector row_norms_;
    double frobenius_ = 0.0;
    Provenance provenance_;
    std::size_t nnz_ = 0;
};

enum class MatrixFormat { csv, idx, raw_f64 };

inline MatrixFormat parse_matrix_format(const std::string& s) {
    if (s == "csv") return MatrixFormat::csv;
    if (s == "idx") return MatrixFormat::idx;
    if (s == "raw_f64" || s == "raw") return MatrixFormat::raw_f64;
    throw UsageError("unknown matrix format '" + s + "' (expected csv, idx, raw_f64)");
}

struct LoadOptions {
    bool csv_header = false;
};

namespace detail {

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline std::uint32_t read_be32(const unsigned char* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline std::uint64_t read_le64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline Matrix parse_csv(const std::string& text, bool header) {
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool skipped_header = !header;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        std::vector<double> row;
        std::size_t col = 0;
        while (true) {
            const std::size_t comma = line.find(',');
            std::string_view cell = trim(line.substr(0, comma));
            ++col;
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
                throw FormatError("csv parse failure at row " + std::to_string(line_no) +
                                  ", column " + std::to_string(col) + ": '" + std::string(cell) +
                                  "'");
            }
            row.push_back(v);
            if (comma == std::string_view::npos) break;
            line.remove_prefix(comma + 1);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw FormatError("csv row " + std::to_string(line_no) + " has " +
                              std::to_string(row.size()) + " columns, expected " +
                              std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw FormatError("csv input contains no data rows");
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

inline Matrix parse_idx_images(const std::vector<unsigned char>& bytes, const std::string& name) {
    if (bytes.size() < 4) throw FormatError(name + ": file too short for an idx header");
    const std::uint32_t magic = read_be32(bytes.data());
    if (magic != 0x00000803u)
        throw FormatError(name + ": idx magic is not 0x00000803 (unsigned byte, 3 dims)");
    if (bytes.size() < 16) throw StructuralError(name + ": truncated idx header");
    const std::uint64_t count = read_be32(bytes.data() + 4);
    const std::uint64_t h = read_be32(bytes.data() + 8);
    const std::uint64_t w = read_be32(bytes.data() + 12);
    const std::uint64_t expected = 16 + count * h * w;
    if (bytes.size() != expected) {
        throw StructuralError(name + ": idx header declares " + std::to_string(count) + "x" +
                              std::to_string(h) + "x" + std::to_string(w) + " (" +
                              std::to_string(expected) + " bytes) but file has " +
                              std::to_string(bytes.size()) + " bytes");
    }
    Matrix m(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(h * w));
    const unsigned char* p = bytes.data() + 16;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = *p++;
    return m;
}

inline Matrix parse_raw_f64(const std::vector<unsigned char>& bytes, const std::string& name) {
    if (bytes.size() < 16) throw FormatError(name + ": raw_f64 header needs 16 bytes");
    const std::uint64_t n = read_le64(bytes.data());
    const std::uint64_t m = read_le64(bytes.data() + 8);
    if (bytes.size() != 16 + n * m * 8) {
        throw StructuralError(name + ": raw_f64 header declares " + std::to_string(n) + "x" +
                              std::to_string(m) + " but payload has " +
                              std::to_string(bytes.size() - 16) + " bytes");
    }
    if (n == 0 || m == 0) throw FormatError(name + ": raw_f64 matrix is empty");
    Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    const unsigned char* p = bytes.data() + 16;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (Eigen::Index j = 0; j < out.cols(); ++j) {
            const std::uint64_t bits = read_le64(p);
            p += 8;
            out(i, j) = std::bit_cast<double>(bits);
        }
    }
    return out;
}

}  // namespace detail

/// Loads a matrix file; metadata is computed eagerly and provenance flags are
/// cleared.
inline DataMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format,
                              LoadOptions opts = {}) {
    const auto bytes = detail::read_bytes(path);
    const std::string name = path.filename().string();
    switch (format) {
        case MatrixFormat::csv:
            return DataMatrix(detail::parse_csv(std::string(bytes.begin(), bytes.end()),
                                                opts.csv_header));
        case MatrixFormat::idx:
            return DataMatrix(detail::parse_idx_images(bytes, name));
        case MatrixFormat::raw_f64:
            return DataMatrix(detail::parse_raw_f64(bytes, name));
    }
    throw UsageError("unreachable matrix format");
}

/// Loads several files of the same format and stacks them vertically
/// (e.g. the train and test halves of an image set).
inline DataMatrix load_matrix_stack(const std::vector<std::filesystem::path>& paths,
                                    MatrixFormat format, LoadOptions opts = {}) {
    if (paths.empty()) throw UsageError("no input files given");
    std::vector<DataMatrix> parts;
    Eigen::Index rows = 0;
    for (const auto& p : paths) {
        parts.push_back(load_matrix(p, format, opts));
        if (parts.back().cols() != parts.front().cols())
            throw StructuralError("column count mismatch while stacking " + p.string());
        rows += parts.back().rows();
    }
    if (parts.size() == 1) return parts.front();
    Matrix all(rows, parts.front().cols());
    Eigen::Index at = 0;
    for (const auto& part : parts) {
        all.middleRows(at, part.rows()) = part.values();
        at += part.rows();
    }
    return DataMatrix(std::move(all));
}

/// Reads an idx1 label file (magic 0x00000801).
inline std::vector<int> load_idx_labels(const std::filesystem::path& path) {
    const auto bytes = detail::read_bytes(path);
    const std::string name = path.filename().string();
    if (bytes.size() < 8) throw FormatError(name + ": file too short for an idx label header");
    if (detail::read_be32(bytes.data()) != 0x00000801u)
        throw FormatError(name + ": idx magic is not 0x00000801 (labels)");
    const std::uint64_t count = detail::read_be32(bytes.data() + 4);
    if (bytes.size() != 8 + count)
        throw StructuralError(name + ": idx label header declares " + std::to_string(count) +
                              " labels but file has " + std::to_string(bytes.size() - 8));
    return {bytes.begin() + 8, bytes.end()};
}

/// Labels from a one-column csv file or an idx1 file, by extension.
inline std::vector<int> load_labels(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".csv" || ext == ".txt") {
        const auto m = load_matrix(path, MatrixFormat::csv);
        std::vector<int> out(static_cast<std::size_t>(m.rows()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            out[static_cast<std::size_t>(i)] = static_cast<int>(m.values()(i, 0));
        return out;
    }
    return load_idx_labels(path);
}

inline void save_raw_f64(const std::filesystem::path& path, const Matrix& m) {
    std::string bytes(16 + 8 * static_cast<std::size_t>(m.size()), '\0');
    auto put64 = [&](std::size_t at, std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes[at + i] = static_cast<char>((v >> (8 * i)) & 0xff);
    };
    put64(0, static_cast<std::uint64_t>(m.rows()));
    put64(8, static_cast<std::uint64_t>(m.cols()));
    std::size_t at = 16;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j, at += 8)
            put64(at, std::bit_cast<std::uint64_t>(m(i, j)));
    CsvWriter::write_text(path, bytes);
}

/// Largest singular value, from the eigenvalues of the smaller Gram matrix.
inline double largest_singular_value(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::MatrixXd gram;
    if (a.rows() >= a.cols()) {
        gram = Eigen::MatrixXd::Zero(a.cols(), a.cols());
        gram.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
    } else {
        gram = Eigen::MatrixXd::Zero(a.rows(), a.rows());
        gram.selfadjointView<Eigen::Lower>().rankUpdate(a);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

struct PreprocessOptions {
    bool center = false;
    bool spectral_normalize = false;
};

/// Per-column (feature-wise) centering, then division by the largest singular
/// value. Both steps are idempotent.
inline DataMatrix preprocess(const DataMatrix& m, PreprocessOptions opts) {
    if (m.empty()) throw PreconditionError("preprocess: matrix is empty");
    Matrix a = m.values();
    Provenance prov = m.provenance();
    if (opts.center) {
        const Eigen::RowVectorXd mean = a.colwise().mean();
        a.rowwise() -= mean;
        prov.row_mean_centered = true;
    }
    if (opts.spectral_normalize) {
        const double smax = largest_singular_value(a);
        if (!(smax > 0.0)) throw DivideByZeroError("preprocess: cannot normalize the zero matrix");
        a /= smax;
        prov.spectral_normalized = true;
    }
    return DataMatrix(std::move(a), prov);
}

/// Non-negative count matrix between two categorical variables
/// (rows: first variable, columns: second).
struct ContingencyTable {
    Matrix counts;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;

    double total() const { return counts.sum(); }

    ContingencyTable transposed() const { return {counts.transpose(), col_labels, row_labels}; }

    void validate() const {
        if ((counts.array() < 0.0).any()) throw PreconditionError("contingency table has negative counts");
        if (!(total() > 0.0)) throw DegenerateTableError("contingency table has zero total count");
    }
};

struct ContingencyFilters {
    bool drop_stopwords = true;
    std::size_t min_doc_freq = 2;
    double max_doc_ratio = 0.5;

    static ContingencyFilters none() { return {false, 0, 1.0}; }
};

/// Lower-cases and splits on anything that is not a letter or digit.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

/// Document x word count table. Vocabulary columns are sorted
/// lexicographically; a word survives when its document frequency is at least
/// `min_doc_freq` and at most `max_doc_ratio` of the corpus.
inline ContingencyTable build_contingency(const std::vector<std::vector<std::string>>& corpus,
                                          const ContingencyFilters& filters = {}) {
    if (corpus.empty()) throw PreconditionError("build_contingency: corpus is empty");
    std::map<std::string, std::size_t> doc_freq;
    for (const auto& doc : corpus) {
        std::set<std::string> seen(doc.begin(), doc.end());
        for (const auto& w : seen) ++doc_freq[w];
    }
    const double ndocs = static_cast<double>(corpus.size());
    std::map<std::string, Eigen::Index> column;
    std::vector<std::string> vocab;
    for (const auto& [word, df] : doc_freq) {
        if (filters.drop_stopwords && is_stopword(word)) continue;
        if (df < filters.min_doc_freq) continue;
        if (static_cast<double>(df) / ndocs > filters.max_doc_ratio) continue;
        column.emplace(word, static_cast<Eigen::Index>(vocab.size()));
        vocab.push_back(word);
    }
    if (vocab.empty()) throw EmptyVocabularyError("build_contingency: every word was filtered out");

    ContingencyTable t;
    t.counts = Matrix::Zero(static_cast<Eigen::Index>(corpus.size()),
                            static_cast<Eigen::Index>(vocab.size()));
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (const auto& w : corpus[i]) {
            auto it = column.find(w);
            if (it != column.end()) t.counts(static_cast<Eigen::Index>(i), it->second) += 1.0;
        }
        t.row_labels.push_back("doc" + std::to_string(i));
    }
    t.col_labels = std::move(vocab);
    return t;
}

/// Standardized-residual matrix of a contingency table plus the marginals it
/// was scaled with.
struct CaMatrix {
    DataMatrix residuals;
    Vector row_marginals;
    Vector col_marginals;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::string> dropped_rows;
    std::vector<std::string> dropped_cols;
    double total = 0.0;

    /// D^{-1/2} diagonals.
    Vector row_scale() const { return row_marginals.array().rsqrt(); }
    Vector col_scale() const { return col_marginals.array().rsqrt(); }
};

struct CaOptions {
    /// Added to every cell before normalization (Laplace smoothing).
    double smoothing = 0.0;
};

/// A = D_X^{-1/2} (P - p_X p_Y^T) D_Y^{-1/2}. All-zero rows and columns are
/// dropped and reported.
inline CaMatrix build_ca_matrix(const ContingencyTable& t, CaOptions opts = {}) {
    if (t.counts.size() == 0) throw DegenerateTableError("build_ca_matrix: empty table");
    if ((t.counts.array() < 0.0).any())
        throw PreconditionError("build_ca_matrix: negative counts");
    if (!(t.total() > 0.0) && !(opts.smoothing > 0.0))
        throw DegenerateTableError("build_ca_matrix: zero total count");

    auto label = [](const std::vector<std::string>& labels, Eigen::Index i, const char* prefix) {
        return static_cast<std::size_t>(i) < labels.size() ? labels[static_cast<std::size_t>(i)]
                                                            : prefix + std::to_string(i);
    };

    Matrix counts = t.counts.array() + opts.smoothing;
    CaMatrix out;
    std::vector<Eigen::Index> keep_r, keep_c;
    for (Eigen::Index i = 0; i < counts.rows(); ++i) {
        if (counts.row(i).sum() > 0.0) {
            keep_r.push_back(i);
            out.row_labels.push_back(label(t.row_labels, i, "row"));
        } else {
            out.dropped_rows.push_back(label(t.row_labels, i, "row"));
        }
    }
    for (Eigen::Index j = 0; j < counts.cols(); ++j) {
        if (counts.col(j).sum() > 0.0) {
            keep_c.push_back(j);
            out.col_labels.push_back(label(t.col_labels, j, "col"));
        } else {
            out.dropped_cols.push_back(label(t.col_labels, j, "col"));
        }
    }
    Matrix kept(static_cast<Eigen::Index>(keep_r.size()), static_cast<Eigen::Index>(keep_c.size()));
    for (std::size_t i = 0; i < keep_r.size(); ++i)
        for (std::size_t j = 0; j < keep_c.size(); ++j)
            kept(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                counts(keep_r[i], keep_c[j]);

    out.total = kept.sum();
    const Matrix joint = kept / out.total;
    out.row_marginals = joint.rowwise().sum();
    out.col_marginals = joint.colwise().sum().transpose();
    Matrix resid = joint - out.row_marginals * out.col_marginals.transpose();
    resid = out.row_scale().asDiagonal() * resid * out.col_scale().asDiagonal();
    out.residuals = DataMatrix(std::move(resid));
    return out;
}

}  // namespace qsvd

#endif  // QSVD_MATRIX_STORE_HPP
