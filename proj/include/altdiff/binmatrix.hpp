#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "altdiff/bitword.hpp"
#include "altdiff/errors.hpp"

namespace altdiff {

// Dense matrix over F2 with at most 64 rows and 64 columns.
//
// Each row is packed into one machine word with column 0 in the most
// significant used bit. Vectors act on the right (x -> xM), so row i is the
// image of e_{i+1} and applying a matrix is an XOR of the selected rows.
class BinMatrix {
public:
    BinMatrix() = default;

    BinMatrix(unsigned rows, unsigned cols) : rows_(rows), cols_(cols), data_(rows, 0) {
        if (rows == 0 || cols == 0 || rows > 64 || cols > 64) {
            throw dimension_error("matrix dimensions must be in 1..64");
        }
    }

    static BinMatrix identity(unsigned n) {
        BinMatrix m(n, n);
        for (unsigned i = 0; i < n; ++i) {
            m.set(i, i, true);
        }
        return m;
    }

    static BinMatrix zero(unsigned rows, unsigned cols) { return BinMatrix(rows, cols); }

    static BinMatrix from_rows(unsigned cols, const std::vector<std::uint64_t>& rows) {
        BinMatrix m(static_cast<unsigned>(rows.size()), cols);
        for (unsigned i = 0; i < m.rows_; ++i) {
            if ((rows[i] & ~low_mask(cols)) != 0) {
                throw dimension_error("row wider than column count");
            }
            m.data_[i] = rows[i];
        }
        return m;
    }

    // One row per line of '0'/'1' characters. Blank lines and '#' comments are
    // skipped; trailing whitespace is tolerated.
    static BinMatrix parse(std::string_view text) {
        std::vector<std::uint64_t> rows;
        unsigned cols = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t end = text.find('\n', pos);
            if (end == std::string_view::npos) {
                end = text.size();
            }
            std::string_view line = text.substr(pos, end - pos);
            pos = end + 1;
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
                line.remove_suffix(1);
            }
            if (line.empty() || line.front() == '#') {
                continue;
            }
            if (line.size() > 64) {
                throw parse_error("matrix row longer than 64 columns");
            }
            if (cols == 0) {
                cols = static_cast<unsigned>(line.size());
            } else if (line.size() != cols) {
                throw parse_error("ragged matrix: row of width " + std::to_string(line.size()) +
                                  ", expected " + std::to_string(cols));
            }
            std::uint64_t row = 0;
            for (char c : line) {
                if (c != '0' && c != '1') {
                    throw parse_error(std::string("non-binary character '") + c + "' in matrix");
                }
                row = (row << 1) | static_cast<std::uint64_t>(c == '1');
            }
            rows.push_back(row);
            if (rows.size() > 64) {
                throw parse_error("matrix has more than 64 rows");
            }
        }
        if (rows.empty()) {
            throw parse_error("empty matrix");
        }
        return from_rows(cols, rows);
    }

    unsigned rows() const { return rows_; }
    unsigned cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }

    bool get(unsigned i, unsigned j) const { return (data_.at(i) >> (cols_ - 1 - j)) & 1; }

    void set(unsigned i, unsigned j, bool v) {
        const std::uint64_t bit = std::uint64_t{1} << (cols_ - 1 - j);
        data_.at(i) = v ? (data_.at(i) | bit) : (data_.at(i) & ~bit);
    }

    std::uint64_t row(unsigned i) const { return data_.at(i); }
    const std::vector<std::uint64_t>& row_words() const { return data_; }

    // xM for an integer-encoded row vector of rows() bits.
    std::uint64_t apply(std::uint64_t x) const {
        std::uint64_t y = 0;
        for (unsigned i = 0; i < rows_; ++i) {
            if ((x >> (rows_ - 1 - i)) & 1) {
                y ^= data_[i];
            }
        }
        return y;
    }

    // x(AB) = (xA)B.
    friend BinMatrix operator*(const BinMatrix& a, const BinMatrix& b) {
        if (a.cols_ != b.rows_) {
            throw dimension_error("matrix product dimension mismatch");
        }
        BinMatrix out(a.rows_, b.cols_);
        for (unsigned i = 0; i < a.rows_; ++i) {
            out.data_[i] = b.apply(a.data_[i]);
        }
        return out;
    }

    BinMatrix transpose() const {
        BinMatrix t(cols_, rows_);
        for (unsigned i = 0; i < rows_; ++i) {
            for (unsigned j = 0; j < cols_; ++j) {
                if (get(i, j)) {
                    t.set(j, i, true);
                }
            }
        }
        return t;
    }

    unsigned rank() const {
        std::vector<std::uint64_t> work = data_;
        unsigned r = 0;
        for (unsigned c = 0; c < cols_ && r < rows_; ++c) {
            const std::uint64_t bit = std::uint64_t{1} << (cols_ - 1 - c);
            unsigned pivot = r;
            while (pivot < rows_ && !(work[pivot] & bit)) {
                ++pivot;
            }
            if (pivot == rows_) {
                continue;
            }
            std::swap(work[r], work[pivot]);
            for (unsigned i = 0; i < rows_; ++i) {
                if (i != r && (work[i] & bit)) {
                    work[i] ^= work[r];
                }
            }
            ++r;
        }
        return r;
    }

    // Gauss-Jordan on [M | I]; nullopt when singular.
    std::optional<BinMatrix> inverse() const {
        if (!is_square()) {
            throw dimension_error("cannot invert a non-square matrix");
        }
        const unsigned n = rows_;
        std::vector<std::uint64_t> left = data_;
        std::vector<std::uint64_t> right = identity(n).data_;
        for (unsigned c = 0; c < n; ++c) {
            const std::uint64_t bit = std::uint64_t{1} << (n - 1 - c);
            unsigned pivot = c;
            while (pivot < n && !(left[pivot] & bit)) {
                ++pivot;
            }
            if (pivot == n) {
                return std::nullopt;
            }
            std::swap(left[c], left[pivot]);
            std::swap(right[c], right[pivot]);
            for (unsigned i = 0; i < n; ++i) {
                if (i != c && (left[i] & bit)) {
                    left[i] ^= left[c];
                    right[i] ^= right[c];
                }
            }
        }
        return from_rows(n, right);
    }

    bool is_invertible() const { return is_square() && rank() == rows_; }

    BinMatrix block(unsigned row0, unsigned col0, unsigned nrows, unsigned ncols) const {
        if (row0 + nrows > rows_ || col0 + ncols > cols_) {
            throw dimension_error("sub-block out of range");
        }
        BinMatrix out(nrows, ncols);
        for (unsigned i = 0; i < nrows; ++i) {
            out.data_[i] = (data_[row0 + i] >> (cols_ - col0 - ncols)) & low_mask(ncols);
        }
        return out;
    }

    void paste(unsigned row0, unsigned col0, const BinMatrix& src) {
        if (row0 + src.rows_ > rows_ || col0 + src.cols_ > cols_) {
            throw dimension_error("paste out of range");
        }
        const unsigned shift = cols_ - col0 - src.cols_;
        const std::uint64_t window = low_mask(src.cols_) << shift;
        for (unsigned i = 0; i < src.rows_; ++i) {
            data_[row0 + i] = (data_[row0 + i] & ~window) | (src.data_[i] << shift);
        }
    }

    bool is_zero() const {
        return std::all_of(data_.begin(), data_.end(), [](std::uint64_t r) { return r == 0; });
    }

    std::string to_text() const {
        std::string out;
        out.reserve(rows_ * (cols_ + 1));
        for (unsigned i = 0; i < rows_; ++i) {
            for (unsigned j = 0; j < cols_; ++j) {
                out.push_back(get(i, j) ? '1' : '0');
            }
            out.push_back('\n');
        }
        return out;
    }

    friend bool operator==(const BinMatrix&, const BinMatrix&) = default;

    std::size_t hash() const {
        std::size_t h = std::hash<unsigned>{}(rows_ * 131 + cols_);
        for (std::uint64_t r : data_) {
            h ^= std::hash<std::uint64_t>{}(r) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }

private:
    unsigned rows_ = 0;
    unsigned cols_ = 0;
    std::vector<std::uint64_t> data_;
};

struct BinMatrixHash {
    std::size_t operator()(const BinMatrix& m) const { return m.hash(); }
};

// x·M with a BitWord. Square matrices keep the input geometry.
inline BitWord mat_vec(const BitWord& x, const BinMatrix& m) {
    if (x.size() != m.rows()) {
        throw dimension_error("vector of length " + std::to_string(x.size()) +
                              " against matrix with " + std::to_string(m.rows()) + " rows");
    }
    const Geometry g = m.is_square() ? x.geometry() : Geometry{1, m.cols()};
    return BitWord(m.apply(x.value()), g);
}

// Byte-sliced lookup tables for repeated application of one matrix.
class MatrixApplier {
public:
    explicit MatrixApplier(const BinMatrix& m) : in_bits_(m.rows()) {
        const unsigned chunks = (in_bits_ + 7) / 8;
        tables_.resize(chunks);
        for (unsigned c = 0; c < chunks; ++c) {
            // chunk c covers input bits [8c, 8c+8) counted from the least significant end
            for (unsigned v = 0; v < 256; ++v) {
                std::uint64_t x = static_cast<std::uint64_t>(v) << (8 * c);
                tables_[c][v] = m.apply(x & low_mask(in_bits_));
            }
        }
    }

    std::uint64_t operator()(std::uint64_t x) const {
        std::uint64_t y = 0;
        for (std::size_t c = 0; c < tables_.size(); ++c) {
            y ^= tables_[c][(x >> (8 * c)) & 0xFF];
        }
        return y;
    }

private:
    unsigned in_bits_;
    std::vector<std::array<std::uint64_t, 256>> tables_;
};

}  // namespace altdiff
