#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

namespace wavemc {

/// Compressed sparse row matrix, immutable after construction.
class CsrMatrix {
public:
    CsrMatrix() = default;

    static CsrMatrix from_triplets(int rows, int cols,
                                   std::vector<std::tuple<int, int, double>> triplets) {
        std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
            return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
        });
        CsrMatrix m;
        m.rows_ = rows;
        m.cols_ = cols;
        m.row_ptr_.assign(rows + 1, 0);
        for (std::size_t i = 0; i < triplets.size();) {
            const int r = std::get<0>(triplets[i]);
            const int c = std::get<1>(triplets[i]);
            double v = 0.0;
            while (i < triplets.size() && std::get<0>(triplets[i]) == r && std::get<1>(triplets[i]) == c) {
                v += std::get<2>(triplets[i]);
                ++i;
            }
            m.col_idx_.push_back(c);
            m.values_.push_back(v);
            ++m.row_ptr_[r + 1];
        }
        for (int r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    long nnz() const { return static_cast<long>(values_.size()); }

    void multiply(std::span<const double> x, std::span<double> y) const {
        for (int r = 0; r < rows_; ++r) {
            double acc = 0.0;
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += values_[k] * x[col_idx_[k]];
            y[r] = acc;
        }
    }

    std::vector<double> multiply(std::span<const double> x) const {
        std::vector<double> y(rows_);
        multiply(x, y);
        return y;
    }

    /// Copy keeping only columns with keep[c] != 0 (structure dropped elsewhere).
    CsrMatrix masked_columns(const std::vector<std::uint8_t>& keep) const {
        CsrMatrix m;
        m.rows_ = rows_;
        m.cols_ = cols_;
        m.row_ptr_.assign(rows_ + 1, 0);
        for (int r = 0; r < rows_; ++r) {
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
                if (keep[col_idx_[k]]) {
                    m.col_idx_.push_back(col_idx_[k]);
                    m.values_.push_back(values_[k]);
                    ++m.row_ptr_[r + 1];
                }
            }
        }
        for (int r = 0; r < rows_; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
        return m;
    }

    /// Entrywise transform of the values; pattern unchanged.
    template <class Fn>
    CsrMatrix scaled(Fn&& fn) const {
        CsrMatrix m = *this;
        for (std::size_t k = 0; k < m.values_.size(); ++k)
            m.values_[k] = fn(row_of_entry(k), m.col_idx_[k], m.values_[k]);
        return m;
    }

    double entry(int r, int c) const {
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            if (col_idx_[k] == c) return values_[k];
        return 0.0;
    }

    /// max_ij |A_ij - A_ji|
    double symmetry_error() const {
        double err = 0.0;
        for (int r = 0; r < rows_; ++r)
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                err = std::max(err, std::abs(values_[k] - entry(col_idx_[k], r)));
        return err;
    }

    const std::vector<int>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }

private:
    int row_of_entry(std::size_t k) const {
        const auto it = std::upper_bound(row_ptr_.begin(), row_ptr_.end(), static_cast<int>(k));
        return static_cast<int>(it - row_ptr_.begin()) - 1;
    }

    int rows_ = 0, cols_ = 0;
    std::vector<int> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<double> values_;
};

}  // namespace wavemc
