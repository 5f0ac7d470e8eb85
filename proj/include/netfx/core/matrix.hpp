#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace netfx {

/// Dense column-major matrix. Column `c` occupies a contiguous span.
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) noexcept {
        assert(r < rows_ && c < cols_);
        return data_[c * rows_ + r];
    }
    const T& operator()(std::size_t r, std::size_t c) const noexcept {
        assert(r < rows_ && c < cols_);
        return data_[c * rows_ + r];
    }

    [[nodiscard]] std::span<T> column(std::size_t c) noexcept {
        return {data_.data() + c * rows_, rows_};
    }
    [[nodiscard]] std::span<const T> column(std::size_t c) const noexcept {
        return {data_.data() + c * rows_, rows_};
    }

    /// Copy of row `r` (strided in storage).
    [[nodiscard]] std::vector<T> row(std::size_t r) const {
        std::vector<T> out(cols_);
        for (std::size_t c = 0; c < cols_; ++c) out[c] = (*this)(r, c);
        return out;
    }

    [[nodiscard]] std::span<T> data() noexcept { return data_; }
    [[nodiscard]] std::span<const T> data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

}  // namespace netfx
