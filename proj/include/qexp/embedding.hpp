#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "qexp/error.hpp"

namespace qexp {

/// Dense vector with a fixed dimension. Entries must be finite.
class Embedding {
  public:
    Embedding() = default;
    explicit Embedding(std::vector<double> values) : m_values(std::move(values)) { check_finite(); }

    std::size_t dim() const noexcept { return m_values.size(); }
    std::span<const double> values() const noexcept { return m_values; }
    double operator[](std::size_t i) const noexcept { return m_values[i]; }

    double norm() const noexcept
    {
        double s = 0.0;
        for (double v : m_values) {
            s += v * v;
        }
        return std::sqrt(s);
    }

    /// Scales to unit L2 norm. Throws ValidationError on a zero vector.
    Embedding& normalize()
    {
        double n = norm();
        if (!(n > 0.0)) {
            throw ValidationError("cannot normalize a zero-norm embedding");
        }
        for (double& v : m_values) {
            v /= n;
        }
        return *this;
    }

    Embedding normalized() const
    {
        Embedding copy = *this;
        copy.normalize();
        return copy;
    }

    friend bool operator==(const Embedding&, const Embedding&) = default;

  private:
    void check_finite() const
    {
        for (double v : m_values) {
            if (!std::isfinite(v)) {
                throw ValidationError("embedding has a non-finite entry");
            }
        }
    }

    std::vector<double> m_values;
};

inline double dot(std::span<const double> a, std::span<const double> b) noexcept
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

inline double squared_l2(std::span<const double> a, std::span<const double> b) noexcept
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

/// Row-major n x d matrix.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : m_rows(rows), m_cols(cols), m_data(rows * cols, 0.0) {}

    static Matrix from_rows(std::span<const Embedding> rows)
    {
        if (rows.empty()) {
            return {};
        }
        Matrix m(rows.size(), rows.front().dim());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].dim() != m.m_cols) {
                throw ValidationError("embedding dimension mismatch at row " + std::to_string(i));
            }
            auto v = rows[i].values();
            std::copy(v.begin(), v.end(), m.m_data.begin() + static_cast<std::ptrdiff_t>(i * m.m_cols));
        }
        return m;
    }

    std::size_t rows() const noexcept { return m_rows; }
    std::size_t cols() const noexcept { return m_cols; }

    std::span<const double> row(std::size_t i) const noexcept { return {m_data.data() + i * m_cols, m_cols}; }
    std::span<double> row(std::size_t i) noexcept { return {m_data.data() + i * m_cols, m_cols}; }

  private:
    std::size_t m_rows = 0;
    std::size_t m_cols = 0;
    std::vector<double> m_data;
};

}  // namespace qexp
