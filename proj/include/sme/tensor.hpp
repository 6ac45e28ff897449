#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "sme/errors.hpp"

namespace sme {

// Dense double-precision vector. Length is fixed at construction.
class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t n, double fill = 0.0) : values_(n, fill) {}
    Vector(std::initializer_list<double> values) : values_(values) {}
    explicit Vector(std::span<const double> values) : values_(values.begin(), values.end()) {}

    std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    double* begin() { return values_.data(); }
    double* end() { return values_.data() + values_.size(); }
    const double* begin() const { return values_.data(); }
    const double* end() const { return values_.data() + values_.size(); }

    std::span<double> span() { return values_; }
    std::span<const double> span() const { return values_; }

    void fill(double value);

    bool operator==(const Vector&) const = default;

private:
    std::vector<double> values_;
};

// Row-major dense matrix: element (r, c) lives at r * cols + c.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    void fill(double value);

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

// Dense 3-mode array of shape (n1, n2, n3), element (i, j, k) at
// (i * n2 + j) * n3 + k. In the model, mode 1 indexes output coordinates,
// mode 2 entity-embedding coordinates and mode 3 relation-embedding
// coordinates.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(std::size_t n1, std::size_t n2, std::size_t n3, double fill = 0.0)
        : n1_(n1), n2_(n2), n3_(n3), values_(n1 * n2 * n3, fill) {}

    std::size_t dim1() const { return n1_; }
    std::size_t dim2() const { return n2_; }
    std::size_t dim3() const { return n3_; }

    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return values_[(i * n2_ + j) * n3_ + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return values_[(i * n2_ + j) * n3_ + k];
    }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    void fill(double value);

    bool operator==(const Tensor3&) const = default;

private:
    std::size_t n1_ = 0;
    std::size_t n2_ = 0;
    std::size_t n3_ = 0;
    std::vector<double> values_;
};

// m * v, accumulated left to right over columns.
Vector matvec(const Matrix& m, std::span<const double> v);

// m^T * v.
Vector matvec_transposed(const Matrix& m, std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);

// M[i][j] = sum_k t(i, j, k) * v[k].
Matrix mode3_contract(const Tensor3& t, std::span<const double> v);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

double norm2(std::span<const double> v);

bool all_finite(std::span<const double> v);

}  // namespace sme
