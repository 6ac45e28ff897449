#include "sme/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sme {

namespace {

void require_length(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw ShapeError(std::string(what) + ": expected length " + std::to_string(want) +
                         ", got " + std::to_string(got));
    }
}

}  // namespace

void Vector::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    require_length(values_.size(), rows * cols, "Matrix storage");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void Matrix::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

void Tensor3::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

Vector matvec(const Matrix& m, std::span<const double> v) {
    require_length(v.size(), m.cols(), "matvec");
    Vector out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        double acc = 0.0;
        for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * v[c];
        out[r] = acc;
    }
    return out;
}

Vector matvec_transposed(const Matrix& m, std::span<const double> v) {
    require_length(v.size(), m.rows(), "matvec_transposed");
    Vector out(m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) axpy(v[r], m.row(r), out.span());
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    require_length(b.size(), a.size(), "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

Matrix mode3_contract(const Tensor3& t, std::span<const double> v) {
    require_length(v.size(), t.dim3(), "mode3_contract");
    Matrix out(t.dim1(), t.dim2());
    const auto w = t.values();
    const std::size_t n3 = t.dim3();
    auto o = out.values();
    for (std::size_t ij = 0; ij < o.size(); ++ij) {
        const double* fiber = w.data() + ij * n3;
        double acc = 0.0;
        for (std::size_t k = 0; k < n3; ++k) acc += fiber[k] * v[k];
        o[ij] = acc;
    }
    return out;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    require_length(y.size(), x.size(), "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace sme
