#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "hwy/errors.hpp"

namespace hwy {

/// Dense row-major matrix of doubles. The single value type for activations,
/// weights and gradients. A 1 x n matrix doubles as a row vector (biases).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // rows * cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> init);

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row_ptr(std::size_t i) { return data.data() + i * cols; }
    const double* row_ptr(std::size_t i) const { return data.data() + i * cols; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    std::string shape_str() const;

    /// Throws NumericError naming `what` and the first offending entry.
    void assert_finite(const char* what) const;
};

Matrix matmul(const Matrix& a, const Matrix& b);
/// transpose(a) * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

/// bias is 1 x m.cols; added to every row.
Matrix add_row_bias(const Matrix& m, const Matrix& bias);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);
/// 1 x cols vector of column sums (accumulated top to bottom).
Matrix col_sum(const Matrix& m);

enum class Activation { sigmoid, tanh, relu, linear };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

/// Branch-stable logistic function. Output clamped to the open interval
/// (0, 1) in double precision so gate values can never reach the endpoints.
double sigmoid(double x);

Matrix activation(Activation kind, const Matrix& m);

/// Elementwise derivative from the cached forward value: post-activation for
/// sigmoid/tanh, pre-activation for relu (derivative at 0 is 0).
Matrix activation_grad(Activation kind, const Matrix& cached);

} // namespace hwy
