#include "hwy/matrix.hpp"

#include <cmath>
#include <limits>

namespace hwy {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows = init.size();
    cols = rows ? init.begin()->size() : 0;
    data.reserve(rows * cols);
    for (const auto& r : init) {
        if (r.size() != cols) {
            throw ShapeError("ragged initializer: row has " + std::to_string(r.size()) +
                             " entries, expected " + std::to_string(cols));
        }
        data.insert(data.end(), r.begin(), r.end());
    }
}

std::string Matrix::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

void Matrix::assert_finite(const char* what) const {
    double acc = 0.0;
    for (double v : data) acc += std::abs(v);
    if (std::isfinite(acc)) return;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i])) {
            throw NumericError(std::string(what) + ": non-finite value " +
                               std::to_string(data[i]) + " at flat index " + std::to_string(i));
        }
    }
    // Every entry finite but the magnitude sum overflowed; still out of contract.
    throw NumericError(std::string(what) + ": magnitudes overflow double range");
}

namespace {

[[noreturn]] void shape_fail(const char* op, const Matrix& a, const Matrix& b) {
    throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_str() +
                     " and " + b.shape_str());
}

} // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) shape_fail("matmul", a, b);
    Matrix c(a.rows, b.cols);
    const std::size_t n = a.rows, k = a.cols, m = b.cols;
    // Accumulation over the shared dimension runs left to right for every
    // output entry; this order is part of the contract.
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a.row_ptr(i);
        double* ci = c.row_ptr(i);
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = ai[kk];
            const double* bk = b.row_ptr(kk);
            for (std::size_t j = 0; j < m; ++j) ci[j] += av * bk[j];
        }
    }
    c.assert_finite("matmul");
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) shape_fail("matmul_tn", a, b);
    Matrix c(a.cols, b.cols);
    const std::size_t k = a.rows, n = a.cols, m = b.cols;
    for (std::size_t kk = 0; kk < k; ++kk) {
        const double* ak = a.row_ptr(kk);
        const double* bk = b.row_ptr(kk);
        for (std::size_t i = 0; i < n; ++i) {
            const double av = ak[i];
            double* ci = c.row_ptr(i);
            for (std::size_t j = 0; j < m; ++j) ci[j] += av * bk[j];
        }
    }
    c.assert_finite("matmul_tn");
    return c;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

Matrix add_row_bias(const Matrix& m, const Matrix& bias) {
    if (bias.rows != 1 || bias.cols != m.cols) shape_fail("add_row_bias", m, bias);
    Matrix out(m.rows, m.cols);
    const double* bp = bias.data.data();
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* mi = m.row_ptr(i);
        double* oi = out.row_ptr(i);
        for (std::size_t j = 0; j < m.cols; ++j) oi[j] = mi[j] + bp[j];
    }
    out.assert_finite("add_row_bias");
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) shape_fail("hadamard", a, b);
    Matrix out(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] * b.data[i];
    out.assert_finite("hadamard");
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) shape_fail("add", a, b);
    Matrix out(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] + b.data[i];
    out.assert_finite("add");
    return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) shape_fail("sub", a, b);
    Matrix out(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] - b.data[i];
    out.assert_finite("sub");
    return out;
}

Matrix scale(const Matrix& m, double s) {
    Matrix out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = m.data[i] * s;
    out.assert_finite("scale");
    return out;
}

Matrix col_sum(const Matrix& m) {
    Matrix out(1, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* mi = m.row_ptr(i);
        for (std::size_t j = 0; j < m.cols; ++j) out.data[j] += mi[j];
    }
    out.assert_finite("col_sum");
    return out;
}

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::sigmoid: return "sigmoid";
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
        case Activation::linear: return "linear";
    }
    throw UsageError("unknown activation kind");
}

Activation activation_from_name(const std::string& name) {
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "tanh") return Activation::tanh;
    if (name == "relu") return Activation::relu;
    if (name == "linear") return Activation::linear;
    throw UsageError("unknown activation name: " + name);
}

double sigmoid(double x) {
    // exp only ever sees a non-positive argument, so no overflow.
    double v;
    if (x >= 0.0) {
        v = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        v = e / (1.0 + e);
    }
    // Keep the open interval even where double rounding would hit 0 or 1.
    constexpr double lo = std::numeric_limits<double>::min();
    const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    if (v < lo) v = lo;
    if (v > hi) v = hi;
    return v;
}

Matrix activation(Activation kind, const Matrix& m) {
    Matrix out(m.rows, m.cols);
    switch (kind) {
        case Activation::sigmoid:
            for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = sigmoid(m.data[i]);
            break;
        case Activation::tanh:
            for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = std::tanh(m.data[i]);
            break;
        case Activation::relu:
            for (std::size_t i = 0; i < m.data.size(); ++i)
                out.data[i] = m.data[i] > 0.0 ? m.data[i] : 0.0;
            break;
        case Activation::linear:
            out.data = m.data;
            break;
    }
    return out;
}

Matrix activation_grad(Activation kind, const Matrix& cached) {
    Matrix out(cached.rows, cached.cols);
    switch (kind) {
        case Activation::sigmoid: // cached = sigmoid(z)
            for (std::size_t i = 0; i < cached.data.size(); ++i) {
                const double s = cached.data[i];
                out.data[i] = s * (1.0 - s);
            }
            break;
        case Activation::tanh: // cached = tanh(z)
            for (std::size_t i = 0; i < cached.data.size(); ++i) {
                const double t = cached.data[i];
                out.data[i] = 1.0 - t * t;
            }
            break;
        case Activation::relu: // cached = z; derivative at exactly 0 is 0
            for (std::size_t i = 0; i < cached.data.size(); ++i)
                out.data[i] = cached.data[i] > 0.0 ? 1.0 : 0.0;
            break;
        case Activation::linear:
            for (std::size_t i = 0; i < cached.data.size(); ++i) out.data[i] = 1.0;
            break;
    }
    return out;
}

} // namespace hwy
