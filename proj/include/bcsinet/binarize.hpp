#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bcsinet/tensor.hpp"

namespace bcsinet {

// Surrogate gradient of sign(x). Indicator is the gate-filter behaviour
// (1 inside |x| < 1); AsPrinted passes x itself through the gate. Indicator
// is the default everywhere.
enum class GateVariant { Indicator, AsPrinted };

template <typename T>
struct BinarizeResult {
    std::vector<int8_t> signs;  // entries in {-1, +1}, sign(0) := +1
    T alpha = T(0);             // ||W||_1 / (m*n)
};

// Closed-form minimizer of ||w - alpha*b||^2 over b in {-1,+1}^(mn), alpha > 0:
// b = sign(w), alpha = mean(|w|).
template <typename T>
BinarizeResult<T> binarize(const T* w, size_t count) {
    if (count == 0) throw std::invalid_argument("binarize: empty weight matrix");
    BinarizeResult<T> r;
    r.signs.resize(count);
    T abs_sum = T(0);
    for (size_t i = 0; i < count; ++i) {
        r.signs[i] = (w[i] < T(0)) ? int8_t(-1) : int8_t(1);
        abs_sum += std::abs(w[i]);
    }
    r.alpha = abs_sum / static_cast<T>(count);
    return r;
}

template <typename T>
BinarizeResult<T> binarize(const TensorT<T>& w) {
    return binarize(w.data.data(), w.data.size());
}

template <typename T>
T sign_gate_grad(T x, GateVariant variant) {
    if (std::abs(x) >= T(1)) return T(0);
    return variant == GateVariant::Indicator ? T(1) : x;
}

template <typename T>
TensorT<T> sign_gate_grad(const TensorT<T>& x, GateVariant variant) {
    TensorT<T> out(x.shape);
    for (size_t i = 0; i < x.data.size(); ++i) out[i] = sign_gate_grad(x[i], variant);
    return out;
}

// Gradient of the scaled sign alpha*sign(W) w.r.t. W, elementwise:
//   dC/dW = dC/dWb * (1/(mn) + alpha * dsign(W)/dW)
// Cross terms of dalpha/dW_i are dropped (elementwise approximation).
template <typename T>
void ste_weight_grad(const T* grad_wb, const T* w, size_t count, T alpha, GateVariant variant,
                     T* grad_w_out) {
    if (count == 0) throw std::invalid_argument("ste_weight_grad: empty matrix");
    const T inv_mn = T(1) / static_cast<T>(count);
    for (size_t i = 0; i < count; ++i) {
        grad_w_out[i] = grad_wb[i] * (inv_mn + alpha * sign_gate_grad(w[i], variant));
    }
}

template <typename T>
TensorT<T> ste_weight_grad(const TensorT<T>& grad_wb, const TensorT<T>& w, T alpha,
                           GateVariant variant) {
    if (!grad_wb.same_shape(w)) {
        throw std::invalid_argument("ste_weight_grad: grad shape " + grad_wb.shape_str() +
                                    " does not match weight shape " + w.shape_str());
    }
    TensorT<T> out(w.shape);
    ste_weight_grad(grad_wb.data.data(), w.data.data(), w.data.size(), alpha, variant,
                    out.data.data());
    return out;
}

}  // namespace bcsinet
