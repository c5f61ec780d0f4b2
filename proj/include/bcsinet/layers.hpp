#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcsinet/binarize.hpp"
#include "bcsinet/gemm.hpp"
#include "bcsinet/tensor.hpp"

namespace bcsinet {

enum class LayerKind {
    Conv3x3,
    BatchNorm,
    LeakyReLU,
    Sigmoid,
    Dense,
    BinaryDense,
    Flatten,
    Reshape,
    ResidualAdd
};

inline const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv3x3: return "Conv3x3";
        case LayerKind::BatchNorm: return "BatchNorm";
        case LayerKind::LeakyReLU: return "LeakyReLU";
        case LayerKind::Sigmoid: return "Sigmoid";
        case LayerKind::Dense: return "Dense";
        case LayerKind::BinaryDense: return "BinaryDense";
        case LayerKind::Flatten: return "Flatten";
        case LayerKind::Reshape: return "Reshape";
        case LayerKind::ResidualAdd: return "ResidualAdd";
    }
    return "?";
}

enum class Mode { Train, Eval };

// Layers write results into caller-provided tensors so the graph can recycle
// activation and gradient storage across steps; x/y/dy must not alias the out
// tensor. Activations needed by backward are the caller's responsibility (the
// graph keeps them); layers hold no tensor-sized caches. Layers are not
// thread-safe: scratch buffers are members.
template <typename T>
class LayerT {
public:
    virtual ~LayerT() = default;
    virtual LayerKind kind() const = 0;
    virtual void forward(const TensorT<T>& x, Mode mode, TensorT<T>& y) = 0;
    // x and y are the forward input/output activations for the same batch.
    virtual void backward(const TensorT<T>& x, const TensorT<T>& y, const TensorT<T>& dy,
                          TensorT<T>& dx) = 0;
    virtual std::vector<TensorT<T>*> params() { return {}; }
    virtual std::vector<TensorT<T>*> grads() { return {}; }
    // Per-sample output shape (no batch dim).
    virtual std::vector<int> output_shape(const std::vector<int>& in) const = 0;
    virtual std::unique_ptr<LayerT<T>> clone() const = 0;

    TensorT<T> forward(const TensorT<T>& x, Mode mode) {
        TensorT<T> y;
        forward(x, mode, y);
        return y;
    }

    void zero_grads() {
        for (auto* g : grads()) g->fill(T(0));
    }

protected:
    [[noreturn]] void shape_error(const std::string& msg) const {
        throw std::runtime_error(std::string(layer_kind_name(kind())) + ": " + msg);
    }
};

namespace detail {

// 3x3 same-padding im2col for one sample into a (c_in*9, stride) matrix; the
// sample's columns start at col and rows are stride apart, so a whole batch
// shares one matrix with stride = N*H*W.
template <typename T>
void im2col_3x3(const T* x, int c_in, int H, int W, T* col, size_t stride) {
    const int HW = H * W;
    for (int ci = 0; ci < c_in; ++ci) {
        const T* xc = x + static_cast<size_t>(ci) * HW;
        for (int dh = -1; dh <= 1; ++dh) {
            for (int dw = -1; dw <= 1; ++dw) {
                T* row = col + (static_cast<size_t>(ci) * 9 + (dh + 1) * 3 + (dw + 1)) * stride;
                for (int h = 0; h < H; ++h) {
                    const int hs = h + dh;
                    T* out = row + static_cast<size_t>(h) * W;
                    if (hs < 0 || hs >= H) {
                        std::fill_n(out, W, T(0));
                        continue;
                    }
                    const T* src = xc + static_cast<size_t>(hs) * W;
                    if (dw == 0) {
                        std::copy_n(src, W, out);
                    } else if (dw < 0) {
                        out[0] = T(0);
                        std::copy_n(src, W - 1, out + 1);
                    } else {
                        std::copy_n(src + 1, W - 1, out);
                        out[W - 1] = T(0);
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im_3x3(const T* col, int c_in, int H, int W, T* x, size_t stride) {
    const int HW = H * W;
    std::fill_n(x, static_cast<size_t>(c_in) * HW, T(0));
    for (int ci = 0; ci < c_in; ++ci) {
        T* xc = x + static_cast<size_t>(ci) * HW;
        for (int dh = -1; dh <= 1; ++dh) {
            for (int dw = -1; dw <= 1; ++dw) {
                const T* row = col + (static_cast<size_t>(ci) * 9 + (dh + 1) * 3 + (dw + 1)) * stride;
                for (int h = 0; h < H; ++h) {
                    const int hs = h + dh;
                    if (hs < 0 || hs >= H) continue;
                    T* dst = xc + static_cast<size_t>(hs) * W;
                    const T* src = row + static_cast<size_t>(h) * W;
                    if (dw == 0) {
                        for (int w = 0; w < W; ++w) dst[w] += src[w];
                    } else if (dw < 0) {
                        for (int w = 1; w < W; ++w) dst[w - 1] += src[w];
                    } else {
                        for (int w = 0; w < W - 1; ++w) dst[w + 1] += src[w];
                    }
                }
            }
        }
    }
}

// Lane-parallel reductions; independent accumulators let the compiler emit
// SIMD adds despite strict FP ordering.
template <typename T>
T sum_vec(const T* p, size_t n) {
    T acc[8] = {};
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (int k = 0; k < 8; ++k) acc[k] += p[i + k];
    }
    T s = T(0);
    for (int k = 0; k < 8; ++k) s += acc[k];
    for (; i < n; ++i) s += p[i];
    return s;
}

template <typename T>
T sumsq_diff_vec(const T* p, size_t n, T mean) {
    T acc[8] = {};
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (int k = 0; k < 8; ++k) {
            const T d = p[i + k] - mean;
            acc[k] += d * d;
        }
    }
    T s = T(0);
    for (int k = 0; k < 8; ++k) s += acc[k];
    for (; i < n; ++i) {
        const T d = p[i] - mean;
        s += d * d;
    }
    return s;
}

template <typename T>
T dot_diff_vec(const T* a, const T* b, size_t n, T b_mean) {
    T acc[8] = {};
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (int k = 0; k < 8; ++k) acc[k] += a[i + k] * (b[i + k] - b_mean);
    }
    T s = T(0);
    for (int k = 0; k < 8; ++k) s += acc[k];
    for (; i < n; ++i) s += a[i] * (b[i] - b_mean);
    return s;
}

}  // namespace detail

// 3x3 convolution with same padding; kernel shape (c_out, c_in, 3, 3).
template <typename T>
class Conv3x3LayerT : public LayerT<T> {
public:
    Conv3x3LayerT(int c_in, int c_out)
        : c_in_(c_in),
          c_out_(c_out),
          weight_({c_out, c_in, 3, 3}),
          bias_({c_out}),
          gw_({c_out, c_in, 3, 3}),
          gb_({c_out}) {}

    LayerKind kind() const override { return LayerKind::Conv3x3; }

    using LayerT<T>::forward;

    TensorT<T>& weight() { return weight_; }
    TensorT<T>& bias() { return bias_; }
    int in_channels() const { return c_in_; }
    int out_channels() const { return c_out_; }

    void forward(const TensorT<T>& x, Mode mode, TensorT<T>& y) override {
        if (x.rank() != 4 || x.dim(1) != c_in_) {
            this->shape_error("expected input (N, " + std::to_string(c_in_) +
                              ", H, W), got " + x.shape_str());
        }
        const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
        const int HW = H * W;
        const int K = c_in_ * 9;
        y.resize({N, c_out_, H, W});
        col_.resize(static_cast<size_t>(K) * HW);
        for (int n = 0; n < N; ++n) {
            const T* xn = x.data.data() + static_cast<size_t>(n) * c_in_ * HW;
            T* yn = y.data.data() + static_cast<size_t>(n) * c_out_ * HW;
            detail::im2col_3x3(xn, c_in_, H, W, col_.data(), static_cast<size_t>(HW));
            gemm_nn(c_out_, HW, K, weight_.data.data(), col_.data(), yn, false);
            for (int co = 0; co < c_out_; ++co) {
                const T b = bias_[static_cast<size_t>(co)];
                T* yc = yn + static_cast<size_t>(co) * HW;
                for (int i = 0; i < HW; ++i) yc[i] += b;
            }
        }
        (void)mode;
    }

    void backward(const TensorT<T>& x, const TensorT<T>&, const TensorT<T>& dy,
                  TensorT<T>& dx) override {
        const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
        const int HW = H * W;
        const int K = c_in_ * 9;
        if (dy.shape != std::vector<int>{N, c_out_, H, W}) {
            this->shape_error("gradient shape " + dy.shape_str() + " mismatch");
        }
        dx.resize(x.shape);
        col_.resize(static_cast<size_t>(K) * HW);
        dcol_.resize(col_.size());
        for (int n = 0; n < N; ++n) {
            const T* xn = x.data.data() + static_cast<size_t>(n) * c_in_ * HW;
            const T* dyn = dy.data.data() + static_cast<size_t>(n) * c_out_ * HW;
            T* dxn = dx.data.data() + static_cast<size_t>(n) * c_in_ * HW;
            detail::im2col_3x3(xn, c_in_, H, W, col_.data(), static_cast<size_t>(HW));
            gemm_nt(c_out_, K, HW, dyn, col_.data(), gw_.data.data(), true);
            gemm_tn(K, HW, c_out_, weight_.data.data(), dyn, dcol_.data(), false);
            detail::col2im_3x3(dcol_.data(), c_in_, H, W, dxn, static_cast<size_t>(HW));
            for (int co = 0; co < c_out_; ++co) {
                gb_[static_cast<size_t>(co)] +=
                    detail::sum_vec(dyn + static_cast<size_t>(co) * HW, static_cast<size_t>(HW));
            }
        }
    }

    std::vector<TensorT<T>*> params() override { return {&weight_, &bias_}; }
    std::vector<TensorT<T>*> grads() override { return {&gw_, &gb_}; }

    std::vector<int> output_shape(const std::vector<int>& in) const override {
        if (in.size() != 3 || in[0] != c_in_) {
            this->shape_error("expected input (" + std::to_string(c_in_) + ", H, W), got " +
                              shape_to_str(in));
        }
        return {c_out_, in[1], in[2]};
    }

    std::unique_ptr<LayerT<T>> clone() const override {
        return std::make_unique<Conv3x3LayerT>(*this);
    }

private:
    int c_in_, c_out_;
    TensorT<T> weight_, bias_, gw_, gb_;
    std::vector<T> col_, dcol_, buf_;  // batch im2col and layout scratch
};

// Per-channel batch normalization; batch statistics in train mode, running
// statistics in eval mode. eps 1e-5, running-stat momentum 0.9.
template <typename T>
class BatchNormLayerT : public LayerT<T> {
public:
    explicit BatchNormLayerT(int channels)
        : channels_(channels),
          gamma_({channels}),
          beta_({channels}),
          ggamma_({channels}),
          gbeta_({channels}),
          running_mean_({channels}),
          running_var_({channels}) {
        gamma_.fill(T(1));
        running_var_.fill(T(1));
    }

    LayerKind kind() const override { return LayerKind::BatchNorm; }

    using LayerT<T>::forward;

    static constexpr T kEps = T(1e-5);
    static constexpr T kMomentum = T(0.9);

    TensorT<T>& gamma() { return gamma_; }
    TensorT<T>& beta() { return beta_; }
    TensorT<T>& running_mean() { return running_mean_; }
    TensorT<T>& running_var() { return running_var_; }
    const TensorT<T>& gamma() const { return gamma_; }
    const TensorT<T>& beta() const { return beta_; }
    const TensorT<T>& running_mean() const { return running_mean_; }
    const TensorT<T>& running_var() const { return running_var_; }
    int channels() const { return channels_; }

    void forward(const TensorT<T>& x, Mode mode, TensorT<T>& y) override {
        if (x.rank() != 4 || x.dim(1) != channels_) {
            this->shape_error("expected input (N, " + std::to_string(channels_) +
                              ", H, W), got " + x.shape_str());
        }
        const int N = x.dim(0), C = channels_, HW = x.dim(2) * x.dim(3);
        y.resize(x.shape);
        if (mode == Mode::Train) {
            const T count = static_cast<T>(N) * static_cast<T>(HW);
            batch_mean_.assign(static_cast<size_t>(C), T(0));
            batch_invstd_.assign(static_cast<size_t>(C), T(0));
            for (int c = 0; c < C; ++c) {
                T sum = T(0);
                for (int n = 0; n < N; ++n) {
                    const T* xc = x.data.data() + (static_cast<size_t>(n) * C + c) * HW;
                    sum += detail::sum_vec(xc, static_cast<size_t>(HW));
                }
                const T mean = sum / count;
                T var = T(0);
                for (int n = 0; n < N; ++n) {
                    const T* xc = x.data.data() + (static_cast<size_t>(n) * C + c) * HW;
                    var += detail::sumsq_diff_vec(xc, static_cast<size_t>(HW), mean);
                }
                var /= count;
                batch_mean_[static_cast<size_t>(c)] = mean;
                batch_invstd_[static_cast<size_t>(c)] = T(1) / std::sqrt(var + kEps);
                running_mean_[static_cast<size_t>(c)] =
                    kMomentum * running_mean_[static_cast<size_t>(c)] + (T(1) - kMomentum) * mean;
                running_var_[static_cast<size_t>(c)] =
                    kMomentum * running_var_[static_cast<size_t>(c)] + (T(1) - kMomentum) * var;
            }
            for (int n = 0; n < N; ++n) {
                for (int c = 0; c < C; ++c) {
                    const size_t off = (static_cast<size_t>(n) * C + c) * HW;
                    const T mean = batch_mean_[static_cast<size_t>(c)];
                    const T invstd = batch_invstd_[static_cast<size_t>(c)];
                    const T g = gamma_[static_cast<size_t>(c)], b = beta_[static_cast<size_t>(c)];
                    for (int i = 0; i < HW; ++i) {
                        y.data[off + i] = g * (x.data[off + i] - mean) * invstd + b;
                    }
                }
            }
            train_forward_done_ = true;
        } else {
            for (int n = 0; n < N; ++n) {
                for (int c = 0; c < C; ++c) {
                    const size_t off = (static_cast<size_t>(n) * C + c) * HW;
                    const T invstd = T(1) / std::sqrt(running_var_[static_cast<size_t>(c)] + kEps);
                    const T mean = running_mean_[static_cast<size_t>(c)];
                    const T g = gamma_[static_cast<size_t>(c)], b = beta_[static_cast<size_t>(c)];
                    for (int i = 0; i < HW; ++i) {
                        y.data[off + i] = g * (x.data[off + i] - mean) * invstd + b;
                    }
                }
            }
        }
    }

    void backward(const TensorT<T>& x, const TensorT<T>&, const TensorT<T>& dy,
                  TensorT<T>& dx) override {
        if (!train_forward_done_) this->shape_error("backward called before train forward");
        if (!dy.same_shape(x)) this->shape_error("gradient shape mismatch");
        const int N = dy.dim(0), C = channels_, HW = dy.dim(2) * dy.dim(3);
        const T count = static_cast<T>(N) * static_cast<T>(HW);
        dx.resize(dy.shape);
        for (int c = 0; c < C; ++c) {
            const T mean = batch_mean_[static_cast<size_t>(c)];
            const T invstd = batch_invstd_[static_cast<size_t>(c)];
            T sum_dy = T(0), sum_dy_xhat = T(0);
            for (int n = 0; n < N; ++n) {
                const size_t off = (static_cast<size_t>(n) * C + c) * HW;
                sum_dy += detail::sum_vec(dy.data.data() + off, static_cast<size_t>(HW));
                sum_dy_xhat += detail::dot_diff_vec(dy.data.data() + off, x.data.data() + off,
                                                    static_cast<size_t>(HW), mean);
            }
            sum_dy_xhat *= invstd;
            ggamma_[static_cast<size_t>(c)] += sum_dy_xhat;
            gbeta_[static_cast<size_t>(c)] += sum_dy;
            const T g = gamma_[static_cast<size_t>(c)];
            const T k = g * invstd / count;
            for (int n = 0; n < N; ++n) {
                const size_t off = (static_cast<size_t>(n) * C + c) * HW;
                for (int i = 0; i < HW; ++i) {
                    const T xh = (x.data[off + i] - mean) * invstd;
                    dx.data[off + i] = k * (count * dy.data[off + i] - sum_dy - xh * sum_dy_xhat);
                }
            }
        }
    }

    std::vector<TensorT<T>*> params() override { return {&gamma_, &beta_}; }
    std::vector<TensorT<T>*> grads() override { return {&ggamma_, &gbeta_}; }

    std::vector<int> output_shape(const std::vector<int>& in) const override {
        if (in.size() != 3 || in[0] != channels_) {
            this->shape_error("expected input (" + std::to_string(channels_) + ", H, W), got " +
                              shape_to_str(in));
        }
        return in;
    }

    std::unique_ptr<LayerT<T>> clone() const override {
        return std::make_unique<BatchNormLayerT>(*this);
    }

private:
    int channels_;
    TensorT<T> gamma_, beta_, ggamma_, gbeta_;
    TensorT<T> running_mean_, running_var_;
    std::vector<T> batch_mean_, batch_invstd_;
    bool train_forward_done_ = false;
};

template <typename T>
class LeakyReLULayerT : public LayerT<T> {
public:
    static constexpr T kSlope = T(0.3);

    LayerKind kind() const override { return LayerKind::LeakyReLU; }

    using LayerT<T>::forward;

    void forward(const TensorT<T>& x, Mode mode, TensorT<T>& y) override {
        y.resize(x.shape);
        for (size_t i = 0; i < x.data.size(); ++i) {
            y[i] = x[i] >= T(0) ? x[i] : kSlope * x[i];
        }
        (void)mode;
    }

    void backward(const TensorT<T>& x, const TensorT<T>&, const TensorT<T>& dy,
                  TensorT<T>& dx) override {
        if (!dy.same_shape(x)) this->shape_error("gradient shape mismatch");
        dx.resize(dy.shape);
        for (size_t i = 0; i < dy.data.size(); ++i) {
            dx[i] = dy[i] * (x[i] >= T(0) ? T(1) : kSlope);
        }
    }

    std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }

    std::unique_ptr<LayerT<T>> clone() const override {
        return std::make_unique<LeakyReLULayerT>(*this);
    }
};

template <typename T>
class SigmoidLayerT : public LayerT<T> {
public:
    LayerKind kind() const override { return LayerKind::Sigmoid; }

    using LayerT<T>::forward;

    void forward(const TensorT<T>& x, Mode mode, TensorT<T>& y) override {
        y.resize(x.shape);
        for (size_t i = 0; i < x.data.size(); ++i) y[i] = T(1) / (T(1) + std::exp(-x[i]));
        (void)mode;
    }

    void backward(const TensorT<T>&, const TensorT<T>& y, const TensorT<T>& dy,
                  TensorT<T>& dx) override {
        if (!dy.same_shape(y)) this->shape_error("gradient shape mismatch");
        dx.resize(dy.shape);
        for (size_t i = 0; i < dy.data.size(); ++i) {
            dx[i] = dy[i] * y[i] * (T(1) - y[i]);
        }
    }

    std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }

    std::unique_ptr<LayerT<T>> clone() const override {
        return std::make_unique<SigmoidLayerT>(*this);
    }
};

// Fully connected y = W x + b with float weights; W is (m, n).
template <typename T>
class DenseLayerT : public LayerT<T> {
public:
    DenseLayerT(int out_features, int in_features)
        : m_(out_features), n_(in_features), weight_({m_, n_}), bias_({m_}), gw_({m_, n_}),
          gb_({m_}) {}

    LayerKind kind() const override { return LayerKind::Dense; }

    using LayerT<T>::forward;

    TensorT<T>& weight() { return weight_; }
    TensorT<T>& bias() { return bias_; }
    int out_features() const { return m_; }
    int in_features() const { return n_; }

    void forward(const TensorT<T>& x, Mode mode, TensorT<T>& y) override {
        if (x.rank() != 2 || x.dim(1) != n_) {
            this->shape_error("expected input (N, " + std::to_string(n_) + "), got " +
                              x.shape_str());
        }
        const int N = x.dim(0);
        y.resize({N, m_});
        gemm_nt(N, m_, n_, x.data.data(), weight_.data.data(), y.data.data(), false);
        for (int i = 0; i < N; ++i) {
            T* yr = y.data.data() + static_cast<size_t>(i) * m_;
            for (int o = 0; o < m_; ++o) yr[o] += bias_[static_cast<size_t>(o)];
        }
        (void)mode;
    }

    void backward(const TensorT<T>& x, const TensorT<T>&, const TensorT<T>& dy,
                  TensorT<T>& dx) override {
        const int N = x.dim(0);
        if (dy.shape != std::vector<int>{N, m_}) this->shape_error("gradient shape mismatch");
        gemm_tn(m_, n_, N, dy.data.data(), x.data.data(), gw_.data.data(), true);
        for (int i = 0; i < N; ++i) {
            const T* dyr = dy.data.data() + static_cast<size_t>(i) * m_;
            for (int o = 0; o < m_; ++o) gb_[static_cast<size_t>(o)] += dyr[o];
        }
        dx.resize({N, n_});
        gemm_nn(N, n_, m_, dy.data.data(), weight_.data.data(), dx.data.data(), false);
    }

    std::vector<TensorT<T>*> params() override { return {&weight_, &bias_}; }
    std::vector<TensorT<T>*> grads() override { return {&gw_, &gb_}; }

    std::vector<int> output_shape(const std::vector<int>& in) const override {
        if (in.size() != 1 || in[0] != n_) {
            this->shape_error("expected input (" + std::to_string(n_) + "), got " +
                              shape_to_str(in));
        }
        return {m_};
    }

    std::unique_ptr<LayerT<T>> clone() const override {
        return std::make_unique<DenseLayerT>(*this);
    }

private:
    int m_, n_;
    TensorT<T> weight_, bias_, gw_, gb_;
};

// Fully connected layer whose weight is binarized to alpha*sign(W) at every
// forward pass; float master weights are kept and updated via the straight-
// through gradient. The bias stays float.
template <typename T>
class BinaryDenseLayerT : public LayerT<T> {
public:
    BinaryDenseLayerT(int out_features, int in_features,
                      GateVariant gate = GateVariant::Indicator)
        : m_(out_features), n_(in_features), gate_(gate), weight_({m_, n_}), bias_({m_}),
          gw_({m_, n_}), gb_({m_}) {}

    LayerKind kind() const override { return LayerKind::BinaryDense; }

    using LayerT<T>::forward;

    TensorT<T>& weight() { return weight_; }
    TensorT<T>& bias() { return bias_; }
    int out_features() const { return m_; }
    int in_features() const { return n_; }
    GateVariant gate() const { return gate_; }

    T last_alpha() const { return last_alpha_; }
    const std::vector<int8_t>& last_signs() const { return last_signs_; }

    // The effective weight alpha*sign(W) the forward pass uses.
    TensorT<T> binarized_weights() const {
        auto r = binarize(weight_);
        TensorT<T> wb(weight_.shape);
        for (size_t i = 0; i < wb.data.size(); ++i) {
            wb[i] = r.alpha * static_cast<T>(r.signs[i]);
        }
        return wb;
    }

    void forward(const TensorT<T>& x, Mode mode, TensorT<T>& y) override {
        if (x.rank() != 2 || x.dim(1) != n_) {
            this->shape_error("expected input (N, " + std::to_string(n_) + "), got " +
                              x.shape_str());
        }
        auto r = binarize(weight_);
        last_alpha_ = r.alpha;
        last_signs_ = std::move(r.signs);
        if (wb_.data.size() != weight_.data.size()) wb_ = TensorT<T>(weight_.shape);
        for (size_t i = 0; i < wb_.data.size(); ++i) {
            wb_[i] = last_alpha_ * static_cast<T>(last_signs_[i]);
        }
        const int N = x.dim(0);
        y.resize({N, m_});
        gemm_nt(N, m_, n_, x.data.data(), wb_.data.data(), y.data.data(), false);
        for (int i = 0; i < N; ++i) {
            T* yr = y.data.data() + static_cast<size_t>(i) * m_;
            for (int o = 0; o < m_; ++o) yr[o] += bias_[static_cast<size_t>(o)];
        }
        (void)mode;
    }

    void backward(const TensorT<T>& x, const TensorT<T>&, const TensorT<T>& dy,
                  TensorT<T>& dx) override {
        const int N = x.dim(0);
        if (dy.shape != std::vector<int>{N, m_}) this->shape_error("gradient shape mismatch");
        // Gradient w.r.t. the binarized weight, then the STE rule maps it onto
        // the float master weight.
        if (gwb_.data.size() != gw_.data.size()) gwb_ = TensorT<T>({m_, n_});
        gemm_tn(m_, n_, N, dy.data.data(), x.data.data(), gwb_.data.data(), false);
        const T inv_mn = T(1) / static_cast<T>(gw_.data.size());
        for (size_t i = 0; i < gw_.data.size(); ++i) {
            gw_[i] += gwb_[i] * (inv_mn + last_alpha_ * sign_gate_grad(weight_[i], gate_));
        }
        for (int i = 0; i < N; ++i) {
            const T* dyr = dy.data.data() + static_cast<size_t>(i) * m_;
            for (int o = 0; o < m_; ++o) gb_[static_cast<size_t>(o)] += dyr[o];
        }
        dx.resize({N, n_});
        gemm_nn(N, n_, m_, dy.data.data(), wb_.data.data(), dx.data.data(), false);
    }

    std::vector<TensorT<T>*> params() override { return {&weight_, &bias_}; }
    std::vector<TensorT<T>*> grads() override { return {&gw_, &gb_}; }

    std::vector<int> output_shape(const std::vector<int>& in) const override {
        if (in.size() != 1 || in[0] != n_) {
            this->shape_error("expected input (" + std::to_string(n_) + "), got " +
                              shape_to_str(in));
        }
        return {m_};
    }

    std::unique_ptr<LayerT<T>> clone() const override {
        return std::make_unique<BinaryDenseLayerT>(*this);
    }

private:
    int m_, n_;
    GateVariant gate_;
    TensorT<T> weight_, bias_, gw_, gb_;
    TensorT<T> wb_, gwb_;  // scratch: binarized weights and their gradient
    T last_alpha_ = T(0);
    std::vector<int8_t> last_signs_;
};

template <typename T>
class FlattenLayerT : public LayerT<T> {
public:
    LayerKind kind() const override { return LayerKind::Flatten; }

    using LayerT<T>::forward;

    void forward(const TensorT<T>& x, Mode mode, TensorT<T>& y) override {
        if (x.rank() < 2) this->shape_error("expected batched input, got " + x.shape_str());
        int feat = 1;
        for (int i = 1; i < x.rank(); ++i) feat *= x.dim(i);
        y.assign(x);
        y.resize({x.dim(0), feat});
        (void)mode;
    }

    void backward(const TensorT<T>& x, const TensorT<T>&, const TensorT<T>& dy,
                  TensorT<T>& dx) override {
        dx.assign(dy);
        dx.resize(x.shape);
    }

    std::vector<int> output_shape(const std::vector<int>& in) const override {
        int feat = 1;
        for (int d : in) feat *= d;
        return {feat};
    }

    std::unique_ptr<LayerT<T>> clone() const override {
        return std::make_unique<FlattenLayerT>(*this);
    }
};

template <typename T>
class ReshapeLayerT : public LayerT<T> {
public:
    ReshapeLayerT(int c, int h, int w) : c_(c), h_(h), w_(w) {}

    int channels() const { return c_; }
    int height() const { return h_; }
    int width() const { return w_; }

    LayerKind kind() const override { return LayerKind::Reshape; }

    using LayerT<T>::forward;

    void forward(const TensorT<T>& x, Mode mode, TensorT<T>& y) override {
        if (x.rank() != 2 || x.dim(1) != c_ * h_ * w_) {
            this->shape_error("expected input (N, " + std::to_string(c_ * h_ * w_) + "), got " +
                              x.shape_str());
        }
        y.assign(x);
        y.resize({x.dim(0), c_, h_, w_});
        (void)mode;
    }

    void backward(const TensorT<T>&, const TensorT<T>&, const TensorT<T>& dy,
                  TensorT<T>& dx) override {
        if (dy.rank() != 4) this->shape_error("gradient shape mismatch");
        dx.assign(dy);
        dx.resize({dy.dim(0), c_ * h_ * w_});
    }

    std::vector<int> output_shape(const std::vector<int>& in) const override {
        if (in.size() != 1 || in[0] != c_ * h_ * w_) {
            this->shape_error("expected input (" + std::to_string(c_ * h_ * w_) + "), got " +
                              shape_to_str(in));
        }
        return {c_, h_, w_};
    }

    std::unique_ptr<LayerT<T>> clone() const override {
        return std::make_unique<ReshapeLayerT>(*this);
    }

private:
    int c_, h_, w_;
};

// Two-input elementwise add; the graph routes the skip edge.
template <typename T>
class ResidualAddLayerT : public LayerT<T> {
public:
    LayerKind kind() const override { return LayerKind::ResidualAdd; }

    using LayerT<T>::forward;

    void forward(const TensorT<T>&, Mode, TensorT<T>&) override {
        this->shape_error("ResidualAdd requires two inputs; route through a graph");
    }

    void forward2(const TensorT<T>& main, const TensorT<T>& skip, TensorT<T>& y) {
        if (!main.same_shape(skip)) {
            this->shape_error("branch shapes differ: " + main.shape_str() + " vs " +
                              skip.shape_str());
        }
        y.resize(main.shape);
        for (size_t i = 0; i < y.data.size(); ++i) y[i] = main[i] + skip[i];
    }

    // Gradient passes unchanged to both branches (the graph adds the skip side).
    void backward(const TensorT<T>&, const TensorT<T>&, const TensorT<T>& dy,
                  TensorT<T>& dx) override {
        dx.assign(dy);
    }

    std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }

    std::unique_ptr<LayerT<T>> clone() const override {
        return std::make_unique<ResidualAddLayerT>(*this);
    }
};

}  // namespace bcsinet
