#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bcsinet/layers.hpp"

namespace bcsinet {

// Ordered layer list with optional skip edges. Node i consumes the output of
// node i-1 (the graph input for node 0). A ResidualAdd node additionally adds
// the output of node skip_from (-1 = graph input).
template <typename T>
class GraphT {
public:
    static constexpr int kNoSkip = -2;
    static constexpr int kGraphInput = -1;

    struct Node {
        std::unique_ptr<LayerT<T>> layer;
        int skip_from = kNoSkip;
    };

    GraphT() = default;
    explicit GraphT(std::vector<int> input_shape) : input_shape_(std::move(input_shape)) {}

    GraphT(GraphT&&) noexcept = default;
    GraphT& operator=(GraphT&&) noexcept = default;

    GraphT(const GraphT& other) : input_shape_(other.input_shape_) {
        nodes_.reserve(other.nodes_.size());
        for (const auto& n : other.nodes_) {
            nodes_.push_back(Node{n.layer->clone(), n.skip_from});
        }
    }
    GraphT& operator=(const GraphT& other) {
        if (this != &other) {
            GraphT tmp(other);
            *this = std::move(tmp);
        }
        return *this;
    }

    const std::vector<int>& input_shape() const { return input_shape_; }
    size_t size() const { return nodes_.size(); }
    LayerT<T>& layer(size_t i) { return *nodes_[i].layer; }
    const LayerT<T>& layer(size_t i) const { return *nodes_[i].layer; }
    int skip_from(size_t i) const { return nodes_[i].skip_from; }

    void add(std::unique_ptr<LayerT<T>> layer) {
        nodes_.push_back(Node{std::move(layer), kNoSkip});
    }

    void add_residual(int skip_from) {
        if (skip_from < kGraphInput || skip_from >= static_cast<int>(nodes_.size())) {
            throw std::invalid_argument("graph: residual skip index out of range");
        }
        nodes_.push_back(Node{std::make_unique<ResidualAddLayerT<T>>(), skip_from});
    }

    // The returned reference stays valid until the next forward call; copy it
    // if needed longer. Activation and gradient buffers persist across calls.
    const TensorT<T>& forward(const TensorT<T>& input, Mode mode) {
        check_input(input);
        acts_.resize(nodes_.size() + 1);
        acts_[0].assign(input);
        for (size_t i = 0; i < nodes_.size(); ++i) {
            try {
                auto& node = nodes_[i];
                if (node.layer->kind() == LayerKind::ResidualAdd) {
                    auto& add = static_cast<ResidualAddLayerT<T>&>(*node.layer);
                    add.forward2(acts_[i], acts_[static_cast<size_t>(node.skip_from) + 1],
                                 acts_[i + 1]);
                } else {
                    node.layer->forward(acts_[i], mode, acts_[i + 1]);
                }
            } catch (const std::runtime_error& e) {
                throw std::runtime_error("graph node " + std::to_string(i) + " (" +
                                         layer_kind_name(nodes_[i].layer->kind()) +
                                         "): " + e.what());
            }
        }
        forward_done_ = (mode == Mode::Train);
        return acts_.back();
    }

    // Populates every layer's parameter gradients (accumulating) and the input
    // gradient. Requires a preceding train-mode forward.
    void backward(const TensorT<T>& output_grad) {
        if (!forward_done_) {
            throw std::runtime_error("graph: backward called before train-mode forward");
        }
        const size_t slots = nodes_.size() + 1;
        slot_grads_.resize(slots);
        slot_filled_.assign(slots, 0);
        slot_grads_.back().assign(output_grad);
        slot_filled_.back() = 1;
        for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
            auto& node = nodes_[static_cast<size_t>(i)];
            TensorT<T>& gout = slot_grads_[static_cast<size_t>(i) + 1];
            if (!slot_filled_[static_cast<size_t>(i) + 1]) {
                // Node output never consumed downstream: contributes nothing.
                gout.resize(acts_[static_cast<size_t>(i) + 1].shape);
                gout.fill(T(0));
            }
            if (node.layer->kind() == LayerKind::ResidualAdd) {
                // The gradient passes unchanged to both branches.
                accumulate_slot(static_cast<size_t>(i), gout);
                accumulate_slot(static_cast<size_t>(node.skip_from) + 1, gout);
            } else {
                node.layer->backward(acts_[static_cast<size_t>(i)],
                                     acts_[static_cast<size_t>(i) + 1], gout, gin_scratch_);
                if (!slot_filled_[static_cast<size_t>(i)]) {
                    std::swap(slot_grads_[static_cast<size_t>(i)], gin_scratch_);
                    slot_filled_[static_cast<size_t>(i)] = 1;
                } else {
                    accumulate_slot(static_cast<size_t>(i), gin_scratch_);
                }
            }
        }
        forward_done_ = false;
    }

    const TensorT<T>& input_grad() const { return slot_grads_[0]; }

    std::vector<TensorT<T>*> params() {
        std::vector<TensorT<T>*> out;
        for (auto& n : nodes_) {
            for (auto* p : n.layer->params()) out.push_back(p);
        }
        return out;
    }

    std::vector<TensorT<T>*> grads() {
        std::vector<TensorT<T>*> out;
        for (auto& n : nodes_) {
            for (auto* g : n.layer->grads()) out.push_back(g);
        }
        return out;
    }

    void zero_grads() {
        for (auto& n : nodes_) n.layer->zero_grads();
    }

    // Per-node output shapes (per-sample, no batch dim); index 0 is the input.
    std::vector<std::vector<int>> node_shapes() const {
        std::vector<std::vector<int>> shapes;
        shapes.push_back(input_shape_);
        for (const auto& n : nodes_) {
            shapes.push_back(n.layer->output_shape(shapes.back()));
        }
        return shapes;
    }

    // Folds every BatchNorm into its immediately preceding Conv3x3 or Dense
    // layer using running statistics; valid for eval-mode inference only.
    GraphT fuse_batchnorm() const {
        GraphT fused(input_shape_);
        std::vector<int> remap(nodes_.size());  // old node index -> new index
        for (size_t i = 0; i < nodes_.size(); ++i) {
            const auto& node = nodes_[i];
            if (node.layer->kind() == LayerKind::BatchNorm) {
                if (fused.nodes_.empty()) {
                    throw std::runtime_error(
                        "fuse_batchnorm: BatchNorm has no foldable predecessor");
                }
                auto& prev = *fused.nodes_.back().layer;
                const auto& bn = static_cast<const BatchNormLayerT<T>&>(*node.layer);
                for (size_t j = i + 1; j < nodes_.size(); ++j) {
                    if (nodes_[j].skip_from == static_cast<int>(i) - 1) {
                        throw std::runtime_error(
                            "fuse_batchnorm: skip edge taps the pre-BatchNorm activation");
                    }
                }
                if (prev.kind() == LayerKind::Conv3x3) {
                    fold_into_conv(static_cast<Conv3x3LayerT<T>&>(prev), bn);
                } else if (prev.kind() == LayerKind::Dense) {
                    fold_into_dense(static_cast<DenseLayerT<T>&>(prev), bn);
                } else {
                    throw std::runtime_error(
                        "fuse_batchnorm: BatchNorm preceded by non-foldable layer " +
                        std::string(layer_kind_name(prev.kind())));
                }
                remap[i] = static_cast<int>(fused.nodes_.size()) - 1;
            } else {
                int skip = node.skip_from;
                if (skip > kGraphInput) skip = remap[static_cast<size_t>(skip)];
                fused.nodes_.push_back(Node{node.layer->clone(), skip});
                remap[i] = static_cast<int>(fused.nodes_.size()) - 1;
            }
        }
        return fused;
    }

private:
    static void fold_into_conv(Conv3x3LayerT<T>& conv, const BatchNormLayerT<T>& bn) {
        const int c_out = conv.out_channels();
        const int per_channel = conv.in_channels() * 9;
        for (int co = 0; co < c_out; ++co) {
            const T invstd =
                T(1) / std::sqrt(bn.running_var()[static_cast<size_t>(co)] +
                                 BatchNormLayerT<T>::kEps);
            const T s = bn.gamma()[static_cast<size_t>(co)] * invstd;
            T* w = conv.weight().data.data() + static_cast<size_t>(co) * per_channel;
            for (int k = 0; k < per_channel; ++k) w[k] *= s;
            conv.bias()[static_cast<size_t>(co)] =
                (conv.bias()[static_cast<size_t>(co)] -
                 bn.running_mean()[static_cast<size_t>(co)]) *
                    s +
                bn.beta()[static_cast<size_t>(co)];
        }
    }

    static void fold_into_dense(DenseLayerT<T>& dense, const BatchNormLayerT<T>& bn) {
        const int m = dense.out_features();
        const int n = dense.in_features();
        for (int o = 0; o < m; ++o) {
            const T invstd =
                T(1) / std::sqrt(bn.running_var()[static_cast<size_t>(o)] +
                                 BatchNormLayerT<T>::kEps);
            const T s = bn.gamma()[static_cast<size_t>(o)] * invstd;
            T* w = dense.weight().data.data() + static_cast<size_t>(o) * n;
            for (int k = 0; k < n; ++k) w[k] *= s;
            dense.bias()[static_cast<size_t>(o)] =
                (dense.bias()[static_cast<size_t>(o)] -
                 bn.running_mean()[static_cast<size_t>(o)]) *
                    s +
                bn.beta()[static_cast<size_t>(o)];
        }
    }

    void check_input(const TensorT<T>& x) const {
        if (input_shape_.empty()) return;  // identity graph with no declared shape
        std::vector<int> per_sample(x.shape.begin() + 1, x.shape.end());
        if (per_sample != input_shape_) {
            throw std::runtime_error("graph: input shape " + x.shape_str() +
                                     " does not match declared per-sample shape " +
                                     shape_to_str(input_shape_));
        }
    }

    void accumulate_slot(size_t slot, const TensorT<T>& src) {
        TensorT<T>& dst = slot_grads_[slot];
        if (!slot_filled_[slot]) {
            dst.assign(src);
            slot_filled_[slot] = 1;
        } else {
            for (size_t i = 0; i < dst.data.size(); ++i) dst[i] += src[i];
        }
    }

    std::vector<int> input_shape_;
    std::vector<Node> nodes_;
    std::vector<TensorT<T>> acts_;
    std::vector<TensorT<T>> slot_grads_;
    std::vector<char> slot_filled_;
    TensorT<T> gin_scratch_;
    bool forward_done_ = false;
};

using Graph = GraphT<float>;

}  // namespace bcsinet
