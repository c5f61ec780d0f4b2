#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bcsinet {

// Dense row-major tensor of rank <= 4. Batch dimension, when present, is dim 0.
template <typename T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> data;

    TensorT() = default;

    explicit TensorT(std::vector<int> s) : shape(std::move(s)) {
        check_shape();
        data.assign(static_cast<size_t>(numel()), T(0));
    }

    TensorT(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        check_shape();
        if (data.size() != static_cast<size_t>(numel())) {
            throw std::invalid_argument("tensor: data length does not match shape");
        }
    }

    long long numel() const {
        long long n = 1;
        for (int d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

    int rank() const { return static_cast<int>(shape.size()); }

    int dim(int i) const { return shape.at(static_cast<size_t>(i)); }

    T& operator[](size_t i) { return data[i]; }
    const T& operator[](size_t i) const { return data[i]; }

    bool same_shape(const TensorT& other) const { return shape == other.shape; }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    // Reshape in place, reusing the existing allocation when possible. New
    // elements (if the tensor grows) are value-initialized by vector::resize.
    void resize(std::vector<int> new_shape) {
        shape = std::move(new_shape);
        check_shape();
        data.resize(static_cast<size_t>(numel()));
    }

    // Copy another tensor's contents into this one, reusing storage.
    void assign(const TensorT& other) {
        shape = other.shape;
        data.assign(other.data.begin(), other.data.end());
    }

    TensorT reshaped(std::vector<int> new_shape) const {
        TensorT out(std::move(new_shape), data);
        return out;
    }

    std::string shape_str() const {
        std::ostringstream os;
        os << "(";
        for (size_t i = 0; i < shape.size(); ++i) {
            if (i) os << ", ";
            os << shape[i];
        }
        os << ")";
        return os.str();
    }

private:
    void check_shape() const {
        if (shape.empty() || shape.size() > 4) {
            throw std::invalid_argument("tensor: rank must be in [1, 4]");
        }
        for (int d : shape) {
            if (d <= 0) throw std::invalid_argument("tensor: dimensions must be positive");
        }
    }
};

using Tensor = TensorT<float>;

inline std::string shape_to_str(const std::vector<int>& s) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) os << ", ";
        os << s[i];
    }
    os << ")";
    return os.str();
}

}  // namespace bcsinet
