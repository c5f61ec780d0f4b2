#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bcsinet/binarize.hpp"
#include "bcsinet/layers.hpp"

using namespace bcsinet;

namespace {

double objective(const std::vector<double>& w, const std::vector<int8_t>& b, double alpha) {
    double s = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
        const double d = w[i] - alpha * b[i];
        s += d * d;
    }
    return s;
}

// Exhaustive minimizer over all sign patterns with the per-pattern optimal
// alpha = w.b / (mn), clamped to alpha >= 0.
double brute_force_min(const std::vector<double>& w) {
    const size_t n = w.size();
    double best = 1e300;
    for (uint64_t mask = 0; mask < (uint64_t(1) << n); ++mask) {
        std::vector<int8_t> b(n);
        double dot = 0.0;
        for (size_t i = 0; i < n; ++i) {
            b[i] = (mask >> i) & 1 ? int8_t(1) : int8_t(-1);
            dot += w[i] * b[i];
        }
        const double alpha = std::max(0.0, dot / static_cast<double>(n));
        best = std::min(best, objective(w, b, alpha));
    }
    return best;
}

}  // namespace

TEST_CASE("worked binarization example") {
    std::vector<double> w{0.3, -0.2, 0.5, -1.0};
    auto r = binarize(w.data(), w.size());
    CHECK(r.signs == std::vector<int8_t>{1, -1, 1, -1});
    CHECK(r.alpha == doctest::Approx(0.5));
}

TEST_CASE("all-zero matrix binarizes to +1 signs with zero scale") {
    std::vector<double> w(4, 0.0);
    auto r = binarize(w.data(), w.size());
    CHECK(r.signs == std::vector<int8_t>{1, 1, 1, 1});
    CHECK(r.alpha == 0.0);
}

TEST_CASE("empty matrix is rejected") {
    CHECK_THROWS_AS(binarize<double>(nullptr, 0), std::invalid_argument);
}

TEST_CASE("binarize equals the exhaustive minimizer for mn <= 16") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    std::uniform_int_distribution<int> dim(1, 16);
    for (int inst = 0; inst < 500; ++inst) {
        std::vector<double> w(static_cast<size_t>(dim(rng)));
        for (auto& v : w) v = d(rng);
        auto r = binarize(w.data(), w.size());
        const double ours = objective(w, r.signs, r.alpha);
        const double best = brute_force_min(w);
        CHECK(ours == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("alpha equals the mean absolute value") {
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (int inst = 0; inst < 100; ++inst) {
        std::vector<double> w(37);
        double s = 0.0;
        for (auto& v : w) {
            v = d(rng);
            s += std::abs(v);
        }
        auto r = binarize(w.data(), w.size());
        CHECK(r.alpha == doctest::Approx(s / w.size()).epsilon(1e-6));
    }
}

TEST_CASE("positive scaling keeps signs and scales alpha") {
    std::mt19937 rng(44);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> w(24), cw(24);
    for (size_t i = 0; i < w.size(); ++i) {
        w[i] = d(rng);
        cw[i] = 2.5 * w[i];
    }
    auto a = binarize(w.data(), w.size());
    auto b = binarize(cw.data(), cw.size());
    CHECK(a.signs == b.signs);
    CHECK(b.alpha == doctest::Approx(2.5 * a.alpha).epsilon(1e-12));
}

TEST_CASE("negation flips signs except at exact zeros and keeps alpha") {
    std::vector<double> w{0.4, -0.7, 0.0, 1.2};
    std::vector<double> nw{-0.4, 0.7, 0.0, -1.2};
    auto a = binarize(w.data(), w.size());
    auto b = binarize(nw.data(), nw.size());
    CHECK(b.alpha == doctest::Approx(a.alpha).epsilon(1e-12));
    CHECK(b.signs[0] == -a.signs[0]);
    CHECK(b.signs[1] == -a.signs[1]);
    CHECK(b.signs[3] == -a.signs[3]);
    CHECK(b.signs[2] == 1);  // sign(0) := +1 on both sides
    CHECK(a.signs[2] == 1);
}

TEST_CASE("surrogate sign gradient gate") {
    CHECK(sign_gate_grad(0.5, GateVariant::Indicator) == 1.0);
    CHECK(sign_gate_grad(-1.0, GateVariant::Indicator) == 0.0);
    CHECK(sign_gate_grad(-1.0, GateVariant::AsPrinted) == 0.0);
    CHECK(sign_gate_grad(0.5, GateVariant::AsPrinted) == 0.5);
    CHECK(sign_gate_grad(1.0, GateVariant::Indicator) == 0.0);  // strict boundary
    CHECK(sign_gate_grad(-0.99, GateVariant::Indicator) == 1.0);
}

TEST_CASE("worked straight-through weight gradient") {
    TensorT<double> w({2, 2}, {0.3, -0.2, 0.5, -1.0});
    TensorT<double> g({2, 2}, {1.0, 1.0, 1.0, 1.0});
    auto out = ste_weight_grad(g, w, 0.5, GateVariant::Indicator);
    CHECK(out[0] == doctest::Approx(0.75));
    CHECK(out[1] == doctest::Approx(0.75));
    CHECK(out[2] == doctest::Approx(0.75));
    CHECK(out[3] == doctest::Approx(0.25));
}

TEST_CASE("zero upstream gradient gives zero weight gradient") {
    TensorT<double> w({2, 3}, {0.3, -0.2, 0.5, -1.0, 0.1, 0.9});
    TensorT<double> g({2, 3});
    auto out = ste_weight_grad(g, w, 0.4, GateVariant::Indicator);
    for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("ste_weight_grad rejects mismatched shapes") {
    TensorT<double> w({2, 2});
    TensorT<double> g({2, 3});
    CHECK_THROWS_AS(ste_weight_grad(g, w, 0.5, GateVariant::Indicator), std::invalid_argument);
}

TEST_CASE("ste_weight_grad is elementwise-local") {
    std::mt19937 rng(45);
    std::uniform_real_distribution<double> d(-1.5, 1.5);
    TensorT<double> w({3, 3});
    TensorT<double> g({3, 3});
    for (auto& v : w.data) v = d(rng);
    for (auto& v : g.data) v = d(rng);
    auto base = ste_weight_grad(g, w, 0.4, GateVariant::Indicator);
    TensorT<double> w2 = w;
    w2[4] = 0.01;  // inside the gate, different from before
    auto changed = ste_weight_grad(g, w2, 0.4, GateVariant::Indicator);
    for (size_t i = 0; i < base.data.size(); ++i) {
        if (i != 4) CHECK(base[i] == changed[i]);
    }
}

TEST_CASE("sign-flip perturbations move the loss the way the surrogate predicts") {
    // Reflect one master weight W_i -> -W_i (alpha is unchanged, the binary
    // weight flips) and compare the sign of the measured loss change with the
    // sign predicted by the straight-through gradient.
    std::mt19937 rng(46);
    std::uniform_real_distribution<double> d(-0.9, 0.9);
    int agree = 0, total = 0;
    for (int inst = 0; inst < 50; ++inst) {
        BinaryDenseLayerT<double> layer(3, 4);
        for (auto& v : layer.weight().data) {
            v = d(rng);
            if (std::abs(v) < 0.05) v = 0.1;
        }
        for (auto& v : layer.bias().data) v = d(rng);
        TensorT<double> x({2, 4});
        TensorT<double> t({2, 3});
        // small inputs keep the flip's first-order loss change dominant over
        // the quadratic term (the flip step is +-2*alpha, never infinitesimal)
        for (auto& v : x.data) v = 0.15 * d(rng);
        for (auto& v : t.data) v = d(rng);

        auto loss = [&]() {
            TensorT<double> y = layer.forward(x, Mode::Train);
            double s = 0.0;
            for (size_t i = 0; i < y.data.size(); ++i) {
                const double e = y[i] - t[i];
                s += e * e;
            }
            return s;
        };

        const double l0 = loss();
        TensorT<double> y = layer.forward(x, Mode::Train);
        TensorT<double> dy(y.shape);
        for (size_t i = 0; i < y.data.size(); ++i) dy[i] = 2.0 * (y[i] - t[i]);
        layer.zero_grads();
        TensorT<double> dx;
        layer.backward(x, y, dy, dx);
        const TensorT<double>& gw = *layer.grads()[0];

        for (size_t i = 0; i < layer.weight().data.size(); ++i) {
            const double wi = layer.weight()[i];
            if (std::abs(wi) >= 1.0 || gw[i] == 0.0) continue;
            layer.weight()[i] = -wi;
            const double dl = loss() - l0;
            layer.weight()[i] = wi;
            if (dl == 0.0) continue;
            const double predicted = gw[i] * (-2.0 * wi);
            ++total;
            if ((dl > 0) == (predicted > 0)) ++agree;
        }
    }
    REQUIRE(total > 200);
    CHECK(static_cast<double>(agree) / total >= 0.95);
}

TEST_CASE("binary dense forward uses at most two distinct absolute weight values") {
    std::mt19937 rng(47);
    std::uniform_real_distribution<float> d(-1.0f, 1.0f);
    BinaryDenseLayerT<float> layer(4, 8);
    for (auto& v : layer.weight().data) v = d(rng);
    Tensor x({2, 8});
    for (auto& v : x.data) v = d(rng);
    layer.forward(x, Mode::Train);
    auto wb = layer.binarized_weights();
    const float alpha = layer.last_alpha();
    for (float v : wb.data) CHECK(std::abs(std::abs(v) - alpha) < 1e-7f);
    // master weights stay real-valued: more than two distinct magnitudes
    int distinct = 0;
    for (float v : layer.weight().data) {
        if (std::abs(std::abs(v) - alpha) > 1e-6f) ++distinct;
    }
    CHECK(distinct > 2);
}
