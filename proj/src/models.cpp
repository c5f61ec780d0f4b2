#include "bcsinet/models.hpp"

#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

namespace bcsinet {

Family family_from_string(const std::string& s) {
    if (s == "csinet" || s == "CsiNet") return Family::CsiNet;
    if (s == "bcsinet" || s == "BCsiNet") return Family::BCsiNet;
    throw std::invalid_argument("unknown family: " + s);
}

Head head_from_string(const std::string& s) {
    if (s == "A" || s == "a") return Head::A;
    if (s == "B" || s == "b") return Head::B;
    if (s == "C" || s == "c") return Head::C;
    throw std::invalid_argument("unknown head: " + s);
}

std::string to_string(Family f) { return f == Family::CsiNet ? "CsiNet" : "BCsiNet"; }

std::string to_string(Head h) {
    switch (h) {
        case Head::A: return "A";
        case Head::B: return "B";
        case Head::C: return "C";
    }
    return "?";
}

int ModelSpec::codeword_len() const {
    return static_cast<int>(std::lround(2.0 * na * nt * eta));
}

void ModelSpec::validate() const {
    if (na <= 0 || nt <= 0) throw std::invalid_argument("model spec: na and nt must be positive");
    if (refinenets != 2 && refinenets != 3) {
        throw std::invalid_argument("model spec: refinenets must be 2 or 3");
    }
    const double exact = 2.0 * na * nt * eta;
    if (eta <= 0.0 || std::abs(exact - std::lround(exact)) > 1e-9 || std::lround(exact) < 1) {
        throw std::invalid_argument("model spec: eta must yield a positive integer codeword length");
    }
    if (family == Family::CsiNet && head != Head::A) {
        throw std::invalid_argument("model spec: CsiNet family uses head A only");
    }
}

std::string ModelSpec::name() const {
    if (family == Family::CsiNet) return "CsiNet";
    return "BCsiNet-" + to_string(head) + std::to_string(refinenets);
}

namespace {

class XavierInit {
public:
    explicit XavierInit(uint64_t seed) : rng_(seed) {}

    void conv(Conv3x3LayerT<float>& layer) {
        const float limit =
            std::sqrt(6.0f / (9.0f * layer.in_channels() + 9.0f * layer.out_channels()));
        fill(layer.weight(), limit);
        layer.bias().fill(0.0f);
    }

    void dense(TensorT<float>& w, TensorT<float>& b, int m, int n) {
        const float limit = std::sqrt(6.0f / (static_cast<float>(n) + static_cast<float>(m)));
        fill(w, limit);
        b.fill(0.0f);
    }

private:
    void fill(TensorT<float>& t, float limit) {
        std::uniform_real_distribution<float> dist(-limit, limit);
        for (auto& v : t.data) v = dist(rng_);
    }

    std::mt19937_64 rng_;
};

void add_conv_block(Graph& g, XavierInit& init, int c_in, int c_out, bool with_activation) {
    auto conv = std::make_unique<Conv3x3LayerT<float>>(c_in, c_out);
    init.conv(*conv);
    g.add(std::move(conv));
    g.add(std::make_unique<BatchNormLayerT<float>>(c_out));
    if (with_activation) g.add(std::make_unique<LeakyReLULayerT<float>>());
}

void add_refinenet(Graph& g, XavierInit& init) {
    const int entry = static_cast<int>(g.size()) - 1;
    add_conv_block(g, init, 2, 8, true);
    add_conv_block(g, init, 8, 16, true);
    add_conv_block(g, init, 16, 2, false);
    g.add_residual(entry);
    g.add(std::make_unique<LeakyReLULayerT<float>>());
}

}  // namespace

Network build(const ModelSpec& spec, uint64_t seed) {
    spec.validate();
    XavierInit init(seed);
    const int features = spec.input_features();
    const int codeword = spec.codeword_len();

    Graph encoder({2, spec.na, spec.nt});
    switch (spec.head) {
        case Head::A:
            add_conv_block(encoder, init, 2, 2, true);
            break;
        case Head::B:
            add_conv_block(encoder, init, 2, 2, true);
            add_conv_block(encoder, init, 2, 2, true);
            break;
        case Head::C:
            add_conv_block(encoder, init, 2, 2, true);
            add_conv_block(encoder, init, 2, 2, false);
            encoder.add_residual(Graph::kGraphInput);
            encoder.add(std::make_unique<LeakyReLULayerT<float>>());
            break;
    }
    encoder.add(std::make_unique<FlattenLayerT<float>>());
    if (spec.family == Family::BCsiNet) {
        auto fc = std::make_unique<BinaryDenseLayerT<float>>(codeword, features);
        init.dense(fc->weight(), fc->bias(), codeword, features);
        encoder.add(std::move(fc));
    } else {
        auto fc = std::make_unique<DenseLayerT<float>>(codeword, features);
        init.dense(fc->weight(), fc->bias(), codeword, features);
        encoder.add(std::move(fc));
    }

    Graph decoder({codeword});
    auto fc = std::make_unique<DenseLayerT<float>>(features, codeword);
    init.dense(fc->weight(), fc->bias(), features, codeword);
    decoder.add(std::move(fc));
    decoder.add(std::make_unique<ReshapeLayerT<float>>(2, spec.na, spec.nt));
    for (int i = 0; i < spec.refinenets; ++i) add_refinenet(decoder, init);
    add_conv_block(decoder, init, 2, 2, false);
    decoder.add(std::make_unique<SigmoidLayerT<float>>());

    return Network{spec, std::move(encoder), std::move(decoder)};
}

Tensor encode(Network& net, const Tensor& h) {
    return net.encoder.forward(h, Mode::Eval);
}

Tensor decode(Network& net, const Tensor& v) {
    return net.decoder.forward(v, Mode::Eval);
}

}  // namespace bcsinet
