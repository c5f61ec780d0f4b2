#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstddef>
#include <random>
#include <vector>

#include "bcsinet/models.hpp"

using namespace bcsinet;

namespace {

ModelSpec spec_of(Family f, Head h, int rn, double eta) {
    ModelSpec s;
    s.family = f;
    s.head = h;
    s.refinenets = rn;
    s.eta = eta;
    return s;
}

int count_kind(const Graph& g, LayerKind k) {
    int n = 0;
    for (size_t i = 0; i < g.size(); ++i) {
        if (g.layer(i).kind() == k) ++n;
    }
    return n;
}

size_t param_elements(Graph& g) {
    size_t n = 0;
    for (auto* p : g.params()) n += p->data.size();
    return n;
}

}  // namespace

TEST_CASE("codeword length follows the compression ratio") {
    CHECK(spec_of(Family::BCsiNet, Head::A, 2, 0.25).codeword_len() == 512);
    CHECK(spec_of(Family::BCsiNet, Head::A, 2, 1.0 / 32.0).codeword_len() == 64);
    CHECK(spec_of(Family::BCsiNet, Head::A, 2, 1.0 / 16.0).codeword_len() == 128);
    CHECK(spec_of(Family::BCsiNet, Head::A, 2, 1.0 / 8.0).codeword_len() == 256);
}

TEST_CASE("spec validation rejects bad configurations") {
    CHECK_THROWS_AS(spec_of(Family::BCsiNet, Head::A, 4, 0.25).validate(), std::invalid_argument);
    CHECK_THROWS_AS(spec_of(Family::BCsiNet, Head::A, 1, 0.25).validate(), std::invalid_argument);
    CHECK_THROWS_AS(spec_of(Family::BCsiNet, Head::A, 2, -0.25).validate(), std::invalid_argument);
    // 2*32*32*0.3 = 614.4 is not an integer codeword length
    CHECK_THROWS_AS(spec_of(Family::BCsiNet, Head::A, 2, 0.3).validate(), std::invalid_argument);
    CHECK_THROWS_AS(spec_of(Family::CsiNet, Head::B, 2, 0.25).validate(), std::invalid_argument);
    ModelSpec bad_na = spec_of(Family::BCsiNet, Head::A, 2, 0.25);
    bad_na.na = 0;
    CHECK_THROWS_AS(bad_na.validate(), std::invalid_argument);
    CHECK_NOTHROW(spec_of(Family::BCsiNet, Head::C, 3, 0.25).validate());
    CHECK_NOTHROW(spec_of(Family::CsiNet, Head::A, 2, 1.0 / 32.0).validate());
}

TEST_CASE("model names") {
    CHECK(spec_of(Family::BCsiNet, Head::B, 3, 0.25).name() == "BCsiNet-B3");
    CHECK(spec_of(Family::BCsiNet, Head::A, 2, 0.25).name() == "BCsiNet-A2");
    CHECK(spec_of(Family::BCsiNet, Head::C, 2, 0.25).name() == "BCsiNet-C2");
    CHECK(spec_of(Family::CsiNet, Head::A, 2, 0.25).name() == "CsiNet");
}

TEST_CASE("family and head parsing") {
    CHECK(family_from_string("csinet") == Family::CsiNet);
    CHECK(family_from_string("BCsiNet") == Family::BCsiNet);
    CHECK_THROWS_AS(family_from_string("resnet"), std::invalid_argument);
    CHECK(head_from_string("b") == Head::B);
    CHECK(head_from_string("C") == Head::C);
    CHECK_THROWS_AS(head_from_string("D"), std::invalid_argument);
    CHECK(to_string(Family::BCsiNet) == "BCsiNet");
    CHECK(to_string(Head::A) == "A");
}

TEST_CASE("encoder uses a binary FC layer only in the BCsiNet family") {
    auto bnet = build(spec_of(Family::BCsiNet, Head::A, 2, 0.25), 1);
    CHECK(count_kind(bnet.encoder, LayerKind::BinaryDense) == 1);
    CHECK(count_kind(bnet.encoder, LayerKind::Dense) == 0);

    auto cnet = build(spec_of(Family::CsiNet, Head::A, 2, 0.25), 1);
    CHECK(count_kind(cnet.encoder, LayerKind::BinaryDense) == 0);
    CHECK(count_kind(cnet.encoder, LayerKind::Dense) == 1);

    // decoders are float throughout
    CHECK(count_kind(bnet.decoder, LayerKind::BinaryDense) == 0);
    CHECK(count_kind(cnet.decoder, LayerKind::BinaryDense) == 0);
}

TEST_CASE("head variants differ by conv blocks and residual wiring") {
    auto a = build(spec_of(Family::BCsiNet, Head::A, 2, 0.25), 1);
    auto b = build(spec_of(Family::BCsiNet, Head::B, 2, 0.25), 1);
    auto c = build(spec_of(Family::BCsiNet, Head::C, 2, 0.25), 1);
    CHECK(count_kind(a.encoder, LayerKind::Conv3x3) == 1);
    CHECK(count_kind(b.encoder, LayerKind::Conv3x3) == 2);
    CHECK(count_kind(c.encoder, LayerKind::Conv3x3) == 2);
    CHECK(count_kind(a.encoder, LayerKind::ResidualAdd) == 0);
    CHECK(count_kind(b.encoder, LayerKind::ResidualAdd) == 0);
    CHECK(count_kind(c.encoder, LayerKind::ResidualAdd) == 1);
    // head C's skip taps the encoder input
    bool found = false;
    for (size_t i = 0; i < c.encoder.size(); ++i) {
        if (c.encoder.layer(i).kind() == LayerKind::ResidualAdd) {
            CHECK(c.encoder.skip_from(i) == Graph::kGraphInput);
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("decoder has one RefineNet skip per requested RefineNet") {
    auto two = build(spec_of(Family::BCsiNet, Head::A, 2, 0.25), 1);
    auto three = build(spec_of(Family::BCsiNet, Head::A, 3, 0.25), 1);
    CHECK(count_kind(two.decoder, LayerKind::ResidualAdd) == 2);
    CHECK(count_kind(three.decoder, LayerKind::ResidualAdd) == 3);
    CHECK(count_kind(two.decoder, LayerKind::Sigmoid) == 1);
    CHECK(two.decoder.layer(two.decoder.size() - 1).kind() == LayerKind::Sigmoid);
}

TEST_CASE("encode and decode shapes and output range") {
    auto net = build(spec_of(Family::BCsiNet, Head::B, 3, 0.25), 7);
    Tensor h({3, 2, 32, 32});
    std::mt19937 rng(7);
    std::uniform_real_distribution<float> d(0.0f, 1.0f);
    for (auto& v : h.data) v = d(rng);
    Tensor v = encode(net, h);
    CHECK(v.shape == std::vector<int>{3, 512});
    Tensor out = decode(net, v);
    CHECK(out.shape == std::vector<int>{3, 2, 32, 32});
    for (float x : out.data) {
        CHECK(x > 0.0f);
        CHECK(x < 1.0f);
    }
}

TEST_CASE("eval-mode inference is batch independent") {
    auto net = build(spec_of(Family::BCsiNet, Head::C, 2, 0.25), 11);
    Tensor h({2, 2, 32, 32});
    std::mt19937 rng(11);
    std::uniform_real_distribution<float> d(0.0f, 1.0f);
    for (auto& v : h.data) v = d(rng);

    Tensor both = encode(net, h);
    for (int s = 0; s < 2; ++s) {
        Tensor one({1, 2, 32, 32});
        std::copy_n(h.data.begin() + s * 2048, 2048, one.data.begin());
        Tensor ve = encode(net, one);
        for (int j = 0; j < 512; ++j) {
            CHECK(ve[j] == doctest::Approx(both[static_cast<size_t>(s) * 512 + j])
                               .epsilon(1e-6));
        }
    }
}

TEST_CASE("zero input reaches the FC layer unchanged, codeword equals the FC bias") {
    // Fresh BatchNorm running stats are the identity in eval mode and every
    // conv bias starts at zero, so a zero image stays zero through the head.
    for (Head head : {Head::A, Head::B, Head::C}) {
        auto net = build(spec_of(Family::BCsiNet, head, 2, 0.25), 3);
        auto params = net.encoder.params();
        Tensor& fc_bias = *params.back();
        REQUIRE(fc_bias.data.size() == 512);
        for (size_t i = 0; i < fc_bias.data.size(); ++i) {
            fc_bias[i] = 0.001f * static_cast<float>(i) - 0.2f;
        }
        Tensor h({1, 2, 32, 32});
        Tensor v = encode(net, h);
        for (int j = 0; j < 512; ++j) {
            CHECK(v[j] == doctest::Approx(fc_bias[j]).epsilon(1e-6));
        }
    }
}

TEST_CASE("zeroed decoder parameters give a constant 0.5 reconstruction") {
    auto net = build(spec_of(Family::BCsiNet, Head::A, 2, 0.25), 5);
    for (auto* p : net.decoder.params()) p->fill(0.0f);
    Tensor v({2, 512});
    std::mt19937 rng(5);
    std::uniform_real_distribution<float> d(-1.0f, 1.0f);
    for (auto& x : v.data) x = d(rng);
    Tensor out = decode(net, v);
    for (float x : out.data) CHECK(x == doctest::Approx(0.5f).epsilon(1e-7));
}

TEST_CASE("build is deterministic in the seed") {
    const auto spec = spec_of(Family::BCsiNet, Head::B, 3, 0.25);
    auto n1 = build(spec, 42);
    auto n2 = build(spec, 42);
    auto n3 = build(spec, 43);
    auto p1e = n1.encoder.params(), p2e = n2.encoder.params(), p3e = n3.encoder.params();
    auto p1d = n1.decoder.params(), p2d = n2.decoder.params();
    REQUIRE(p1e.size() == p2e.size());
    bool any_diff = false;
    for (size_t i = 0; i < p1e.size(); ++i) {
        REQUIRE(p1e[i]->data.size() == p2e[i]->data.size());
        for (size_t k = 0; k < p1e[i]->data.size(); ++k) {
            CHECK((*p1e[i])[k] == (*p2e[i])[k]);
            if ((*p1e[i])[k] != (*p3e[i])[k]) any_diff = true;
        }
    }
    for (size_t i = 0; i < p1d.size(); ++i) {
        for (size_t k = 0; k < p1d[i]->data.size(); ++k) {
            CHECK((*p1d[i])[k] == (*p2d[i])[k]);
        }
    }
    CHECK(any_diff);
}

TEST_CASE("parameter element counts match the architecture arithmetic") {
    // conv block = 3x3 conv weights + conv bias + BatchNorm gamma/beta
    auto conv_block = [](int c_in, int c_out) {
        return static_cast<size_t>(c_in * c_out * 9 + c_out + 2 * c_out);
    };
    const size_t fc_enc = 512 * 2048 + 512;
    const size_t fc_dec = 2048 * 512 + 2048;
    const size_t refinenet = conv_block(2, 8) + conv_block(8, 16) + conv_block(16, 2);

    auto a2 = build(spec_of(Family::BCsiNet, Head::A, 2, 0.25), 1);
    CHECK(param_elements(a2.encoder) == conv_block(2, 2) + fc_enc);
    CHECK(param_elements(a2.decoder) == fc_dec + 2 * refinenet + conv_block(2, 2));

    auto b3 = build(spec_of(Family::BCsiNet, Head::B, 3, 0.25), 1);
    CHECK(param_elements(b3.encoder) == 2 * conv_block(2, 2) + fc_enc);
    CHECK(param_elements(b3.decoder) == fc_dec + 3 * refinenet + conv_block(2, 2));

    // CsiNet shares the same master float layout for head A
    auto cs = build(spec_of(Family::CsiNet, Head::A, 2, 0.25), 1);
    CHECK(param_elements(cs.encoder) == param_elements(a2.encoder));
}
