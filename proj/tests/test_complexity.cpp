#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "bcsinet/complexity.hpp"

using namespace bcsinet;
namespace cx = bcsinet::complexity;

namespace {

ModelSpec spec_of(Family f, Head h, int rn, double eta) {
    ModelSpec s;
    s.family = f;
    s.head = h;
    s.refinenets = rn;
    s.eta = eta;
    return s;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("encoder cost arithmetic for the reference geometry") {
    // conv head: 9 * c_in * c_out * H * W = 36864; FC: M * 2048
    auto cs = cx::count(cx::encoder_descriptors(spec_of(Family::CsiNet, Head::A, 2, 0.25)));
    CHECK(cs.total_flops() == 36864 + 512ll * 2048);
    CHECK(cs.total_muls() == 36864 + 512ll * 2048);
    CHECK(cs.total_params() == doctest::Approx(38 + 4 + 512.0 * 2048 + 512));

    auto a2 = cx::count(cx::encoder_descriptors(spec_of(Family::BCsiNet, Head::A, 2, 0.25)));
    CHECK(a2.total_flops() == 36864 + 512ll * 2048);  // adds still count as ops
    CHECK(a2.total_muls() == 36864 + 512);            // one alpha scaling per output
    CHECK(a2.total_params() == doctest::Approx(38 + 4 + 512.0 * 2048 / 32 + 512 + 1));

    auto b3 = cx::count(cx::encoder_descriptors(spec_of(Family::BCsiNet, Head::B, 3, 0.25)));
    CHECK(b3.total_muls() == 2 * 36864 + 512);
}

TEST_CASE("decoder cost arithmetic for the reference geometry") {
    auto cs = cx::count(cx::decoder_descriptors(spec_of(Family::CsiNet, Head::A, 2, 0.25)));
    const long long refinenet = (2 * 8 + 8 * 16 + 16 * 2) * 9ll * 1024;
    CHECK(cs.total_flops() == 2048ll * 512 + 2 * refinenet + 36864);

    auto b3 = cx::count(cx::decoder_descriptors(spec_of(Family::BCsiNet, Head::B, 3, 0.25)));
    CHECK(b3.total_flops() == 2048ll * 512 + 3 * refinenet + 36864);
}

TEST_CASE("graph-derived costs equal descriptor-derived costs") {
    for (auto spec : {spec_of(Family::CsiNet, Head::A, 2, 0.25),
                      spec_of(Family::BCsiNet, Head::A, 2, 1.0 / 16),
                      spec_of(Family::BCsiNet, Head::B, 3, 0.25),
                      spec_of(Family::BCsiNet, Head::C, 2, 1.0 / 32)}) {
        auto net = build(spec, 1);
        auto ge = cx::count(net.encoder);
        auto de = cx::count(cx::encoder_descriptors(spec));
        CHECK(ge.total_flops() == de.total_flops());
        CHECK(ge.total_muls() == de.total_muls());
        CHECK(ge.total_params() == doctest::Approx(de.total_params()));
        CHECK(ge.total_bytes() == de.total_bytes());

        auto gd = cx::count(net.decoder);
        auto dd = cx::count(cx::decoder_descriptors(spec));
        CHECK(gd.total_flops() == dd.total_flops());
        CHECK(gd.total_params() == doctest::Approx(dd.total_params()));
    }
}

TEST_CASE("fusing BatchNorm removes its rows without changing FLOPs") {
    auto net = build(spec_of(Family::CsiNet, Head::A, 2, 0.25), 1);
    auto before = cx::count(net.decoder);
    Graph fused = net.decoder.fuse_batchnorm();
    auto after = cx::count(fused);
    int bn_rows = 0;
    double bn_params = 0;
    for (const auto& r : before.rows) {
        if (r.kind == LayerKind::BatchNorm) {
            ++bn_rows;
            bn_params += r.params;
        }
    }
    CHECK(bn_rows > 0);
    for (const auto& r : after.rows) CHECK(r.kind != LayerKind::BatchNorm);
    CHECK(after.total_flops() == before.total_flops());
    CHECK(after.total_params() == doctest::Approx(before.total_params() - bn_params));
}

TEST_CASE("FC share of the float encoder") {
    auto cs = cx::count(cx::encoder_descriptors(spec_of(Family::CsiNet, Head::A, 2, 0.25)));
    CHECK(cs.fc_flops_share() == doctest::Approx(100.0 * 1048576 / 1085440).epsilon(1e-9));
    CHECK(cs.fc_flops_share() == doctest::Approx(96.60).epsilon(1e-4));
    CHECK(cs.fc_params_share() == doctest::Approx(99.996).epsilon(1e-5));
}

TEST_CASE("memory saving multiple of the 1-bit encoder") {
    // report-based and spec-based paths agree
    for (Head h : {Head::A, Head::B, Head::C}) {
        for (double eta : {0.25, 0.125, 0.0625, 0.03125}) {
            auto base =
                cx::count(cx::encoder_descriptors(spec_of(Family::CsiNet, Head::A, 2, eta)));
            auto bin =
                cx::count(cx::encoder_descriptors(spec_of(Family::BCsiNet, h, 2, eta)));
            const double direct = cx::memory_multiple(h, eta);
            CHECK(direct == doctest::Approx(cx::memory_multiple(base, bin)).epsilon(1e-12));
            CHECK(direct > 30.0);
            CHECK(direct < 32.0);
        }
    }
    CHECK(cx::memory_multiple(Head::A, 0.25) == doctest::Approx(31.48).epsilon(0.001));
    CHECK(cx::memory_multiple(Head::B, 0.25) == doctest::Approx(31.44).epsilon(0.001));
    CHECK(cx::memory_multiple(Head::C, 0.25) == doctest::Approx(31.44).epsilon(0.001));
}

TEST_CASE("formatting helpers") {
    CHECK(cx::format_kilo(1085440) == "1085K");
    CHECK(cx::format_kilo(1049130) == "1049K");
    CHECK(cx::format_kilo(33323) == "33K");
    CHECK(cx::format_kilo(4203) == "4K");
    CHECK(cx::format_mega(1085440) == "1.09M");
    CHECK(cx::format_mega(4329472) == "4.33M");
    CHECK(cx::format_mega(1049130) == "1.05M");
}

TEST_CASE("encoder table cells") {
    const std::string csv = cx::table_csv("tab4");
    CHECK(contains(csv, "1/4,CsiNet,1085K,1049K"));
    CHECK(contains(csv, "1/4,BCsiNet-A2,37K,33K"));
    CHECK(contains(csv, "1/4,BCsiNet-B3,74K,33K"));
    CHECK(contains(csv, "1/8,CsiNet,561K,525K"));
    CHECK(contains(csv, "1/8,BCsiNet-A2,37K,17K"));
    CHECK(contains(csv, "1/16,CsiNet,299K,262K"));
    CHECK(contains(csv, "1/16,BCsiNet-B3,74K,8K"));
    CHECK(contains(csv, "1/32,CsiNet,168K,131K"));
    CHECK(contains(csv, "1/32,BCsiNet-A2,37K,4K"));
    CHECK(contains(csv, "1/32,BCsiNet-B3,74K,4K"));
}

TEST_CASE("network family table cells") {
    const std::string t = cx::table("tab1");
    CHECK(contains(t, "1.09M"));
    CHECK(contains(t, "4.33M"));
    const std::string shares = cx::table("tab2");
    CHECK(contains(shares, "96.60%"));
    CHECK(contains(shares, "99.996%"));
    const std::string fig = cx::table("fig4");
    CHECK(contains(fig, "31.48"));
    CHECK(contains(fig, "30.90"));
    CHECK_THROWS(cx::table("tab9"));
}
