#include "bcsinet/complexity.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace bcsinet::complexity {

namespace {

LayerCost cost_of(const LayerDesc& d, int index) {
    LayerCost c;
    c.kind = d.kind;
    c.name = std::to_string(index) + ":" + layer_kind_name(d.kind);
    switch (d.kind) {
        case LayerKind::Conv3x3: {
            const long long hw = static_cast<long long>(d.h) * d.w;
            c.flops = hw * d.c_out * 9LL * d.c_in;
            c.muls = c.flops;
            const long long p = 9LL * d.c_in * d.c_out + d.c_out;
            c.params = static_cast<double>(p);
            c.bytes = 4 * p;
            break;
        }
        case LayerKind::Dense: {
            c.flops = static_cast<long long>(d.m) * d.n;
            c.muls = c.flops;
            const long long p = static_cast<long long>(d.m) * d.n + d.m;
            c.params = static_cast<double>(p);
            c.bytes = 4 * p;
            break;
        }
        case LayerKind::BinaryDense: {
            const long long mn = static_cast<long long>(d.m) * d.n;
            c.flops = mn;            // additions remain; multiply-then-add unit
            c.muls = d.m;            // one alpha scaling per output
            c.params = static_cast<double>(mn) / 32.0 + d.m + 1;  // weights + bias + alpha
            c.bytes = (mn + 7) / 8 + 4LL * d.m + 4;
            break;
        }
        case LayerKind::BatchNorm: {
            // Cost free in inference (folds into the preceding layer); counts
            // scale + shift per channel as trainable parameters.
            const long long p = 2LL * d.c_out;
            c.params = static_cast<double>(p);
            c.bytes = 4 * p;
            break;
        }
        default:
            break;  // activations, reshapes and adds are free
    }
    return c;
}

bool is_fc(LayerKind k) { return k == LayerKind::Dense || k == LayerKind::BinaryDense; }

}  // namespace

long long ComplexityReport::total_flops() const {
    long long t = 0;
    for (const auto& r : rows) t += r.flops;
    return t;
}

long long ComplexityReport::total_muls() const {
    long long t = 0;
    for (const auto& r : rows) t += r.muls;
    return t;
}

double ComplexityReport::total_params() const {
    double t = 0;
    for (const auto& r : rows) t += r.params;
    return t;
}

long long ComplexityReport::total_bytes() const {
    long long t = 0;
    for (const auto& r : rows) t += r.bytes;
    return t;
}

double ComplexityReport::fc_flops_share() const {
    long long fc = 0;
    for (const auto& r : rows) {
        if (is_fc(r.kind)) fc += r.flops;
    }
    const long long total = total_flops();
    if (total == 0) throw std::runtime_error("complexity: no FLOPs to take a share of");
    return 100.0 * static_cast<double>(fc) / static_cast<double>(total);
}

double ComplexityReport::fc_params_share() const {
    double fc = 0;
    for (const auto& r : rows) {
        if (is_fc(r.kind)) fc += r.params;
    }
    return 100.0 * fc / total_params();
}

ComplexityReport count(const std::vector<LayerDesc>& descriptors) {
    ComplexityReport rep;
    int i = 0;
    for (const auto& d : descriptors) rep.rows.push_back(cost_of(d, i++));
    return rep;
}

ComplexityReport count(const Graph& graph) {
    const auto shapes = graph.node_shapes();
    std::vector<LayerDesc> descs;
    for (size_t i = 0; i < graph.size(); ++i) {
        const auto& layer = graph.layer(i);
        const auto& in = shapes[i];
        LayerDesc d;
        d.kind = layer.kind();
        switch (d.kind) {
            case LayerKind::Conv3x3: {
                const auto& conv = static_cast<const Conv3x3LayerT<float>&>(layer);
                d.c_in = conv.in_channels();
                d.c_out = conv.out_channels();
                d.h = in[1];
                d.w = in[2];
                break;
            }
            case LayerKind::BatchNorm: {
                d.c_out = static_cast<const BatchNormLayerT<float>&>(layer).channels();
                break;
            }
            case LayerKind::Dense: {
                const auto& fc = static_cast<const DenseLayerT<float>&>(layer);
                d.m = fc.out_features();
                d.n = fc.in_features();
                break;
            }
            case LayerKind::BinaryDense: {
                const auto& fc = static_cast<const BinaryDenseLayerT<float>&>(layer);
                d.m = fc.out_features();
                d.n = fc.in_features();
                break;
            }
            default:
                break;
        }
        descs.push_back(d);
    }
    return count(descs);
}

namespace {

LayerDesc conv_desc(int c_in, int c_out, int h, int w) {
    return LayerDesc{LayerKind::Conv3x3, c_in, c_out, h, w, 0, 0};
}

LayerDesc bn_desc(int channels) {
    return LayerDesc{LayerKind::BatchNorm, 0, channels, 0, 0, 0, 0};
}

void push_conv_block(std::vector<LayerDesc>& v, int c_in, int c_out, int h, int w,
                     bool activation) {
    v.push_back(conv_desc(c_in, c_out, h, w));
    v.push_back(bn_desc(c_out));
    if (activation) v.push_back(LayerDesc{LayerKind::LeakyReLU});
}

}  // namespace

std::vector<LayerDesc> encoder_descriptors(const ModelSpec& spec) {
    spec.validate();
    std::vector<LayerDesc> v;
    const int h = spec.na, w = spec.nt;
    switch (spec.head) {
        case Head::A:
            push_conv_block(v, 2, 2, h, w, true);
            break;
        case Head::B:
            push_conv_block(v, 2, 2, h, w, true);
            push_conv_block(v, 2, 2, h, w, true);
            break;
        case Head::C:
            push_conv_block(v, 2, 2, h, w, true);
            push_conv_block(v, 2, 2, h, w, false);
            v.push_back(LayerDesc{LayerKind::ResidualAdd});
            v.push_back(LayerDesc{LayerKind::LeakyReLU});
            break;
    }
    v.push_back(LayerDesc{LayerKind::Flatten});
    LayerDesc fc;
    fc.kind = spec.family == Family::BCsiNet ? LayerKind::BinaryDense : LayerKind::Dense;
    fc.m = spec.codeword_len();
    fc.n = spec.input_features();
    v.push_back(fc);
    return v;
}

std::vector<LayerDesc> decoder_descriptors(const ModelSpec& spec) {
    spec.validate();
    std::vector<LayerDesc> v;
    const int h = spec.na, w = spec.nt;
    LayerDesc fc;
    fc.kind = LayerKind::Dense;
    fc.m = spec.input_features();
    fc.n = spec.codeword_len();
    v.push_back(fc);
    v.push_back(LayerDesc{LayerKind::Reshape});
    for (int i = 0; i < spec.refinenets; ++i) {
        push_conv_block(v, 2, 8, h, w, true);
        push_conv_block(v, 8, 16, h, w, true);
        push_conv_block(v, 16, 2, h, w, false);
        v.push_back(LayerDesc{LayerKind::ResidualAdd});
        v.push_back(LayerDesc{LayerKind::LeakyReLU});
    }
    push_conv_block(v, 2, 2, h, w, false);
    v.push_back(LayerDesc{LayerKind::Sigmoid});
    return v;
}

double memory_multiple(const ComplexityReport& baseline, const ComplexityReport& binary) {
    const long long denom = binary.total_bytes();
    if (denom == 0) throw std::invalid_argument("memory_multiple: zero binary byte count");
    return static_cast<double>(baseline.total_bytes()) / static_cast<double>(denom);
}

double memory_multiple(Head head, double eta) {
    ModelSpec baseline;
    baseline.family = Family::CsiNet;
    baseline.head = Head::A;
    baseline.eta = eta;
    ModelSpec binary;
    binary.family = Family::BCsiNet;
    binary.head = head;
    binary.eta = eta;
    return memory_multiple(count(encoder_descriptors(baseline)),
                           count(encoder_descriptors(binary)));
}

std::string format_kilo(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lldK", static_cast<long long>(std::llround(v / 1000.0)));
    return buf;
}

std::string format_mega(long long v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2fM", static_cast<double>(v) / 1e6);
    return buf;
}

namespace {

struct FrozenRow {
    const char* name;
    const char* enc_flops;
    const char* enc_params;
    const char* dec_flops;
    const char* dec_params;
};

// Comparison networks are represented by their published totals only; they are
// never executed here.
constexpr FrozenRow kTab1Frozen[] = {
    {"CRNet", "1.20M", "1.05M", "3.92M", "1.05M"},
    {"CsiNetPlus", "1.45M", "1.05M", "23.12M", "1.07M"},
    {"ConvCsiNet", "60.16M", "2.14M", "166.07M", "2.07M"},
    {"DeepCMC", "173.54M", "3.32M", "278.40M", "9.87M"},
};

struct FrozenShareRow {
    const char* name;
    const char* fc_flops;
    const char* other_flops;
    const char* fc_params;
    const char* other_params;
};

constexpr FrozenShareRow kTab2Frozen[] = {
    {"CRNet", "87.07%", "12.93%", "99.984%", "0.016%"},
    {"CsiNetPlus", "72.32%", "27.68%", "99.962%", "0.038%"},
};

constexpr double kEtas[] = {0.25, 0.125, 0.0625, 0.03125};

ModelSpec make_spec(Family family, Head head, int refinenets, double eta) {
    ModelSpec s;
    s.family = family;
    s.head = head;
    s.refinenets = refinenets;
    s.eta = eta;
    return s;
}

std::string pct(double v, int decimals) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f%%", decimals, v);
    return buf;
}

std::string tab1_body(bool csv) {
    const ModelSpec csinet = make_spec(Family::CsiNet, Head::A, 2, 0.25);
    const auto enc = count(encoder_descriptors(csinet));
    const auto dec = count(decoder_descriptors(csinet));
    std::ostringstream os;
    const char* sep = csv ? "," : "  ";
    if (csv) {
        os << "method,encoder_flops,encoder_params,decoder_flops,decoder_params,note\n";
    } else {
        os << "params and flops of feedback networks (eta = 1/4)\n";
        os << "method      enc FLOPs  enc params  dec FLOPs  dec params\n";
    }
    os << (csv ? "CsiNet" : "CsiNet     ") << sep << format_mega(enc.total_flops()) << sep
       << format_mega(static_cast<long long>(std::llround(enc.total_params()))) << sep
       << format_mega(dec.total_flops()) << sep
       << format_mega(static_cast<long long>(std::llround(dec.total_params())));
    if (csv) os << ",computed";
    os << "\n";
    for (const auto& r : kTab1Frozen) {
        os << r.name << sep << r.enc_flops << sep << r.enc_params << sep << r.dec_flops << sep
           << r.dec_params;
        os << (csv ? ",descriptor not executed" : "  (descriptor, not executed)");
        os << "\n";
    }
    return os.str();
}

std::string tab2_body(bool csv) {
    const ModelSpec csinet = make_spec(Family::CsiNet, Head::A, 2, 0.25);
    const auto enc = count(encoder_descriptors(csinet));
    std::ostringstream os;
    const char* sep = csv ? "," : "  ";
    if (csv) {
        os << "method,fc_flops,other_flops,fc_params,other_params,note\n";
    } else {
        os << "encoder complexity distribution (eta = 1/4)\n";
        os << "method      FC FLOPs  other FLOPs  FC params  other params\n";
    }
    os << (csv ? "CsiNet" : "CsiNet     ") << sep << pct(enc.fc_flops_share(), 2) << sep
       << pct(100.0 - enc.fc_flops_share(), 2) << sep << pct(enc.fc_params_share(), 3) << sep
       << pct(100.0 - enc.fc_params_share(), 3);
    if (csv) os << ",computed";
    os << "\n";
    for (const auto& r : kTab2Frozen) {
        os << r.name << sep << r.fc_flops << sep << r.other_flops << sep << r.fc_params << sep
           << r.other_params;
        os << (csv ? ",descriptor not executed" : "  (descriptor, not executed)");
        os << "\n";
    }
    return os.str();
}

std::string tab4_body(bool csv) {
    std::ostringstream os;
    const char* sep = csv ? "," : "  ";
    if (csv) {
        os << "eta,method,mul,params\n";
    } else {
        os << "encoder complexity at UE\n";
        os << "eta    method      mul     params\n";
    }
    for (double eta : kEtas) {
        const int inv = static_cast<int>(std::lround(1.0 / eta));
        const ModelSpec specs[] = {
            make_spec(Family::CsiNet, Head::A, 2, eta),
            make_spec(Family::BCsiNet, Head::A, 2, eta),
            make_spec(Family::BCsiNet, Head::B, 3, eta),
        };
        for (const auto& s : specs) {
            const auto enc = count(encoder_descriptors(s));
            os << (csv ? "1/" + std::to_string(inv) : "1/" + std::to_string(inv) + "  ") << sep
               << s.name() << sep << format_kilo(static_cast<double>(enc.total_muls())) << sep
               << format_kilo(enc.total_params()) << "\n";
        }
    }
    return os.str();
}

std::string fig4_body(bool csv) {
    std::ostringstream os;
    const char* sep = csv ? "," : "  ";
    if (csv) {
        os << "head,inv_eta,memory_multiple\n";
    } else {
        os << "encoder memory saving multiple over CsiNet\n";
        os << "head  1/eta  multiple\n";
    }
    for (Head head : {Head::A, Head::B, Head::C}) {
        for (double eta : kEtas) {
            const int inv = static_cast<int>(std::lround(1.0 / eta));
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.2f", memory_multiple(head, eta));
            os << to_string(head) << sep << inv << sep << buf << "\n";
        }
    }
    return os.str();
}

std::string render(const std::string& mode, bool csv) {
    if (mode == "tab1") return tab1_body(csv);
    if (mode == "tab2") return tab2_body(csv);
    if (mode == "tab4") return tab4_body(csv);
    if (mode == "fig4") return fig4_body(csv);
    throw std::invalid_argument("unknown table mode: " + mode);
}

}  // namespace

std::string table(const std::string& mode) { return render(mode, false); }
std::string table_csv(const std::string& mode) { return render(mode, true); }

}  // namespace bcsinet::complexity
