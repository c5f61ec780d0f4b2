#include "bcsinet/binkernel.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "bcsinet/channel_data.hpp"  // FormatError

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace bcsinet {

uint32_t crc32(const uint8_t* data, size_t len, uint32_t seed) {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    uint32_t c = seed ^ 0xFFFFFFFFu;
    for (size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

PackedBinaryMatrix pack(const std::vector<int8_t>& signs, int rows, int cols) {
    if (static_cast<long long>(signs.size()) != static_cast<long long>(rows) * cols) {
        throw std::invalid_argument("pack: sign count does not match dimensions");
    }
    PackedBinaryMatrix p;
    p.rows = rows;
    p.cols = cols;
    p.words.assign(static_cast<size_t>(rows) * p.words_per_row(), 0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int8_t s = signs[static_cast<size_t>(r) * cols + c];
            if (s != 1 && s != -1) {
                throw std::invalid_argument("pack: entries must be +1 or -1");
            }
            if (s == 1) {
                p.words[static_cast<size_t>(r) * p.words_per_row() + c / 64] |=
                    uint64_t(1) << (c % 64);
            }
        }
    }
    return p;
}

std::vector<int8_t> unpack(const PackedBinaryMatrix& p) {
    std::vector<int8_t> signs(static_cast<size_t>(p.rows) * p.cols);
    for (int r = 0; r < p.rows; ++r) {
        for (int c = 0; c < p.cols; ++c) {
            const uint64_t w = p.word(r, c / 64);
            signs[static_cast<size_t>(r) * p.cols + c] =
                ((w >> (c % 64)) & 1) ? int8_t(1) : int8_t(-1);
        }
    }
    return signs;
}

namespace {

// Portable accumulation: flips the sign bit of x[j] when the weight is -1.
inline float row_accumulate_scalar(const uint64_t* words, const float* x, int cols) {
    float acc = 0.0f;
    for (int c = 0; c < cols; ++c) {
        const uint64_t w = words[c / 64];
        const uint32_t flip = static_cast<uint32_t>(~(w >> (c % 64)) & 1u) << 31;
        acc += std::bit_cast<float>(std::bit_cast<uint32_t>(x[c]) ^ flip);
    }
    return acc;
}

#if defined(__AVX512F__)
// Mask-selected adds/subtracts, 16 lanes at a time; requires cols % 64 == 0.
inline float row_accumulate_avx512(const uint64_t* words, const float* x, int cols) {
    __m512 plus = _mm512_setzero_ps();
    __m512 minus = _mm512_setzero_ps();
    const int nwords = cols / 64;
    for (int w = 0; w < nwords; ++w) {
        const uint64_t bits = words[w];
        for (int q = 0; q < 4; ++q) {
            const __mmask16 k = static_cast<__mmask16>(bits >> (16 * q));
            const __m512 xv = _mm512_loadu_ps(x + w * 64 + q * 16);
            plus = _mm512_mask_add_ps(plus, k, plus, xv);
            minus = _mm512_mask_add_ps(minus, static_cast<__mmask16>(~k), minus, xv);
        }
    }
    return _mm512_reduce_add_ps(plus) - _mm512_reduce_add_ps(minus);
}
#endif

}  // namespace

void binary_gemv(const PackedBinaryMatrix& p, const float* x, float alpha, const float* bias,
                 float* y) {
    const int wpr = p.words_per_row();
    for (int r = 0; r < p.rows; ++r) {
        const uint64_t* words = p.words.data() + static_cast<size_t>(r) * wpr;
        float acc;
#if defined(__AVX512F__)
        if (p.cols % 64 == 0) {
            acc = row_accumulate_avx512(words, x, p.cols);
        } else {
            acc = row_accumulate_scalar(words, x, p.cols);
        }
#else
        acc = row_accumulate_scalar(words, x, p.cols);
#endif
        y[r] = alpha * acc + bias[r];
    }
}

uint64_t binary_gemv_counted(const PackedBinaryMatrix& p, const float* x, float alpha,
                             const float* bias, float* y) {
    uint64_t muls = 0;
    const int wpr = p.words_per_row();
    for (int r = 0; r < p.rows; ++r) {
        const uint64_t* words = p.words.data() + static_cast<size_t>(r) * wpr;
        float acc = 0.0f;
        for (int c = 0; c < p.cols; ++c) {
            // adds and subtracts only in the accumulation path
            if ((words[c / 64] >> (c % 64)) & 1) {
                acc += x[c];
            } else {
                acc -= x[c];
            }
        }
        y[r] = alpha * acc + bias[r];
        muls += 1;  // the single alpha scaling above
    }
    return muls;
}

void dense_gemv(const float* w, int rows, int cols, const float* x, const float* bias,
                float* y) {
    for (int r = 0; r < rows; ++r) {
        const float* wr = w + static_cast<size_t>(r) * cols;
        float acc = 0.0f;
        for (int c = 0; c < cols; ++c) acc += wr[c] * x[c];
        y[r] = acc + bias[r];
    }
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; big-endian hosts unsupported");

class ByteWriter {
public:
    template <typename T>
    void pod(const T& v) {
        const auto* b = reinterpret_cast<const uint8_t*>(&v);
        buf_.insert(buf_.end(), b, b + sizeof(T));
    }
    void bytes(const void* data, size_t len) {
        const auto* b = static_cast<const uint8_t*>(data);
        buf_.insert(buf_.end(), b, b + len);
    }
    void floats(const std::vector<float>& v) { bytes(v.data(), v.size() * sizeof(float)); }

    void write_file(const std::string& path) const {
        const uint32_t crc = crc32(buf_.data(), buf_.size());
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) throw FormatError("cannot open " + path + " for writing");
        os.write(reinterpret_cast<const char*>(buf_.data()),
                 static_cast<std::streamsize>(buf_.size()));
        os.write(reinterpret_cast<const char*>(&crc), sizeof(crc));
        if (!os) throw FormatError("write failed for " + path);
    }

private:
    std::vector<uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(const std::string& path) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw FormatError("cannot open " + path);
        buf_.assign(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
        if (buf_.size() < 4) throw FormatError("file truncated: " + path);
        uint32_t stored;
        std::memcpy(&stored, buf_.data() + buf_.size() - 4, 4);
        if (crc32(buf_.data(), buf_.size() - 4) != stored) {
            throw FormatError("checksum mismatch in " + path);
        }
        end_ = buf_.size() - 4;
    }

    template <typename T>
    T pod() {
        if (pos_ + sizeof(T) > end_) throw FormatError("file truncated");
        T v;
        std::memcpy(&v, buf_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    void floats(std::vector<float>& v, size_t count) {
        if (pos_ + count * sizeof(float) > end_) throw FormatError("file truncated");
        v.resize(count);
        std::memcpy(v.data(), buf_.data() + pos_, count * sizeof(float));
        pos_ += count * sizeof(float);
    }
    void bytes(void* dst, size_t len) {
        if (pos_ + len > end_) throw FormatError("file truncated");
        std::memcpy(dst, buf_.data() + pos_, len);
        pos_ += len;
    }
    bool exhausted() const { return pos_ == end_; }

private:
    std::vector<uint8_t> buf_;
    size_t pos_ = 0;
    size_t end_ = 0;
};

constexpr char kDeployedMagic[8] = {'B', 'C', 'S', 'I', 'N', 'E', 'T', '1'};
constexpr char kCheckpointMagic[8] = {'B', 'C', 'S', 'I', 'C', 'K', 'P', 'T'};
constexpr uint32_t kFileVersion = 1;

void write_spec(ByteWriter& w, const ModelSpec& spec) {
    w.pod<uint8_t>(spec.family == Family::BCsiNet ? 1 : 0);
    w.pod<uint8_t>(static_cast<uint8_t>(spec.head));
    w.pod<uint8_t>(static_cast<uint8_t>(spec.refinenets));
    w.pod<uint8_t>(0);
    w.pod<double>(spec.eta);
    w.pod<uint32_t>(static_cast<uint32_t>(spec.na));
    w.pod<uint32_t>(static_cast<uint32_t>(spec.nt));
}

ModelSpec read_spec(ByteReader& r) {
    ModelSpec spec;
    spec.family = r.pod<uint8_t>() ? Family::BCsiNet : Family::CsiNet;
    spec.head = static_cast<Head>(r.pod<uint8_t>());
    spec.refinenets = r.pod<uint8_t>();
    r.pod<uint8_t>();
    spec.eta = r.pod<double>();
    spec.na = static_cast<int>(r.pod<uint32_t>());
    spec.nt = static_cast<int>(r.pod<uint32_t>());
    spec.validate();
    return spec;
}

// Float-only eval graph records (the deployed file has no BatchNorm or
// BinaryDense layers; BN is folded and the FC is stored packed).
void write_graph(ByteWriter& w, Graph& g) {
    w.pod<uint32_t>(static_cast<uint32_t>(g.size()));
    for (size_t i = 0; i < g.size(); ++i) {
        auto& layer = g.layer(i);
        w.pod<uint32_t>(static_cast<uint32_t>(layer.kind()));
        switch (layer.kind()) {
            case LayerKind::Conv3x3: {
                auto& conv = static_cast<Conv3x3LayerT<float>&>(layer);
                w.pod<uint32_t>(static_cast<uint32_t>(conv.in_channels()));
                w.pod<uint32_t>(static_cast<uint32_t>(conv.out_channels()));
                w.floats(conv.weight().data);
                w.floats(conv.bias().data);
                break;
            }
            case LayerKind::Dense: {
                auto& fc = static_cast<DenseLayerT<float>&>(layer);
                w.pod<uint32_t>(static_cast<uint32_t>(fc.out_features()));
                w.pod<uint32_t>(static_cast<uint32_t>(fc.in_features()));
                w.floats(fc.weight().data);
                w.floats(fc.bias().data);
                break;
            }
            case LayerKind::Reshape: {
                const auto& rs = static_cast<const ReshapeLayerT<float>&>(layer);
                w.pod<uint32_t>(static_cast<uint32_t>(rs.channels()));
                w.pod<uint32_t>(static_cast<uint32_t>(rs.height()));
                w.pod<uint32_t>(static_cast<uint32_t>(rs.width()));
                break;
            }
            case LayerKind::LeakyReLU:
            case LayerKind::Sigmoid:
            case LayerKind::Flatten:
                break;
            case LayerKind::ResidualAdd:
                w.pod<int32_t>(g.skip_from(i));
                break;
            default:
                throw std::invalid_argument("write_graph: unsupported layer in deployed graph");
        }
    }
}

}  // namespace

Tensor DeployedModel::encode(const Tensor& h) {
    Tensor feat = head.forward(h, Mode::Eval);
    if (feat.rank() != 2 || feat.dim(1) != fc.cols) {
        throw std::runtime_error("deployed encode: head output does not match FC input");
    }
    const int n = feat.dim(0);
    Tensor out({n, fc.rows});
    for (int i = 0; i < n; ++i) {
        binary_gemv(fc, feat.data.data() + static_cast<size_t>(i) * fc.cols, alpha,
                    fc_bias.data(), out.data.data() + static_cast<size_t>(i) * fc.rows);
    }
    return out;
}

Tensor DeployedModel::decode(const Tensor& v) { return decoder.forward(v, Mode::Eval); }

DeployedModel deploy(const Network& net, float norm_min, float norm_max) {
    DeployedModel m;
    m.spec = net.spec;
    m.norm_min = norm_min;
    m.norm_max = norm_max;

    Graph fused_enc = net.encoder.fuse_batchnorm();
    const size_t last = fused_enc.size() - 1;
    if (fused_enc.layer(last).kind() != LayerKind::BinaryDense) {
        throw std::invalid_argument("deploy: encoder does not end in a BinaryDense layer");
    }
    auto& fc = static_cast<BinaryDenseLayerT<float>&>(fused_enc.layer(last));
    const auto bin = binarize(fc.weight());
    m.fc = pack(bin.signs, fc.out_features(), fc.in_features());
    m.alpha = bin.alpha;
    m.fc_bias = fc.bias().data;

    Graph head(fused_enc.input_shape());
    for (size_t i = 0; i < last; ++i) {
        if (fused_enc.layer(i).kind() == LayerKind::ResidualAdd) {
            head.add_residual(fused_enc.skip_from(i));
        } else {
            head.add(fused_enc.layer(i).clone());
        }
    }
    m.head = std::move(head);
    m.decoder = net.decoder.fuse_batchnorm();
    return m;
}

void export_model(const Network& net, float norm_min, float norm_max, const std::string& path) {
    DeployedModel m = deploy(net, norm_min, norm_max);
    ByteWriter w;
    w.bytes(kDeployedMagic, sizeof(kDeployedMagic));
    w.pod<uint32_t>(kFileVersion);
    write_spec(w, m.spec);
    w.pod<float>(m.norm_min);
    w.pod<float>(m.norm_max);
    write_graph(w, m.head);
    w.pod<uint32_t>(static_cast<uint32_t>(m.fc.rows));
    w.pod<uint32_t>(static_cast<uint32_t>(m.fc.cols));
    w.pod<float>(m.alpha);
    w.floats(m.fc_bias);
    w.bytes(m.fc.words.data(), m.fc.words.size() * sizeof(uint64_t));
    write_graph(w, m.decoder);
    w.write_file(path);
}

namespace {

Graph read_graph(ByteReader& r, std::vector<int> input_shape) {
    Graph g(std::move(input_shape));
    const uint32_t count = r.pod<uint32_t>();
    for (uint32_t i = 0; i < count; ++i) {
        const auto kind = static_cast<LayerKind>(r.pod<uint32_t>());
        switch (kind) {
            case LayerKind::Conv3x3: {
                const int c_in = static_cast<int>(r.pod<uint32_t>());
                const int c_out = static_cast<int>(r.pod<uint32_t>());
                auto conv = std::make_unique<Conv3x3LayerT<float>>(c_in, c_out);
                r.floats(conv->weight().data, conv->weight().data.size());
                r.floats(conv->bias().data, conv->bias().data.size());
                g.add(std::move(conv));
                break;
            }
            case LayerKind::Dense: {
                const int mm = static_cast<int>(r.pod<uint32_t>());
                const int nn = static_cast<int>(r.pod<uint32_t>());
                auto fc = std::make_unique<DenseLayerT<float>>(mm, nn);
                r.floats(fc->weight().data, fc->weight().data.size());
                r.floats(fc->bias().data, fc->bias().data.size());
                g.add(std::move(fc));
                break;
            }
            case LayerKind::LeakyReLU:
                g.add(std::make_unique<LeakyReLULayerT<float>>());
                break;
            case LayerKind::Sigmoid:
                g.add(std::make_unique<SigmoidLayerT<float>>());
                break;
            case LayerKind::Reshape: {
                const int c = static_cast<int>(r.pod<uint32_t>());
                const int h = static_cast<int>(r.pod<uint32_t>());
                const int ww = static_cast<int>(r.pod<uint32_t>());
                g.add(std::make_unique<ReshapeLayerT<float>>(c, h, ww));
                break;
            }
            case LayerKind::Flatten:
                g.add(std::make_unique<FlattenLayerT<float>>());
                break;
            case LayerKind::ResidualAdd:
                g.add_residual(r.pod<int32_t>());
                break;
            default:
                throw FormatError("unsupported layer kind in model file");
        }
    }
    return g;
}

}  // namespace

DeployedModel import_model(const std::string& path) {
    ByteReader r(path);
    char magic[8];
    r.bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kDeployedMagic, sizeof(magic)) != 0) {
        throw FormatError("bad model magic in " + path);
    }
    if (r.pod<uint32_t>() != kFileVersion) throw FormatError("unsupported model version");
    DeployedModel m;
    m.spec = read_spec(r);
    m.norm_min = r.pod<float>();
    m.norm_max = r.pod<float>();
    m.head = read_graph(r, {2, m.spec.na, m.spec.nt});
    m.fc.rows = static_cast<int>(r.pod<uint32_t>());
    m.fc.cols = static_cast<int>(r.pod<uint32_t>());
    m.alpha = r.pod<float>();
    r.floats(m.fc_bias, static_cast<size_t>(m.fc.rows));
    m.fc.words.resize(static_cast<size_t>(m.fc.rows) * m.fc.words_per_row());
    r.bytes(m.fc.words.data(), m.fc.words.size() * sizeof(uint64_t));
    m.decoder = read_graph(r, {m.spec.codeword_len()});
    if (!r.exhausted()) throw FormatError("trailing bytes in " + path);
    return m;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

std::vector<BatchNormLayerT<float>*> batchnorms(Graph& g) {
    std::vector<BatchNormLayerT<float>*> out;
    for (size_t i = 0; i < g.size(); ++i) {
        if (g.layer(i).kind() == LayerKind::BatchNorm) {
            out.push_back(&static_cast<BatchNormLayerT<float>&>(g.layer(i)));
        }
    }
    return out;
}

std::vector<TensorT<float>*> all_params(Network& net) {
    auto params = net.encoder.params();
    for (auto* p : net.decoder.params()) params.push_back(p);
    return params;
}

}  // namespace

void save_checkpoint(const std::string& path, Network& net, const Checkpoint& state) {
    ByteWriter w;
    w.bytes(kCheckpointMagic, sizeof(kCheckpointMagic));
    w.pod<uint32_t>(kFileVersion);
    write_spec(w, net.spec);
    w.pod<uint64_t>(state.build_seed);
    w.pod<float>(state.norm_min);
    w.pod<float>(state.norm_max);
    w.pod<uint32_t>(state.epoch);
    w.pod<uint32_t>(state.scheduler_index);
    w.pod<uint32_t>(state.reboots);
    w.pod<uint64_t>(state.adam_step);
    w.pod<float>(state.best_val_mse);

    const auto params = all_params(net);
    w.pod<uint32_t>(static_cast<uint32_t>(params.size()));
    for (auto* p : params) {
        w.pod<uint32_t>(static_cast<uint32_t>(p->data.size()));
        w.floats(p->data);
    }
    auto bns = batchnorms(net.encoder);
    for (auto* bn : batchnorms(net.decoder)) bns.push_back(bn);
    w.pod<uint32_t>(static_cast<uint32_t>(bns.size()));
    for (auto* bn : bns) {
        w.pod<uint32_t>(static_cast<uint32_t>(bn->channels()));
        w.floats(bn->running_mean().data);
        w.floats(bn->running_var().data);
    }
    const uint8_t has_adam = state.adam_m.size() == params.size() ? 1 : 0;
    w.pod<uint8_t>(has_adam);
    if (has_adam) {
        for (size_t i = 0; i < params.size(); ++i) {
            w.floats(state.adam_m[i]);
            w.floats(state.adam_v[i]);
        }
    }
    w.write_file(path);
}

Checkpoint load_checkpoint(const std::string& path, Network& net) {
    ByteReader r(path);
    char magic[8];
    r.bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
        throw FormatError("bad checkpoint magic in " + path);
    }
    if (r.pod<uint32_t>() != kFileVersion) throw FormatError("unsupported checkpoint version");
    Checkpoint state;
    state.spec = read_spec(r);
    state.build_seed = r.pod<uint64_t>();
    state.norm_min = r.pod<float>();
    state.norm_max = r.pod<float>();
    state.epoch = r.pod<uint32_t>();
    state.scheduler_index = r.pod<uint32_t>();
    state.reboots = r.pod<uint32_t>();
    state.adam_step = r.pod<uint64_t>();
    state.best_val_mse = r.pod<float>();

    net = build(state.spec, state.build_seed);
    const auto params = all_params(net);
    const uint32_t param_count = r.pod<uint32_t>();
    if (param_count != params.size()) throw FormatError("checkpoint parameter count mismatch");
    for (auto* p : params) {
        const uint32_t n = r.pod<uint32_t>();
        if (n != p->data.size()) throw FormatError("checkpoint parameter shape mismatch");
        r.floats(p->data, n);
    }
    auto bns = batchnorms(net.encoder);
    for (auto* bn : batchnorms(net.decoder)) bns.push_back(bn);
    const uint32_t bn_count = r.pod<uint32_t>();
    if (bn_count != bns.size()) throw FormatError("checkpoint BatchNorm count mismatch");
    for (auto* bn : bns) {
        const uint32_t c = r.pod<uint32_t>();
        if (c != static_cast<uint32_t>(bn->channels())) {
            throw FormatError("checkpoint BatchNorm shape mismatch");
        }
        r.floats(bn->running_mean().data, c);
        r.floats(bn->running_var().data, c);
    }
    if (r.pod<uint8_t>()) {
        state.adam_m.resize(params.size());
        state.adam_v.resize(params.size());
        for (size_t i = 0; i < params.size(); ++i) {
            r.floats(state.adam_m[i], params[i]->data.size());
            r.floats(state.adam_v[i], params[i]->data.size());
        }
    }
    if (!r.exhausted()) throw FormatError("trailing bytes in " + path);
    return state;
}

// ---------------------------------------------------------------------------
// Benchmark
// ---------------------------------------------------------------------------

BenchReport bench(const DeployedModel& model, int iterations, int runs) {
    const int rows = model.fc.rows, cols = model.fc.cols;
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    std::vector<float> x(static_cast<size_t>(cols));
    for (auto& v : x) v = dist(rng);
    std::vector<float> y(static_cast<size_t>(rows));

    const auto signs = unpack(model.fc);
    std::vector<float> wb(signs.size());
    for (size_t i = 0; i < signs.size(); ++i) wb[i] = model.alpha * static_cast<float>(signs[i]);

    auto time_loop = [&](auto&& fn) {
        using clock = std::chrono::steady_clock;
        std::vector<double> per_iter(static_cast<size_t>(iterations));
        for (int i = 0; i < iterations; ++i) {
            const auto t0 = clock::now();
            fn();
            const auto t1 = clock::now();
            per_iter[static_cast<size_t>(i)] =
                std::chrono::duration<double, std::nano>(t1 - t0).count();
        }
        std::nth_element(per_iter.begin(), per_iter.begin() + iterations / 2, per_iter.end());
        return per_iter[static_cast<size_t>(iterations) / 2];
    };

    std::vector<double> bin_medians, dense_medians;
    // warm up
    binary_gemv(model.fc, x.data(), model.alpha, model.fc_bias.data(), y.data());
    dense_gemv(wb.data(), rows, cols, x.data(), model.fc_bias.data(), y.data());
    for (int run = 0; run < runs; ++run) {
        bin_medians.push_back(time_loop([&] {
            binary_gemv(model.fc, x.data(), model.alpha, model.fc_bias.data(), y.data());
        }));
        dense_medians.push_back(time_loop([&] {
            dense_gemv(wb.data(), rows, cols, x.data(), model.fc_bias.data(), y.data());
        }));
    }
    auto median_of = [](std::vector<double> v) {
        std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
        return v[v.size() / 2];
    };
    BenchReport rep;
    rep.binary_ns = median_of(bin_medians);
    rep.dense_ns = median_of(dense_medians);
    rep.speedup = rep.dense_ns / rep.binary_ns;
    double spread = 0;
    for (double v : bin_medians) {
        spread = std::max(spread, std::abs(v - rep.binary_ns) / rep.binary_ns);
    }
    rep.run_spread = spread;
    rep.binary_muls = rows;
    rep.dense_muls = static_cast<long long>(rows) * cols;
    return rep;
}

}  // namespace bcsinet
