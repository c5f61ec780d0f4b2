#include "bcsinet/channel_data.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <thread>

namespace bcsinet {

namespace {

constexpr char kMagic[8] = {'B', 'C', 'S', 'I', 'D', 'A', 'T', 'A'};
constexpr uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "dataset files are little-endian; big-endian hosts unsupported");

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place radix-2 FFT, unitary scaling applied by the caller.
void fft_pow2(cdouble* x, int n, bool inverse) {
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / len;
        const cdouble wlen(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            cdouble w(1.0, 0.0);
            for (int k = 0; k < len / 2; ++k) {
                const cdouble u = x[i + k];
                const cdouble v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

void dft_direct(const cdouble* in, cdouble* out, int n, bool inverse) {
    const double sgn = inverse ? 1.0 : -1.0;
    for (int k = 0; k < n; ++k) {
        cdouble acc(0.0, 0.0);
        for (int i = 0; i < n; ++i) {
            const double ang = sgn * 2.0 * std::numbers::pi * k * i / n;
            acc += in[i] * cdouble(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
}

enum class Path { Fft, Direct };

// Applies the unitary 1-D transform along columns (forward) and rows
// (inverse direction flag per axis chosen by the caller).
ComplexMatrix transform(const ComplexMatrix& in, bool inverse_cols, bool inverse_rows,
                        Path path) {
    const int R = in.rows, C = in.cols;
    ComplexMatrix out = in;
    std::vector<cdouble> buf(std::max(R, C));
    // columns
    for (int c = 0; c < C; ++c) {
        for (int r = 0; r < R; ++r) buf[r] = out.at(r, c);
        if (path == Path::Fft) {
            fft_pow2(buf.data(), R, inverse_cols);
        } else {
            std::vector<cdouble> tmp(buf.begin(), buf.begin() + R);
            dft_direct(tmp.data(), buf.data(), R, inverse_cols);
        }
        const double scale = 1.0 / std::sqrt(static_cast<double>(R));
        for (int r = 0; r < R; ++r) out.at(r, c) = buf[r] * scale;
    }
    // rows
    for (int r = 0; r < R; ++r) {
        cdouble* row = out.data.data() + static_cast<size_t>(r) * C;
        if (path == Path::Fft) {
            fft_pow2(row, C, inverse_rows);
        } else {
            std::vector<cdouble> tmp(row, row + C);
            dft_direct(tmp.data(), row, C, inverse_rows);
        }
        const double scale = 1.0 / std::sqrt(static_cast<double>(C));
        for (int c = 0; c < C; ++c) row[c] *= scale;
    }
    return out;
}

Path pick_path(const ComplexMatrix& m) {
    return (is_pow2(m.rows) && is_pow2(m.cols)) ? Path::Fft : Path::Direct;
}

}  // namespace

// H = F_c H~ F_t^H: forward DFT along subcarriers, inverse (conjugate) DFT
// along antennas, both unitary.
ComplexMatrix to_angular_delay(const ComplexMatrix& h_tilde) {
    return transform(h_tilde, false, true, pick_path(h_tilde));
}

ComplexMatrix to_angular_delay_direct(const ComplexMatrix& h_tilde) {
    return transform(h_tilde, false, true, Path::Direct);
}

ComplexMatrix from_angular_delay(const ComplexMatrix& h) {
    return transform(h, true, false, pick_path(h));
}

Tensor truncate(const ComplexMatrix& h, int na) {
    if (na <= 0 || na > h.rows) throw std::invalid_argument("truncate: na out of range");
    Tensor out({2, na, h.cols});
    for (int r = 0; r < na; ++r) {
        for (int c = 0; c < h.cols; ++c) {
            out.data[static_cast<size_t>(r) * h.cols + c] =
                static_cast<float>(h.at(r, c).real());
            out.data[static_cast<size_t>(na) * h.cols + static_cast<size_t>(r) * h.cols + c] =
                static_cast<float>(h.at(r, c).imag());
        }
    }
    return out;
}

ComplexMatrix reconstruct_full(const Tensor& sample, int nc) {
    if (sample.rank() != 3 || sample.dim(0) != 2) {
        throw std::invalid_argument("reconstruct_full: expected (2, na, nt) sample");
    }
    const int na = sample.dim(1), nt = sample.dim(2);
    if (na > nc) throw std::invalid_argument("reconstruct_full: na exceeds nc");
    ComplexMatrix h(nc, nt);
    const size_t imag_off = static_cast<size_t>(na) * nt;
    for (int r = 0; r < na; ++r) {
        for (int c = 0; c < nt; ++c) {
            const size_t i = static_cast<size_t>(r) * nt + c;
            h.at(r, c) = cdouble(sample.data[i], sample.data[imag_off + i]);
        }
    }
    return from_angular_delay(h);
}

Tensor Dataset::denormalize(const Tensor& t) const {
    Tensor out(t.shape);
    const float span = norm_max - norm_min;
    for (size_t i = 0; i < t.data.size(); ++i) out[i] = norm_min + t[i] * span;
    return out;
}

namespace {

// One multipath channel: L paths, each a delay phase ramp across subcarriers
// times an antenna steering ramp, power decaying exponentially in delay.
void generate_one(uint64_t seed, int index, const GenProfile& p, float* out) {
    std::seed_seq sseq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                       static_cast<uint32_t>(index)};
    std::mt19937_64 rng(sseq);
    std::uniform_int_distribution<int> path_count(p.min_paths, p.max_paths);
    std::exponential_distribution<double> delay_dist(1.0 / p.delay_mean);
    std::uniform_real_distribution<double> jitter(-p.delay_jitter, p.delay_jitter);
    std::uniform_real_distribution<double> angle(-std::numbers::pi / 2, std::numbers::pi / 2);
    std::normal_distribution<double> gauss(0.0, 1.0);

    ComplexMatrix h_tilde(p.nc, p.nt);
    const int L = path_count(rng);
    std::vector<cdouble> steer(static_cast<size_t>(p.nt));
    for (int l = 0; l < L; ++l) {
        const double tap = std::round(std::min(delay_dist(rng), p.delay_max));
        const double tau = std::max(0.0, tap + jitter(rng));
        const double gain = std::exp(-tau / (2.0 * p.power_decay));
        const cdouble amp = gain * cdouble(gauss(rng), gauss(rng)) / std::sqrt(2.0);
        const double sin_theta = std::sin(angle(rng));
        const cdouble steer_step(std::cos(std::numbers::pi * sin_theta),
                                 std::sin(std::numbers::pi * sin_theta));
        cdouble s(1.0, 0.0);
        for (int t = 0; t < p.nt; ++t) {
            steer[static_cast<size_t>(t)] = amp * s;
            s *= steer_step;
        }
        // positive ramp so the forward DFT along subcarriers places the path
        // at delay bin tau, inside the truncated window
        const double ang = 2.0 * std::numbers::pi * tau / p.nc;
        const cdouble delay_step(std::cos(ang), std::sin(ang));
        cdouble d(1.0, 0.0);
        for (int i = 0; i < p.nc; ++i) {
            cdouble* row = h_tilde.data.data() + static_cast<size_t>(i) * p.nt;
            for (int t = 0; t < p.nt; ++t) row[t] += d * steer[static_cast<size_t>(t)];
            d *= delay_step;
        }
    }

    const ComplexMatrix h = to_angular_delay(h_tilde);
    const Tensor t = truncate(h, p.na);
    std::memcpy(out, t.data.data(), t.data.size() * sizeof(float));
}

}  // namespace

Tensor generate_raw(int count, uint64_t seed, const GenProfile& profile, int threads) {
    if (count <= 0) throw std::invalid_argument("generate: count must be positive");
    Tensor out({count, 2, profile.na, profile.nt});
    const size_t stride = static_cast<size_t>(2) * profile.na * profile.nt;
    threads = std::max(1, threads);
    if (threads == 1) {
        for (int i = 0; i < count; ++i) {
            generate_one(seed, i, profile, out.data.data() + i * stride);
        }
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                    generate_one(seed, i, profile, out.data.data() + i * stride);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    return out;
}

namespace {

Dataset make_normalized(Tensor raw, float norm_min, float norm_max, uint64_t seed,
                        const GenProfile& p) {
    Dataset ds;
    ds.na = static_cast<uint32_t>(p.na);
    ds.nt = static_cast<uint32_t>(p.nt);
    ds.norm_min = norm_min;
    ds.norm_max = norm_max;
    ds.seed = seed;
    const float span = norm_max - norm_min;
    for (auto& v : raw.data) v = (v - norm_min) / span;
    ds.samples = std::move(raw);
    return ds;
}

}  // namespace

SplitDatasets generate_splits(int train_count, int val_count, int test_count, uint64_t seed,
                              const GenProfile& profile, int threads) {
    // Sample indices are global across splits so each split is an independent
    // slice of the same stream.
    Tensor train = generate_raw(train_count, seed, profile, threads);
    Tensor val(std::vector<int>{val_count, 2, profile.na, profile.nt});
    Tensor test(std::vector<int>{test_count, 2, profile.na, profile.nt});
    {
        Tensor rest = generate_raw(val_count + test_count, seed + 1, profile, threads);
        const size_t stride = static_cast<size_t>(2) * profile.na * profile.nt;
        std::copy_n(rest.data.data(), val_count * stride, val.data.data());
        std::copy_n(rest.data.data() + val_count * stride, test_count * stride,
                    test.data.data());
    }
    // Dataset-level min-max bounds from the training split only.
    float lo = train.data[0], hi = train.data[0];
    for (float v : train.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    SplitDatasets out;
    out.train = make_normalized(std::move(train), lo, hi, seed, profile);
    out.val = make_normalized(std::move(val), lo, hi, seed, profile);
    out.test = make_normalized(std::move(test), lo, hi, seed, profile);
    return out;
}

namespace {

template <typename T>
void write_pod(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw FormatError("dataset file truncated");
}

}  // namespace

void save(const Dataset& ds, const std::string& path) {
    if (ds.count() <= 0) throw std::invalid_argument("save: dataset header requires count > 0");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    os.write(kMagic, sizeof(kMagic));
    write_pod(os, kVersion);
    const uint32_t count = static_cast<uint32_t>(ds.count());
    write_pod(os, count);
    write_pod(os, ds.na);
    write_pod(os, ds.nt);
    write_pod(os, ds.norm_min);
    write_pod(os, ds.norm_max);
    write_pod(os, ds.seed);
    os.write(reinterpret_cast<const char*>(ds.samples.data.data()),
             static_cast<std::streamsize>(ds.samples.data.size() * sizeof(float)));
    if (!os) throw FormatError("write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw FormatError("bad dataset magic in " + path);
    }
    uint32_t version = 0, count = 0;
    Dataset ds;
    read_pod(is, version);
    if (version != kVersion) throw FormatError("unsupported dataset version");
    read_pod(is, count);
    read_pod(is, ds.na);
    read_pod(is, ds.nt);
    read_pod(is, ds.norm_min);
    read_pod(is, ds.norm_max);
    read_pod(is, ds.seed);
    if (count == 0 || ds.na == 0 || ds.nt == 0) throw FormatError("bad dataset header");
    const size_t expect = static_cast<size_t>(count) * 2 * ds.na * ds.nt;
    // check the payload size against the file before trusting the header count
    const std::streamoff header_end = is.tellg();
    is.seekg(0, std::ios::end);
    const std::streamoff avail = is.tellg() - header_end;
    is.seekg(header_end);
    if (avail != static_cast<std::streamoff>(expect * sizeof(float))) {
        throw FormatError(avail < static_cast<std::streamoff>(expect * sizeof(float))
                              ? "dataset payload shorter than header count"
                              : "dataset payload longer than header count");
    }
    std::vector<float> payload(expect);
    is.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(expect * sizeof(float)));
    if (!is || is.gcount() != static_cast<std::streamsize>(expect * sizeof(float))) {
        throw FormatError("dataset payload shorter than header count");
    }
    if (is.peek() != std::ifstream::traits_type::eof()) {
        throw FormatError("dataset payload longer than header count");
    }
    ds.samples = Tensor({static_cast<int>(count), 2, static_cast<int>(ds.na),
                         static_cast<int>(ds.nt)},
                        std::move(payload));
    return ds;
}

}  // namespace bcsinet
