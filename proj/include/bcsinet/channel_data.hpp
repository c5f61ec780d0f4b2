#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcsinet/tensor.hpp"

namespace bcsinet {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using cdouble = std::complex<double>;

// Column-major-free dense complex matrix, row-major like Tensor.
struct ComplexMatrix {
    int rows = 0, cols = 0;
    std::vector<cdouble> data;

    ComplexMatrix() = default;
    ComplexMatrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c) {}

    cdouble& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    const cdouble& at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

// Spatial-frequency -> angular-delay transform H = F_c * H~ * F_t^H with
// unitary DFT matrices. Uses the FFT when both dims are powers of two, the
// direct O(N^2) DFT otherwise.
ComplexMatrix to_angular_delay(const ComplexMatrix& h_tilde);
ComplexMatrix from_angular_delay(const ComplexMatrix& h);
// Direct-DFT evaluation, kept as an independent path for cross-checking.
ComplexMatrix to_angular_delay_direct(const ComplexMatrix& h_tilde);

// First na rows of H, real/imag split into two channels: (2, na, nt), raw scale.
Tensor truncate(const ComplexMatrix& h, int na);
// Zero-fill rows na..nc-1 and invert the transform; input is a raw (2, na, nt)
// sample (de-normalize first if it came from a dataset).
ComplexMatrix reconstruct_full(const Tensor& sample, int nc);

struct GenProfile {
    int nc = 1024;
    int nt = 32;
    int na = 32;
    int min_paths = 3;
    int max_paths = 10;
    // Mean of the exponential delay-tap distribution and its clamp; chosen so
    // the truncated window keeps >= 95% of the energy on average.
    double delay_mean = 4.0;
    double delay_max = 24.0;
    double delay_jitter = 0.15;
    double power_decay = 8.0;
};

struct Dataset {
    uint32_t na = 32;
    uint32_t nt = 32;
    float norm_min = 0.0f;
    float norm_max = 1.0f;
    uint64_t seed = 0;
    Tensor samples;  // (N, 2, na, nt), min-max normalized to [0, 1]

    int count() const { return samples.data.empty() ? 0 : samples.dim(0); }
    // Map a normalized tensor back to physical scale.
    Tensor denormalize(const Tensor& t) const;
};

struct SplitDatasets {
    Dataset train, val, test;
};

// Synthesizes `count` multipath channels (raw scale, un-normalized), one
// independent RNG stream per sample so the result is identical at any thread
// count. Returned tensor is (count, 2, na, nt).
Tensor generate_raw(int count, uint64_t seed, const GenProfile& profile, int threads = 1);

// Generates train/val/test with normalization bounds taken from the training
// split and applied to all three.
SplitDatasets generate_splits(int train_count, int val_count, int test_count, uint64_t seed,
                              const GenProfile& profile, int threads = 1);

void save(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace bcsinet
