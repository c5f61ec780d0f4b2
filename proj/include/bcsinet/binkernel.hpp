#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcsinet/models.hpp"

namespace bcsinet {

// Row-major 1-bit weight storage: one 64-bit word block per ceil(cols/64)
// columns, LSB-first within each word, bit = 1 <=> weight +1. Padding bits
// are zero.
struct PackedBinaryMatrix {
    int rows = 0, cols = 0;
    std::vector<uint64_t> words;

    int words_per_row() const { return (cols + 63) / 64; }
    long long storage_bytes() const { return static_cast<long long>(words.size()) * 8; }
    uint64_t word(int row, int w) const {
        return words[static_cast<size_t>(row) * words_per_row() + w];
    }
};

PackedBinaryMatrix pack(const std::vector<int8_t>& signs, int rows, int cols);
std::vector<int8_t> unpack(const PackedBinaryMatrix& p);

// y = alpha * (B x) + bias, with B applied through additions/subtractions of
// x entries only; alpha is applied once per output.
void binary_gemv(const PackedBinaryMatrix& p, const float* x, float alpha, const float* bias,
                 float* y);
// Same semantics through an instrumented scalar path; returns the number of
// float multiplications performed (the alpha scalings, i.e. rows).
uint64_t binary_gemv_counted(const PackedBinaryMatrix& p, const float* x, float alpha,
                             const float* bias, float* y);

// Dense float reference y = W x + b for oracle comparisons and benchmarking.
void dense_gemv(const float* w, int rows, int cols, const float* x, const float* bias, float* y);

// Inference-only model: BN-fused float head and decoder, 1-bit FC.
struct DeployedModel {
    ModelSpec spec;
    float norm_min = 0.0f;
    float norm_max = 1.0f;
    Graph head;     // encoder up to and including Flatten, BN folded
    PackedBinaryMatrix fc;
    float alpha = 0.0f;
    std::vector<float> fc_bias;
    Graph decoder;  // BN folded

    // (N, 2, na, nt) -> (N, M)
    Tensor encode(const Tensor& h);
    // (N, M) -> (N, 2, na, nt)
    Tensor decode(const Tensor& v);

    long long fc_storage_bytes() const { return fc.storage_bytes() + 4 + 4LL * fc.rows; }
};

DeployedModel deploy(const Network& net, float norm_min, float norm_max);
void export_model(const Network& net, float norm_min, float norm_max, const std::string& path);
DeployedModel import_model(const std::string& path);

// Full training state for resumable runs.
struct Checkpoint {
    ModelSpec spec;
    uint64_t build_seed = 0;
    float norm_min = 0.0f;
    float norm_max = 1.0f;
    uint32_t epoch = 0;           // epochs completed
    uint32_t scheduler_index = 0;
    uint32_t reboots = 0;
    uint64_t adam_step = 0;
    float best_val_mse = 0.0f;
    std::vector<std::vector<float>> adam_m, adam_v;  // one entry per parameter tensor
};

void save_checkpoint(const std::string& path, Network& net, const Checkpoint& state);
// Rebuilds the network from the stored spec and overwrites its parameters.
Checkpoint load_checkpoint(const std::string& path, Network& net);

struct BenchReport {
    double binary_ns = 0;           // median ns per binary_gemv
    double dense_ns = 0;            // median ns per dense float gemv
    double speedup = 0;             // dense_ns / binary_ns
    double run_spread = 0;          // max relative deviation of per-run medians
    long long binary_muls = 0;      // multiplications per inference
    long long dense_muls = 0;
};

BenchReport bench(const DeployedModel& model, int iterations, int runs = 5);

uint32_t crc32(const uint8_t* data, size_t len, uint32_t seed = 0);

}  // namespace bcsinet
