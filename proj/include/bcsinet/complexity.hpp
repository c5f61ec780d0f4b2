#pragma once

#include <string>
#include <vector>

#include "bcsinet/graph.hpp"
#include "bcsinet/models.hpp"

namespace bcsinet::complexity {

// Static per-layer shape, resolvable either from a built graph or straight
// from a ModelSpec without instantiating any tensors.
struct LayerDesc {
    LayerKind kind;
    int c_in = 0, c_out = 0, h = 0, w = 0;  // Conv3x3 / BatchNorm (c_out = channels)
    int m = 0, n = 0;                       // Dense / BinaryDense
};

struct LayerCost {
    std::string name;
    LayerKind kind;
    long long flops = 0;  // "multiply then add" count
    long long muls = 0;   // total multiplications
    double params = 0;    // trainable params, binary weights as 1/32 float-equivalent
    long long bytes = 0;  // storage bytes (4 per float, 1 per 8 binary weights)
};

struct ComplexityReport {
    std::vector<LayerCost> rows;

    long long total_flops() const;
    long long total_muls() const;
    double total_params() const;
    long long total_bytes() const;
    // Share of the FC layers (Dense + BinaryDense) in the totals, in percent.
    double fc_flops_share() const;
    double fc_params_share() const;
};

ComplexityReport count(const std::vector<LayerDesc>& descriptors);
ComplexityReport count(const Graph& graph);

std::vector<LayerDesc> encoder_descriptors(const ModelSpec& spec);
std::vector<LayerDesc> decoder_descriptors(const ModelSpec& spec);

// baseline bytes / binary bytes; both reports must be encoder-scoped.
double memory_multiple(const ComplexityReport& baseline, const ComplexityReport& binary);
double memory_multiple(Head head, double eta);

// Rounding conventions used in all table output.
std::string format_kilo(double v);      // round(v / 1000) + "K"
std::string format_mega(long long v);   // 2-decimal v / 1e6 + "M"

// mode: "tab1", "tab2", "tab4" or "fig4".
std::string table(const std::string& mode);
std::string table_csv(const std::string& mode);

}  // namespace bcsinet::complexity
