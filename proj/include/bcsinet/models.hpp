#pragma once

#include <cstdint>
#include <string>

#include "bcsinet/graph.hpp"

namespace bcsinet {

enum class Family { CsiNet, BCsiNet };
enum class Head { A, B, C };

Family family_from_string(const std::string& s);
Head head_from_string(const std::string& s);
std::string to_string(Family f);
std::string to_string(Head h);

// Declarative architecture: family x head x RefineNet count x compression
// ratio eta. The CsiNet family always uses head A with a float FC encoder.
struct ModelSpec {
    Family family = Family::BCsiNet;
    Head head = Head::A;
    int refinenets = 2;
    double eta = 0.25;
    int na = 32;
    int nt = 32;

    int input_features() const { return 2 * na * nt; }
    // Codeword length M = round(2 * na * nt * eta).
    int codeword_len() const;
    void validate() const;
    // Display label, e.g. "BCsiNet-B3" or "CsiNet".
    std::string name() const;
};

struct Network {
    ModelSpec spec;
    Graph encoder;
    Graph decoder;
};

// Instantiates the encoder/decoder graphs with Xavier-uniform initialization.
Network build(const ModelSpec& spec, uint64_t seed);

// Eval-mode batch inference. encode takes (N, 2, na, nt) in [0,1] and returns
// (N, M); decode takes (N, M) and returns (N, 2, na, nt) in (0,1).
Tensor encode(Network& net, const Tensor& h);
Tensor decode(Network& net, const Tensor& v);

}  // namespace bcsinet
