#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bcsinet/binarize.hpp"
#include "bcsinet/binkernel.hpp"
#include "bcsinet/channel_data.hpp"
#include "bcsinet/complexity.hpp"
#include "bcsinet/models.hpp"
#include "bcsinet/trainer.hpp"

namespace py = pybind11;
using namespace bcsinet;

namespace {

Tensor tensor_from(const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
    std::vector<int> shape(a.ndim());
    for (py::ssize_t i = 0; i < a.ndim(); ++i) shape[static_cast<size_t>(i)] =
        static_cast<int>(a.shape(i));
    Tensor t(shape);
    std::copy_n(a.data(), t.data.size(), t.data.data());
    return t;
}

py::array_t<float> array_from(const Tensor& t) {
    std::vector<py::ssize_t> shape(t.shape.begin(), t.shape.end());
    py::array_t<float> a(shape);
    std::copy(t.data.begin(), t.data.end(), a.mutable_data());
    return a;
}

}  // namespace

PYBIND11_MODULE(_bcsinet, m) {
    m.doc() = "binary-weight CSI feedback autoencoder core";

    m.def("binarize",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& w) {
              const auto r = binarize(w.data(), static_cast<size_t>(w.size()));
              py::array_t<int8_t> signs(std::vector<py::ssize_t>(w.shape(), w.shape() + w.ndim()));
              std::copy(r.signs.begin(), r.signs.end(), signs.mutable_data());
              return py::make_tuple(signs, r.alpha);
          },
          "sign matrix and the L1-mean scale of a weight array");

    m.def("binary_gemv",
          [](const py::array_t<int8_t, py::array::c_style | py::array::forcecast>& signs,
             const py::array_t<float, py::array::c_style | py::array::forcecast>& x, float alpha,
             const py::array_t<float, py::array::c_style | py::array::forcecast>& bias) {
              if (signs.ndim() != 2) throw std::invalid_argument("signs must be 2-D");
              const int rows = static_cast<int>(signs.shape(0));
              const int cols = static_cast<int>(signs.shape(1));
              if (x.size() != cols || bias.size() != rows) {
                  throw std::invalid_argument("binary_gemv: size mismatch");
              }
              std::vector<int8_t> s(signs.data(), signs.data() + signs.size());
              const PackedBinaryMatrix p = pack(s, rows, cols);
              py::array_t<float> y(rows);
              binary_gemv(p, x.data(), alpha, bias.data(), y.mutable_data());
              return y;
          },
          "y = alpha * (B x) + bias through the packed multiply-free kernel");

    m.def("lr_at", [](int index, int epochs, int warmup, double lr_start, double lr_end) {
        TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.warmup_epochs = warmup;
        cfg.lr_start = lr_start;
        cfg.lr_end = lr_end;
        return lr_at(index, cfg);
    });

    m.def("nmse", [](const py::array_t<float, py::array::c_style | py::array::forcecast>& pred,
                     const py::array_t<float, py::array::c_style | py::array::forcecast>& target) {
        const NmseResult r = nmse(tensor_from(pred), tensor_from(target));
        return py::make_tuple(r.linear, r.db);
    });

    m.def("complexity_table", [](const std::string& mode) { return complexity::table(mode); });
    m.def("memory_multiple", [](const std::string& head, double eta) {
        return complexity::memory_multiple(head_from_string(head), eta);
    });

    m.def("generate_samples", [](int count, uint64_t seed) {
        return array_from(generate_raw(count, seed, GenProfile{}));
    });

    py::class_<Network>(m, "Network")
        .def_property_readonly("name", [](const Network& n) { return n.spec.name(); })
        .def_property_readonly("codeword_len",
                               [](const Network& n) { return n.spec.codeword_len(); })
        .def("encode",
             [](Network& n, const py::array_t<float, py::array::c_style |
                                                          py::array::forcecast>& x) {
                 return array_from(encode(n, tensor_from(x)));
             })
        .def("decode", [](Network& n, const py::array_t<float, py::array::c_style |
                                                                   py::array::forcecast>& v) {
            return array_from(decode(n, tensor_from(v)));
        });

    m.def("build_network",
          [](const std::string& family, const std::string& head, int refinenets, double eta,
             uint64_t seed) {
              ModelSpec spec;
              spec.family = family_from_string(family);
              spec.head = head_from_string(head);
              spec.refinenets = refinenets;
              spec.eta = eta;
              spec.validate();
              return build(spec, seed);
          },
          py::arg("family") = "bcsinet", py::arg("head") = "A", py::arg("refinenets") = 2,
          py::arg("eta") = 0.25, py::arg("seed") = 1);
}
