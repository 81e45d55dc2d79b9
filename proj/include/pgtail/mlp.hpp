#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgtail/rng.hpp"

namespace pgtail {

// Feed-forward net: tanh on every hidden layer, linear output.
struct MlpSpec {
    int input_dim = 0;
    std::vector<int> hidden;
    int output_dim = 0;

    std::vector<int> dims() const {
        if (input_dim <= 0 || output_dim <= 0)
            throw std::invalid_argument("MlpSpec: dims must be positive");
        std::vector<int> d;
        d.push_back(input_dim);
        for (int h : hidden) {
            if (h <= 0) throw std::invalid_argument("MlpSpec: hidden dims must be positive");
            d.push_back(h);
        }
        d.push_back(output_dim);
        return d;
    }

    int n_layers() const { return static_cast<int>(hidden.size()) + 1; }

    std::size_t param_count() const {
        auto d = dims();
        std::size_t n = 0;
        for (std::size_t l = 0; l + 1 < d.size(); ++l)
            n += static_cast<std::size_t>(d[l + 1]) * (static_cast<std::size_t>(d[l]) + 1);
        return n;
    }
};

// One named block of a flat parameter array. cols == 1 marks a bias vector.
struct LayerDesc {
    std::string name;
    int rows = 0;
    int cols = 0;
    std::size_t offset = 0;

    std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

struct ParamVector {
    std::vector<double> values;
    std::vector<LayerDesc> layout;

    std::size_t size() const { return values.size(); }

    void check() const {
        std::size_t n = 0;
        for (const auto& d : layout) n += d.size();
        if (n != values.size()) throw std::invalid_argument("ParamVector: layout/value size mismatch");
        for (double v : values)
            if (!std::isfinite(v)) throw std::invalid_argument("ParamVector: non-finite value");
    }
};

// Scaled-uniform init, bound sqrt(6/(fan_in+fan_out)) per weight matrix, zero
// biases. The scheme name is echoed into run configs for reproducibility.
inline constexpr const char* kInitScheme = "uniform_fan_sum";

inline ParamVector init_params(const MlpSpec& spec, Rng& rng, const std::string& prefix) {
    auto d = spec.dims();
    ParamVector p;
    p.values.reserve(spec.param_count());
    for (std::size_t l = 0; l + 1 < d.size(); ++l) {
        int in = d[l], out = d[l + 1];
        double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        LayerDesc w{prefix + ".w" + std::to_string(l), out, in, p.values.size()};
        for (std::size_t i = 0; i < w.size(); ++i) p.values.push_back(rng.uniform(-bound, bound));
        p.layout.push_back(w);
        LayerDesc b{prefix + ".b" + std::to_string(l), out, 1, p.values.size()};
        for (int i = 0; i < out; ++i) p.values.push_back(0.0);
        p.layout.push_back(b);
    }
    return p;
}

// Reusable forward/backward buffers: act[l] holds the input of layer l (so
// act[0] is the net input and hidden entries are post-tanh), dact mirrors act
// as backward scratch. Sized once; no allocation on the hot path.
struct MlpWorkspace {
    std::vector<std::vector<double>> act;
    std::vector<std::vector<double>> dact;
    std::vector<std::size_t> offs;
    std::vector<int> dims;

    void resize(const MlpSpec& spec) {
        dims = spec.dims();
        act.resize(dims.size());
        dact.resize(dims.size());
        for (std::size_t l = 0; l < dims.size(); ++l) {
            act[l].assign(static_cast<std::size_t>(dims[l]), 0.0);
            dact[l].assign(static_cast<std::size_t>(dims[l]), 0.0);
        }
        offs.resize(dims.size() - 1);
        std::size_t off = 0;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            offs[l] = off;
            off += static_cast<std::size_t>(dims[l + 1]) * (static_cast<std::size_t>(dims[l]) + 1);
        }
    }

    bool matches(const MlpSpec& spec) const {
        return !dims.empty() && dims.front() == spec.input_dim && dims.back() == spec.output_dim &&
               dims.size() == spec.hidden.size() + 2;
    }
};

// params points at the start of this net's block inside a flat array.
inline void mlp_forward(const MlpSpec& spec, const double* params, const double* x,
                        MlpWorkspace& ws) {
    if (!ws.matches(spec)) ws.resize(spec);
    const auto& d = ws.dims;
    std::copy(x, x + d[0], ws.act[0].begin());
    int last = spec.n_layers() - 1;
    for (int l = 0; l <= last; ++l) {
        int in = d[static_cast<std::size_t>(l)];
        int out = d[static_cast<std::size_t>(l) + 1];
        const double* w = params + ws.offs[static_cast<std::size_t>(l)];
        const double* b = w + static_cast<std::size_t>(out) * static_cast<std::size_t>(in);
        const double* a = ws.act[static_cast<std::size_t>(l)].data();
        double* y = ws.act[static_cast<std::size_t>(l) + 1].data();
        for (int r = 0; r < out; ++r) {
            const double* wr = w + static_cast<std::size_t>(r) * static_cast<std::size_t>(in);
            double s = b[r];
            for (int c = 0; c < in; ++c) s += wr[c] * a[c];
            y[r] = (l == last) ? s : std::tanh(s);
        }
    }
}

inline std::vector<double> mlp_forward(const MlpSpec& spec, const ParamVector& p,
                                       const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != spec.input_dim)
        throw std::invalid_argument("mlp_forward: input dimension mismatch");
    MlpWorkspace ws;
    mlp_forward(spec, p.values.data(), x.data(), ws);
    return ws.act.back();
}

// Accumulates (+=) the gradient of a scalar loss into grad, given dL/doutput.
// ws must hold the activations of the matching forward call. If dx is non-null
// the gradient with respect to the net input is written there (overwritten).
inline void mlp_backward(const MlpSpec& spec, const double* params, MlpWorkspace& ws,
                         const double* dout, double* grad, double* dx = nullptr) {
    const auto& d = ws.dims;
    int last = spec.n_layers() - 1;
    std::copy(dout, dout + d[static_cast<std::size_t>(last) + 1],
              ws.dact[static_cast<std::size_t>(last) + 1].begin());
    for (int l = last; l >= 0; --l) {
        int in = d[static_cast<std::size_t>(l)];
        int out = d[static_cast<std::size_t>(l) + 1];
        const double* a = ws.act[static_cast<std::size_t>(l)].data();
        const double* delta = ws.dact[static_cast<std::size_t>(l) + 1].data();
        const double* w = params + ws.offs[static_cast<std::size_t>(l)];
        double* gw = grad + ws.offs[static_cast<std::size_t>(l)];
        double* gb = gw + static_cast<std::size_t>(out) * static_cast<std::size_t>(in);
        for (int r = 0; r < out; ++r) {
            double dr = delta[r];
            double* gwr = gw + static_cast<std::size_t>(r) * static_cast<std::size_t>(in);
            for (int c = 0; c < in; ++c) gwr[c] += dr * a[c];
            gb[r] += dr;
        }
        if (l == 0 && dx == nullptr) break;
        double* prev = ws.dact[static_cast<std::size_t>(l)].data();
        std::fill(prev, prev + in, 0.0);
        for (int r = 0; r < out; ++r) {
            double dr = delta[r];
            const double* wr = w + static_cast<std::size_t>(r) * static_cast<std::size_t>(in);
            for (int c = 0; c < in; ++c) prev[c] += dr * wr[c];
        }
        if (l == 0) {
            std::copy(prev, prev + in, dx);
            break;
        }
        // act[l] is a tanh output for l >= 1: d tanh(z) = 1 - tanh(z)^2.
        for (int c = 0; c < in; ++c) prev[c] *= 1.0 - a[c] * a[c];
    }
}

}  // namespace pgtail
