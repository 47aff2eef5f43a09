#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpadapter/rng.hpp"
#include "dpadapter/tape.hpp"
#include "dpadapter/tensor.hpp"

namespace dpadapter {

// Feed-forward classifier parameters: affine layers with ReLU between them
// and a softmax head applied by the loss. Flat-vector view backs every
// parameter-space operation (perturbation, clipping, noising).
struct ModelParams {
    struct Layer {
        Tensor W;  // [in, out]
        Tensor b;  // [1, out]
    };
    std::vector<Layer> layers;

    ModelParams() = default;

    // dims = {input, hidden..., classes}
    static ModelParams make(const std::vector<std::size_t>& dims) {
        if (dims.size() < 2) throw std::invalid_argument("ModelParams: need >= 2 dims");
        ModelParams m;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l)
            m.layers.push_back({Tensor({dims[l], dims[l + 1]}), Tensor({1, dims[l + 1]})});
        return m;
    }

    // He-style init, deterministic per seed
    static ModelParams init_random(const std::vector<std::size_t>& dims, std::uint64_t seed) {
        ModelParams m = make(dims);
        Rng rng(derive_seed(seed, 0xC0DE));
        for (auto& layer : m.layers) {
            double std = std::sqrt(2.0 / static_cast<double>(layer.W.rows()));
            for (double& w : layer.W.data) w = normal(rng, 0.0, std);
        }
        return m;
    }

    std::size_t dim() const {
        std::size_t d = 0;
        for (const auto& l : layers) d += l.W.size() + l.b.size();
        return d;
    }

    std::size_t input_dim() const { return layers.front().W.rows(); }
    std::size_t num_classes() const { return layers.back().W.cols(); }

    std::vector<std::size_t> dims() const {
        std::vector<std::size_t> d;
        d.push_back(layers.front().W.rows());
        for (const auto& l : layers) d.push_back(l.W.cols());
        return d;
    }

    std::vector<double> flatten() const {
        std::vector<double> out;
        out.reserve(dim());
        for (const auto& l : layers) {
            out.insert(out.end(), l.W.data.begin(), l.W.data.end());
            out.insert(out.end(), l.b.data.begin(), l.b.data.end());
        }
        return out;
    }

    void unflatten(const std::vector<double>& flat) {
        if (flat.size() != dim()) throw std::invalid_argument("unflatten: size mismatch");
        std::size_t p = 0;
        for (auto& l : layers) {
            std::copy(flat.begin() + p, flat.begin() + p + l.W.size(), l.W.data.begin());
            p += l.W.size();
            std::copy(flat.begin() + p, flat.begin() + p + l.b.size(), l.b.data.begin());
            p += l.b.size();
        }
    }

    void add_flat(const std::vector<double>& delta, double scale = 1.0) {
        if (delta.size() != dim()) throw std::invalid_argument("add_flat: size mismatch");
        std::size_t p = 0;
        for (auto& l : layers) {
            for (double& w : l.W.data) w += scale * delta[p++];
            for (double& b : l.b.data) b += scale * delta[p++];
        }
    }
};

struct ForwardResult {
    GradTape tape;
    GradTape::NodeId logits = -1;
    std::vector<GradTape::NodeId> param_nodes;  // W0, b0, W1, b1, ...
};

// Records the whole forward pass on a fresh tape. Throws with the offending
// layer index on any dimension mismatch.
inline ForwardResult forward(const ModelParams& model, const Tensor& batch) {
    if (batch.shape.size() != 2)
        throw std::invalid_argument("forward: batch must be [n, input_dim]");
    if (batch.cols() != model.input_dim())
        throw std::invalid_argument("forward: layer 0 expects input width " +
                                    std::to_string(model.input_dim()) + ", got " +
                                    std::to_string(batch.cols()));
    ForwardResult r;
    GradTape::NodeId x = r.tape.input(batch);
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        if (r.tape.value(x).cols() != layer.W.rows())
            throw std::invalid_argument("forward: shape error at layer " + std::to_string(l));
        GradTape::NodeId w = r.tape.input(layer.W);
        GradTape::NodeId b = r.tape.input(layer.b);
        r.param_nodes.push_back(w);
        r.param_nodes.push_back(b);
        x = r.tape.add_rowvec(r.tape.matmul(x, w), b);
        if (l + 1 < model.layers.size()) x = r.tape.relu(x);
    }
    r.logits = x;
    return r;
}

// Collects the flat parameter gradient after backward() ran on the tape.
inline std::vector<double> collect_param_grad(const ForwardResult& fr, std::size_t dim) {
    std::vector<double> g;
    g.reserve(dim);
    for (GradTape::NodeId id : fr.param_nodes) {
        const Tensor& t = fr.tape.grad(id);
        g.insert(g.end(), t.data.begin(), t.data.end());
    }
    return g;
}

// Mean cross-entropy over the batch plus its gradient w.r.t. the flat
// parameter vector.
inline double loss_and_grad(const ModelParams& model, const Tensor& batch,
                            const std::vector<int>& labels, std::vector<double>& grad) {
    ForwardResult fr = forward(model, batch);
    GradTape::NodeId loss = fr.tape.cross_entropy(fr.logits, labels);
    fr.tape.backward(loss);
    grad = collect_param_grad(fr, model.dim());
    return fr.tape.scalar(loss);
}

inline double loss_only(const ModelParams& model, const Tensor& batch,
                        const std::vector<int>& labels) {
    ForwardResult fr = forward(model, batch);
    return fr.tape.scalar(fr.tape.cross_entropy(fr.logits, labels));
}

// One gradient per row, computed by per-example tape replay. Their mean
// matches the batch gradient to rounding error.
inline std::vector<std::vector<double>> per_sample_gradients(
    const ModelParams& model, const Tensor& batch, const std::vector<int>& labels) {
    if (batch.rows() == 0) throw std::invalid_argument("per_sample_gradients: empty batch");
    if (labels.size() != batch.rows())
        throw std::invalid_argument("per_sample_gradients: label count mismatch");
    std::vector<std::vector<double>> out;
    out.reserve(batch.rows());
    for (std::size_t i = 0; i < batch.rows(); ++i) {
        std::vector<double> g;
        loss_and_grad(model, batch.row(i), {labels[i]}, g);
        out.push_back(std::move(g));
    }
    return out;
}

inline std::vector<int> predict(const ModelParams& model, const Tensor& batch) {
    ForwardResult fr = forward(model, batch);
    const Tensor& z = fr.tape.value(fr.logits);
    std::vector<int> pred(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < z.cols(); ++j)
            if (z.at(i, j) > z.at(i, best)) best = j;
        pred[i] = static_cast<int>(best);
    }
    return pred;
}

inline double accuracy(const ModelParams& model, const Tensor& X, const std::vector<int>& y) {
    if (X.rows() == 0) throw std::invalid_argument("accuracy: empty set");
    std::vector<int> pred = predict(model, X);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (pred[i] == y[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(y.size());
}

}  // namespace dpadapter
