#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dpadapter/tensor.hpp"

namespace dpadapter {

// Reverse-mode tape over tensor-valued operations. Nodes are appended in
// program order, so parent indices always precede children; backward walks
// the node list once in reverse.
class GradTape {
public:
    using NodeId = int;

    NodeId input(Tensor v) {
        return push(std::move(v), {}, nullptr);
    }

    NodeId add(NodeId a, NodeId b) {
        check(a); check(b);
        const Tensor& ta = values_[a];
        const Tensor& tb = values_[b];
        if (ta.shape != tb.shape) throw std::invalid_argument("add: shape mismatch");
        Tensor out = ta;
        for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += tb.data[i];
        return push(std::move(out), {a, b}, [](GradTape& t, NodeId n) {
            const auto& g = t.grads_[n].data;
            auto& pa = t.grads_[t.nodes_[n].parents[0]].data;
            auto& pb = t.grads_[t.nodes_[n].parents[1]].data;
            for (std::size_t i = 0; i < g.size(); ++i) { pa[i] += g[i]; pb[i] += g[i]; }
        });
    }

    NodeId mul(NodeId a, NodeId b) {
        check(a); check(b);
        const Tensor& ta = values_[a];
        const Tensor& tb = values_[b];
        if (ta.shape != tb.shape) throw std::invalid_argument("mul: shape mismatch");
        Tensor out = ta;
        for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= tb.data[i];
        return push(std::move(out), {a, b}, [](GradTape& t, NodeId n) {
            const auto& g = t.grads_[n].data;
            NodeId a = t.nodes_[n].parents[0], b = t.nodes_[n].parents[1];
            for (std::size_t i = 0; i < g.size(); ++i) {
                t.grads_[a].data[i] += g[i] * t.values_[b].data[i];
                t.grads_[b].data[i] += g[i] * t.values_[a].data[i];
            }
        });
    }

    NodeId scale(NodeId a, double c) {
        check(a);
        Tensor out = values_[a];
        for (double& x : out.data) x *= c;
        return push(std::move(out), {a}, [c](GradTape& t, NodeId n) {
            const auto& g = t.grads_[n].data;
            auto& pa = t.grads_[t.nodes_[n].parents[0]].data;
            for (std::size_t i = 0; i < g.size(); ++i) pa[i] += c * g[i];
        });
    }

    // [n,a] x [a,b] -> [n,b]
    NodeId matmul(NodeId a, NodeId b) {
        check(a); check(b);
        const Tensor& A = values_[a];
        const Tensor& B = values_[b];
        if (A.cols() != B.rows()) throw std::invalid_argument("matmul: inner dim mismatch");
        Tensor out({A.rows(), B.cols()});
        for (std::size_t i = 0; i < A.rows(); ++i)
            for (std::size_t k = 0; k < A.cols(); ++k) {
                double aik = A.at(i, k);
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < B.cols(); ++j)
                    out.at(i, j) += aik * B.at(k, j);
            }
        return push(std::move(out), {a, b}, [](GradTape& t, NodeId n) {
            NodeId ia = t.nodes_[n].parents[0], ib = t.nodes_[n].parents[1];
            const Tensor& A = t.values_[ia];
            const Tensor& B = t.values_[ib];
            const Tensor& G = t.grads_[n];
            Tensor& GA = t.grads_[ia];
            Tensor& GB = t.grads_[ib];
            // GA += G * B^T ; GB += A^T * G
            for (std::size_t i = 0; i < A.rows(); ++i)
                for (std::size_t j = 0; j < B.cols(); ++j) {
                    double g = G.at(i, j);
                    if (g == 0.0) continue;
                    for (std::size_t k = 0; k < A.cols(); ++k) {
                        GA.at(i, k) += g * B.at(k, j);
                        GB.at(k, j) += g * A.at(i, k);
                    }
                }
        });
    }

    // adds a [1,c] row vector to every row of a [n,c] matrix
    NodeId add_rowvec(NodeId a, NodeId b) {
        check(a); check(b);
        const Tensor& A = values_[a];
        const Tensor& v = values_[b];
        if (A.cols() != v.size()) throw std::invalid_argument("add_rowvec: width mismatch");
        Tensor out = A;
        for (std::size_t i = 0; i < A.rows(); ++i)
            for (std::size_t j = 0; j < A.cols(); ++j)
                out.at(i, j) += v.data[j];
        return push(std::move(out), {a, b}, [](GradTape& t, NodeId n) {
            NodeId ia = t.nodes_[n].parents[0], ib = t.nodes_[n].parents[1];
            const Tensor& G = t.grads_[n];
            Tensor& GA = t.grads_[ia];
            Tensor& GV = t.grads_[ib];
            for (std::size_t i = 0; i < G.rows(); ++i)
                for (std::size_t j = 0; j < G.cols(); ++j) {
                    GA.at(i, j) += G.at(i, j);
                    GV.data[j] += G.at(i, j);
                }
        });
    }

    NodeId relu(NodeId a) {
        check(a);
        Tensor out = values_[a];
        for (double& x : out.data) x = x > 0.0 ? x : 0.0;
        return push(std::move(out), {a}, [](GradTape& t, NodeId n) {
            NodeId ia = t.nodes_[n].parents[0];
            const auto& g = t.grads_[n].data;
            const auto& in = t.values_[ia].data;
            auto& pa = t.grads_[ia].data;
            for (std::size_t i = 0; i < g.size(); ++i)
                if (in[i] > 0.0) pa[i] += g[i];
        });
    }

    NodeId sum(NodeId a) {
        check(a);
        double s = 0.0;
        for (double x : values_[a].data) s += x;
        return push(Tensor({1}, {s}), {a}, [](GradTape& t, NodeId n) {
            double g = t.grads_[n].data[0];
            auto& pa = t.grads_[t.nodes_[n].parents[0]].data;
            for (double& x : pa) x += g;
        });
    }

    // mean negative log-softmax of the true class, log-sum-exp stabilized
    NodeId cross_entropy(NodeId logits, const std::vector<int>& labels) {
        check(logits);
        const Tensor& Z = values_[logits];
        std::size_t n = Z.rows(), k = Z.cols();
        if (labels.size() != n) throw std::invalid_argument("cross_entropy: label count mismatch");
        for (int y : labels)
            if (y < 0 || static_cast<std::size_t>(y) >= k)
                throw std::invalid_argument("cross_entropy: label out of range [0," + std::to_string(k) + ")");
        // cache softmax for backward
        Tensor probs({n, k});
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double m = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < k; ++j) m = std::max(m, Z.at(i, j));
            double lse = 0.0;
            for (std::size_t j = 0; j < k; ++j) lse += std::exp(Z.at(i, j) - m);
            lse = m + std::log(lse);
            for (std::size_t j = 0; j < k; ++j) probs.at(i, j) = std::exp(Z.at(i, j) - lse);
            loss += lse - Z.at(i, static_cast<std::size_t>(labels[i]));
        }
        loss /= static_cast<double>(n);
        NodeId id = push(Tensor({1}, {loss}), {logits}, nullptr);
        nodes_[id].backward = [probs, labels](GradTape& t, NodeId nd) {
            NodeId ia = t.nodes_[nd].parents[0];
            double g = t.grads_[nd].data[0];
            Tensor& GA = t.grads_[ia];
            std::size_t n = probs.rows(), k = probs.cols();
            double inv = g / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < k; ++j)
                    GA.at(i, j) += inv * (probs.at(i, j) - (static_cast<std::size_t>(labels[i]) == j ? 1.0 : 0.0));
        };
        return id;
    }

    const Tensor& value(NodeId id) const { check(id); return values_[id]; }
    double scalar(NodeId id) const { check(id); return values_[id].data[0]; }

    void backward(NodeId loss) {
        check(loss);
        if (values_[loss].size() != 1)
            throw std::logic_error("backward: loss node must be scalar");
        if (nodes_.empty()) throw std::logic_error("backward: empty tape");
        grads_.clear();
        grads_.reserve(values_.size());
        for (const Tensor& v : values_) grads_.emplace_back(v.shape);
        grads_[loss].data[0] = 1.0;
        for (NodeId n = static_cast<NodeId>(nodes_.size()) - 1; n >= 0; --n)
            if (nodes_[n].backward) nodes_[n].backward(*this, n);
        ran_backward_ = true;
    }

    const Tensor& grad(NodeId id) const {
        if (!ran_backward_) throw std::logic_error("grad: backward has not been run");
        check(id);
        return grads_[id];
    }

    std::size_t num_nodes() const { return nodes_.size(); }

private:
    struct Node {
        std::vector<NodeId> parents;
        std::function<void(GradTape&, NodeId)> backward;
    };

    NodeId push(Tensor v, std::vector<NodeId> parents,
                std::function<void(GradTape&, NodeId)> bw) {
        values_.push_back(std::move(v));
        nodes_.push_back({std::move(parents), std::move(bw)});
        return static_cast<NodeId>(nodes_.size()) - 1;
    }

    void check(NodeId id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
            throw std::out_of_range("GradTape: bad node id");
    }

    std::vector<Tensor> values_;
    std::vector<Tensor> grads_;
    std::vector<Node> nodes_;
    bool ran_backward_ = false;
};

}  // namespace dpadapter
