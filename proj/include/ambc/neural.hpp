// SPDX-License-Identifier: Apache-2.0
//
// irs-ambc: IRS-assisted ambient backscatter link simulator and DDPG lab
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Dense MLP with hand-written backpropagation, RMSprop with momentum, the
// Ornstein-Uhlenbeck exploration process and target-network soft updates.
// Batches are column-major: one sample per column.

#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ambc/errors.hpp"
#include "ambc/random.hpp"

namespace ambc {

enum class Activation { relu, linear };

struct DenseLayer {
    Eigen::MatrixXd weights;  // out x in
    Eigen::VectorXd bias;     // out
    Activation activation = Activation::linear;

    Eigen::Index inputs() const { return weights.cols(); }
    Eigen::Index outputs() const { return weights.rows(); }
};

class MlpNetwork {
public:
    MlpNetwork() = default;

    // Hidden layers use ReLU, the output layer is linear. Weights are uniform
    // in +-1/sqrt(fan_in); biases start at zero.
    MlpNetwork(const std::vector<int>& sizes, Rng& rng) {
        if (sizes.size() < 2) throw ShapeError("MlpNetwork: need at least input and output sizes");
        for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
            if (sizes[i] < 1 || sizes[i + 1] < 1) throw ShapeError("MlpNetwork: layer sizes must be positive");
            DenseLayer layer;
            layer.weights.resize(sizes[i + 1], sizes[i]);
            const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[i]));
            std::uniform_real_distribution<double> dist(-bound, bound);
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
                for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) layer.weights(r, c) = dist(rng);
            layer.bias = Eigen::VectorXd::Zero(sizes[i + 1]);
            layer.activation = i + 2 == sizes.size() ? Activation::linear : Activation::relu;
            layers_.push_back(std::move(layer));
        }
    }

    explicit MlpNetwork(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
        for (std::size_t i = 0; i + 1 < layers_.size(); ++i)
            if (layers_[i].outputs() != layers_[i + 1].inputs())
                throw ShapeError("MlpNetwork: adjacent layer sizes do not match");
    }

    std::vector<int> sizes() const {
        std::vector<int> s;
        if (layers_.empty()) return s;
        s.push_back(static_cast<int>(layers_.front().inputs()));
        for (const auto& l : layers_) s.push_back(static_cast<int>(l.outputs()));
        return s;
    }

    Eigen::Index input_size() const { return layers_.empty() ? 0 : layers_.front().inputs(); }
    Eigen::Index output_size() const { return layers_.empty() ? 0 : layers_.back().outputs(); }
    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
        return n;
    }

    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

private:
    std::vector<DenseLayer> layers_;
};

struct ForwardCache {
    std::vector<Eigen::MatrixXd> inputs;          // input to each layer
    std::vector<Eigen::MatrixXd> preactivations;  // W x + b of each layer

    bool empty() const { return inputs.empty(); }
};

inline Eigen::MatrixXd forward(const MlpNetwork& net, const Eigen::MatrixXd& input, ForwardCache* cache = nullptr) {
    if (net.layers().empty()) throw ShapeError("forward: empty network");
    if (input.rows() != net.input_size())
        throw ShapeError("forward: input has " + std::to_string(input.rows()) + " rows, network expects " +
                         std::to_string(net.input_size()));
    if (cache) {
        cache->inputs.clear();
        cache->preactivations.clear();
    }
    Eigen::MatrixXd x = input;
    for (const auto& layer : net.layers()) {
        Eigen::MatrixXd z = layer.weights * x;
        z.colwise() += layer.bias;
        if (cache) {
            cache->inputs.push_back(std::move(x));
            cache->preactivations.push_back(z);
        }
        x = layer.activation == Activation::relu ? Eigen::MatrixXd(z.cwiseMax(0.0)) : std::move(z);
    }
    return x;
}

inline Eigen::VectorXd forward_one(const MlpNetwork& net, const Eigen::VectorXd& input) {
    return forward(net, Eigen::MatrixXd(input)).col(0);
}

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> bias;

    static Gradients zeros_like(const MlpNetwork& net) {
        Gradients g;
        for (const auto& l : net.layers()) {
            g.weights.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
            g.bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
        }
        return g;
    }
};

struct BackwardResult {
    Gradients params;
    Eigen::MatrixXd input_gradient;
};

namespace detail {

inline void relu_mask(Eigen::MatrixXd& grad, const Eigen::MatrixXd& preact) {
    // subgradient at exactly zero is zero
    grad = (preact.array() > 0.0).select(grad, 0.0);
}

}  // namespace detail

// Reverse-mode pass for d(sum <output_gradient, output>) over the batch.
// Parameter gradients are summed over the batch columns.
inline BackwardResult backward(const MlpNetwork& net, const ForwardCache& cache,
                               const Eigen::MatrixXd& output_gradient, bool need_params = true) {
    const auto& layers = net.layers();
    if (cache.empty() || cache.inputs.size() != layers.size())
        throw StateError("backward: no forward cache for this network");
    if (output_gradient.rows() != net.output_size() || output_gradient.cols() != cache.inputs.front().cols())
        throw ShapeError("backward: output gradient shape mismatch");

    BackwardResult out;
    if (need_params) {
        out.params.weights.resize(layers.size());
        out.params.bias.resize(layers.size());
    }
    Eigen::MatrixXd delta = output_gradient;
    for (std::size_t k = layers.size(); k-- > 0;) {
        if (layers[k].activation == Activation::relu) detail::relu_mask(delta, cache.preactivations[k]);
        if (need_params) {
            out.params.weights[k].noalias() = delta * cache.inputs[k].transpose();
            out.params.bias[k] = delta.rowwise().sum();
        }
        Eigen::MatrixXd next = layers[k].weights.transpose() * delta;
        delta = std::move(next);
    }
    out.input_gradient = std::move(delta);
    return out;
}

struct OptimizerConfig {
    double learning_rate = 0.002;
    double momentum = 0.8;
    double decay = 0.99;  // rho of the squared-gradient average
    double epsilon = 1e-8;
    bool nesterov = false;
};

// RMSprop with classical (or Nesterov) momentum on the RMS-scaled step:
//   acc <- rho acc + (1 - rho) g^2
//   mom <- beta mom + lr g / sqrt(acc + eps)
//   p   <- p - mom                     (Nesterov: p - beta mom - lr g / sqrt(acc + eps))
class RmsPropMomentum {
public:
    RmsPropMomentum() = default;
    RmsPropMomentum(const MlpNetwork& net, OptimizerConfig config)
        : config_(config), square_(Gradients::zeros_like(net)), velocity_(Gradients::zeros_like(net)) {
        if (!(config_.epsilon > 0.0)) throw InvalidInput("RmsPropMomentum: epsilon must be positive");
    }

    void step(MlpNetwork& net, const Gradients& grads) {
        auto& layers = net.layers();
        if (grads.weights.size() != layers.size() || square_.weights.size() != layers.size())
            throw ShapeError("RmsPropMomentum: gradient layout does not match the network");
        for (std::size_t k = 0; k < layers.size(); ++k) {
            update(layers[k].weights.array(), grads.weights[k].array(), square_.weights[k].array(),
                   velocity_.weights[k].array());
            update(layers[k].bias.array(), grads.bias[k].array(), square_.bias[k].array(),
                   velocity_.bias[k].array());
        }
    }

    const OptimizerConfig& config() const { return config_; }
    const Gradients& square_average() const { return square_; }
    const Gradients& velocity() const { return velocity_; }

private:
    template <typename P, typename G, typename S, typename V>
    void update(P param, const G& grad, S square, V velocity) const {
        if (param.rows() != grad.rows() || param.cols() != grad.cols())
            throw ShapeError("RmsPropMomentum: gradient shape mismatch");
        square = config_.decay * square + (1.0 - config_.decay) * grad.square();
        const auto scaled = (config_.learning_rate * grad / (square + config_.epsilon).sqrt()).eval();
        velocity = config_.momentum * velocity + scaled;
        if (config_.nesterov)
            param -= config_.momentum * velocity + scaled;
        else
            param -= velocity;
    }

    OptimizerConfig config_;
    Gradients square_;
    Gradients velocity_;
};

struct OuConfig {
    double theta = 0.15;
    double sigma = 0.05;
    double dt = 1.0;
};

// Mean-reverting exploration noise x <- x - theta x dt + sigma sqrt(dt) w.
class OuNoiseProcess {
public:
    OuNoiseProcess(Eigen::Index dimension, OuConfig config)
        : config_(config), state_(Eigen::VectorXd::Zero(dimension)) {}

    const Eigen::VectorXd& sample(Rng& rng) {
        const double diffusion = config_.sigma * std::sqrt(config_.dt);
        for (Eigen::Index i = 0; i < state_.size(); ++i)
            state_[i] += config_.theta * (0.0 - state_[i]) * config_.dt + diffusion * standard_normal(rng);
        return state_;
    }

    void reset() { state_.setZero(); }
    void set_state(Eigen::VectorXd x) { state_ = std::move(x); }
    const Eigen::VectorXd& state() const { return state_; }
    const OuConfig& config() const { return config_; }

    // Stationary standard deviation of the discretised process.
    double stationary_stddev() const {
        const double t = config_.theta, dt = config_.dt;
        return config_.sigma * std::sqrt(dt / (2.0 * t - t * t * dt));
    }

private:
    OuConfig config_;
    Eigen::VectorXd state_;
};

// target <- tau * source + (1 - tau) * target
inline void soft_update(MlpNetwork& target, const MlpNetwork& source, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidInput("soft_update: tau must lie in [0, 1]");
    auto& t = target.layers();
    const auto& s = source.layers();
    if (t.size() != s.size()) throw ShapeError("soft_update: network depth mismatch");
    if (tau == 0.0) return;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k].weights.rows() != s[k].weights.rows() || t[k].weights.cols() != s[k].weights.cols())
            throw ShapeError("soft_update: layer shape mismatch");
        if (tau == 1.0) {
            t[k].weights = s[k].weights;
            t[k].bias = s[k].bias;
        } else {
            t[k].weights = tau * s[k].weights + (1.0 - tau) * t[k].weights;
            t[k].bias = tau * s[k].bias + (1.0 - tau) * t[k].bias;
        }
    }
}

// Checkpoint text format:
//   ambc-mlp 1
//   <layer count>
//   per layer: "<inputs> <outputs> <relu|linear>", then the weights row-major
//   on one line, then the biases on one line. Values use 17 significant digits.
inline void save_network(const MlpNetwork& net, std::ostream& os) {
    os << "ambc-mlp 1\n" << net.layers().size() << '\n' << std::setprecision(17);
    for (const auto& l : net.layers()) {
        os << l.inputs() << ' ' << l.outputs() << ' ' << (l.activation == Activation::relu ? "relu" : "linear")
           << '\n';
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c)
                os << l.weights(r, c) << (r + 1 == l.weights.rows() && c + 1 == l.weights.cols() ? '\n' : ' ');
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) os << l.bias[i] << (i + 1 == l.bias.size() ? '\n' : ' ');
    }
}

inline MlpNetwork load_network(std::istream& is) {
    std::string magic;
    int version = 0;
    std::size_t count = 0;
    if (!(is >> magic >> version) || magic != "ambc-mlp" || version != 1)
        throw SchemaError("load_network: not an ambc-mlp v1 checkpoint");
    if (!(is >> count) || count == 0) throw SchemaError("load_network: bad layer count");
    std::vector<DenseLayer> layers;
    for (std::size_t k = 0; k < count; ++k) {
        Eigen::Index in = 0, out = 0;
        std::string act;
        if (!(is >> in >> out >> act) || in < 1 || out < 1 || (act != "relu" && act != "linear"))
            throw SchemaError("load_network: bad header for layer " + std::to_string(k));
        DenseLayer l;
        l.weights.resize(out, in);
        l.bias.resize(out);
        l.activation = act == "relu" ? Activation::relu : Activation::linear;
        for (Eigen::Index r = 0; r < out; ++r)
            for (Eigen::Index c = 0; c < in; ++c)
                if (!(is >> l.weights(r, c))) throw SchemaError("load_network: truncated weights");
        for (Eigen::Index i = 0; i < out; ++i)
            if (!(is >> l.bias[i])) throw SchemaError("load_network: truncated biases");
        layers.push_back(std::move(l));
    }
    return MlpNetwork(std::move(layers));
}

}  // namespace ambc
