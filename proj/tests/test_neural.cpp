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

#include <cmath>
#include <sstream>

#include "ambc/ddpg.hpp"
#include "ambc/errors.hpp"
#include "ambc/neural.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace ambc;
using Catch::Approx;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = standard_normal(rng);
    return m;
}

}  // namespace

TEST_CASE("network construction follows the layer list", "[neural]") {
    Rng rng(1);
    const MlpNetwork actor(actor_shape(4, 16), rng);
    CHECK(actor.sizes() == std::vector<int>{40, 80, 80, 32});
    CHECK(actor.layers()[0].activation == Activation::relu);
    CHECK(actor.layers()[1].activation == Activation::relu);
    CHECK(actor.layers()[2].activation == Activation::linear);
    const MlpNetwork critic(critic_shape(4, 16), rng);
    CHECK(critic.sizes() == std::vector<int>{72, 144, 144, 1});
    CHECK(critic.parameter_count() == 72u * 144 + 144 + 144u * 144 + 144 + 144 + 1);
    for (const auto& l : critic.layers()) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(l.inputs()));
        CHECK(l.weights.cwiseAbs().maxCoeff() <= bound);
        CHECK(l.bias.isZero());
    }
    CHECK_THROWS_AS(MlpNetwork(std::vector<int>{3}, rng), ShapeError);
    CHECK_THROWS_AS(MlpNetwork(std::vector<int>{3, 0, 2}, rng), ShapeError);
}

TEST_CASE("forward pass basics", "[neural]") {
    Rng rng(2);
    MlpNetwork net(std::vector<int>{3, 5, 2}, rng);
    for (auto& l : net.layers()) l.weights.setZero(), l.bias.setZero();
    CHECK(forward_one(net, Eigen::VectorXd::Ones(3)).isZero());

    DenseLayer id;
    id.weights = Eigen::MatrixXd::Identity(4, 4);
    id.bias = Eigen::VectorXd::Zero(4);
    const MlpNetwork identity(std::vector<DenseLayer>{id});
    const Eigen::VectorXd x = random_matrix(4, 1, rng).col(0);
    CHECK(forward_one(identity, x) == x);
    CHECK_THROWS_AS(forward_one(net, Eigen::VectorXd::Ones(4)), ShapeError);
}

TEST_CASE("forward pass matches a scalar re-implementation", "[neural]") {
    Rng rng(3);
    MlpNetwork net(std::vector<int>{6, 9, 7, 3}, rng);
    for (auto& l : net.layers()) l.bias = random_matrix(l.outputs(), 1, rng).col(0);
    const Eigen::MatrixXd x = random_matrix(6, 5, rng);
    const Eigen::MatrixXd y = forward(net, x);
    for (int col = 0; col < 5; ++col) {
        std::vector<double> a(x.col(col).data(), x.col(col).data() + 6);
        for (const auto& l : net.layers()) {
            std::vector<double> b(static_cast<std::size_t>(l.outputs()));
            for (Eigen::Index i = 0; i < l.outputs(); ++i) {
                double s = l.bias[i];
                for (Eigen::Index j = 0; j < l.inputs(); ++j) s += l.weights(i, j) * a[static_cast<std::size_t>(j)];
                b[static_cast<std::size_t>(i)] = l.activation == Activation::relu ? std::max(s, 0.0) : s;
            }
            a = b;
        }
        for (int i = 0; i < 3; ++i) CHECK(y(i, col) == Approx(a[static_cast<std::size_t>(i)]).margin(1e-12));
    }
}

TEST_CASE("bias-free ReLU nets are positively homogeneous", "[neural]") {
    Rng rng(4);
    const MlpNetwork net(std::vector<int>{5, 8, 8, 2}, rng);
    const Eigen::VectorXd x = random_matrix(5, 1, rng).col(0);
    CHECK((forward_one(net, 2.0 * x) - 2.0 * forward_one(net, x)).norm() < 1e-12);
}

TEST_CASE("backward matches the least-squares gradient of a linear layer", "[neural]") {
    Rng rng(5);
    DenseLayer l;
    l.weights = random_matrix(2, 3, rng);
    l.bias = random_matrix(2, 1, rng).col(0);
    const MlpNetwork net(std::vector<DenseLayer>{l});
    const Eigen::MatrixXd x = random_matrix(3, 4, rng), t = random_matrix(2, 4, rng);
    ForwardCache cache;
    const Eigen::MatrixXd y = forward(net, x, &cache);
    // L = 0.5 * ||Y - T||^2  =>  dL/dW = (Y - T) X^T, dL/db = rowsum(Y - T)
    const auto res = backward(net, cache, y - t);
    CHECK((res.params.weights[0] - (y - t) * x.transpose()).norm() < 1e-12);
    CHECK((res.params.bias[0] - (y - t).rowwise().sum()).norm() < 1e-12);
    CHECK((res.input_gradient - l.weights.transpose() * (y - t)).norm() < 1e-12);
}

TEST_CASE("backward agrees with central differences", "[neural]") {
    Rng rng(6);
    for (const auto& shape : {actor_shape(4, 16), critic_shape(4, 16), std::vector<int>{3, 4, 2}}) {
        MlpNetwork net(shape, rng);
        for (auto& l : net.layers()) l.bias = 0.1 * random_matrix(l.outputs(), 1, rng).col(0);
        CHECK(oracle::gradient_check(net, 4, 100, rng) < 1e-4);
    }
}

TEST_CASE("backward input gradient agrees with central differences", "[neural]") {
    Rng rng(7);
    const MlpNetwork net(std::vector<int>{6, 10, 10, 1}, rng);
    Eigen::VectorXd x = random_matrix(6, 1, rng).col(0);
    ForwardCache cache;
    forward(net, Eigen::MatrixXd(x), &cache);
    const Eigen::VectorXd g = backward(net, cache, Eigen::MatrixXd::Ones(1, 1), false).input_gradient.col(0);
    for (int i = 0; i < 6; ++i) {
        Eigen::VectorXd up = x, dn = x;
        up[i] += 1e-6;
        dn[i] -= 1e-6;
        const double fd = (forward_one(net, up)[0] - forward_one(net, dn)[0]) / 2e-6;
        CHECK(g[i] == Approx(fd).epsilon(1e-5).margin(1e-9));
    }
}

TEST_CASE("backward edge cases", "[neural]") {
    Rng rng(8);
    const MlpNetwork net(std::vector<int>{3, 4, 2}, rng);
    ForwardCache cache;
    CHECK_THROWS_AS(backward(net, cache, Eigen::MatrixXd::Zero(2, 1)), StateError);
    forward(net, random_matrix(3, 2, rng), &cache);
    const auto zero = backward(net, cache, Eigen::MatrixXd::Zero(2, 2));
    for (const auto& w : zero.params.weights) CHECK(w.isZero());
    for (const auto& b : zero.params.bias) CHECK(b.isZero());
    CHECK_THROWS_AS(backward(net, cache, Eigen::MatrixXd::Zero(2, 3)), ShapeError);
}

TEST_CASE("RMSprop with momentum follows its update rule", "[neural]") {
    DenseLayer l;
    l.weights = Eigen::MatrixXd::Constant(1, 1, 1.0);
    l.bias = Eigen::VectorXd::Zero(1);
    MlpNetwork net(std::vector<DenseLayer>{l});
    RmsPropMomentum opt(net, {});
    Gradients g = Gradients::zeros_like(net);
    opt.step(net, g);
    CHECK(net.layers()[0].weights(0, 0) == 1.0);

    // Hand-computed first two steps with grad 0.5.
    g.weights[0](0, 0) = 0.5;
    opt.step(net, g);
    const double acc1 = 0.01 * 0.25;
    const double mom1 = 0.002 * 0.5 / std::sqrt(acc1 + 1e-8);
    CHECK(net.layers()[0].weights(0, 0) == Approx(1.0 - mom1).epsilon(1e-14));
    opt.step(net, g);
    const double acc2 = 0.99 * acc1 + 0.01 * 0.25;
    const double mom2 = 0.8 * mom1 + 0.002 * 0.5 / std::sqrt(acc2 + 1e-8);
    CHECK(net.layers()[0].weights(0, 0) == Approx(1.0 - mom1 - mom2).epsilon(1e-14));
}

TEST_CASE("RMSprop moves against a constant gradient", "[neural]") {
    Rng rng(9);
    MlpNetwork net(std::vector<int>{2, 2}, rng);
    RmsPropMomentum opt(net, {});
    Gradients g = Gradients::zeros_like(net);
    g.weights[0].setConstant(-0.3);
    double prev = net.layers()[0].weights(0, 0);
    for (int i = 0; i < 100; ++i) {
        opt.step(net, g);
        const double now = net.layers()[0].weights(0, 0);
        CHECK(now > prev);
        prev = now;
    }
}

TEST_CASE("RMSprop minimises a quadratic bowl", "[neural]") {
    for (bool nesterov : {false, true}) {
        DenseLayer l;
        l.weights = Eigen::MatrixXd::Constant(1, 1, 1.0);
        l.bias = Eigen::VectorXd::Zero(1);
        MlpNetwork net(std::vector<DenseLayer>{l});
        OptimizerConfig cfg;
        cfg.nesterov = nesterov;
        RmsPropMomentum opt(net, cfg);
        Gradients g = Gradients::zeros_like(net);
        for (int i = 0; i < 500; ++i) {
            g.weights[0](0, 0) = 2.0 * net.layers()[0].weights(0, 0);
            opt.step(net, g);
        }
        CHECK(std::abs(net.layers()[0].weights(0, 0)) < 1e-2);
    }
}

TEST_CASE("Ornstein-Uhlenbeck noise", "[neural]") {
    OuNoiseProcess quiet(1, {0.15, 0.0, 1.0});
    quiet.set_state(Eigen::VectorXd::Ones(1));
    Rng rng(10);
    for (int k = 1; k <= 20; ++k) CHECK(quiet.sample(rng)[0] == Approx(std::pow(0.85, k)).epsilon(1e-13));

    OuNoiseProcess proc(1, {});
    CHECK(proc.stationary_stddev() == Approx(0.05 / std::sqrt(0.2775)).epsilon(1e-14));
    for (int i = 0; i < 1000; ++i) proc.sample(rng);
    double sum = 0.0, sq = 0.0;
    const int steps = 100000;
    for (int i = 0; i < steps; ++i) {
        const double x = proc.sample(rng)[0];
        sum += x;
        sq += x * x;
    }
    const double sd = std::sqrt(sq / steps - (sum / steps) * (sum / steps));
    CHECK(sd == Approx(proc.stationary_stddev()).epsilon(0.05));
    CHECK(sd == Approx(0.0913).epsilon(0.10));

    OuNoiseProcess a(4, {}), b(4, {});
    Rng ra(5), rb(5);
    for (int i = 0; i < 10; ++i) CHECK(a.sample(ra) == b.sample(rb));
    a.reset();
    CHECK(a.state().isZero());
}

TEST_CASE("soft update", "[neural]") {
    Rng rng(11);
    const MlpNetwork source(std::vector<int>{2, 3, 1}, rng);
    MlpNetwork target(std::vector<int>{2, 3, 1}, rng);
    const MlpNetwork before = target;

    soft_update(target, source, 0.0);
    CHECK(target.layers()[0].weights == before.layers()[0].weights);
    soft_update(target, source, 1.0);
    CHECK(target.layers()[1].weights == source.layers()[1].weights);

    DenseLayer one, zero;
    one.weights = Eigen::MatrixXd::Ones(1, 1);
    one.bias = Eigen::VectorXd::Ones(1);
    zero.weights = Eigen::MatrixXd::Zero(1, 1);
    zero.bias = Eigen::VectorXd::Zero(1);
    MlpNetwork t(std::vector<DenseLayer>{zero});
    soft_update(t, MlpNetwork(std::vector<DenseLayer>{one}), 0.0005);
    CHECK(t.layers()[0].weights(0, 0) == Approx(0.0005).epsilon(1e-15));
    CHECK(t.layers()[0].bias[0] == Approx(0.0005).epsilon(1e-15));

    CHECK_THROWS_AS(soft_update(t, source, 0.5), ShapeError);
    CHECK_THROWS_AS(soft_update(target, source, 1.5), InvalidInput);
}

TEST_CASE("checkpoint round trip", "[neural]") {
    Rng rng(12);
    const MlpNetwork net(std::vector<int>{4, 6, 3}, rng);
    std::stringstream ss;
    save_network(net, ss);
    const MlpNetwork back = load_network(ss);
    REQUIRE(back.sizes() == net.sizes());
    for (std::size_t k = 0; k < net.layers().size(); ++k) {
        CHECK(back.layers()[k].weights == net.layers()[k].weights);
        CHECK(back.layers()[k].bias == net.layers()[k].bias);
        CHECK(back.layers()[k].activation == net.layers()[k].activation);
    }
    std::stringstream bad("ambc-mlp 2\n1\n");
    CHECK_THROWS_AS(load_network(bad), SchemaError);
    std::stringstream truncated("ambc-mlp 1\n1\n2 2 linear\n1 2 3\n");
    CHECK_THROWS_AS(load_network(truncated), SchemaError);
}
