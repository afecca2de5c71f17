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

// CSI-free DDPG design loop for the IRS reflection coefficients. Each episode
// trains fresh actor/critic networks from pilot observations only; the
// combiner is re-derived every step from the pilot covariances.

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <unordered_set>
#include <vector>

#include "ambc/channel.hpp"
#include "ambc/detection.hpp"
#include "ambc/errors.hpp"
#include "ambc/neural.hpp"
#include "ambc/random.hpp"
#include "ambc/signal_model.hpp"

namespace ambc {

// ---------------------------------------------------------------------------
// State / action encoding

// [Re g, Re Theta, Im g, Im Theta]
inline Eigen::VectorXd encode_state(const Combiner& g, const IrsState& irs) {
    const Eigen::Index m = g.size(), n = irs.size();
    Eigen::VectorXd s(2 * (m + n));
    s.segment(0, m) = g.weights().real();
    s.segment(m, n) = irs.coefficients().real();
    s.segment(m + n, m) = g.weights().imag();
    s.segment(2 * m + n, n) = irs.coefficients().imag();
    return s;
}

inline std::pair<Combiner, IrsState> decode_state(const Eigen::VectorXd& s, Eigen::Index antennas) {
    const Eigen::Index total = s.size() / 2;
    const Eigen::Index n = total - antennas;
    if (s.size() % 2 != 0 || n < 1) throw ShapeError("decode_state: bad state length");
    ComplexVector g(antennas), theta(n);
    for (Eigen::Index i = 0; i < antennas; ++i) g[i] = {s[i], s[total + i]};
    for (Eigen::Index i = 0; i < n; ++i) theta[i] = {s[antennas + i], s[total + antennas + i]};
    return {Combiner::normalized(g), IrsState(theta)};
}

inline constexpr double kDegeneratePairNorm = 1e-12;

// Normalizes each (Re_n, Im_n) pair, laid out as [Re_1..Re_N, Im_1..Im_N],
// to unit length. Pairs shorter than 1e-12 become (1, 0).
inline Eigen::VectorXd encode_action(const Eigen::VectorXd& raw) {
    if (raw.size() % 2 != 0 || raw.size() == 0) throw ShapeError("encode_action: length must be 2N");
    const Eigen::Index n = raw.size() / 2;
    Eigen::VectorXd a(raw.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = std::hypot(raw[i], raw[n + i]);
        if (norm < kDegeneratePairNorm) {
            a[i] = 1.0;
            a[n + i] = 0.0;
        } else {
            a[i] = raw[i] / norm;
            a[n + i] = raw[n + i] / norm;
        }
    }
    return a;
}

// Pulls d/d(normalized) back through x -> x / |x| pairwise:
// J^T v = (v - a (a . v)) / |x|. Degenerate pairs get zero gradient.
inline Eigen::MatrixXd encode_action_backprop(const Eigen::MatrixXd& raw, const Eigen::MatrixXd& grad_normalized) {
    const Eigen::Index n = raw.rows() / 2;
    Eigen::MatrixXd out(raw.rows(), raw.cols());
    for (Eigen::Index b = 0; b < raw.cols(); ++b) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = raw(i, b), y = raw(n + i, b);
            const double norm = std::hypot(x, y);
            if (norm < kDegeneratePairNorm) {
                out(i, b) = 0.0;
                out(n + i, b) = 0.0;
                continue;
            }
            const double ax = x / norm, ay = y / norm;
            const double vx = grad_normalized(i, b), vy = grad_normalized(n + i, b);
            const double proj = ax * vx + ay * vy;
            out(i, b) = (vx - ax * proj) / norm;
            out(n + i, b) = (vy - ay * proj) / norm;
        }
    }
    return out;
}

inline IrsState action_to_irs(const Eigen::VectorXd& action) {
    const Eigen::Index n = action.size() / 2;
    ComplexVector theta(n);
    for (Eigen::Index i = 0; i < n; ++i) theta[i] = {action[i], action[n + i]};
    return IrsState(theta);
}

inline Eigen::VectorXd irs_to_action(const IrsState& irs) {
    const Eigen::Index n = irs.size();
    Eigen::VectorXd a(2 * n);
    a.head(n) = irs.coefficients().real();
    a.tail(n) = irs.coefficients().imag();
    return a;
}

inline double reward(double sample_grcd_value) {
    if (!(sample_grcd_value >= 1.0)) throw InvalidInput("reward: sample GRCD must be >= 1");
    return 100.0 * (sample_grcd_value - 1.0);
}

// ---------------------------------------------------------------------------
// Replay memory

struct Experience {
    Eigen::VectorXd state;
    Eigen::VectorXd action;
    double reward = 0.0;
    Eigen::VectorXd next_state;
};

struct Minibatch {
    Eigen::MatrixXd states;       // dim_s x B
    Eigen::MatrixXd actions;      // dim_a x B
    Eigen::VectorXd rewards;      // B
    Eigen::MatrixXd next_states;  // dim_s x B

    Eigen::Index size() const { return rewards.size(); }
};

// Bounded FIFO of experiences with uniform sampling without replacement.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw InvalidInput("ReplayMemory: capacity must be positive");
        items_.reserve(capacity);
    }

    void push(Experience e) {
        if (items_.size() < capacity_) {
            items_.push_back(std::move(e));
        } else {
            items_[head_] = std::move(e);
            head_ = (head_ + 1) % capacity_;
        }
    }

    void clear() {
        items_.clear();
        head_ = 0;
    }

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Experience& operator[](std::size_t i) const { return items_[(head_ + i) % items_.size()]; }

    Minibatch sample(std::size_t batch, Rng& rng) const {
        if (batch == 0 || batch > items_.size()) throw InvalidInput("ReplayMemory: not enough experiences");
        std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
        std::vector<std::size_t> idx;
        std::unordered_set<std::size_t> seen;
        while (idx.size() < batch) {
            const auto i = pick(rng);
            if (seen.insert(i).second) idx.push_back(i);
        }
        const auto& first = items_[idx[0]];
        const auto b = static_cast<Eigen::Index>(batch);
        Minibatch mb{Eigen::MatrixXd(first.state.size(), b), Eigen::MatrixXd(first.action.size(), b),
                     Eigen::VectorXd(b), Eigen::MatrixXd(first.next_state.size(), b)};
        for (Eigen::Index k = 0; k < b; ++k) {
            const auto& e = items_[idx[static_cast<std::size_t>(k)]];
            mb.states.col(k) = e.state;
            mb.actions.col(k) = e.action;
            mb.rewards[k] = e.reward;
            mb.next_states.col(k) = e.next_state;
        }
        return mb;
    }

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<Experience> items_;
};

// ---------------------------------------------------------------------------
// Agent

struct TrainingSchedule {
    int random_steps = 1000;  // T_1
    int actor_steps = 500;    // T_2
    int batch_size = 16;      // B
    double discount = 0.0;    // gamma
    int target_period = 1;    // T_up
    int replay_capacity = 0;  // 0 -> T_train

    int total_steps() const { return random_steps + actor_steps; }
    std::size_t capacity() const {
        return static_cast<std::size_t>(replay_capacity > 0 ? replay_capacity : std::max(total_steps(), 1));
    }

    void validate() const {
        if (random_steps < 0 || actor_steps < 0 || total_steps() < 1)
            throw InvalidInput("schedule: step counts must be non-negative with at least one step");
        if (batch_size < 1) throw InvalidInput("schedule: batch size must be positive");
        if (!(discount >= 0.0 && discount <= 1.0)) throw InvalidInput("schedule: discount must lie in [0, 1]");
        if (target_period < 1) throw InvalidInput("schedule: target period must be positive");
    }
};

struct AgentConfig {
    OptimizerConfig actor{0.002, 0.8, 0.99, 1e-8, false};
    OptimizerConfig critic{0.002, 0.8, 0.99, 1e-8, false};
    double tau = 0.0005;
    OuConfig noise{0.15, 0.05, 1.0};
};

inline std::vector<int> actor_shape(int antennas, int reflectors) {
    const int m = antennas, n = reflectors;
    return {2 * m + 2 * n, 4 * m + 4 * n, 4 * m + 4 * n, 2 * n};
}

inline std::vector<int> critic_shape(int antennas, int reflectors) {
    const int m = antennas, n = reflectors;
    return {2 * m + 4 * n, 4 * m + 8 * n, 4 * m + 8 * n, 1};
}

// y_i = r_i + gamma Q'(s_{i+1}, mu'(s_{i+1})). With gamma = 0 the rewards are
// returned untouched.
inline Eigen::VectorXd critic_targets(const Minibatch& batch, const MlpNetwork& actor_target,
                                      const MlpNetwork& critic_target, double discount) {
    if (batch.size() == 0) throw InvalidInput("critic_targets: empty minibatch");
    if (discount == 0.0) return batch.rewards;
    const Eigen::MatrixXd next_actions = forward(actor_target, batch.next_states);
    Eigen::MatrixXd normalized(next_actions.rows(), next_actions.cols());
    for (Eigen::Index k = 0; k < next_actions.cols(); ++k) normalized.col(k) = encode_action(next_actions.col(k));
    Eigen::MatrixXd critic_in(batch.next_states.rows() + normalized.rows(), batch.size());
    critic_in << batch.next_states, normalized;
    const Eigen::MatrixXd q = forward(critic_target, critic_in);
    return batch.rewards + discount * q.row(0).transpose();
}

class DdpgAgent {
public:
    DdpgAgent(int antennas, int reflectors, const AgentConfig& config, Rng& rng)
        : config_(config),
          actor_(actor_shape(antennas, reflectors), rng),
          critic_(critic_shape(antennas, reflectors), rng),
          actor_target_(actor_),
          critic_target_(critic_),
          actor_opt_(actor_, config.actor),
          critic_opt_(critic_, config.critic) {}

    // Raw (pre-normalization) actor output.
    Eigen::VectorXd act_raw(const Eigen::VectorXd& state) const { return forward_one(actor_, state); }

    struct StepStats {
        double critic_loss = 0.0;
    };

    // Critic descent on (1/B) sum (y - Q(s, a))^2. Returns the loss before the step.
    double critic_step(const Minibatch& batch, double discount) {
        const Eigen::Index b = batch.size();
        const Eigen::VectorXd y = critic_targets(batch, actor_target_, critic_target_, discount);
        Eigen::MatrixXd critic_in(batch.states.rows() + batch.actions.rows(), b);
        critic_in << batch.states, batch.actions;
        ForwardCache cache;
        const Eigen::MatrixXd q = forward(critic_, critic_in, &cache);
        const Eigen::RowVectorXd err = q.row(0) - y.transpose();
        const auto grad = backward(critic_, cache, (2.0 / static_cast<double>(b)) * err);
        critic_opt_.step(critic_, grad.params);
        return err.squaredNorm() / static_cast<double>(b);
    }

    // Actor ascent on (1/B) sum Q(s, normalize(mu(s))). `dq_da(states, actions)`
    // returns dQ/da for each column; the step pulls it back through the pairwise
    // normalization and the actor.
    template <typename ActionGradient>
    void actor_step(const Eigen::MatrixXd& states, ActionGradient&& dq_da) {
        const Eigen::Index b = states.cols();
        ForwardCache cache;
        const Eigen::MatrixXd raw = forward(actor_, states, &cache);
        Eigen::MatrixXd normalized(raw.rows(), b);
        for (Eigen::Index k = 0; k < b; ++k) normalized.col(k) = encode_action(raw.col(k));
        const Eigen::MatrixXd ascent = dq_da(states, normalized) * (-1.0 / static_cast<double>(b));
        const auto grad = backward(actor_, cache, encode_action_backprop(raw, ascent));
        actor_opt_.step(actor_, grad.params);
    }

    // dQ/da of the training critic at (s, a), one column per sample.
    Eigen::MatrixXd critic_action_gradient(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) const {
        Eigen::MatrixXd in(states.rows() + actions.rows(), states.cols());
        in << states, actions;
        ForwardCache cache;
        forward(critic_, in, &cache);
        const auto res = backward(critic_, cache, Eigen::MatrixXd::Ones(1, states.cols()), false);
        return res.input_gradient.bottomRows(actions.rows());
    }

    // One critic step, one actor step through the updated critic, then the
    // soft target update every T_up calls.
    StepStats train_step(const Minibatch& batch, const TrainingSchedule& schedule) {
        StepStats stats;
        stats.critic_loss = critic_step(batch, schedule.discount);
        actor_step(batch.states, [this](const Eigen::MatrixXd& s, const Eigen::MatrixXd& a) {
            return critic_action_gradient(s, a);
        });
        ++updates_;
        if (updates_ % schedule.target_period == 0) {
            soft_update(actor_target_, actor_, config_.tau);
            soft_update(critic_target_, critic_, config_.tau);
        }
        return stats;
    }

    const MlpNetwork& actor() const { return actor_; }
    const MlpNetwork& critic() const { return critic_; }
    const MlpNetwork& actor_target() const { return actor_target_; }
    const MlpNetwork& critic_target() const { return critic_target_; }
    MlpNetwork& critic() { return critic_; }
    MlpNetwork& actor() { return actor_; }
    const AgentConfig& config() const { return config_; }
    long updates() const { return updates_; }

private:
    AgentConfig config_;
    MlpNetwork actor_;
    MlpNetwork critic_;
    MlpNetwork actor_target_;
    MlpNetwork critic_target_;
    RmsPropMomentum actor_opt_;
    RmsPropMomentum critic_opt_;
    long updates_ = 0;
};

// ---------------------------------------------------------------------------
// Episode driver

enum class FinalSelection { best, last };

struct EpisodeSettings {
    SystemParameters system;
    TrainingSchedule schedule;
    AgentConfig agent;
    NoiseEstimate noise_estimate = NoiseEstimate::estimated;
    FinalSelection final_selection = FinalSelection::best;
    bool record_true_grcd = false;
};

struct StepRecord {
    int step = 0;
    double reward = 0.0;
    double sample_grcd = 1.0;
    double true_grcd = std::numeric_limits<double>::quiet_NaN();
    bool failed = false;
};

struct EpisodeResult {
    bool ok = false;
    int failed_steps = 0;
    int selected_step = -1;
    Combiner combiner;
    IrsState irs;
    double sample_grcd = 1.0;
    double true_grcd = 1.0;
    double ber = 0.5;  // at L_d, from the true GRCD
    std::vector<StepRecord> trace;
    std::size_t replay_size = 0;
};

namespace detail {

inline std::pair<ComplexMatrix, ComplexMatrix> observe_pilot_pair(const CompositeChannels& comp,
                                                                  const EpisodeSettings& cfg, Rng& rng) {
    const int lt = cfg.system.training_samples;
    const ComplexMatrix y0 = draw_received_samples(comp, cfg.system, 0, lt, rng);
    const ComplexMatrix y1 = draw_received_samples(comp, cfg.system, 1, lt, rng);
    return pilot_covariances(y0, y1, cfg.noise_estimate, cfg.system.noise_power_mw);
}

}  // namespace detail

// One coherence episode: T_1 random-action steps then T_2 actor steps, each
// observing two pilot pairs (before and after the reflection update). The
// reported {g, Theta} is the best-reward pair (or the last one).
inline EpisodeResult run_episode(const ChannelRealization& ch, const EpisodeSettings& cfg, Rng& rng) {
    ch.validate();
    cfg.system.validate();
    cfg.schedule.validate();
    const int m = static_cast<int>(ch.antennas());
    const int n = static_cast<int>(ch.reflectors());
    const double alpha = cfg.system.tag_coefficient;

    DdpgAgent agent(m, n, cfg.agent, rng);
    ReplayMemory replay(cfg.schedule.capacity());
    OuNoiseProcess noise(2 * n, cfg.agent.noise);

    Combiner g = Combiner::random(m, rng);
    IrsState theta = IrsState::random(n, rng);

    EpisodeResult result;
    result.trace.reserve(static_cast<std::size_t>(cfg.schedule.total_steps()));
    double best_reward = -std::numeric_limits<double>::infinity();

    for (int t = 0; t < cfg.schedule.total_steps(); ++t) {
        StepRecord rec;
        rec.step = t + 1;
        try {
            // First pilot pair under the previous reflection: refresh the combiner.
            const auto comp_prev = composite_channels(ch, theta, alpha);
            const auto [c0, c1] = detail::observe_pilot_pair(comp_prev, cfg, rng);
            g = eigen_combiner(c0, c1);
            const Eigen::VectorXd state = encode_state(g, theta);

            Eigen::VectorXd action;
            if (t < cfg.schedule.random_steps) {
                action = irs_to_action(IrsState::random(n, rng));
            } else {
                action = encode_action(agent.act_raw(state) + noise.sample(rng));
            }
            const IrsState next_theta = action_to_irs(action);

            // Second pilot pair under the new reflection scores the action.
            const auto comp_next = composite_channels(ch, next_theta, alpha);
            const auto [c0n, c1n] = detail::observe_pilot_pair(comp_next, cfg, rng);
            rec.sample_grcd = sample_grcd(c0n, c1n, g);
            rec.reward = reward(rec.sample_grcd);
            if (cfg.record_true_grcd) rec.true_grcd = true_grcd(comp_next, g, cfg.system);

            replay.push({state, action, rec.reward, encode_state(g, next_theta)});
            theta = next_theta;

            const bool better = rec.reward > best_reward;
            if (cfg.final_selection == FinalSelection::last || better) {
                result.combiner = g;
                result.irs = theta;
                result.sample_grcd = rec.sample_grcd;
                result.selected_step = rec.step;
            }
            if (better) best_reward = rec.reward;

            if (replay.size() >= static_cast<std::size_t>(cfg.schedule.batch_size))
                agent.train_step(replay.sample(static_cast<std::size_t>(cfg.schedule.batch_size), rng),
                                 cfg.schedule);
        } catch (const NumericalError&) {
            rec.failed = true;
        } catch (const InvalidStatistics&) {
            rec.failed = true;
        }
        if (rec.failed) ++result.failed_steps;
        result.trace.push_back(rec);
    }

    result.replay_size = replay.size();
    result.ok = result.selected_step > 0;
    if (result.ok) {
        const auto comp = composite_channels(ch, result.irs, alpha);
        result.true_grcd = true_grcd(comp, result.combiner, cfg.system);
        result.ber = ber_from_grcd(result.true_grcd, cfg.system.data_samples);
    }
    return result;
}

}  // namespace ambc
