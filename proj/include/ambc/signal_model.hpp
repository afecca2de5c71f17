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

// Two-hypothesis received-signal model of the on-off keyed tag, the Gaussian
// symbol-energy statistics, GRCD and the energy-detector BER.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ambc/channel.hpp"
#include "ambc/errors.hpp"
#include "ambc/numerics.hpp"
#include "ambc/random.hpp"

namespace ambc {

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

struct SystemParameters {
    double source_power_mw = dbm_to_mw(20.0);
    double noise_power_mw = dbm_to_mw(-95.0);
    double tag_coefficient = 1.0;  // alpha
    int training_samples = 150;    // L_t
    int data_samples = 20;         // L_d

    // P_S = 0 is allowed: it is the no-ambient-signal control case.
    void validate() const {
        if (!(source_power_mw >= 0.0)) throw InvalidInput("parameters: source power must be >= 0");
        if (!(noise_power_mw > 0.0)) throw InvalidInput("parameters: noise power must be > 0");
        if (!(tag_coefficient > 0.0 && tag_coefficient <= 1.0))
            throw InvalidInput("parameters: tag coefficient must lie in (0, 1]");
        if (training_samples < 2 || data_samples < 2)
            throw InvalidInput("parameters: symbol lengths must be >= 2 samples");
    }
};

inline constexpr double kUnitTolerance = 1e-9;

// Diagonal of the reflection matrix; every coefficient has unit modulus.
class IrsState {
public:
    IrsState() = default;
    explicit IrsState(ComplexVector coefficients) : coeffs_(std::move(coefficients)) {
        for (Eigen::Index n = 0; n < coeffs_.size(); ++n)
            if (std::abs(std::abs(coeffs_[n]) - 1.0) > kUnitTolerance)
                throw InvalidInput("IrsState: reflection coefficient " + std::to_string(n) +
                                   " is not unit modulus");
    }

    static IrsState from_phases(const RealVector& phases) {
        ComplexVector c(phases.size());
        for (Eigen::Index n = 0; n < phases.size(); ++n) c[n] = std::polar(1.0, phases[n]);
        return IrsState(std::move(c));
    }
    static IrsState identity(Eigen::Index n) { return IrsState(ComplexVector::Ones(n)); }
    static IrsState random(Eigen::Index n, Rng& rng) {
        RealVector phases(n);
        for (Eigen::Index i = 0; i < n; ++i) phases[i] = uniform_phase(rng);
        return from_phases(phases);
    }

    const ComplexVector& coefficients() const { return coeffs_; }
    Eigen::Index size() const { return coeffs_.size(); }

private:
    ComplexVector coeffs_;
};

// Unit-norm receive combiner.
class Combiner {
public:
    Combiner() = default;
    explicit Combiner(ComplexVector weights) : w_(std::move(weights)) {
        if (w_.size() == 0 || std::abs(w_.squaredNorm() - 1.0) > kUnitTolerance)
            throw InvalidInput("Combiner: weights must have unit norm");
    }

    // Rescales to unit norm; zero input is rejected.
    static Combiner normalized(const ComplexVector& v) {
        const double norm = v.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) throw InvalidInput("Combiner: cannot normalize a zero vector");
        return Combiner(v / norm);
    }
    static Combiner random(Eigen::Index m, Rng& rng) {
        ComplexVector v(m);
        for (Eigen::Index i = 0; i < m; ++i) v[i] = complex_normal(rng);
        return normalized(v);
    }

    const ComplexVector& weights() const { return w_; }
    Eigen::Index size() const { return w_.size(); }

private:
    ComplexVector w_;
};

struct CompositeChannels {
    ComplexVector ambient;      // h_A
    ComplexVector information;  // h_I = alpha * h_1
    ComplexVector combined;     // h_AI = h_A + h_I
};

// Effective source-to-tag gain h_TI^H Theta h_SI + h_ST.
inline Complex tag_received_gain(const ChannelRealization& ch, const IrsState& irs) {
    if (irs.size() != ch.reflectors()) throw ShapeError("tag_received_gain: IRS size mismatch");
    return ch.tag_irs.dot(irs.coefficients().cwiseProduct(ch.source_irs)) + ch.source_tag;
}

inline CompositeChannels composite_channels(const ChannelRealization& ch, const IrsState& irs, double alpha) {
    if (irs.size() != ch.reflectors()) throw ShapeError("composite_channels: IRS size mismatch");
    const ComplexVector& theta = irs.coefficients();
    CompositeChannels out;
    out.ambient = ch.irs_reader * theta.cwiseProduct(ch.source_irs) + ch.source_reader;
    const Complex tag_gain = tag_received_gain(ch, irs);
    out.information = alpha * tag_gain * (ch.irs_reader * theta.cwiseProduct(ch.tag_irs) + ch.tag_reader);
    out.combined = out.ambient + out.information;
    return out;
}

// Channels with the IRS removed from the scene entirely.
inline CompositeChannels composite_channels_without_irs(const ChannelRealization& ch, double alpha) {
    CompositeChannels out;
    out.ambient = ch.source_reader;
    out.information = alpha * ch.source_tag * ch.tag_reader;
    out.combined = out.ambient + out.information;
    return out;
}

struct EnergyStatistics {
    double mean0 = 0.0;
    double mean1 = 0.0;
    double var0 = 0.0;
    double var1 = 0.0;
};

inline EnergyStatistics energy_statistics(const CompositeChannels& comp, const Combiner& g,
                                          const SystemParameters& params, int samples) {
    if (samples < 2) throw InvalidInput("energy_statistics: need at least 2 samples per symbol");
    const auto& w = g.weights();
    EnergyStatistics s;
    s.mean0 = params.source_power_mw * std::norm(w.dot(comp.ambient)) + params.noise_power_mw;
    s.mean1 = params.source_power_mw * std::norm(w.dot(comp.combined)) + params.noise_power_mw;
    s.var0 = s.mean0 * s.mean0 / samples;
    s.var1 = s.mean1 * s.mean1 / samples;
    return s;
}

inline double grcd(double mean0, double mean1) {
    if (!(mean0 > 0.0) || !(mean1 > 0.0)) throw InvalidStatistics("grcd: symbol energies must be positive");
    return std::max(mean1 / mean0, mean0 / mean1);
}

// Exact GRCD of (Theta, g) given full channel knowledge.
inline double true_grcd(const CompositeChannels& comp, const Combiner& g, const SystemParameters& params) {
    const auto s = energy_statistics(comp, g, params, 2);
    return grcd(s.mean0, s.mean1);
}

inline double gaussian_q(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// Energy-detection bit error rate for a given GRCD and symbol length.
// GRCD == 1 returns exactly 0.5.
inline double ber_from_grcd(double grcd_value, double samples) {
    if (!(grcd_value >= 1.0)) throw InvalidInput("ber_from_grcd: GRCD must be >= 1");
    if (!(samples >= 1.0)) throw InvalidInput("ber_from_grcd: symbol length must be >= 1");
    const double excess = grcd_value - 1.0;
    if (excess == 0.0) return 0.5;
    // log(G)/(G-1) via log1p keeps the G -> 1 limit accurate.
    const double ratio = std::log1p(excess) / excess;
    const double root_l = std::sqrt(samples);
    const double upper = root_l * (grcd_value * ratio - 1.0);
    const double lower = root_l * (1.0 - ratio);
    return 0.5 * (gaussian_q(upper) + gaussian_q(lower));
}

struct SymbolSamples {
    ComplexMatrix raw;  // M x L received vectors y_R[l]
    RealVector energy;  // |g^H y_R[l]|^2
};

// Raw received vectors for one backscatter symbol: s ~ CN(0, P_S) per sample,
// noise CN(0, P_w I); `bit` selects h_A or h_AI.
inline ComplexMatrix draw_received_samples(const CompositeChannels& comp, const SystemParameters& params, int bit,
                                           int samples, Rng& rng) {
    if (bit != 0 && bit != 1) throw InvalidInput("draw_received_samples: bit must be 0 or 1");
    if (samples < 1) throw InvalidInput("draw_received_samples: need at least one sample");
    const ComplexVector& h = bit == 0 ? comp.ambient : comp.combined;
    const Eigen::Index m = h.size();
    ComplexMatrix y(m, samples);
    for (int l = 0; l < samples; ++l) {
        const Complex s = complex_normal(rng, params.source_power_mw);
        for (Eigen::Index i = 0; i < m; ++i) y(i, l) = h[i] * s + complex_normal(rng, params.noise_power_mw);
    }
    return y;
}

inline SymbolSamples simulate_symbol_samples(const CompositeChannels& comp, const Combiner& g,
                                             const SystemParameters& params, int bit, int samples, Rng& rng) {
    if (g.size() != comp.ambient.size()) throw ShapeError("simulate_symbol_samples: combiner size mismatch");
    SymbolSamples out;
    out.raw = draw_received_samples(comp, params, bit, samples, rng);
    out.energy = (g.weights().adjoint() * out.raw).cwiseAbs2().transpose();
    return out;
}

}  // namespace ambc
